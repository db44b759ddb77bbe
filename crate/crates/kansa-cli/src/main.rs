//! Batch entry point: parse a JSON config, dispatch one experiment or
//! solve, emit machine-readable CSV/JSON outputs.
//!
//! `kansa <command> <config.json> [--set key=value]... [--out dir] [--seed u64]`
//!
//! Configs are strict JSON: the `"command"` key must name the invoked
//! subcommand, and unknown keys anywhere are rejected rather than ignored.
//! `--set` overrides are applied after the file parses and are echoed into
//! the JSON outputs through the config block, so an output file always
//! records the exact configuration that produced it.
//!
//! Exit codes: 0 success, 2 validation error, 3 experiment-detected
//! anomaly (a result the run itself flags as suspect), 4 I/O failure.

use clap::{Args, Parser, Subcommand};
use kansa::experiments::{
    complex_probe, convergence_study, induction_chain, monte_carlo_unisolvence, run_cofactor_suite,
    CofactorConfig, ConvergenceConfig, InductionConfig, ManufacturedCase, McConfig, ProbeConfig,
    COFACTOR_CSV_HEADER, CONVERGENCE_CSV_HEADER, DET_GAP_RTOL, INDUCTION_CSV_HEADER,
    TRIAL_CSV_HEADER,
};
use kansa::system::{matrix_to_csv, sci17};
use kansa::{
    assemble, assemble_rhs, boundary_points, sample_interior, BoundaryStrategy, Density, Domain,
    Error, KernelSpec, Point, SeedSpec,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "kansa", version, about = "Kansa collocation experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble and solve one collocation system
    Solve(RunArgs),
    /// Assemble a system and dump its matrix (and rhs) without solving
    AssembleDump(RunArgs),
    /// Monte Carlo nonsingularity campaign over random interior sets
    McUnisolvence(RunArgs),
    /// Grow a system one point at a time, checking the determinant identity
    InductionChain(RunArgs),
    /// Cofactor-expansion quadratic identity on random small instances
    CofactorCheck(RunArgs),
    /// Branch-point approach: pole orders and cross-term boundedness
    ComplexProbe(RunArgs),
    /// Manufactured-solution refinement study
    Convergence(RunArgs),
    /// Check a config without running it; diagnostics are the output
    Validate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config; its "command" key must name this subcommand
    config: PathBuf,
    /// Override a config entry, e.g. --set kernel.epsilon=2.0
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Directory for output files
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Shorthand for --set master_seed=<u64>
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Validation(String),
    Anomaly(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Anomaly(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Anomaly(m) | Failure::Io(m) => m,
        }
    }
}

/// Library errors during execution are config-semantics problems except for
/// pathological sampling, which the run itself detects.
fn run_failure(e: Error) -> Failure {
    match e {
        Error::PathologicalSampling { .. } => Failure::Anomaly(e.to_string()),
        _ => Failure::Validation(e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate(args) => {
            let value = load_config(&args, None)?;
            let declared = command_key(&value)?;
            match preflight(&declared, value) {
                Ok(_) => {
                    println!("ok: config is runnable as {declared:?}");
                    Ok(())
                }
                Err(f) => {
                    println!("{}", f.message());
                    Err(Failure::Validation("1 diagnostic".into()))
                }
            }
        }
        Command::Solve(args) => run_command("solve", args),
        Command::AssembleDump(args) => run_command("assemble-dump", args),
        Command::McUnisolvence(args) => run_command("mc-unisolvence", args),
        Command::InductionChain(args) => run_command("induction-chain", args),
        Command::CofactorCheck(args) => run_command("cofactor-check", args),
        Command::ComplexProbe(args) => run_command("complex-probe", args),
        Command::Convergence(args) => run_command("convergence", args),
    }
}

fn run_command(name: &str, args: RunArgs) -> Result<(), Failure> {
    let value = load_config(&args, Some(name))?;
    let job = preflight(name, value)?;
    execute(job, &args.out)
}

/// Reads the config file, checks the declared command, applies `--set`
/// overrides and `--seed`, and returns the merged JSON value with the
/// `"command"` key removed.
fn load_config(args: &RunArgs, expect: Option<&str>) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", args.config.display())))?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Validation(format!("{}: {e}", args.config.display())))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Failure::Validation("config root must be a JSON object".into()))?;
    if let Some(name) = expect {
        let declared = match obj.get("command") {
            Some(Value::String(c)) => c.clone(),
            Some(_) => return Err(Failure::Validation("\"command\" must be a string".into())),
            None => return Err(Failure::Validation("config is missing \"command\"".into())),
        };
        if declared != name {
            return Err(Failure::Validation(format!(
                "config declares command {declared:?} but was invoked as {name:?}"
            )));
        }
    }
    for kv in &args.set {
        apply_override(obj, kv)?;
    }
    if let Some(seed) = args.seed {
        obj.insert("master_seed".into(), seed.into());
    }
    Ok(value)
}

/// `--set a.b.c=value`: the value is parsed as JSON when possible and kept
/// as a string otherwise, so `--set trials=50` and `--set density.kind=uniform`
/// both do the expected thing.
fn apply_override(root: &mut serde_json::Map<String, Value>, kv: &str) -> Result<(), Failure> {
    let (path, raw) = kv
        .split_once('=')
        .ok_or_else(|| Failure::Validation(format!("--set expects key=value, got {kv:?}")))?;
    let parsed: Value =
        serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut segments: Vec<&str> = path.split('.').collect();
    let last = segments.pop().expect("split yields at least one segment");
    let mut cursor = root;
    for seg in segments {
        cursor = cursor
            .entry(seg.to_string())
            .or_insert_with(|| Value::Object(Default::default()))
            .as_object_mut()
            .ok_or_else(|| {
                Failure::Validation(format!("--set path {path:?}: {seg:?} is not an object"))
            })?;
    }
    cursor.insert(last.to_string(), parsed);
    Ok(())
}

fn command_key(value: &Value) -> Result<String, Failure> {
    match value.get("command") {
        Some(Value::String(c)) => Ok(c.clone()),
        Some(_) => Err(Failure::Validation("\"command\" must be a string".into())),
        None => Err(Failure::Validation("config is missing \"command\"".into())),
    }
}

enum Job {
    Solve(SolveConfig),
    AssembleDump(AssembleConfig),
    Mc(McConfig),
    Induction(InductionConfig),
    Cofactor(CofactorConfig),
    Probe(ProbeConfig),
    Convergence(ConvergenceConfig),
}

/// Typed parse plus the full pre-execution validation of the named command,
/// shared verbatim by `validate` and the run path: a config that passes
/// here cannot fail validation mid-run.
fn preflight(command: &str, mut value: Value) -> Result<Job, Failure> {
    if let Some(obj) = value.as_object_mut() {
        obj.remove("command");
    }
    let invalid = |e: serde_json::Error| Failure::Validation(e.to_string());
    let job = match command {
        "solve" => Job::Solve(serde_json::from_value(value).map_err(invalid)?),
        "assemble-dump" => Job::AssembleDump(serde_json::from_value(value).map_err(invalid)?),
        "mc-unisolvence" => Job::Mc(serde_json::from_value(value).map_err(invalid)?),
        "induction-chain" => Job::Induction(serde_json::from_value(value).map_err(invalid)?),
        "cofactor-check" => Job::Cofactor(serde_json::from_value(value).map_err(invalid)?),
        "complex-probe" => Job::Probe(serde_json::from_value(value).map_err(invalid)?),
        "convergence" => Job::Convergence(serde_json::from_value(value).map_err(invalid)?),
        other => {
            return Err(Failure::Validation(format!("unknown command {other:?}")));
        }
    };
    match &job {
        Job::Solve(c) => c.validate(),
        Job::AssembleDump(c) => c.validate(),
        Job::Mc(c) => c.validate(),
        Job::Induction(c) => c.validate(),
        Job::Cofactor(c) => c.validate(),
        Job::Probe(c) => c.validate(),
        Job::Convergence(c) => c.validate(),
    }
    .map_err(|e| Failure::Validation(e.to_string()))?;
    Ok(job)
}

fn execute(job: Job, out: &Path) -> Result<(), Failure> {
    match job {
        Job::Solve(config) => run_solve(config, out),
        Job::AssembleDump(config) => run_assemble_dump(config, out),
        Job::Mc(config) => {
            let output = monte_carlo_unisolvence(&config).map_err(run_failure)?;
            let mut csv = String::from(TRIAL_CSV_HEADER);
            csv.push('\n');
            for record in &output.records {
                csv.push_str(&record.csv_row());
                csv.push('\n');
            }
            write_file(out, "trials.csv", &csv)?;
            write_file(out, "summary.json", &pretty(&output.summary)?)?;
            write_file(
                out,
                "counterexamples.json",
                &pretty(&output.counterexamples)?,
            )?;
            let s = &output.summary;
            if s.singular_count > 0 || !s.failed.is_empty() {
                return Err(Failure::Anomaly(format!(
                    "{} singular verdict(s), {} failed trial(s); see counterexamples.json",
                    s.singular_count,
                    s.failed.len()
                )));
            }
            Ok(())
        }
        Job::Induction(config) => {
            let output = induction_chain(&config).map_err(run_failure)?;
            let mut csv = String::from(INDUCTION_CSV_HEADER);
            csv.push('\n');
            for step in &output.steps {
                csv.push_str(&step.csv_row());
                csv.push('\n');
            }
            write_file(out, "induction.csv", &csv)?;
            write_file(out, "summary.json", &pretty(&output)?)?;
            if output.singular_steps > 0 {
                return Err(Failure::Anomaly(format!(
                    "{} singular step(s) in the chain",
                    output.singular_steps
                )));
            }
            if output.max_det_gap.is_none_or(|g| g > DET_GAP_RTOL) {
                return Err(Failure::Anomaly(format!(
                    "append-vs-augment determinant gap {:?} exceeds {DET_GAP_RTOL:e}",
                    output.max_det_gap
                )));
            }
            Ok(())
        }
        Job::Cofactor(config) => {
            let output = run_cofactor_suite(&config).map_err(run_failure)?;
            let mut csv = String::from(COFACTOR_CSV_HEADER);
            csv.push('\n');
            for trial in &output.trials {
                csv.push_str(&trial.csv_row());
                csv.push('\n');
            }
            write_file(out, "cofactor.csv", &csv)?;
            write_file(out, "summary.json", &pretty(&output)?)?;
            if !output.all_pass {
                return Err(Failure::Anomaly(format!(
                    "cofactor identity failed: max leading error {:e}, max value error {:e}",
                    output.max_leading_rel_error, output.max_value_rel_error
                )));
            }
            Ok(())
        }
        Job::Probe(config) => {
            let output = complex_probe(&config).map_err(run_failure)?;
            write_file(out, "probe.json", &pretty(&output)?)?;
            if !output.pass {
                return Err(Failure::Anomaly(format!(
                    "branch-point probe failed: limit {:.17e} vs expected {:.17e}",
                    output.limit_estimate, output.expected_limit
                )));
            }
            Ok(())
        }
        Job::Convergence(config) => {
            let output = convergence_study(&config).map_err(run_failure)?;
            let mut csv = String::from(CONVERGENCE_CSV_HEADER);
            csv.push('\n');
            for row in &output.rows {
                csv.push_str(&row.csv_row());
                csv.push('\n');
            }
            write_file(out, "convergence.csv", &csv)?;
            write_file(out, "summary.json", &pretty(&output)?)?;
            if let Some(row) = output.rows.iter().find(|r| r.singular) {
                return Err(Failure::Anomaly(format!(
                    "level {} (n = {}, m = {}) was judged singular",
                    row.level, row.n, row.m
                )));
            }
            if output.endpoint_improved != Some(true) {
                return Err(Failure::Anomaly(
                    "finest level did not improve on the coarsest".into(),
                ));
            }
            Ok(())
        }
    }
}

/// Right-hand side of a solve: a manufactured case (forcing and trace of a
/// known solution) or plain constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RhsSpec {
    Case(ManufacturedCase),
    Constant { f: f64, g: f64 },
}

impl RhsSpec {
    fn f(&self, p: &Point) -> f64 {
        match self {
            RhsSpec::Case(case) => case.forcing(p),
            RhsSpec::Constant { f, .. } => *f,
        }
    }

    fn g(&self, q: &Point) -> f64 {
        match self {
            RhsSpec::Case(case) => case.solution(q),
            RhsSpec::Constant { g, .. } => *g,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveConfig {
    domain: Domain,
    density: Density,
    kernel: KernelSpec,
    n: usize,
    m: usize,
    master_seed: u64,
    #[serde(default)]
    boundary_strategy: BoundaryStrategy,
    rhs: RhsSpec,
}

impl SolveConfig {
    fn validate(&self) -> kansa::Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidConfig(
                "m must be >= 1: the collocation matrix needs at least one boundary row".into(),
            ));
        }
        if matches!(self.rhs, RhsSpec::Case(_)) && self.domain.dim() != 2 {
            return Err(Error::InvalidConfig(
                "manufactured cases are planar; use a constant rhs instead".into(),
            ));
        }
        self.density.validate_for(&self.domain)
    }
}

fn run_solve(config: SolveConfig, out: &Path) -> Result<(), Failure> {
    let (system, report, coefficients) = {
        let interior = sample_interior(
            &config.domain,
            &config.density,
            config.n,
            &SeedSpec::new(config.master_seed, 0),
        )
        .map_err(run_failure)?;
        let boundary = boundary_points(&config.domain, config.m, &config.boundary_strategy)
            .map_err(run_failure)?;
        let mut system = assemble(interior, boundary, config.kernel).map_err(run_failure)?;
        let rhs = assemble_rhs(
            system.interior(),
            system.boundary(),
            |p| config.rhs.f(p),
            |q| config.rhs.g(q),
        );
        system.set_rhs(rhs).map_err(run_failure)?;
        let (coefficients, report) = system.solve().map_err(run_failure)?;
        (system, report, coefficients)
    };

    let report_doc = serde_json::json!({
        "config": config,
        "n": system.n(),
        "m": system.m(),
        "report": report,
    });
    write_file(out, "report.json", &pretty(&report_doc)?)?;
    if let Some(c) = &coefficients {
        let mut csv = String::with_capacity(c.len() * 24);
        for v in c.iter() {
            csv.push_str(&sci17(*v));
            csv.push('\n');
        }
        write_file(out, "coefficients.csv", &csv)?;
    }
    if report.singular_verdict {
        return Err(Failure::Anomaly(
            "collocation matrix judged singular; no coefficients written".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssembleConfig {
    domain: Domain,
    density: Density,
    kernel: KernelSpec,
    n: usize,
    m: usize,
    master_seed: u64,
    #[serde(default)]
    boundary_strategy: BoundaryStrategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rhs: Option<RhsSpec>,
}

impl AssembleConfig {
    fn validate(&self) -> kansa::Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidConfig(
                "m must be >= 1: the collocation matrix needs at least one boundary row".into(),
            ));
        }
        if matches!(self.rhs, Some(RhsSpec::Case(_))) && self.domain.dim() != 2 {
            return Err(Error::InvalidConfig(
                "manufactured cases are planar; use a constant rhs instead".into(),
            ));
        }
        self.density.validate_for(&self.domain)
    }
}

fn run_assemble_dump(config: AssembleConfig, out: &Path) -> Result<(), Failure> {
    let interior = sample_interior(
        &config.domain,
        &config.density,
        config.n,
        &SeedSpec::new(config.master_seed, 0),
    )
    .map_err(run_failure)?;
    let boundary = boundary_points(&config.domain, config.m, &config.boundary_strategy)
        .map_err(run_failure)?;
    let system = assemble(interior, boundary, config.kernel).map_err(run_failure)?;
    write_file(out, "matrix.csv", &matrix_to_csv(system.matrix()))?;
    if let Some(rhs) = &config.rhs {
        let b = assemble_rhs(
            system.interior(),
            system.boundary(),
            |p| rhs.f(p),
            |q| rhs.g(q),
        );
        let mut csv = String::with_capacity(b.len() * 24);
        for v in b.iter() {
            csv.push_str(&sci17(*v));
            csv.push('\n');
        }
        write_file(out, "rhs.csv", &csv)?;
    }
    Ok(())
}

fn pretty<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Io(format!("cannot serialize output: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}
