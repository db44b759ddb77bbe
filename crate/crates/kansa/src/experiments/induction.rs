//! Induction chain: grow the system one random interior point at a time,
//! checking every intermediate matrix and the determinant identity between
//! "append the point and reassemble" and "augment the previous matrix".

use super::Counterexample;
use crate::error::{Error, Result};
use crate::geometry::{boundary_points, BoundaryStrategy, Domain};
use crate::kernels::KernelSpec;
use crate::sampler::{sample_interior, Density, SeedSpec};
use crate::system::{assemble, det_log_sign, sci17, SolveReport};
use serde::{Deserialize, Serialize};

/// The augmented and reassembled determinants are constructed from bitwise
/// identical matrices, so any gap above this is a real defect.
pub const DET_GAP_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InductionConfig {
    pub domain: Domain,
    pub density: Density,
    pub m: usize,
    #[serde(default)]
    pub boundary_strategy: BoundaryStrategy,
    pub kernel: KernelSpec,
    pub n_max: usize,
    pub master_seed: u64,
}

impl InductionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::InvalidConfig("n_max must be >= 1".into()));
        }
        if self.m == 0 {
            return Err(Error::InvalidConfig(
                "m must be >= 1: the collocation matrix needs at least one boundary row".into(),
            ));
        }
        self.density.validate_for(&self.domain)
    }
}

/// Diagnostics after the `n`-th point was added (`n = 0` is the
/// boundary-only base case).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InductionStep {
    pub n: usize,
    pub report: SolveReport,
    /// Relative determinant gap between reassembling with the new point and
    /// augmenting the previous matrix; absent at the base case. Infinite if
    /// the two determinants disagree in sign.
    pub det_gap: Option<f64>,
}

pub const INDUCTION_CSV_HEADER: &str =
    "n,log_abs_det,det_sign,sigma_min,sigma_max,condition,residual,singular,det_gap";

impl InductionStep {
    pub fn csv_row(&self) -> String {
        let r = &self.report;
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            r.log_abs_det.map_or("-inf".into(), sci17),
            r.det_sign,
            sci17(r.sigma_min),
            sci17(r.sigma_max),
            r.condition.map_or("inf".into(), sci17),
            r.residual_norm.map_or("nan".into(), sci17),
            r.singular_verdict,
            self.det_gap.map_or("nan".into(), sci17),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InductionOutput {
    pub config: InductionConfig,
    pub steps: Vec<InductionStep>,
    pub max_det_gap: Option<f64>,
    pub singular_steps: u64,
    pub counterexamples: Vec<Counterexample>,
}

/// Runs the chain: a fixed boundary set, then interior points
/// `P_1..P_{n_max}` drawn once from stream 0 and added one at a time. Every
/// step records full diagnostics (each intermediate system also solves the
/// unit-source problem, as the Monte Carlo campaign does); a singular step
/// dumps its complete point configuration.
pub fn induction_chain(config: &InductionConfig) -> Result<InductionOutput> {
    config.validate()?;
    let boundary = boundary_points(&config.domain, config.m, &config.boundary_strategy)?;
    let points = sample_interior(
        &config.domain,
        &config.density,
        config.n_max,
        &SeedSpec::new(config.master_seed, 0),
    )?;

    let mut steps = Vec::with_capacity(config.n_max + 1);
    let mut counterexamples = Vec::new();
    let mut previous = assemble(Vec::new(), boundary.clone(), config.kernel)?;

    let record = |n: usize,
                  system: &mut crate::system::KansaSystem,
                  det_gap: Option<f64>,
                  counterexamples: &mut Vec<Counterexample>|
     -> Result<InductionStep> {
        system.attach_rhs(|_| 1.0, |_| 0.0);
        let (_, report) = system.solve()?;
        if report.singular_verdict {
            counterexamples.push(Counterexample {
                trial_id: n as u64,
                kernel: config.kernel,
                interior: system.interior().to_vec(),
                boundary: system.boundary().points().to_vec(),
                report: report.clone(),
            });
        }
        Ok(InductionStep { n, report, det_gap })
    };

    steps.push(record(
        0,
        &mut previous.clone(),
        None,
        &mut counterexamples,
    )?);

    for (i, point) in points.iter().enumerate() {
        let augmented_det = det_log_sign(&previous.augmented_matrix(point)?);

        let mut interior = previous.interior().to_vec();
        interior.push(point.clone());
        let mut system = assemble(interior, boundary.clone(), config.kernel)?;
        let appended_det = det_log_sign(system.matrix());
        let gap = relative_det_gap(appended_det, augmented_det);

        steps.push(record(i + 1, &mut system, Some(gap), &mut counterexamples)?);
        previous = system;
    }

    let max_det_gap = steps
        .iter()
        .filter_map(|s| s.det_gap)
        .max_by(|a, b| a.partial_cmp(b).expect("gaps are comparable"));
    let singular_steps = steps.iter().filter(|s| s.report.singular_verdict).count() as u64;

    Ok(InductionOutput {
        config: config.clone(),
        steps,
        max_det_gap,
        singular_steps,
        counterexamples,
    })
}

/// `|det_b / det_a - 1|` computed in log space, for determinants given as
/// (sign, log magnitude). Sign disagreement is an infinite gap; two exact
/// zeros agree.
fn relative_det_gap(a: (i8, Option<f64>), b: (i8, Option<f64>)) -> f64 {
    match (a, b) {
        ((0, _), (0, _)) => 0.0,
        ((sa, Some(la)), (sb, Some(lb))) if sa == sb => ((lb - la).exp() - 1.0).abs(),
        _ => f64::INFINITY,
    }
}
