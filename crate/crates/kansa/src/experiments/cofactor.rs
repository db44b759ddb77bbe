//! Determinant of the augmented matrix as a quadratic in one coupling.
//!
//! Append a probe point `P` to a system with interior points `P_1..P_n`.
//! The two entries tying `P` to `P_n` (positions `(n-1, n)` and `(n, n-1)`
//! in the augmented layout) hold the same value `x = lap_phi(|P_n - P|)`.
//! Treating `x` as a formal variable, the determinant is a quadratic
//! `q(x) = a x^2 + b x + q(0)` whose leading coefficient is minus the
//! determinant of the system with `P_n` removed. The check evaluates the
//! determinant at three override values, fits the quadratic exactly, and
//! compares both the leading coefficient and the value at the true `x`
//! against directly computed determinants.

use crate::error::{Error, Result};
use crate::geometry::{boundary_points, BoundaryStrategy, Domain, Point};
use crate::kernels::KernelSpec;
use crate::sampler::{sample_interior, Density, SeedSpec};
use crate::system::{assemble, sci17, KansaSystem};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Magnitudes below this make relative comparisons meaningless; such runs
/// are flagged inconclusive instead of passing or failing.
pub const UNDERFLOW_GUARD: f64 = 1e-280;

/// Outcome of one probe. `conclusive` is false when a reference
/// determinant sits below [`UNDERFLOW_GUARD`] or overflows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CofactorReport {
    pub n: usize,
    pub m: usize,
    /// Fitted coefficient of x^2.
    pub leading_coefficient: f64,
    /// Minus the determinant of the base system (the predicted leading
    /// coefficient).
    pub negated_base_determinant: f64,
    pub leading_rel_error: f64,
    /// Quadratic evaluated at the true coupling value.
    pub fit_at_probe: f64,
    /// Determinant of the untouched augmented matrix.
    pub determinant_at_probe: f64,
    pub value_rel_error: f64,
    pub conclusive: bool,
}

/// Fits the determinant quadratic for `full = base + one interior point`
/// and probe point `P`.
///
/// `base` must be `full` with its last interior point removed: same kernel,
/// same boundary set, same leading interior points. The probe must be
/// distinct from every collocation point.
pub fn cofactor_quadratic_check(
    base: &KansaSystem,
    full: &KansaSystem,
    probe: &Point,
) -> Result<CofactorReport> {
    let n = full.n();
    if n == 0 {
        return Err(Error::InvalidConfig(
            "the full system needs at least one interior point".into(),
        ));
    }
    if base.n() + 1 != n
        || base.spec() != full.spec()
        || base.boundary().points() != full.boundary().points()
        || base.interior() != &full.interior()[..n - 1]
    {
        return Err(Error::InvalidConfig(
            "base system must be the full system with its last interior point removed".into(),
        ));
    }
    if probe.dim() != full.dim() {
        return Err(Error::DimensionMismatch {
            expected: full.dim(),
            got: probe.dim(),
        });
    }
    let coincides = full
        .interior()
        .iter()
        .chain(full.boundary().points())
        .any(|center| center.distance(probe) == 0.0);
    if coincides {
        return Err(Error::InvalidPoint(
            "probe coincides with a collocation point".into(),
        ));
    }

    let augmented = full.augmented_matrix(probe)?;
    let x_true = augmented[(n - 1, n)];
    debug_assert_eq!(x_true, augmented[(n, n - 1)]);

    // Fit nodes {0, c, 2c}: commensurate with the interior-block entries.
    let c = full.spec().diagonal();
    let det_at = |x: f64| {
        let mut matrix = augmented.clone();
        matrix[(n - 1, n)] = x;
        matrix[(n, n - 1)] = x;
        matrix.determinant()
    };
    let q0 = det_at(0.0);
    let q1 = det_at(c);
    let q2 = det_at(2.0 * c);
    // Exact quadratic through three equispaced nodes.
    let a = (q2 - 2.0 * q1 + q0) / (2.0 * c * c);
    let b = (q1 - q0) / c - a * c;
    let fit_at_probe = (a * x_true + b) * x_true + q0;

    let base_det = base.matrix().clone().determinant();
    let determinant_at_probe = augmented.determinant();

    let conclusive = base_det.abs() > UNDERFLOW_GUARD
        && determinant_at_probe.abs() > UNDERFLOW_GUARD
        && [q0, q1, q2, base_det, determinant_at_probe]
            .iter()
            .all(|v| v.is_finite());
    let leading_rel_error = (a + base_det).abs() / base_det.abs();
    let value_rel_error = (fit_at_probe - determinant_at_probe).abs() / determinant_at_probe.abs();

    Ok(CofactorReport {
        n,
        m: full.m(),
        leading_coefficient: a,
        negated_base_determinant: -base_det,
        leading_rel_error,
        fit_at_probe,
        determinant_at_probe,
        value_rel_error,
        conclusive,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CofactorConfig {
    pub domain: Domain,
    pub density: Density,
    pub kernel: KernelSpec,
    /// Instance sizes are drawn uniformly from 1..=n_max and 1..=m_max.
    #[serde(default = "default_size_cap")]
    pub n_max: usize,
    #[serde(default = "default_size_cap")]
    pub m_max: usize,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_size_cap() -> usize {
    6
}

fn default_tolerance() -> f64 {
    1e-9
}

impl CofactorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.n_max == 0 || self.m_max == 0 {
            return Err(Error::InvalidConfig("n_max and m_max must be >= 1".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(
                "tolerance must be positive and finite".into(),
            ));
        }
        self.density.validate_for(&self.domain)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CofactorTrial {
    pub trial_id: u64,
    pub n: usize,
    pub m: usize,
    pub leading_rel_error: f64,
    pub value_rel_error: f64,
    pub conclusive: bool,
    pub pass: bool,
}

pub const COFACTOR_CSV_HEADER: &str =
    "trial_id,n,m,leading_rel_error,value_rel_error,conclusive,pass";

impl CofactorTrial {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.trial_id,
            self.n,
            self.m,
            sci17(self.leading_rel_error),
            sci17(self.value_rel_error),
            self.conclusive,
            self.pass,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CofactorOutput {
    pub config: CofactorConfig,
    pub trials: Vec<CofactorTrial>,
    pub max_leading_rel_error: f64,
    pub max_value_rel_error: f64,
    pub inconclusive_count: u64,
    pub all_pass: bool,
}

/// Random small instances: trial `t` draws sizes from stream `2t`, then
/// `n + 1` interior-distributed points (the last is the probe) from the
/// same stream, with the boundary set fixed by the deterministic equispaced
/// strategy. A trial passes when both relative errors meet the tolerance;
/// inconclusive trials (vanishing reference determinants) do not count as
/// failures but are tallied.
pub fn run_cofactor_suite(config: &CofactorConfig) -> Result<CofactorOutput> {
    config.validate()?;
    let mut trials = Vec::with_capacity(config.trials as usize);
    let mut max_leading = 0.0_f64;
    let mut max_value = 0.0_f64;
    let mut inconclusive = 0u64;
    let mut all_pass = true;
    for trial_id in 0..config.trials {
        let seed = SeedSpec::new(config.master_seed, 2 * trial_id);
        let mut rng = seed.rng();
        let n = rng.random_range(1..=config.n_max);
        let m = rng.random_range(1..=config.m_max);

        let boundary = boundary_points(&config.domain, m, &BoundaryStrategy::EquispacedArclength)?;
        let mut points = sample_interior(
            &config.domain,
            &config.density,
            n + 1,
            &seed.with_stream(2 * trial_id + 1),
        )?;
        let probe = points.pop().expect("n + 1 points were drawn");

        let full = assemble(points.clone(), boundary.clone(), config.kernel)?;
        points.pop();
        let base = assemble(points, boundary, config.kernel)?;

        let report = cofactor_quadratic_check(&base, &full, &probe)?;
        let pass = report.conclusive
            && report.leading_rel_error <= config.tolerance
            && report.value_rel_error <= config.tolerance;
        if report.conclusive {
            max_leading = max_leading.max(report.leading_rel_error);
            max_value = max_value.max(report.value_rel_error);
            all_pass &= pass;
        } else {
            inconclusive += 1;
        }
        trials.push(CofactorTrial {
            trial_id,
            n,
            m,
            leading_rel_error: report.leading_rel_error,
            value_rel_error: report.value_rel_error,
            conclusive: report.conclusive,
            pass,
        });
    }
    Ok(CofactorOutput {
        config: config.clone(),
        trials,
        max_leading_rel_error: max_leading,
        max_value_rel_error: max_value,
        inconclusive_count: inconclusive,
        all_pass,
    })
}
