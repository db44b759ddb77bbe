//! Verification campaigns: each submodule turns one aspect of the
//! almost-sure nonsingularity property into a reproducible numerical check.
//!
//! - [`monte_carlo`]: singularity verdicts over random point configurations;
//! - [`induction`]: one-point-at-a-time growth of the system, checking every
//!   intermediate matrix and the append-vs-augment determinant identity;
//! - [`cofactor`]: the determinant of the augmented matrix as an explicit
//!   quadratic in the new point's self-coupling entry;
//! - [`probe`]: complex-line approach to the kernel branch points, pole
//!   orders, and boundedness of all cross terms;
//! - [`convergence`]: end-to-end solves against manufactured solutions.
//!
//! All campaigns derive per-trial randomness as `(master_seed, trial_id)`
//! streams, so outputs are byte-reproducible; timing data is deliberately
//! kept out of every record.

pub mod cofactor;
pub mod convergence;
pub mod induction;
pub mod monte_carlo;
pub mod probe;

pub use cofactor::{
    cofactor_quadratic_check, run_cofactor_suite, CofactorConfig, CofactorOutput, CofactorReport,
    CofactorTrial, COFACTOR_CSV_HEADER,
};
pub use convergence::{
    convergence_study, ConvergenceConfig, ConvergenceOutput, ConvergenceRow, ManufacturedCase,
    CONVERGENCE_CSV_HEADER,
};
pub use induction::{
    induction_chain, InductionConfig, InductionOutput, InductionStep, DET_GAP_RTOL,
    INDUCTION_CSV_HEADER,
};
pub use monte_carlo::{monte_carlo_unisolvence, McConfig, McOutput, McSummary};
pub use probe::{complex_probe, ProbeConfig, ProbeOutput};

use crate::geometry::Point;
use crate::kernels::KernelSpec;
use crate::sampler::SeedSpec;
use crate::system::{sci17, SolveReport};
use serde::{Deserialize, Serialize};

/// Diagnostics of a single randomized trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub n: usize,
    pub m: usize,
    pub kernel: KernelSpec,
    pub seed: SeedSpec,
    pub report: SolveReport,
}

/// Column header matching [`TrialRecord::csv_row`].
pub const TRIAL_CSV_HEADER: &str =
    "trial_id,n,m,kind,epsilon,log_abs_det,det_sign,sigma_min,sigma_max,condition,residual,singular";

impl TrialRecord {
    /// One CSV line; infinite/undefined diagnostics render as `-inf`,
    /// `inf`, and `nan` so the column count never varies.
    pub fn csv_row(&self) -> String {
        let r = &self.report;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.trial_id,
            self.n,
            self.m,
            self.kernel.kind(),
            sci17(self.kernel.epsilon()),
            r.log_abs_det.map_or("-inf".into(), sci17),
            r.det_sign,
            sci17(r.sigma_min),
            sci17(r.sigma_max),
            r.condition.map_or("inf".into(), sci17),
            r.residual_norm.map_or("nan".into(), sci17),
            r.singular_verdict,
        )
    }
}

/// A trial that could not produce diagnostics (sampling or assembly error);
/// kept in summaries so failures are never dropped silently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailedTrial {
    pub trial_id: u64,
    pub error: String,
}

/// Full point dump of a trial whose matrix was judged singular. Whether
/// such a dump is an exact-arithmetic counterexample or a conditioning
/// artifact is left to inspection; the verdict alone cannot distinguish
/// the two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Counterexample {
    pub trial_id: u64,
    pub kernel: KernelSpec,
    pub interior: Vec<Point>,
    pub boundary: Vec<Point>,
    pub report: SolveReport,
}

/// Linear-interpolation quantiles at probabilities 0, 1/4, 1/2, 3/4, 1.
/// Non-finite inputs are dropped; an empty input yields an empty vector.
pub fn five_point_quantiles(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return Vec::new();
    }
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&q| {
            let pos = q * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            if lo == hi {
                v[lo]
            } else {
                v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
            }
        })
        .collect()
}
