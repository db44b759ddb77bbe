//! Monte Carlo nonsingularity campaign: fixed boundary set, freshly sampled
//! interior points per trial, singularity verdict per trial.

use super::{five_point_quantiles, Counterexample, FailedTrial, TrialRecord};
use crate::error::{Error, Result};
use crate::geometry::{boundary_points, BoundaryStrategy, Domain};
use crate::kernels::KernelSpec;
use crate::sampler::{sample_interior, Density, SeedSpec};
use crate::system::assemble;
use serde::{Deserialize, Serialize};

/// One campaign cell: a fixed (domain, density, n, m, kernel) combination.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub domain: Domain,
    pub density: Density,
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub boundary_strategy: BoundaryStrategy,
    pub kernel: KernelSpec,
    pub trials: u64,
    pub master_seed: u64,
}

impl McConfig {
    /// Everything checkable without running a trial.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.m == 0 {
            return Err(Error::InvalidConfig(
                "m must be >= 1: the collocation matrix needs at least one boundary row".into(),
            ));
        }
        self.density.validate_for(&self.domain)
    }
}

/// Aggregate over all trials of one cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSummary {
    pub config: McConfig,
    pub trials: u64,
    pub singular_count: u64,
    pub failed: Vec<FailedTrial>,
    pub min_sigma_min: Option<f64>,
    /// Quantiles (0, 1/4, 1/2, 3/4, 1) over finite per-trial values.
    pub log_abs_det_quantiles: Vec<f64>,
    pub condition_quantiles: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct McOutput {
    pub summary: McSummary,
    pub records: Vec<TrialRecord>,
    pub counterexamples: Vec<Counterexample>,
}

/// Runs the campaign cell. The boundary set is generated once (the strategy
/// is deterministic); trial `t` samples its interior points from stream `t`
/// of the master seed. Each trial solves the unit-source problem (`f = 1`,
/// `g = 0`) so the residual column reflects a live solve rather than a
/// placeholder. Trials whose sampling or assembly fails are recorded in the
/// summary, never dropped.
pub fn monte_carlo_unisolvence(config: &McConfig) -> Result<McOutput> {
    config.validate()?;
    let boundary = boundary_points(&config.domain, config.m, &config.boundary_strategy)?;

    let mut records = Vec::with_capacity(config.trials as usize);
    let mut counterexamples = Vec::new();
    let mut failed = Vec::new();
    for trial_id in 0..config.trials {
        let seed = SeedSpec::new(config.master_seed, trial_id);
        let outcome = (|| -> Result<TrialRecord> {
            let interior = sample_interior(&config.domain, &config.density, config.n, &seed)?;
            let mut system = assemble(interior, boundary.clone(), config.kernel)?;
            system.attach_rhs(|_| 1.0, |_| 0.0);
            let (_, report) = system.solve()?;
            if report.singular_verdict {
                counterexamples.push(Counterexample {
                    trial_id,
                    kernel: config.kernel,
                    interior: system.interior().to_vec(),
                    boundary: system.boundary().points().to_vec(),
                    report: report.clone(),
                });
            }
            Ok(TrialRecord {
                trial_id,
                n: config.n,
                m: config.m,
                kernel: config.kernel,
                seed,
                report,
            })
        })();
        match outcome {
            Ok(record) => records.push(record),
            Err(e) => failed.push(FailedTrial {
                trial_id,
                error: e.to_string(),
            }),
        }
    }

    let singular_count = records.iter().filter(|r| r.report.singular_verdict).count() as u64;
    let min_sigma_min = records
        .iter()
        .map(|r| r.report.sigma_min)
        .min_by(|a, b| a.partial_cmp(b).expect("sigma_min is finite"));
    let log_dets: Vec<f64> = records
        .iter()
        .filter_map(|r| r.report.log_abs_det)
        .collect();
    let conditions: Vec<f64> = records.iter().filter_map(|r| r.report.condition).collect();

    Ok(McOutput {
        summary: McSummary {
            config: config.clone(),
            trials: config.trials,
            singular_count,
            failed,
            min_sigma_min,
            log_abs_det_quantiles: five_point_quantiles(&log_dets),
            condition_quantiles: five_point_quantiles(&conditions),
        },
        records,
        counterexamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelKind;

    fn base_config() -> McConfig {
        McConfig {
            domain: Domain::cube(2, 8.0).unwrap(),
            density: Density::uniform(),
            n: 8,
            m: 4,
            boundary_strategy: BoundaryStrategy::EquispacedArclength,
            kernel: KernelSpec::mq(1.0).unwrap(),
            trials: 10,
            master_seed: 0x1234,
        }
    }

    #[test]
    fn produces_one_record_per_trial() {
        let out = monte_carlo_unisolvence(&base_config()).unwrap();
        assert_eq!(out.records.len(), 10);
        assert_eq!(out.summary.trials, 10);
        assert_eq!(out.summary.singular_count, 0);
        assert!(out.summary.failed.is_empty());
        assert!(out.counterexamples.is_empty());
        assert_eq!(out.summary.log_abs_det_quantiles.len(), 5);
        assert!(out.summary.min_sigma_min.unwrap() > 0.0);
        for r in &out.records {
            assert!(!r.report.singular_verdict);
            assert!(r.report.residual_norm.is_some());
        }
    }

    #[test]
    fn boundary_only_cell_is_never_singular() {
        let mut config = base_config();
        config.n = 0;
        config.m = 16;
        config.kernel = KernelSpec::new(KernelKind::Imq, 1.0).unwrap();
        let out = monte_carlo_unisolvence(&config).unwrap();
        assert_eq!(out.summary.singular_count, 0);
    }

    #[test]
    fn is_deterministic() {
        let a = monte_carlo_unisolvence(&base_config()).unwrap();
        let b = monte_carlo_unisolvence(&base_config()).unwrap();
        assert_eq!(a.records, b.records);
        let rows_a: Vec<String> = a.records.iter().map(|r| r.csv_row()).collect();
        let rows_b: Vec<String> = b.records.iter().map(|r| r.csv_row()).collect();
        assert_eq!(rows_a, rows_b);
    }

    #[test]
    fn trials_differ_across_streams() {
        let out = monte_carlo_unisolvence(&base_config()).unwrap();
        let first = &out.records[0].report;
        assert!(out
            .records
            .iter()
            .skip(1)
            .any(|r| r.report.log_abs_det != first.log_abs_det));
    }

    /// A deliberately flat-kernel cell on the unit square is numerically
    /// singular by the condition-number verdict; the campaign must archive
    /// such trials rather than hide them.
    #[test]
    fn singular_trials_are_archived() {
        let config = McConfig {
            domain: Domain::unit_square(),
            density: Density::uniform(),
            n: 48,
            m: 24,
            boundary_strategy: BoundaryStrategy::EquispacedArclength,
            kernel: KernelSpec::mq(0.05).unwrap(),
            trials: 2,
            master_seed: 7,
        };
        let out = monte_carlo_unisolvence(&config).unwrap();
        assert_eq!(out.summary.singular_count, 2);
        assert_eq!(out.counterexamples.len(), 2);
        let ce = &out.counterexamples[0];
        assert_eq!(ce.interior.len(), 48);
        assert_eq!(ce.boundary.len(), 24);
        assert!(ce.report.singular_verdict);
    }

    #[test]
    fn zero_trials_rejected() {
        let mut config = base_config();
        config.trials = 0;
        assert!(monte_carlo_unisolvence(&config).is_err());
    }
}
