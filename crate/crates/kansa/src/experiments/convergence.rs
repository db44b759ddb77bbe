//! Convergence study on manufactured solutions.
//!
//! For a known planar solution `u` the collocation problem is fed its exact
//! forcing `f = lap u` and trace `g = u`, then solved on a schedule of
//! growing center counts. Each level reports the maximum pointwise error of
//! the reconstructed solution over an interior evaluation grid, together
//! with the solve diagnostics, so error decay can be read against the
//! conditioning growth that shape parameters like eps = 1 produce.

use crate::error::{Error, Result};
use crate::geometry::{boundary_points, BoundaryStrategy, Domain, Point};
use crate::kernels::KernelSpec;
use crate::sampler::{sample_interior, Density, SeedSpec};
use crate::system::{assemble, assemble_rhs, evaluate_solution};
use serde::{Deserialize, Serialize};

/// Closed-form planar test solutions with their Poisson forcings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManufacturedCase {
    /// u = x^2 - y^2, harmonic: f = 0.
    Harmonic,
    /// u = x^2 + y^2: f = 4.
    Quadratic,
    /// u = sin(pi x) sinh(pi y), harmonic: f = 0.
    SinSinh,
}

impl ManufacturedCase {
    pub fn solution(&self, p: &Point) -> f64 {
        let c = p.coords();
        let (x, y) = (c[0], c[1]);
        match self {
            ManufacturedCase::Harmonic => x * x - y * y,
            ManufacturedCase::Quadratic => x * x + y * y,
            ManufacturedCase::SinSinh => {
                (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sinh()
            }
        }
    }

    pub fn forcing(&self, _p: &Point) -> f64 {
        match self {
            ManufacturedCase::Quadratic => 4.0,
            ManufacturedCase::Harmonic | ManufacturedCase::SinSinh => 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub domain: Domain,
    pub density: Density,
    pub kernel: KernelSpec,
    pub case: ManufacturedCase,
    /// (interior count, boundary count) per refinement level.
    pub schedule: Vec<(usize, usize)>,
    pub master_seed: u64,
    #[serde(default)]
    pub boundary_strategy: BoundaryStrategy,
    /// Evaluation lattice resolution per axis (cell-centered, then filtered
    /// to interior points).
    #[serde(default = "default_eval_grid")]
    pub eval_grid: usize,
}

fn default_eval_grid() -> usize {
    20
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.domain.dim() != 2 {
            return Err(Error::InvalidDomain(format!(
                "manufactured cases are planar, domain has dimension {}",
                self.domain.dim()
            )));
        }
        if self.schedule.is_empty() {
            return Err(Error::InvalidConfig("schedule must be nonempty".into()));
        }
        if self.schedule.iter().any(|&(_, m)| m == 0) {
            return Err(Error::InvalidConfig(
                "m must be >= 1 at every level: the collocation matrix needs at least one boundary row"
                    .into(),
            ));
        }
        if self.eval_grid == 0 {
            return Err(Error::InvalidConfig("eval_grid must be >= 1".into()));
        }
        self.density.validate_for(&self.domain)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceRow {
    pub level: usize,
    pub n: usize,
    pub m: usize,
    pub size: usize,
    pub max_error: Option<f64>,
    pub condition: Option<f64>,
    pub residual_norm: Option<f64>,
    pub singular: bool,
}

pub const CONVERGENCE_CSV_HEADER: &str =
    "level,n,m,size,max_error,condition,residual_norm,singular";

impl ConvergenceRow {
    pub fn csv_row(&self) -> String {
        let sci = |v: Option<f64>| match v {
            Some(x) => crate::system::sci17(x),
            None => "nan".to_string(),
        };
        format!(
            "{},{},{},{},{},{},{},{}",
            self.level,
            self.n,
            self.m,
            self.size,
            sci(self.max_error),
            sci(self.condition),
            sci(self.residual_norm),
            self.singular,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceOutput {
    pub config: ConvergenceConfig,
    pub rows: Vec<ConvergenceRow>,
    /// Whether the finest level beat the coarsest; None if either failed.
    pub endpoint_improved: Option<bool>,
}

pub fn convergence_study(config: &ConvergenceConfig) -> Result<ConvergenceOutput> {
    config.validate()?;
    let domain = &config.domain;
    let grid = evaluation_grid(domain, config.eval_grid);
    let case = config.case;
    let mut rows = Vec::with_capacity(config.schedule.len());
    for (level, &(n, m)) in config.schedule.iter().enumerate() {
        // Stream per level keeps coarse levels unchanged when the schedule
        // is extended.
        let seed = SeedSpec::new(config.master_seed, level as u64);
        let interior = sample_interior(domain, &config.density, n, &seed)?;
        let boundary = boundary_points(domain, m, &config.boundary_strategy)?;
        let mut system = assemble(interior, boundary, config.kernel)?;
        let rhs = assemble_rhs(
            system.interior(),
            system.boundary(),
            |p| case.forcing(p),
            |q| case.solution(q),
        );
        system.set_rhs(rhs)?;
        let (coefficients, report) = system.solve()?;

        let max_error = coefficients.as_ref().map(|coeffs| {
            grid.iter()
                .map(|p| {
                    let approx = evaluate_solution(
                        coeffs.as_slice(),
                        system.interior(),
                        system.boundary(),
                        system.spec(),
                        p,
                    )
                    .expect("grid points share the system dimension");
                    (approx - case.solution(p)).abs()
                })
                .fold(0.0, f64::max)
        });
        rows.push(ConvergenceRow {
            level,
            n,
            m,
            size: n + m,
            max_error,
            condition: report.condition,
            residual_norm: report.residual_norm,
            singular: report.singular_verdict,
        });
    }

    let endpoint_improved = match (
        rows.first().and_then(|r| r.max_error),
        rows.last().and_then(|r| r.max_error),
    ) {
        (Some(coarse), Some(fine)) => Some(fine < coarse),
        _ => None,
    };

    Ok(ConvergenceOutput {
        config: config.clone(),
        rows,
        endpoint_improved,
    })
}

/// Cell-centered lattice over the bounding box, restricted to the interior.
fn evaluation_grid(domain: &Domain, per_axis: usize) -> Vec<Point> {
    let (lo, hi) = domain.bounding_box();
    let mut grid = Vec::new();
    let mut index = vec![0usize; domain.dim()];
    loop {
        let coords: Vec<f64> = index
            .iter()
            .zip(lo.iter().zip(&hi))
            .map(|(&i, (&a, &b))| a + (b - a) * (i as f64 + 0.5) / per_axis as f64)
            .collect();
        let p = Point::new(coords).expect("finite lattice coordinates");
        if domain
            .contains_interior(&p)
            .expect("lattice point has the domain dimension")
        {
            grid.push(p);
        }
        let mut axis = 0;
        loop {
            if axis == index.len() {
                return grid;
            }
            index[axis] += 1;
            if index[axis] < per_axis {
                break;
            }
            index[axis] = 0;
            axis += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::Density;

    fn study(case: ManufacturedCase) -> ConvergenceConfig {
        ConvergenceConfig {
            domain: Domain::unit_square(),
            density: Density::uniform(),
            kernel: KernelSpec::mq(1.0).unwrap(),
            case,
            schedule: vec![(5, 8), (20, 16), (60, 24)],
            master_seed: 11,
            boundary_strategy: BoundaryStrategy::default(),
            eval_grid: 10,
        }
    }

    #[test]
    fn quadratic_case_error_shrinks() {
        let out = convergence_study(&study(ManufacturedCase::Quadratic)).unwrap();
        assert_eq!(out.rows.len(), 3);
        for row in &out.rows {
            assert!(!row.singular);
            assert!(row.max_error.is_some());
        }
        assert_eq!(out.endpoint_improved, Some(true));
        let coarse = out.rows[0].max_error.unwrap();
        let fine = out.rows[2].max_error.unwrap();
        assert!(fine < coarse / 10.0, "coarse {coarse:e}, fine {fine:e}");
    }

    #[test]
    fn harmonic_cases_improve() {
        for case in [ManufacturedCase::Harmonic, ManufacturedCase::SinSinh] {
            let out = convergence_study(&study(case)).unwrap();
            assert_eq!(out.endpoint_improved, Some(true), "{case:?}");
        }
    }

    #[test]
    fn planar_only() {
        let mut cfg = study(ManufacturedCase::Quadratic);
        cfg.domain = Domain::cube(3, 1.0).unwrap();
        assert!(matches!(
            convergence_study(&cfg),
            Err(Error::InvalidDomain(_))
        ));
    }

    #[test]
    fn empty_schedule_rejected() {
        let mut cfg = study(ManufacturedCase::Quadratic);
        cfg.schedule.clear();
        assert!(convergence_study(&cfg).is_err());
    }

    #[test]
    fn forcing_matches_solutions() {
        let p = crate::geometry::point(&[0.3, 0.7]);
        assert_eq!(ManufacturedCase::Harmonic.forcing(&p), 0.0);
        assert_eq!(ManufacturedCase::Quadratic.forcing(&p), 4.0);
        // Finite-difference Laplacian of each case agrees with forcing.
        let h = 1e-4;
        for case in [
            ManufacturedCase::Harmonic,
            ManufacturedCase::Quadratic,
            ManufacturedCase::SinSinh,
        ] {
            let u = |x: f64, y: f64| case.solution(&crate::geometry::point(&[x, y]));
            let lap = (u(0.3 + h, 0.7) + u(0.3 - h, 0.7) + u(0.3, 0.7 + h) + u(0.3, 0.7 - h)
                - 4.0 * u(0.3, 0.7))
                / (h * h);
            assert!(
                (lap - case.forcing(&p)).abs() < 1e-4,
                "{case:?}: fd {lap}, exact {}",
                case.forcing(&p)
            );
        }
    }

    #[test]
    fn grid_is_interior_only() {
        let domain = Domain::new_ball(vec![0.0, 0.0], 1.0).unwrap();
        let grid = evaluation_grid(&domain, 10);
        assert!(!grid.is_empty());
        for p in &grid {
            assert!(domain.contains_interior(p).unwrap());
        }
        // Corner cells of the bounding box fall outside the disk.
        assert!(grid.len() < 100);
    }

    #[test]
    fn rows_render_to_csv() {
        let row = ConvergenceRow {
            level: 0,
            n: 5,
            m: 8,
            size: 13,
            max_error: Some(0.5),
            condition: Some(100.0),
            residual_norm: None,
            singular: false,
        };
        assert_eq!(
            row.csv_row(),
            "0,5,8,13,5.0000000000000000e-1,1.0000000000000000e2,nan,false"
        );
    }

    #[test]
    fn config_round_trips() {
        let cfg = study(ManufacturedCase::SinSinh);
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("sin_sinh"));
        let back: ConvergenceConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.schedule, cfg.schedule);
    }
}
