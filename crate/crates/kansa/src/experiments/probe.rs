//! Complex-line probe of the kernel branch points.
//!
//! Along the complexified line `P(z) = P_n + z v` the self-centered kernel
//! term hits branch points at `z = +-i / eps`. The probe climbs toward
//! `+i / eps` from inside, using `z = (i / eps) sqrt(1 - delta)` so the
//! argument `1 + eps^2 z^2 = delta` stays off the principal branch cut. It
//! verifies three things: the self term diverges, every cross term (and its
//! first divided differences, an analyticity proxy) stays bounded, and
//! `|(1 + (eps z)^2)^k (lap_phi)^2|` converges to the predicted pole-order
//! constant: `eps^4` with `k = 3` for MQ, `9 eps^4` with `k = 5` for IMQ.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::kernels::{complex_squared_distance, KernelKind, KernelSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Cross terms and divided differences may grow by at most this factor over
/// their value at the first (largest) offset.
pub const BOUNDEDNESS_FACTOR: f64 = 10.0;

/// Relative tolerance on the pole-order limit at the smallest offset.
pub const LIMIT_RTOL: f64 = 1e-3;

/// Successive-difference ratios must sit in this window around the offset
/// ratio 10 for the limit to count as converging at first order.
pub const RICHARDSON_WINDOW: (f64, f64) = (5.0, 20.0);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    /// Collocation centers; the last one is the designated center `P_n`
    /// whose kernel term is driven into the branch point.
    pub interior: Vec<Point>,
    #[serde(default)]
    pub boundary: Vec<Point>,
    pub kernel: KernelSpec,
    /// Unit direction of the complexified line.
    pub direction: Point,
    /// Offsets `delta`, strictly decreasing in (0, 1); at least three so
    /// convergence can be judged from difference ratios.
    #[serde(default = "default_offsets")]
    pub offsets: Vec<f64>,
}

fn default_offsets() -> Vec<f64> {
    vec![1e-3, 1e-4, 1e-5, 1e-6, 1e-7]
}

impl ProbeConfig {
    /// Everything checkable before any kernel evaluation.
    pub fn validate(&self) -> Result<()> {
        let center = self.interior.last().ok_or_else(|| {
            Error::InvalidConfig("at least one interior point is required".into())
        })?;
        let norm_gap = (self.direction.norm() - 1.0).abs();
        if norm_gap > crate::kernels::UNIT_DIRECTION_TOL {
            return Err(Error::NonUnitDirection(self.direction.norm()));
        }
        validate_offsets(&self.offsets)?;
        for p in self.interior.iter().chain(&self.boundary) {
            if p.dim() != self.direction.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.direction.dim(),
                    got: p.dim(),
                });
            }
        }
        for a in self.interior[..self.interior.len() - 1]
            .iter()
            .chain(&self.boundary)
        {
            if a.distance(center) == 0.0 {
                return Err(Error::InvalidPoint(format!(
                    "cross center {:?} coincides with the designated center",
                    a.coords()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeStep {
    pub delta: f64,
    /// Height of the probe point: `z = i * z_im`.
    pub z_im: f64,
    pub self_laplacian_abs: f64,
    /// `|(1 + eps^2 w)^k (lap_phi)^2|` at this offset.
    pub pole_scaled_abs: f64,
}

/// Boundedness summary of one cross center along the approach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossTermReport {
    pub center: Point,
    /// max |phi| over the path divided by |phi| at the first offset.
    pub value_ratio: f64,
    pub laplacian_ratio: f64,
    /// Same ratios for first divided differences in `z`.
    pub value_divdiff_ratio: f64,
    pub laplacian_divdiff_ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeOutput {
    pub config: ProbeConfig,
    pub steps: Vec<ProbeStep>,
    /// Pole-order constant predicted analytically.
    pub expected_limit: f64,
    /// Scaled value at the smallest offset.
    pub limit_estimate: f64,
    pub limit_rel_error: f64,
    /// Ratios of successive differences of the scaled values; first-order
    /// convergence in delta puts these near the offset ratio.
    pub richardson_ratios: Vec<f64>,
    pub self_term_diverges: bool,
    pub cross_terms: Vec<CrossTermReport>,
    pub max_cross_ratio: f64,
    pub max_divdiff_ratio: f64,
    pub pass: bool,
}

pub fn complex_probe(config: &ProbeConfig) -> Result<ProbeOutput> {
    config.validate()?;
    let center = config.interior.last().expect("validated nonempty");
    let cross_centers: Vec<&Point> = config.interior[..config.interior.len() - 1]
        .iter()
        .chain(&config.boundary)
        .collect();

    let spec = config.kernel;
    let eps = spec.epsilon();
    let eps2 = eps * eps;
    let (pole_order, expected_limit) = match spec.kind() {
        KernelKind::Mq => (3u32, eps2 * eps2),
        KernelKind::Imq => (5u32, 9.0 * eps2 * eps2),
    };

    let mut steps = Vec::with_capacity(config.offsets.len());
    let mut zs = Vec::with_capacity(config.offsets.len());
    let mut cross_values = vec![Vec::new(); cross_centers.len()];
    let mut cross_laplacians = vec![Vec::new(); cross_centers.len()];
    for &delta in &config.offsets {
        let z = Complex64::new(0.0, (1.0 - delta).sqrt() / eps);
        zs.push(z);

        let w_self = complex_squared_distance(center, &config.direction, z, center)?;
        let lap_self = spec.complex_laplacian(w_self)?;
        let pole_base = Complex64::new(1.0, 0.0) + eps2 * w_self;
        let pole_scaled_abs = (pole_base.powu(pole_order) * lap_self * lap_self).norm();
        steps.push(ProbeStep {
            delta,
            z_im: z.im,
            self_laplacian_abs: lap_self.norm(),
            pole_scaled_abs,
        });

        for (i, a) in cross_centers.iter().enumerate() {
            let w = complex_squared_distance(center, &config.direction, z, a)?;
            cross_values[i].push(spec.complex_value(w)?);
            cross_laplacians[i].push(spec.complex_laplacian(w)?);
        }
    }

    let self_term_diverges = steps
        .windows(2)
        .all(|w| w[1].self_laplacian_abs > w[0].self_laplacian_abs);

    let limit_estimate = steps.last().expect("offsets nonempty").pole_scaled_abs;
    let limit_rel_error = (limit_estimate - expected_limit).abs() / expected_limit;

    let diffs: Vec<f64> = steps
        .windows(2)
        .map(|w| w[0].pole_scaled_abs - w[1].pole_scaled_abs)
        .collect();
    let richardson_ratios: Vec<f64> = diffs.windows(2).map(|d| d[0] / d[1]).collect();

    let mut cross_terms = Vec::with_capacity(cross_centers.len());
    let mut max_cross_ratio = 0.0_f64;
    let mut max_divdiff_ratio = 0.0_f64;
    for (i, a) in cross_centers.iter().enumerate() {
        let value_ratio = boundedness_ratio(&cross_values[i]);
        let laplacian_ratio = boundedness_ratio(&cross_laplacians[i]);
        let value_divdiff_ratio = boundedness_ratio(&divided_differences(&cross_values[i], &zs));
        let laplacian_divdiff_ratio =
            boundedness_ratio(&divided_differences(&cross_laplacians[i], &zs));
        max_cross_ratio = max_cross_ratio.max(value_ratio).max(laplacian_ratio);
        max_divdiff_ratio = max_divdiff_ratio
            .max(value_divdiff_ratio)
            .max(laplacian_divdiff_ratio);
        cross_terms.push(CrossTermReport {
            center: (*a).clone(),
            value_ratio,
            laplacian_ratio,
            value_divdiff_ratio,
            laplacian_divdiff_ratio,
        });
    }

    let ratios_ok = richardson_ratios
        .iter()
        .all(|&r| r >= RICHARDSON_WINDOW.0 && r <= RICHARDSON_WINDOW.1);
    let pass = self_term_diverges
        && limit_rel_error <= LIMIT_RTOL
        && ratios_ok
        && max_cross_ratio <= BOUNDEDNESS_FACTOR
        && max_divdiff_ratio <= BOUNDEDNESS_FACTOR;

    Ok(ProbeOutput {
        config: config.clone(),
        steps,
        expected_limit,
        limit_estimate,
        limit_rel_error,
        richardson_ratios,
        self_term_diverges,
        cross_terms,
        max_cross_ratio,
        max_divdiff_ratio,
        pass,
    })
}

fn validate_offsets(offsets: &[f64]) -> Result<()> {
    if offsets.len() < 3 {
        return Err(Error::InvalidConfig(
            "at least three offsets are needed to judge convergence".into(),
        ));
    }
    if offsets
        .iter()
        .any(|&d| !(0.0..1.0).contains(&d) || d == 0.0)
    {
        return Err(Error::InvalidConfig("offsets must lie in (0, 1)".into()));
    }
    if offsets.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig(
            "offsets must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// max |f_k| / |f_0|: how far the sequence strays above its first value.
fn boundedness_ratio(values: &[Complex64]) -> f64 {
    let first = values[0].norm();
    let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    max / first
}

/// |f_{k+1} - f_k| / |z_{k+1} - z_k| along the approach.
fn divided_differences(values: &[Complex64], zs: &[Complex64]) -> Vec<Complex64> {
    values
        .windows(2)
        .zip(zs.windows(2))
        .map(|(f, z)| (f[1] - f[0]) / (z[1] - z[0]))
        .collect()
}
