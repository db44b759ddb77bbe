//! MultiQuadric and Inverse MultiQuadric kernels, their planar Laplacians,
//! and the analytic extension along a complexified line.
//!
//! Both kernels are powers of the same quadratic,
//! `phi(r) = (1 + (eps*r)^2)^s`, with `s = 1/2` (MQ) or `s = -1/2` (IMQ).
//! "Laplacian" throughout means the two-dimensional Laplacian of the radial
//! function, matching the planar Poisson problem the collocation system
//! discretizes. Complex evaluation replaces the real squared distance `r^2`
//! by a complex scalar `w` and uses the principal branch of the logarithm;
//! arguments `1 + eps^2 w` on the cut (the non-positive reals) are errors,
//! never silently resolved to one side.

use crate::error::{Error, Result};
use crate::geometry::Point;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Allowed deviation of a direction vector's norm from 1.
pub const UNIT_DIRECTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Mq,
    Imq,
}

impl KernelKind {
    /// Exponent `s` in `(1 + (eps*r)^2)^s`.
    pub fn exponent(self) -> f64 {
        match self {
            KernelKind::Mq => 0.5,
            KernelKind::Imq => -0.5,
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelKind::Mq => write!(f, "mq"),
            KernelKind::Imq => write!(f, "imq"),
        }
    }
}

/// A kernel family plus its shape parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelConfig", into = "KernelConfig")]
pub struct KernelSpec {
    kind: KernelKind,
    epsilon: f64,
}

/// Wire format: `{"kind": "mq"|"imq", "epsilon": e}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub kind: KernelKind,
    pub epsilon: f64,
}

impl TryFrom<KernelConfig> for KernelSpec {
    type Error = Error;
    fn try_from(cfg: KernelConfig) -> Result<Self> {
        KernelSpec::new(cfg.kind, cfg.epsilon)
    }
}

impl From<KernelSpec> for KernelConfig {
    fn from(spec: KernelSpec) -> Self {
        KernelConfig {
            kind: spec.kind,
            epsilon: spec.epsilon,
        }
    }
}

impl KernelSpec {
    pub fn new(kind: KernelKind, epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::InvalidKernel(format!(
                "shape parameter must be positive and finite, got {epsilon}"
            )));
        }
        Ok(Self { kind, epsilon })
    }

    pub fn mq(epsilon: f64) -> Result<Self> {
        Self::new(KernelKind::Mq, epsilon)
    }

    pub fn imq(epsilon: f64) -> Result<Self> {
        Self::new(KernelKind::Imq, epsilon)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Exponent `s = +-1/2`.
    pub fn exponent(&self) -> f64 {
        self.kind.exponent()
    }

    /// Diagonal Laplacian value `c = laplacian(0) = +-2 eps^2`, exact in
    /// floating point.
    pub fn diagonal(&self) -> f64 {
        let two_eps2 = 2.0 * self.epsilon * self.epsilon;
        match self.kind {
            KernelKind::Mq => two_eps2,
            KernelKind::Imq => -two_eps2,
        }
    }

    /// Kernel value `(1 + (eps*r)^2)^s`.
    ///
    /// MQ values are >= 1, IMQ values in (0, 1]; both equal 1 at r = 0.
    pub fn value(&self, r: f64) -> Result<f64> {
        let t = self.scaled_square(r)?;
        Ok(match self.kind {
            KernelKind::Mq => (1.0 + t).sqrt(),
            KernelKind::Imq => 1.0 / (1.0 + t).sqrt(),
        })
    }

    /// Planar Laplacian of the kernel as a function of the distance to its
    /// center: `4 eps^2 s (1+t)^(s-2) (1+s*t)` with `t = (eps*r)^2`, which
    /// reduces to `eps^2 (2+t) / (1+t)^(3/2)` for MQ and
    /// `-eps^2 (2-t) / (1+t)^(5/2)` for IMQ.
    pub fn laplacian(&self, r: f64) -> Result<f64> {
        let t = self.scaled_square(r)?;
        let eps2 = self.epsilon * self.epsilon;
        // sqrt-based powers so that r = 0 yields exactly +-2 eps^2.
        Ok(match self.kind {
            KernelKind::Mq => eps2 * (2.0 + t) / ((1.0 + t) * (1.0 + t).sqrt()),
            KernelKind::Imq => -(eps2 * (2.0 - t) / ((1.0 + t) * (1.0 + t) * (1.0 + t).sqrt())),
        })
    }

    /// Kernel value at a complex squared distance: `(1 + eps^2 w)^s` on the
    /// principal branch.
    pub fn complex_value(&self, w: Complex64) -> Result<Complex64> {
        let arg = self.complex_argument(w);
        principal_power(arg, self.exponent())
    }

    /// Planar Laplacian at a complex squared distance:
    /// `4 eps^2 s (1 + eps^2 w)^(s-2) (1 + s eps^2 w)` on the principal
    /// branch. `1 + eps^2 w = 0` is the branch point and is an error.
    pub fn complex_laplacian(&self, w: Complex64) -> Result<Complex64> {
        let eps2 = self.epsilon * self.epsilon;
        let s = self.exponent();
        let arg = self.complex_argument(w);
        let power = principal_power(arg, s - 2.0)?;
        let tail = Complex64::new(1.0, 0.0) + s * eps2 * w;
        Ok(Complex64::new(4.0 * eps2 * s, 0.0) * power * tail)
    }

    fn complex_argument(&self, w: Complex64) -> Complex64 {
        let eps2 = self.epsilon * self.epsilon;
        Complex64::new(1.0, 0.0) + eps2 * w
    }

    fn scaled_square(&self, r: f64) -> Result<f64> {
        if r < 0.0 || !r.is_finite() {
            return Err(Error::NegativeRadius(r));
        }
        let er = self.epsilon * r;
        Ok(er * er)
    }
}

/// Principal-branch power `base^exp = exp(exp * Log(base))`. The cut is the
/// non-positive real axis; arguments on it (branch point included) error out.
fn principal_power(base: Complex64, exp: f64) -> Result<Complex64> {
    if base.im == 0.0 && base.re <= 0.0 {
        return Err(Error::BranchCut {
            re: base.re,
            im: base.im,
        });
    }
    Ok(base.powf(exp))
}

/// Analytic extension of the squared distance along the line
/// `P(z) = base + z*direction`: returns `sum_j (base_j + z v_j - target_j)^2`
/// as a sum of squares of complex components (not a Hermitian norm).
pub fn complex_squared_distance(
    base: &Point,
    direction: &Point,
    z: Complex64,
    target: &Point,
) -> Result<Complex64> {
    if base.dim() != direction.dim() || base.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: base.dim(),
            got: direction.dim().max(target.dim()),
        });
    }
    let norm = direction.norm();
    if (norm - 1.0).abs() > UNIT_DIRECTION_TOL {
        return Err(Error::NonUnitDirection(norm));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for ((&b, &v), &t) in base
        .coords()
        .iter()
        .zip(direction.coords())
        .zip(target.coords())
    {
        let term = Complex64::new(b - t, 0.0) + z * v;
        acc += term * term;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn value_examples() {
        let mq2 = KernelSpec::mq(2.0).unwrap();
        assert_eq!(mq2.value(0.0).unwrap(), 1.0);
        assert_relative_eq!(
            mq2.value(1.0).unwrap(),
            5.0_f64.sqrt(),
            max_relative = 1e-15
        );

        let imq1 = KernelSpec::imq(1.0).unwrap();
        assert_eq!(imq1.value(0.0).unwrap(), 1.0);
        assert_relative_eq!(
            imq1.value(1.0).unwrap(),
            1.0 / 2.0_f64.sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn value_bounds() {
        let mq = KernelSpec::mq(1.3).unwrap();
        let imq = KernelSpec::imq(1.3).unwrap();
        for r in [0.0, 0.1, 1.0, 7.5, 300.0] {
            assert!(mq.value(r).unwrap() >= 1.0);
            let v = imq.value(r).unwrap();
            assert!(v > 0.0 && v <= 1.0);
        }
    }

    #[test]
    fn negative_radius_rejected() {
        let mq = KernelSpec::mq(1.0).unwrap();
        assert!(matches!(mq.value(-0.5), Err(Error::NegativeRadius(_))));
        assert!(matches!(mq.laplacian(-0.5), Err(Error::NegativeRadius(_))));
    }

    #[test]
    fn invalid_epsilon_rejected() {
        assert!(KernelSpec::mq(0.0).is_err());
        assert!(KernelSpec::imq(-1.0).is_err());
        assert!(KernelSpec::mq(f64::NAN).is_err());
        assert!(KernelSpec::mq(f64::INFINITY).is_err());
    }

    #[test]
    fn laplacian_at_zero_is_exactly_the_diagonal() {
        for eps in [0.5, 1.0, 1.7, 2.0, 3.25] {
            let mq = KernelSpec::mq(eps).unwrap();
            let imq = KernelSpec::imq(eps).unwrap();
            assert_eq!(mq.laplacian(0.0).unwrap(), mq.diagonal());
            assert_eq!(mq.diagonal(), 2.0 * eps * eps);
            assert_eq!(imq.laplacian(0.0).unwrap(), imq.diagonal());
            assert_eq!(imq.diagonal(), -2.0 * eps * eps);
        }
    }

    #[test]
    fn laplacian_examples() {
        // 3 / 2^(3/2), by direct evaluation of eps^2 (2+t)/(1+t)^(3/2).
        let mq = KernelSpec::mq(1.0).unwrap();
        assert_relative_eq!(
            mq.laplacian(1.0).unwrap(),
            1.0606601717798212,
            max_relative = 1e-15
        );

        // (eps*r)^2 = 2 kills the (2 - t) factor.
        let imq = KernelSpec::imq(1.0).unwrap();
        assert_abs_diff_eq!(imq.laplacian(2.0_f64.sqrt()).unwrap(), 0.0, epsilon = 1e-15);
    }

    /// Per-axis central second differences of the radial kernel reproduce
    /// the closed-form planar Laplacian.
    ///
    /// The scaled radius is kept in the band (eps r)^2 <= 1.5: past the
    /// IMQ sign flip at (eps r)^2 = 2 the Laplacian passes through zero,
    /// where no relative tolerance survives second-difference roundoff
    /// (~1e-8 absolute at h = 1e-4). The flip itself is pinned exactly by
    /// `laplacian_examples` above.
    #[test]
    fn laplacian_matches_finite_differences() {
        let h = 1e-4;
        let mut rng = ChaCha8Rng::seed_from_u64(0x6b65726e);
        for kind in [KernelKind::Mq, KernelKind::Imq] {
            for eps in [0.5, 1.0, 2.0] {
                let spec = KernelSpec::new(kind, eps).unwrap();
                for _ in 0..200 {
                    let center = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
                    let dist = rng.random_range(0.01_f64..1.5).sqrt() / eps;
                    let angle = rng.random_range(0.0..std::f64::consts::TAU);
                    let x = [
                        center[0] + dist * angle.cos(),
                        center[1] + dist * angle.sin(),
                    ];
                    let phi = |p: [f64; 2]| {
                        let r = ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt();
                        spec.value(r).unwrap()
                    };
                    let stencil = (phi([x[0] + h, x[1]])
                        + phi([x[0] - h, x[1]])
                        + phi([x[0], x[1] + h])
                        + phi([x[0], x[1] - h])
                        - 4.0 * phi(x))
                        / (h * h);
                    let exact = spec.laplacian(dist).unwrap();
                    assert_relative_eq!(stencil, exact, max_relative = 1e-5);
                }
            }
        }
    }

    #[test]
    fn complex_squared_distance_examples() {
        let base = point(&[0.0, 0.0]);
        let v = point(&[1.0, 0.0]);

        let w = complex_squared_distance(&base, &v, Complex64::new(0.0, 0.0), &point(&[1.0, 0.0]))
            .unwrap();
        assert_eq!(w, Complex64::new(1.0, 0.0));

        let w = complex_squared_distance(&base, &v, Complex64::new(0.0, 1.0), &point(&[0.0, 0.0]))
            .unwrap();
        assert_eq!(w, Complex64::new(-1.0, 0.0));

        let w = complex_squared_distance(&base, &v, Complex64::new(0.0, 1.0), &point(&[1.0, 0.0]))
            .unwrap();
        assert_eq!(w, Complex64::new(0.0, -2.0));
    }

    #[test]
    fn complex_squared_distance_rejects_bad_input() {
        let base = point(&[0.0, 0.0]);
        assert!(matches!(
            complex_squared_distance(&base, &point(&[2.0, 0.0]), Complex64::new(0.0, 0.0), &base),
            Err(Error::NonUnitDirection(_))
        ));
        assert!(matches!(
            complex_squared_distance(
                &base,
                &point(&[1.0, 0.0, 0.0]),
                Complex64::new(0.0, 0.0),
                &base
            ),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn complex_value_examples() {
        let mq = KernelSpec::mq(1.0).unwrap();
        assert_eq!(
            mq.complex_value(Complex64::new(0.0, 0.0)).unwrap(),
            Complex64::new(1.0, 0.0)
        );

        // Principal square root of 1 - 2i.
        let v = mq.complex_value(Complex64::new(0.0, -2.0)).unwrap();
        assert_relative_eq!(v.re, 1.272019649514069, max_relative = 1e-14);
        assert_relative_eq!(v.im, -0.7861513777574233, max_relative = 1e-14);

        // 1 + w = 0 is the branch point.
        assert!(matches!(
            mq.complex_value(Complex64::new(-1.0, 0.0)),
            Err(Error::BranchCut { .. })
        ));
        // Strictly negative reals sit on the cut as well.
        assert!(matches!(
            mq.complex_value(Complex64::new(-2.5, 0.0)),
            Err(Error::BranchCut { .. })
        ));
    }

    #[test]
    fn complex_laplacian_matches_real_diagonal() {
        for eps in [0.5, 1.0, 2.0] {
            let mq = KernelSpec::mq(eps).unwrap();
            let lap = mq.complex_laplacian(Complex64::new(0.0, 0.0)).unwrap();
            assert_eq!(lap, Complex64::new(mq.diagonal(), 0.0));
        }
    }

    /// |(1+w)^k (lap)^2| approaches eps^4 (MQ, k=3) and 9 eps^4 (IMQ, k=5)
    /// as w -> -1 along the real axis from the right.
    #[test]
    fn pole_order_limits() {
        let mq = KernelSpec::mq(1.0).unwrap();
        let imq = KernelSpec::imq(1.0).unwrap();
        let mut prev_err_mq = f64::INFINITY;
        let mut prev_err_imq = f64::INFINITY;
        for k in 4..=8 {
            let delta = 10.0_f64.powi(-k);
            let w = Complex64::new(-1.0 + delta, 0.0);

            let lap = mq.complex_laplacian(w).unwrap();
            let one_plus_w = Complex64::new(delta, 0.0);
            let val = (one_plus_w.powu(3) * lap * lap).norm();
            let err = (val - 1.0).abs();
            assert!(err < prev_err_mq, "MQ limit error must shrink with delta");
            prev_err_mq = err;

            let lap = imq.complex_laplacian(w).unwrap();
            let val = (one_plus_w.powu(5) * lap * lap).norm();
            let err = (val - 9.0).abs() / 9.0;
            assert!(err < prev_err_imq, "IMQ limit error must shrink with delta");
            prev_err_imq = err;
        }
        assert!(prev_err_mq < 1e-3);
        assert!(prev_err_imq < 1e-3);
    }

    fn specs() -> impl Strategy<Value = KernelSpec> {
        (
            prop_oneof![Just(KernelKind::Mq), Just(KernelKind::Imq)],
            0.5..2.0f64,
        )
            .prop_map(|(kind, eps)| KernelSpec::new(kind, eps).unwrap())
    }

    proptest! {
        /// Distance is symmetric, so kernel entries are symmetric bitwise.
        #[test]
        fn symmetry(spec in specs(),
                    ax in -3.0..3.0f64, ay in -3.0..3.0f64,
                    bx in -3.0..3.0f64, by in -3.0..3.0f64) {
            let a = point(&[ax, ay]);
            let b = point(&[bx, by]);
            prop_assert_eq!(
                spec.value(a.distance(&b)).unwrap(),
                spec.value(b.distance(&a)).unwrap()
            );
            prop_assert_eq!(
                spec.laplacian(a.distance(&b)).unwrap(),
                spec.laplacian(b.distance(&a)).unwrap()
            );
        }

        /// The complex extension agrees with the real kernel on real
        /// squared distances.
        #[test]
        fn complex_real_agreement(spec in specs(), r in 0.0..10.0f64) {
            let w = Complex64::new(r * r, 0.0);
            let cv = spec.complex_value(w).unwrap();
            prop_assert!(cv.im == 0.0);
            let rv = spec.value(r).unwrap();
            prop_assert!((cv.re - rv).abs() <= 1e-14 * rv.abs());
        }

        /// At z = +-i/eps the squared-distance expansion leaves
        /// 1 + eps^2 w with real part eps^2 ||base - target||^2 > 0.
        #[test]
        fn positive_real_part_at_branch_height(
            spec in specs(),
            bx in -2.0..2.0f64, by in -2.0..2.0f64,
            tx in -2.0..2.0f64, ty in -2.0..2.0f64,
            angle in 0.0..std::f64::consts::TAU,
            sign in prop_oneof![Just(1.0), Just(-1.0)],
        ) {
            let diff2 = (bx - tx).powi(2) + (by - ty).powi(2);
            prop_assume!(diff2 > 0.01);
            let base = point(&[bx, by]);
            let target = point(&[tx, ty]);
            let v = point(&[angle.cos(), angle.sin()]);
            let eps = spec.epsilon();
            let z = Complex64::new(0.0, sign / eps);
            let w = complex_squared_distance(&base, &v, z, &target).unwrap();
            let arg = Complex64::new(1.0, 0.0) + eps * eps * w;
            prop_assert!(arg.re > 0.0);
            let expected = eps * eps * diff2;
            prop_assert!((arg.re - expected).abs() <= 1e-10 * expected.max(1.0));
        }
    }
}
