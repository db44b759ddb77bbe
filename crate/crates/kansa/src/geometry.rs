//! Domains, collocation points, and boundary point generation.
//!
//! Collocation works with two families of points: interior points strictly
//! inside a bounded domain, and boundary points on its topological boundary.
//! The supported domains are axis-aligned boxes and balls in any dimension
//! `d >= 1`; a point counts as "on the boundary" when its distance to the
//! boundary is below [`Domain::boundary_tolerance`].

use crate::error::{Error, Result};
use crate::sampler::SeedSpec;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Relative tolerance (times domain diameter) for boundary membership.
pub const BOUNDARY_MEMBERSHIP_RTOL: f64 = 1e-12;

/// Relative tolerance (times domain diameter) below which a requested
/// boundary spacing is rejected as indistinct.
pub const BOUNDARY_DISTINCTNESS_RTOL: f64 = 1e-9;

/// A point in `R^d`, `d >= 1`, with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidPoint("dimension must be at least 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!(
                "non-finite coordinate in {coords:?}"
            )));
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Euclidean distance to another point of the same dimension.
    pub fn distance(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.coords
    }
}

/// Convenience constructor used throughout the tests.
pub fn point(coords: &[f64]) -> Point {
    Point::new(coords.to_vec()).expect("valid point")
}

/// A bounded domain with nonempty interior: an axis-aligned box or a ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainConfig", into = "DomainConfig")]
pub enum Domain {
    Box { min: Vec<f64>, max: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Domain {
    pub fn new_box(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.is_empty() || min.len() != max.len() {
            return Err(Error::InvalidDomain(
                "box corners must share a dimension >= 1".into(),
            ));
        }
        if min
            .iter()
            .zip(&max)
            .any(|(lo, hi)| !lo.is_finite() || !hi.is_finite() || lo >= hi)
        {
            return Err(Error::InvalidDomain(
                "box requires min < max componentwise".into(),
            ));
        }
        Ok(Domain::Box { min, max })
    }

    pub fn new_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidDomain("ball center must be finite".into()));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidDomain("ball radius must be positive".into()));
        }
        Ok(Domain::Ball { center, radius })
    }

    /// The unit square `[0,1]^2`.
    pub fn unit_square() -> Self {
        Domain::Box {
            min: vec![0.0, 0.0],
            max: vec![1.0, 1.0],
        }
    }

    /// Axis-aligned cube `[0,side]^d`.
    pub fn cube(dim: usize, side: f64) -> Result<Self> {
        Self::new_box(vec![0.0; dim], vec![side; dim])
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { min, .. } => min.len(),
            Domain::Ball { center, .. } => center.len(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Box { min, max } => min
                .iter()
                .zip(max)
                .map(|(lo, hi)| (hi - lo) * (hi - lo))
                .sum::<f64>()
                .sqrt(),
            Domain::Ball { radius, .. } => 2.0 * radius,
        }
    }

    /// Smallest axis-aligned box containing the domain, as (low, high) corners.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Box { min, max } => (min.clone(), max.clone()),
            Domain::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    /// Absolute boundary-membership tolerance for this domain.
    pub fn boundary_tolerance(&self) -> f64 {
        BOUNDARY_MEMBERSHIP_RTOL * self.diameter()
    }

    fn check_dim(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.dim(),
            });
        }
        Ok(())
    }

    /// Distance from `p` to the domain boundary (zero on the boundary,
    /// positive elsewhere, both inside and outside).
    pub fn boundary_distance(&self, p: &Point) -> Result<f64> {
        self.check_dim(p)?;
        match self {
            Domain::Box { min, max } => {
                let mut outside_sq = 0.0;
                let mut inside_margin = f64::INFINITY;
                for ((&x, &lo), &hi) in p.coords().iter().zip(min).zip(max) {
                    let excess = (lo - x).max(x - hi).max(0.0);
                    outside_sq += excess * excess;
                    inside_margin = inside_margin.min((x - lo).min(hi - x));
                }
                if outside_sq > 0.0 {
                    Ok(outside_sq.sqrt())
                } else {
                    Ok(inside_margin)
                }
            }
            Domain::Ball { center, radius } => {
                let r = p
                    .coords()
                    .iter()
                    .zip(center)
                    .map(|(x, c)| (x - c) * (x - c))
                    .sum::<f64>()
                    .sqrt();
                Ok((r - radius).abs())
            }
        }
    }

    /// Whether `p` lies in the open interior of the domain.
    ///
    /// Points within [`Domain::boundary_tolerance`] of the boundary are
    /// treated as boundary points, not interior ones, so that membership is
    /// consistent with the tolerance used when validating boundary sets.
    pub fn contains_interior(&self, p: &Point) -> Result<bool> {
        self.check_dim(p)?;
        let strictly_inside = match self {
            Domain::Box { min, max } => p
                .coords()
                .iter()
                .zip(min)
                .zip(max)
                .all(|((&x, &lo), &hi)| lo < x && x < hi),
            Domain::Ball { center, radius } => {
                let r2: f64 = p
                    .coords()
                    .iter()
                    .zip(center)
                    .map(|(x, c)| (x - c) * (x - c))
                    .sum();
                r2 < radius * radius
            }
        };
        Ok(strictly_inside && self.boundary_distance(p)? > self.boundary_tolerance())
    }

    /// Whether `p` lies on the boundary within tolerance.
    pub fn on_boundary(&self, p: &Point) -> Result<bool> {
        Ok(self.boundary_distance(p)? <= self.boundary_tolerance())
    }
}

/// Wire format for [`Domain`]:
/// `{"shape": "box"|"ball"|"unit_square", "dim": d, "min": [...], "max": [...], "center": [...], "radius": r}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub shape: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

impl TryFrom<DomainConfig> for Domain {
    type Error = Error;

    fn try_from(cfg: DomainConfig) -> Result<Self> {
        let check_dim = |d: Option<usize>, len: usize, what: &str| -> Result<()> {
            match d {
                Some(d) if d != len => Err(Error::InvalidDomain(format!(
                    "declared dim {d} does not match {what} length {len}"
                ))),
                _ => Ok(()),
            }
        };
        match cfg.shape.as_str() {
            "unit_square" => Ok(Domain::unit_square()),
            "box" => {
                let min = cfg
                    .min
                    .ok_or_else(|| Error::InvalidDomain("box requires \"min\"".into()))?;
                let max = cfg
                    .max
                    .ok_or_else(|| Error::InvalidDomain("box requires \"max\"".into()))?;
                check_dim(cfg.dim, min.len(), "min")?;
                Domain::new_box(min, max)
            }
            "ball" => {
                let center = cfg
                    .center
                    .ok_or_else(|| Error::InvalidDomain("ball requires \"center\"".into()))?;
                let radius = cfg
                    .radius
                    .ok_or_else(|| Error::InvalidDomain("ball requires \"radius\"".into()))?;
                check_dim(cfg.dim, center.len(), "center")?;
                Domain::new_ball(center, radius)
            }
            other => Err(Error::InvalidDomain(format!("unknown shape {other:?}"))),
        }
    }
}

impl From<Domain> for DomainConfig {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Box { min, max } => DomainConfig {
                shape: "box".into(),
                dim: Some(min.len()),
                min: Some(min),
                max: Some(max),
                center: None,
                radius: None,
            },
            Domain::Ball { center, radius } => DomainConfig {
                shape: "ball".into(),
                dim: Some(center.len()),
                min: None,
                max: None,
                center: Some(center),
                radius: Some(radius),
            },
        }
    }
}

/// How to place boundary points on the domain boundary.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryStrategy {
    /// Deterministic placement, equispaced in the natural boundary
    /// parameterization (arc length in 2D, face lattices and angular
    /// lattices in higher dimensions).
    #[default]
    EquispacedArclength,
    /// Random placement in the boundary parameterization, reproducible from
    /// the seed.
    ParameterRandom { seed: SeedSpec },
}

/// A set of `m >= 1` pairwise-distinct points on a domain boundary.
#[derive(Debug, Clone, Serialize)]
pub struct BoundarySet {
    points: Vec<Point>,
}

impl BoundarySet {
    /// Validates boundary membership (within tolerance) and pairwise
    /// distinctness before wrapping the points.
    pub fn new(domain: &Domain, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyBoundary);
        }
        let tol = domain.boundary_tolerance();
        for p in &points {
            let dist = domain.boundary_distance(p)?;
            if dist > tol {
                return Err(Error::NotOnBoundary {
                    distance: dist,
                    tolerance: tol,
                });
            }
        }
        if points.len() > 1 {
            let dmin = min_pairwise_distance(&points)?;
            if dmin <= 0.0 {
                return Err(Error::BoundaryNotDistinct(format!(
                    "min pairwise distance {dmin}"
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }
}

/// Minimum Euclidean distance over all point pairs. Requires two points.
pub fn min_pairwise_distance(points: &[Point]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            best = best.min(points[i].distance(&points[j]));
        }
    }
    Ok(best)
}

/// Generates `m` pairwise-distinct boundary points.
///
/// Deterministic: the equispaced strategy is a pure function of its inputs,
/// and the random strategy is fully determined by its seed.
pub fn boundary_points(
    domain: &Domain,
    m: usize,
    strategy: &BoundaryStrategy,
) -> Result<BoundarySet> {
    if m == 0 {
        return Err(Error::EmptyBoundary);
    }
    // Even optimally spread points cannot beat this spacing, so overdense
    // requests fail before any points are generated.
    let dmin_cap = spacing_upper_bound(domain, m);
    if dmin_cap < BOUNDARY_DISTINCTNESS_RTOL * domain.diameter() {
        return Err(Error::BoundaryNotDistinct(format!(
            "no {m} boundary points can be pairwise distinct at tolerance: best possible spacing {dmin_cap:e}"
        )));
    }
    let points = match strategy {
        BoundaryStrategy::EquispacedArclength => equispaced_boundary(domain, m)?,
        BoundaryStrategy::ParameterRandom { seed } => random_boundary(domain, m, seed)?,
    };
    if points.len() > 1 {
        let dmin = min_pairwise_distance(&points)?;
        if dmin < BOUNDARY_DISTINCTNESS_RTOL * domain.diameter() {
            return Err(Error::BoundaryNotDistinct(format!(
                "spacing {dmin:e} below distinctness tolerance for m = {m}"
            )));
        }
    }
    BoundarySet::new(domain, points)
}

fn equispaced_boundary(domain: &Domain, m: usize) -> Result<Vec<Point>> {
    match domain {
        Domain::Box { min, max } if min.len() == 1 => {
            let endpoints = [min[0], max[0]];
            if m > 2 {
                return Err(Error::UnsupportedStrategy(
                    "a 1D box boundary has exactly two points".into(),
                ));
            }
            endpoints[..m]
                .iter()
                .map(|&x| Point::new(vec![x]))
                .collect()
        }
        Domain::Box { min, max } if min.len() == 2 => Ok(box_perimeter_points(min, max, m)),
        Domain::Box { min, max } => Ok(box_face_lattice_points(min, max, m)),
        Domain::Ball { center, radius } if center.len() == 1 => {
            let endpoints = [center[0] - radius, center[0] + radius];
            if m > 2 {
                return Err(Error::UnsupportedStrategy(
                    "a 1D ball boundary has exactly two points".into(),
                ));
            }
            endpoints[..m]
                .iter()
                .map(|&x| Point::new(vec![x]))
                .collect()
        }
        Domain::Ball { center, radius } if center.len() == 2 => {
            let mut pts = Vec::with_capacity(m);
            for k in 0..m {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                pts.push(Point::new(vec![
                    center[0] + radius * theta.cos(),
                    center[1] + radius * theta.sin(),
                ])?);
            }
            Ok(pts)
        }
        Domain::Ball { center, radius } if center.len() == 3 => {
            Ok(fibonacci_sphere_points(center, *radius, m))
        }
        Domain::Ball { .. } => Err(Error::UnsupportedStrategy(
            "equispaced boundary points on balls are only available for d <= 3".into(),
        )),
    }
}

/// Loose upper bound on the min pairwise spacing of `m` points on the
/// boundary: curve length over `m` in the plane, a packing bound on the
/// surface measure above. Overestimates are safe; this only screens
/// requests that cannot possibly satisfy the distinctness tolerance.
fn spacing_upper_bound(domain: &Domain, m: usize) -> f64 {
    let d = domain.dim();
    if m <= 1 || d == 1 {
        return f64::INFINITY;
    }
    let mf = m as f64;
    let area = match domain {
        Domain::Box { min, max } if d == 2 => {
            return 2.0 * ((max[0] - min[0]) + (max[1] - min[1])) / mf;
        }
        Domain::Ball { radius, .. } if d == 2 => {
            return 2.0 * std::f64::consts::PI * radius / mf;
        }
        Domain::Box { min, max } => {
            let sides: Vec<f64> = min.iter().zip(max).map(|(a, b)| b - a).collect();
            let volume: f64 = sides.iter().product();
            2.0 * sides.iter().map(|s| volume / s).sum::<f64>()
        }
        // Crude sphere-measure overestimate: the circumscribing cube.
        Domain::Ball { radius, .. } => 2.0 * d as f64 * (2.0 * radius).powi(d as i32 - 1),
    };
    4.0 * (area / mf).powf(1.0 / (d - 1) as f64)
}

/// Equispaced arc-length walk around a 2D box perimeter, starting at the
/// min corner and proceeding counterclockwise.
fn box_perimeter_points(min: &[f64], max: &[f64], m: usize) -> Vec<Point> {
    let (w, h) = (max[0] - min[0], max[1] - min[1]);
    let perimeter = 2.0 * (w + h);
    let mut pts = Vec::with_capacity(m);
    for k in 0..m {
        let s = perimeter * k as f64 / m as f64;
        let (x, y) = if s < w {
            (min[0] + s, min[1])
        } else if s < w + h {
            (max[0], min[1] + (s - w))
        } else if s < 2.0 * w + h {
            (max[0] - (s - w - h), max[1])
        } else {
            (min[0], max[1] - (s - 2.0 * w - h))
        };
        pts.push(Point::new(vec![x, y]).expect("finite perimeter point"));
    }
    pts
}

/// Deterministic boundary points on a box in dimension `d >= 3`: round-robin
/// over the `2d` faces, with a cell-centered lattice strictly inside each
/// face so points on different faces can never coincide.
fn box_face_lattice_points(min: &[f64], max: &[f64], m: usize) -> Vec<Point> {
    let d = min.len();
    let faces = 2 * d;
    let mut pts = Vec::with_capacity(m);
    for face in 0..faces {
        // Round-robin: the first `m % faces` faces carry one extra point.
        let count = m / faces + usize::from(face < m % faces);
        if count == 0 {
            continue;
        }
        let axis = face / 2;
        let at_max = face % 2 == 1;
        let side = (count as f64).powf(1.0 / (d - 1) as f64).ceil() as usize;
        let side = side.max(1);
        for rank in 0..count {
            let mut idx = rank;
            let mut coords = Vec::with_capacity(d);
            for j in 0..d {
                if j == axis {
                    coords.push(if at_max { max[j] } else { min[j] });
                } else {
                    let cell = idx % side;
                    idx /= side;
                    let frac = (2 * cell + 1) as f64 / (2 * side) as f64;
                    coords.push(min[j] + (max[j] - min[j]) * frac);
                }
            }
            pts.push(Point::new(coords).expect("finite face point"));
        }
    }
    pts.truncate(m);
    pts
}

/// Fibonacci lattice on a 2-sphere: near-uniform, deterministic, distinct.
fn fibonacci_sphere_points(center: &[f64], radius: f64, m: usize) -> Vec<Point> {
    let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut pts = Vec::with_capacity(m);
    for k in 0..m {
        let z = 1.0 - (2.0 * k as f64 + 1.0) / m as f64;
        let rho = (1.0 - z * z).max(0.0).sqrt();
        let phi = 2.0 * std::f64::consts::PI * (k as f64 / golden).fract();
        pts.push(
            Point::new(vec![
                center[0] + radius * rho * phi.cos(),
                center[1] + radius * rho * phi.sin(),
                center[2] + radius * z,
            ])
            .expect("finite sphere point"),
        );
    }
    pts
}

fn random_boundary(domain: &Domain, m: usize, seed: &SeedSpec) -> Result<Vec<Point>> {
    let mut rng = seed.rng();
    let tol = BOUNDARY_DISTINCTNESS_RTOL * domain.diameter();
    let mut pts: Vec<Point> = Vec::with_capacity(m);
    let max_attempts = 1000 * m as u64 + 1000;
    let mut attempts = 0;
    while pts.len() < m {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::BoundaryNotDistinct(format!(
                "could not place {m} distinct random boundary points"
            )));
        }
        let candidate = random_boundary_point(domain, &mut rng)?;
        if pts.iter().all(|p| p.distance(&candidate) > tol) {
            pts.push(candidate);
        }
    }
    Ok(pts)
}

fn random_boundary_point(domain: &Domain, rng: &mut impl Rng) -> Result<Point> {
    match domain {
        Domain::Box { min, max } => {
            let d = min.len();
            // Pick a face with probability proportional to its area.
            let mut areas = Vec::with_capacity(2 * d);
            let full: f64 = min.iter().zip(max).map(|(lo, hi)| hi - lo).product();
            for axis in 0..d {
                let face_area = full / (max[axis] - min[axis]);
                areas.push(face_area);
                areas.push(face_area);
            }
            let total: f64 = areas.iter().sum();
            let mut pick = rng.random::<f64>() * total;
            let mut face = 0;
            for (i, a) in areas.iter().enumerate() {
                if pick < *a || i == areas.len() - 1 {
                    face = i;
                    break;
                }
                pick -= a;
            }
            let axis = face / 2;
            let at_max = face % 2 == 1;
            let coords: Vec<f64> = (0..d)
                .map(|j| {
                    if j == axis {
                        if at_max {
                            max[j]
                        } else {
                            min[j]
                        }
                    } else {
                        rng.random_range(min[j]..max[j])
                    }
                })
                .collect();
            Point::new(coords)
        }
        Domain::Ball { center, radius } => {
            // Normalized Gaussian direction.
            loop {
                let dir: Vec<f64> = (0..center.len()).map(|_| standard_normal(rng)).collect();
                let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    let coords = center
                        .iter()
                        .zip(&dir)
                        .map(|(c, u)| c + radius * u / norm)
                        .collect();
                    return Point::new(coords);
                }
            }
        }
    }
}

/// Box-Muller standard normal draw (keeps the RNG dependency surface small).
fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
