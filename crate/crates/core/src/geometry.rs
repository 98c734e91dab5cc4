//! Domains, collocation point sets and boundary normals.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::operators::LinearDiffOperator;

/// Absolute residual below which a point counts as lying on the boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Number of angles used to probe a star-shaped radius function.
const RADIUS_PROBES: usize = 720;

const MAX_REJECTIONS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Interval { a: f64, b: f64 },
    UnitDisk,
    /// `{ (r cos t, r sin t) : 0 <= r <= radius(t) }`, with `radius` written in
    /// the variable `x1` standing for the angle `t`.
    StarShaped { radius: Expression },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingStrategy {
    /// `a + j (b - a) / (n + 1)` for `j = 1..n` (intervals only).
    Equidistant,
    /// Fibonacci lattice scaled into the domain (2D domains only).
    Sunflower,
    /// Rejection sampling from the bounding box with a seeded ChaCha8 stream.
    UniformRandom { seed: u64 },
}

impl SamplingStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            SamplingStrategy::Equidistant => "equidistant",
            SamplingStrategy::Sunflower => "sunflower",
            SamplingStrategy::UniformRandom { .. } => "uniform_random",
        }
    }
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidDomain(format!("interval needs a < b, got [{a}, {b}]")));
        }
        Ok(Domain::Interval { a, b })
    }

    pub fn star_shaped(radius: Expression) -> Result<Self> {
        if radius.arity() > 1 {
            return Err(Error::InvalidDomain(
                "star-shaped radius may only depend on x1 (the angle)".into(),
            ));
        }
        let dom = Domain::StarShaped { radius };
        for k in 0..RADIUS_PROBES {
            let theta = TAU * k as f64 / RADIUS_PROBES as f64;
            let r = dom.radius_at(theta)?;
            if r <= 0.0 {
                return Err(Error::InvalidDomain(format!(
                    "star-shaped radius must be positive, got {r} at angle {theta}"
                )));
            }
        }
        Ok(dom)
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::UnitDisk | Domain::StarShaped { .. } => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Domain::Interval { .. } => "interval",
            Domain::UnitDisk => "unit disk",
            Domain::StarShaped { .. } => "star-shaped domain",
        }
    }

    fn radius_at(&self, theta: f64) -> Result<f64> {
        match self {
            Domain::UnitDisk => Ok(1.0),
            Domain::StarShaped { radius } => radius.evaluate(&[theta]),
            Domain::Interval { .. } => unreachable!("intervals have no radius function"),
        }
    }

    /// Axis-aligned bounding box as `(lower, upper)` corners.
    pub fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        match self {
            Domain::Interval { a, b } => Ok((vec![*a], vec![*b])),
            Domain::UnitDisk => Ok((vec![-1.0, -1.0], vec![1.0, 1.0])),
            Domain::StarShaped { .. } => {
                let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
                for k in 0..RADIUS_PROBES {
                    let t = TAU * k as f64 / RADIUS_PROBES as f64;
                    let r = self.radius_at(t)?;
                    for (i, v) in [r * t.cos(), r * t.sin()].into_iter().enumerate() {
                        lo[i] = lo[i].min(v);
                        hi[i] = hi[i].max(v);
                    }
                }
                Ok((lo.to_vec(), hi.to_vec()))
            }
        }
    }

    /// Largest distance between two points of the closed domain.
    pub fn diameter(&self) -> Result<f64> {
        match self {
            Domain::Interval { a, b } => Ok(b - a),
            Domain::UnitDisk => Ok(2.0),
            Domain::StarShaped { .. } => {
                let pts = self.sample_boundary(360)?;
                let mut best = 0.0_f64;
                for (i, p) in pts.iter().enumerate() {
                    for q in &pts[i + 1..] {
                        best = best.max(distance(p, q));
                    }
                }
                Ok(best)
            }
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Signed distance-like residual of the boundary equation: negative
    /// inside, zero on the boundary, positive outside.
    pub fn boundary_residual(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        match self {
            Domain::Interval { a, b } => Ok((a - x[0]).max(x[0] - b)),
            Domain::UnitDisk => Ok(x[0].hypot(x[1]) - 1.0),
            Domain::StarShaped { .. } => {
                let theta = x[1].atan2(x[0]);
                Ok(x[0].hypot(x[1]) - self.radius_at(theta)?)
            }
        }
    }

    pub fn on_boundary(&self, x: &[f64]) -> Result<bool> {
        Ok(self.boundary_residual(x)?.abs() <= BOUNDARY_TOLERANCE)
    }

    /// Strict interior membership: inside and not on the boundary.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self.boundary_residual(x)? < -BOUNDARY_TOLERANCE)
    }

    /// Membership in the closed domain.
    pub fn contains_closed(&self, x: &[f64]) -> Result<bool> {
        Ok(self.boundary_residual(x)? <= BOUNDARY_TOLERANCE)
    }

    pub fn sample_interior(&self, n: usize, strategy: SamplingStrategy) -> Result<Vec<Vec<f64>>> {
        if n == 0 {
            return Err(Error::InvalidDiscretization("need at least one interior point".into()));
        }
        match (self, strategy) {
            (Domain::Interval { a, b }, SamplingStrategy::Equidistant) => {
                let h = (b - a) / (n + 1) as f64;
                Ok((1..=n).map(|j| vec![a + j as f64 * h]).collect())
            }
            (Domain::UnitDisk | Domain::StarShaped { .. }, SamplingStrategy::Sunflower) => {
                let golden = PI * (3.0 - 5.0_f64.sqrt());
                (1..=n)
                    .map(|i| {
                        let theta = (i as f64 * golden).rem_euclid(TAU);
                        let r = ((i as f64 - 0.5) / n as f64).sqrt() * self.radius_at(theta)?;
                        Ok(vec![r * theta.cos(), r * theta.sin()])
                    })
                    .collect()
            }
            (_, SamplingStrategy::UniformRandom { seed }) => self.sample_uniform(n, seed),
            (_, s) => Err(Error::UnsupportedStrategy {
                strategy: s.name(),
                domain: self.name(),
            }),
        }
    }

    fn sample_uniform(&self, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = self.bounding_box()?;
        let mut out = Vec::with_capacity(n);
        let mut tries = 0;
        while out.len() < n {
            tries += 1;
            if tries > MAX_REJECTIONS {
                return Err(Error::InvalidDomain("rejection sampling did not terminate".into()));
            }
            let p: Vec<f64> = lo
                .iter()
                .zip(&hi)
                .map(|(l, h)| l + (h - l) * rng.gen::<f64>())
                .collect();
            if self.contains(&p)? {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// `n` boundary points equispaced in the boundary parameter. Intervals
    /// always have exactly the two endpoints.
    pub fn sample_boundary(&self, n: usize) -> Result<Vec<Vec<f64>>> {
        match self {
            Domain::Interval { a, b } => match n {
                2 => Ok(vec![vec![*a], vec![*b]]),
                _ => Err(Error::InvalidDiscretization(format!(
                    "an interval has exactly 2 boundary points, {n} requested"
                ))),
            },
            _ if n == 0 => Err(Error::InvalidDiscretization("need at least one boundary point".into())),
            _ => (0..n)
                .map(|j| {
                    let theta = TAU * j as f64 / n as f64;
                    let r = self.radius_at(theta)?;
                    Ok(vec![r * theta.cos(), r * theta.sin()])
                })
                .collect(),
        }
    }

    /// Unit outward normal at a boundary point.
    pub fn outward_normal(&self, x: &[f64]) -> Result<Vec<f64>> {
        if !self.on_boundary(x)? {
            return Err(Error::NotOnBoundary { point: x.to_vec() });
        }
        match self {
            Domain::Interval { a, b } => {
                Ok(vec![if (x[0] - a).abs() <= (x[0] - b).abs() { -1.0 } else { 1.0 }])
            }
            Domain::UnitDisk => {
                let r = x[0].hypot(x[1]);
                Ok(vec![x[0] / r, x[1] / r])
            }
            Domain::StarShaped { .. } => {
                let theta = x[1].atan2(x[0]);
                let h = 1e-6;
                let r = self.radius_at(theta)?;
                let dr = (self.radius_at(theta + h)? - self.radius_at(theta - h)?) / (2.0 * h);
                let (c, s) = (theta.cos(), theta.sin());
                // Counter-clockwise tangent (dr c - r s, dr s + r c) rotated by -90 degrees.
                let n = [dr * s + r * c, r * s - dr * c];
                let len = n[0].hypot(n[1]);
                Ok(vec![n[0] / len, n[1] / len])
            }
        }
    }

    /// Reference point for normal-orientation checks.
    pub fn centroid(&self) -> Vec<f64> {
        match self {
            Domain::Interval { a, b } => vec![0.5 * (a + b)],
            _ => vec![0.0, 0.0],
        }
    }
}

pub fn distance(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// A boundary collocation point with its operator `B_j` and datum `g(x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDatum {
    pub point: Vec<f64>,
    pub operator: LinearDiffOperator,
    pub value: f64,
}

/// Interior points `X^i` and boundary observations `X^b`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Discretization {
    pub interior: Vec<Vec<f64>>,
    pub boundary: Vec<BoundaryDatum>,
}

impl Discretization {
    pub fn len(&self) -> usize {
        self.interior.len() + self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Checks containment, the on-boundary residual and that no two
    /// observations coincide.
    pub fn validate(&self, domain: &Domain) -> Result<()> {
        for p in &self.interior {
            if !domain.contains(p)? {
                return Err(Error::InvalidDiscretization(format!(
                    "interior point {p:?} is not strictly inside the {}",
                    domain.name()
                )));
            }
        }
        for b in &self.boundary {
            if !domain.on_boundary(&b.point)? {
                return Err(Error::NotOnBoundary {
                    point: b.point.clone(),
                });
            }
        }
        let min_gap = 1e-9 * domain.diameter()?;
        let points: Vec<(&[f64], Option<&LinearDiffOperator>)> = self
            .interior
            .iter()
            .map(|p| (p.as_slice(), None))
            .chain(self.boundary.iter().map(|b| (b.point.as_slice(), Some(&b.operator))))
            .collect();
        for (i, (p, op_p)) in points.iter().enumerate() {
            for (q, op_q) in &points[i + 1..] {
                // A boundary point may carry several different conditions.
                let distinct_conditions = matches!((op_p, op_q), (Some(a), Some(b)) if a != b);
                if distance(p, q) <= min_gap && !distinct_conditions {
                    return Err(Error::InvalidDiscretization(format!(
                        "points {p:?} and {q:?} coincide"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(src: &str) -> Domain {
        Domain::star_shaped(Expression::parse(src).unwrap()).unwrap()
    }

    #[test]
    fn equidistant_interval_excludes_endpoints() {
        let d = Domain::interval(0.0, 3.0).unwrap();
        let pts = d.sample_interior(2, SamplingStrategy::Equidistant).unwrap();
        assert_eq!(pts, vec![vec![1.0], vec![2.0]]);
        assert_eq!(d.sample_boundary(2).unwrap(), vec![vec![0.0], vec![3.0]]);
        assert!(d.sample_boundary(3).is_err());
    }

    #[test]
    fn sunflower_points_are_inside_disk() {
        let pts = Domain::UnitDisk.sample_interior(16, SamplingStrategy::Sunflower).unwrap();
        assert_eq!(pts.len(), 16);
        for p in &pts {
            assert!(p[0] * p[0] + p[1] * p[1] < 1.0);
        }
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let s = SamplingStrategy::UniformRandom { seed: 7 };
        let a = Domain::UnitDisk.sample_interior(50, s).unwrap();
        let b = Domain::UnitDisk.sample_interior(50, s).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| Domain::UnitDisk.contains(p).unwrap()));
        let c = Domain::UnitDisk
            .sample_interior(50, SamplingStrategy::UniformRandom { seed: 8 })
            .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unsupported_strategies() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        assert!(matches!(
            d.sample_interior(4, SamplingStrategy::Sunflower),
            Err(Error::UnsupportedStrategy { .. })
        ));
        assert!(Domain::UnitDisk.sample_interior(4, SamplingStrategy::Equidistant).is_err());
        assert!(Domain::UnitDisk.sample_interior(0, SamplingStrategy::Sunflower).is_err());
    }

    #[test]
    fn disk_boundary_points() {
        let pts = Domain::UnitDisk.sample_boundary(4).unwrap();
        let want = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (p, w) in pts.iter().zip(want) {
            assert!(distance(p, &w) < 1e-15);
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-12);
        }
        let five = Domain::UnitDisk.sample_boundary(5).unwrap();
        for j in 0..5 {
            let (p, q) = (&five[j], &five[(j + 1) % 5]);
            let gap = (p[0] * q[0] + p[1] * q[1]).clamp(-1.0, 1.0).acos();
            assert!((gap - TAU / 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn normals() {
        let d = Domain::interval(0.0, 3.0).unwrap();
        assert_eq!(d.outward_normal(&[0.0]).unwrap(), vec![-1.0]);
        assert_eq!(d.outward_normal(&[3.0]).unwrap(), vec![1.0]);
        let n = Domain::UnitDisk.outward_normal(&[0.6, 0.8]).unwrap();
        assert!((n[0] - 0.6).abs() < 1e-15 && (n[1] - 0.8).abs() < 1e-15);
        let n = star("1").outward_normal(&[1.0, 0.0]).unwrap();
        assert!((n[0] - 1.0).abs() < 1e-12 && n[1].abs() < 1e-9);
        assert!(matches!(
            Domain::UnitDisk.outward_normal(&[0.5, 0.0]),
            Err(Error::NotOnBoundary { .. })
        ));
    }

    #[test]
    fn star_normals_are_unit_and_outward() {
        let d = star("0.8*(1+0.2*cos(3*x1))");
        for p in d.sample_boundary(37).unwrap() {
            let n = d.outward_normal(&p).unwrap();
            assert!((n[0].hypot(n[1]) - 1.0).abs() < 1e-12);
            assert!(n[0] * p[0] + n[1] * p[1] > 0.0);
        }
    }

    #[test]
    fn star_domain_rejects_nonpositive_radius() {
        assert!(Domain::star_shaped(Expression::parse("cos(x1)").unwrap()).is_err());
        assert!(Domain::star_shaped(Expression::parse("x2").unwrap()).is_err());
    }

    #[test]
    fn membership() {
        let d = star("0.8*(1+0.2*cos(3*x1))");
        assert!(d.contains(&[0.0, 0.0]).unwrap());
        assert!(!d.contains(&[0.96, 0.0]).unwrap());
        assert!(d.on_boundary(&[0.96, 0.0]).unwrap());
        assert!(d.contains_closed(&[0.96, 0.0]).unwrap());
        assert!(!d.contains_closed(&[0.97, 0.0]).unwrap());
        assert!((Domain::UnitDisk.diameter().unwrap() - 2.0).abs() < 1e-15);
        let diam = d.diameter().unwrap();
        assert!(diam > 1.6 && diam < 1.92, "{diam}");
    }

    #[test]
    fn validation_catches_bad_point_sets() {
        let d = Domain::UnitDisk;
        let ok = Discretization {
            interior: vec![vec![0.0, 0.0], vec![0.5, 0.0]],
            boundary: vec![BoundaryDatum {
                point: vec![1.0, 0.0],
                operator: LinearDiffOperator::identity(2),
                value: 0.0,
            }],
        };
        ok.validate(&d).unwrap();

        let mut dup = ok.clone();
        dup.interior.push(vec![0.5, 0.0]);
        assert!(dup.validate(&d).is_err());

        let mut outside = ok.clone();
        outside.interior.push(vec![1.5, 0.0]);
        assert!(outside.validate(&d).is_err());

        let mut off = ok.clone();
        off.boundary[0].point = vec![0.9, 0.0];
        assert!(matches!(off.validate(&d), Err(Error::NotOnBoundary { .. })));
    }
}
