//! Domains `D ⊊ R^n` described by an exact boundary-distance function.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{Error, Result};

/// Ratio between the node-exclusion clip depth and the bounding-box diameter.
pub const CLIP_FRACTION: f64 = 1e-6;

/// Axis-aligned box; every sampling step of a domain stays inside it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl BBox {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() || min.len() < 2 {
            return Err(Error::InvalidParameter(
                "bbox corners must share a dimension >= 2".into(),
            ));
        }
        if min.iter().zip(&max).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidParameter(
                "bbox needs finite min < max in every axis".into(),
            ));
        }
        Ok(Self { min, max })
    }

    pub fn cube(center: &[f64], half: f64) -> Self {
        Self {
            min: center.iter().map(|c| c - half).collect(),
            max: center.iter().map(|c| c + half).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn diam(&self) -> f64 {
        self.min
            .iter()
            .zip(&self.max)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.coords()
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .all(|(c, (lo, hi))| *c >= *lo && *c <= *hi)
    }

    /// Euclidean distance from an inside point to the faces of the box.
    pub fn face_distance(&self, x: &Point) -> f64 {
        x.coords()
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(c, (lo, hi))| (c - lo).min(hi - c))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Signed boundary-distance oracle for user-defined domains: positive inside,
/// negative outside, magnitude equal to the distance to `∂D`.
pub type SignedDistanceFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
/// Boundary sampler `(count, seed) -> points on ∂D`.
pub type BoundarySamplerFn = Arc<dyn Fn(usize, u64) -> Vec<Point> + Send + Sync>;

#[derive(Clone)]
pub struct CustomDomain {
    pub name: String,
    pub dim: usize,
    pub signed_distance: SignedDistanceFn,
    pub boundary_sampler: Option<BoundarySamplerFn>,
    pub bounded: bool,
}

impl fmt::Debug for CustomDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDomain")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("bounded", &self.bounded)
            .finish()
    }
}

/// The builtin domain families, each with a closed-form boundary distance.
#[derive(Clone, Debug)]
pub enum DomainKind {
    Ball { center: Point, radius: f64 },
    PuncturedBall { center: Point, radius: f64 },
    Annulus { center: Point, inner: f64, outer: f64 },
    /// `{x : normal·x > offset}` with a unit normal.
    HalfSpace { normal: Point, offset: f64 },
    PuncturedSpace { center: Point },
    /// `R^3` minus the line `point + t·direction` (unit direction).
    AxisLineComplement { point: Point, direction: Point },
    /// `{x : lower < normal·x < upper}` with a unit normal.
    Slab { normal: Point, lower: f64, upper: f64 },
    Custom(CustomDomain),
}

impl DomainKind {
    pub fn dim(&self) -> usize {
        match self {
            DomainKind::Ball { center, .. }
            | DomainKind::PuncturedBall { center, .. }
            | DomainKind::Annulus { center, .. }
            | DomainKind::PuncturedSpace { center } => center.dim(),
            DomainKind::HalfSpace { normal, .. } | DomainKind::Slab { normal, .. } => normal.dim(),
            DomainKind::AxisLineComplement { point, .. } => point.dim(),
            DomainKind::Custom(c) => c.dim,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        match self {
            DomainKind::Ball { radius, .. } | DomainKind::PuncturedBall { radius, .. } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return bad("radius must be positive");
                }
            }
            DomainKind::Annulus { inner, outer, .. } => {
                if !(*inner > 0.0 && inner < outer) || !outer.is_finite() {
                    return bad("annulus needs 0 < inner < outer");
                }
            }
            DomainKind::HalfSpace { normal, offset } => {
                if (normal.norm() - 1.0).abs() > 1e-12 || !offset.is_finite() {
                    return bad("half-space normal must be a unit vector");
                }
            }
            DomainKind::Slab {
                normal,
                lower,
                upper,
            } => {
                if (normal.norm() - 1.0).abs() > 1e-12 || !(lower < upper) {
                    return bad("slab needs a unit normal and lower < upper");
                }
            }
            DomainKind::AxisLineComplement { point, direction } => {
                if point.dim() != 3 || direction.dim() != 3 {
                    return bad("axis-line complement lives in R^3");
                }
                if (direction.norm() - 1.0).abs() > 1e-12 {
                    return bad("axis direction must be a unit vector");
                }
            }
            DomainKind::PuncturedSpace { .. } => {}
            DomainKind::Custom(c) => {
                if c.dim < 2 {
                    return bad("custom domain dimension must be >= 2");
                }
            }
        }
        Ok(())
    }

    fn default_bbox(&self) -> Result<BBox> {
        Ok(match self {
            DomainKind::Ball { center, radius } | DomainKind::PuncturedBall { center, radius } => {
                BBox::cube(center.coords(), *radius)
            }
            DomainKind::Annulus { center, outer, .. } => BBox::cube(center.coords(), *outer),
            DomainKind::HalfSpace { normal, offset } => {
                let c = normal.scale(offset + 8.0);
                BBox::cube(c.coords(), 8.0)
            }
            DomainKind::Slab {
                normal,
                lower,
                upper,
            } => {
                let c = normal.scale(0.5 * (lower + upper));
                BBox::cube(c.coords(), 2.0 * (upper - lower))
            }
            DomainKind::PuncturedSpace { center } => BBox::cube(center.coords(), 4.0),
            DomainKind::AxisLineComplement { point, .. } => BBox::cube(point.coords(), 2.0),
            DomainKind::Custom(_) => {
                return Err(Error::InvalidParameter(
                    "custom domains need an explicit bbox".into(),
                ))
            }
        })
    }
}

/// A domain together with the box used for all sampling.
#[derive(Clone, Debug)]
pub struct Domain {
    kind: DomainKind,
    bbox: BBox,
}

impl Domain {
    pub fn new(kind: DomainKind) -> Result<Self> {
        kind.validate()?;
        let bbox = kind.default_bbox()?;
        Ok(Self { kind, bbox })
    }

    pub fn with_bbox(kind: DomainKind, bbox: BBox) -> Result<Self> {
        kind.validate()?;
        if bbox.dim() != kind.dim() {
            return Err(Error::DimensionMismatch {
                expected: kind.dim(),
                got: bbox.dim(),
            });
        }
        Ok(Self { kind, bbox })
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        Self::new(DomainKind::Ball { center, radius })
    }

    pub fn unit_disk() -> Self {
        Self::ball(Point::xy(0.0, 0.0), 1.0).expect("valid")
    }

    pub fn punctured_ball(center: Point, radius: f64) -> Result<Self> {
        Self::new(DomainKind::PuncturedBall { center, radius })
    }

    pub fn punctured_unit_disk() -> Self {
        Self::punctured_ball(Point::xy(0.0, 0.0), 1.0).expect("valid")
    }

    pub fn annulus(center: Point, inner: f64, outer: f64) -> Result<Self> {
        Self::new(DomainKind::Annulus {
            center,
            inner,
            outer,
        })
    }

    /// The upper half-plane `{y > 0}`.
    pub fn upper_half_plane() -> Self {
        Self::new(DomainKind::HalfSpace {
            normal: Point::xy(0.0, 1.0),
            offset: 0.0,
        })
        .expect("valid")
    }

    pub fn punctured_plane() -> Self {
        Self::new(DomainKind::PuncturedSpace {
            center: Point::xy(0.0, 0.0),
        })
        .expect("valid")
    }

    /// `R^3` minus the `z`-axis.
    pub fn z_axis_complement() -> Self {
        Self::new(DomainKind::AxisLineComplement {
            point: Point::xyz(0.0, 0.0, 0.0),
            direction: Point::xyz(0.0, 0.0, 1.0),
        })
        .expect("valid")
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn bbox(&self) -> &BBox {
        &self.bbox
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn is_bounded(&self) -> bool {
        match &self.kind {
            DomainKind::Ball { .. } | DomainKind::PuncturedBall { .. } | DomainKind::Annulus { .. } => {
                true
            }
            DomainKind::Custom(c) => c.bounded,
            _ => false,
        }
    }

    /// Stable textual identifier used in provenance records.
    pub fn id(&self) -> String {
        let p = |x: &Point| format!("{:?}", x.coords());
        match &self.kind {
            DomainKind::Ball { center, radius } => format!("ball(c={},r={radius})", p(center)),
            DomainKind::PuncturedBall { center, radius } => {
                format!("punctured_ball(c={},r={radius})", p(center))
            }
            DomainKind::Annulus {
                center,
                inner,
                outer,
            } => format!("annulus(c={},r_in={inner},r_out={outer})", p(center)),
            DomainKind::HalfSpace { normal, offset } => {
                format!("half_space(n={},offset={offset})", p(normal))
            }
            DomainKind::PuncturedSpace { center } => format!("punctured_space(c={})", p(center)),
            DomainKind::AxisLineComplement { point, direction } => {
                format!("axis_line_complement(p={},dir={})", p(point), p(direction))
            }
            DomainKind::Slab {
                normal,
                lower,
                upper,
            } => format!("slab(n={},lo={lower},hi={upper})", p(normal)),
            DomainKind::Custom(c) => format!("custom({})", c.name),
        }
    }

    /// Depth below which graph nodes and quadrature nodes are rejected.
    pub fn min_clip(&self) -> f64 {
        CLIP_FRACTION * self.bbox.diam()
    }

    /// Signed distance to `∂D`: positive inside, non-positive outside.
    pub fn signed_distance(&self, x: &Point) -> f64 {
        let c = x.coords();
        match &self.kind {
            DomainKind::Ball { center, radius } => radius - x.dist(center),
            DomainKind::PuncturedBall { center, radius } => {
                let rho = x.dist(center);
                if rho == 0.0 {
                    0.0
                } else {
                    rho.min(radius - rho)
                }
            }
            DomainKind::Annulus {
                center,
                inner,
                outer,
            } => {
                let rho = x.dist(center);
                (rho - inner).min(outer - rho)
            }
            DomainKind::HalfSpace { normal, offset } => normal.dot(x) - offset,
            DomainKind::PuncturedSpace { center } => x.dist(center),
            DomainKind::AxisLineComplement { point, direction } => {
                let v = x.sub(point);
                let t = v.dot(direction);
                let perp: f64 = v
                    .coords()
                    .iter()
                    .zip(direction.coords())
                    .map(|(a, d)| {
                        let q = a - t * d;
                        q * q
                    })
                    .sum();
                perp.sqrt()
            }
            DomainKind::Slab {
                normal,
                lower,
                upper,
            } => {
                let s = normal.dot(x);
                (s - lower).min(upper - s)
            }
            DomainKind::Custom(cd) => {
                debug_assert_eq!(c.len(), cd.dim);
                (cd.signed_distance)(x)
            }
        }
    }

    /// `d(x) = dist(x, ∂D)`; for points outside `D` the unsigned distance.
    pub fn boundary_distance(&self, x: &Point) -> Result<f64> {
        x.check_dim(self.dim())?;
        Ok(self.dist_unchecked(x))
    }

    #[inline]
    pub(crate) fn dist_unchecked(&self, x: &Point) -> f64 {
        self.signed_distance(x).abs()
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.dim() == self.dim() && self.signed_distance(x) > 0.0
    }

    /// Points on `∂D` (finite part only; `∞` is never represented).
    pub fn boundary_sample(&self, count: usize, seed: u64) -> Result<Vec<Point>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = self.dim();
        let pts = match &self.kind {
            DomainKind::Ball { center, radius } => sphere_points(center, *radius, count, &mut rng),
            DomainKind::PuncturedBall { center, radius } => {
                let mut v = vec![center.clone()];
                v.extend(sphere_points(center, *radius, count.saturating_sub(1), &mut rng));
                v
            }
            DomainKind::Annulus {
                center,
                inner,
                outer,
            } => {
                let n_in = ((count as f64) * inner / (inner + outer)).round().max(1.0) as usize;
                let n_out = count.saturating_sub(n_in).max(1);
                let mut v = sphere_points(center, *inner, n_in, &mut rng);
                v.extend(sphere_points(center, *outer, n_out, &mut rng));
                v
            }
            DomainKind::HalfSpace { normal, offset } => (0..count)
                .map(|_| project_to_plane(&self.random_in_bbox(&mut rng), normal, *offset))
                .collect(),
            DomainKind::Slab {
                normal,
                lower,
                upper,
            } => (0..count)
                .map(|i| {
                    let off = if i % 2 == 0 { *lower } else { *upper };
                    project_to_plane(&self.random_in_bbox(&mut rng), normal, off)
                })
                .collect(),
            DomainKind::PuncturedSpace { center } => vec![center.clone()],
            DomainKind::AxisLineComplement { point, direction } => {
                let (lo, hi) = self.line_parameter_range(point, direction);
                let n = count.max(1);
                (0..n)
                    .map(|i| {
                        let t = if n == 1 {
                            0.5 * (lo + hi)
                        } else {
                            lo + (hi - lo) * i as f64 / (n - 1) as f64
                        };
                        point.add(&direction.scale(t))
                    })
                    .collect()
            }
            DomainKind::Custom(cd) => match &cd.boundary_sampler {
                Some(f) => f(count, seed),
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "custom domain `{}` has no boundary sampler",
                        cd.name
                    )))
                }
            },
        };
        debug_assert!(pts.iter().all(|p| p.dim() == dim));
        Ok(pts)
    }

    fn line_parameter_range(&self, point: &Point, direction: &Point) -> (f64, f64) {
        // parameter interval of the line inside the bbox, per axis slab
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for ((p, d), (bmin, bmax)) in point
            .coords()
            .iter()
            .zip(direction.coords())
            .zip(self.bbox.min.iter().zip(&self.bbox.max))
        {
            if d.abs() > 1e-15 {
                let (a, b) = ((bmin - p) / d, (bmax - p) / d);
                lo = lo.max(a.min(b));
                hi = hi.min(a.max(b));
            }
        }
        (lo, hi)
    }

    pub(crate) fn random_in_bbox<R: Rng>(&self, rng: &mut R) -> Point {
        Point::from_vec(
            self.bbox
                .min
                .iter()
                .zip(&self.bbox.max)
                .map(|(lo, hi)| rng.gen_range(*lo..*hi))
                .collect(),
        )
    }

    /// Uniform rejection sample of `count` points of `D ∩ bbox` with `d(x) >= min_depth`.
    pub fn interior_sample(&self, count: usize, min_depth: f64, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        while out.len() < count && attempts < count.saturating_mul(10_000).max(100_000) {
            attempts += 1;
            let x = self.random_in_bbox(&mut rng);
            if self.signed_distance(&x) > min_depth {
                out.push(x);
            }
        }
        out
    }

    /// True when `x` lies within `width` of a bbox face of an unbounded domain
    /// that cuts through `D`. Faces lying on `∂D` are not truncations.
    pub fn in_truncation_shell(&self, x: &Point, width: f64) -> bool {
        if self.is_bounded() {
            return false;
        }
        let c = x.coords();
        (0..c.len()).any(|i| {
            [self.bbox.min[i], self.bbox.max[i]].into_iter().any(|face| {
                if (c[i] - face).abs() > width {
                    return false;
                }
                let mut p = c.to_vec();
                p[i] = face;
                Point::new(p).map_or(true, |p| self.signed_distance(&p) > self.min_clip())
            })
        })
    }
}

fn project_to_plane(x: &Point, normal: &Point, offset: f64) -> Point {
    let s = normal.dot(x) - offset;
    x.sub(&normal.scale(s))
}

/// Points on the sphere `S(center, radius)`: equally spaced with a seeded phase in
/// the plane, a seeded Fibonacci lattice in higher dimensions.
pub(crate) fn sphere_points<R: Rng>(
    center: &Point,
    radius: f64,
    count: usize,
    rng: &mut R,
) -> Vec<Point> {
    if count == 0 {
        return Vec::new();
    }
    let dim = center.dim();
    let phase = rng.gen_range(0.0..2.0 * PI / count as f64);
    if dim == 2 {
        (0..count)
            .map(|i| {
                let t = phase + 2.0 * PI * i as f64 / count as f64;
                Point::xy(
                    center.coords()[0] + radius * t.cos(),
                    center.coords()[1] + radius * t.sin(),
                )
            })
            .collect()
    } else {
        fibonacci_sphere(count, phase)
            .into_iter()
            .map(|u| {
                let mut c = center.coords().to_vec();
                for (ci, ui) in c.iter_mut().zip(&u) {
                    *ci += radius * ui;
                }
                Point::from_vec(c)
            })
            .collect()
    }
}

/// Low-discrepancy unit vectors on `S^2` (remaining coordinates zero when `dim > 3`).
pub fn fibonacci_sphere(count: usize, phase: f64) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let t = phase + golden * i as f64;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_distances() {
        let ball = Domain::unit_disk();
        assert_eq!(ball.boundary_distance(&Point::xy(0.5, 0.0)).unwrap(), 0.5);
        let pb = Domain::punctured_unit_disk();
        assert_eq!(pb.boundary_distance(&Point::xy(0.25, 0.0)).unwrap(), 0.25);
        let hp = Domain::upper_half_plane();
        assert_eq!(hp.boundary_distance(&Point::xy(3.0, 2.0)).unwrap(), 2.0);
        let z = Domain::z_axis_complement();
        assert_eq!(z.boundary_distance(&Point::xyz(3.0, 4.0, 7.0)).unwrap(), 5.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ball = Domain::unit_disk();
        assert_eq!(
            ball.boundary_distance(&Point::xyz(0.0, 0.0, 0.0)),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 3
            })
        );
    }

    #[test]
    fn outside_points_get_unsigned_distance() {
        let ball = Domain::unit_disk();
        let x = Point::xy(2.0, 0.0);
        assert!(!ball.contains(&x));
        assert_eq!(ball.boundary_distance(&x).unwrap(), 1.0);
        let pb = Domain::punctured_unit_disk();
        assert!(!pb.contains(&Point::xy(0.0, 0.0)));
        assert_eq!(pb.boundary_distance(&Point::xy(0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn boundary_samples_sit_on_the_boundary() {
        let doms = vec![
            Domain::unit_disk(),
            Domain::punctured_unit_disk(),
            Domain::annulus(Point::xy(0.0, 0.0), 0.5, 1.0).unwrap(),
            Domain::upper_half_plane(),
            Domain::punctured_plane(),
            Domain::z_axis_complement(),
            Domain::ball(Point::xyz(0.0, 0.0, 0.0), 2.0).unwrap(),
        ];
        for d in doms {
            let pts = d.boundary_sample(100, 3).unwrap();
            assert!(!pts.is_empty());
            for p in pts {
                assert!(d.boundary_distance(&p).unwrap() <= 1e-12, "{} {:?}", d.id(), p);
            }
        }
    }

    #[test]
    fn contains_matches_positive_distance() {
        let doms = vec![
            Domain::unit_disk(),
            Domain::punctured_unit_disk(),
            Domain::annulus(Point::xy(0.0, 0.0), 0.5, 1.0).unwrap(),
            Domain::upper_half_plane(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in doms {
            for _ in 0..1000 {
                let x = d.random_in_bbox(&mut rng);
                let inside = d.contains(&x);
                let dist = d.signed_distance(&x);
                assert_eq!(inside, dist > 0.0);
            }
        }
    }
}
