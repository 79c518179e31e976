//! Self-maps of the example domains, the metric dilatation estimate, and the
//! boundary-identity check.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{fibonacci_sphere, Domain, Point};

/// Map families with their parameters. Centers and axes default to the origin
/// and the `z` axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapKind {
    Identity,
    /// Rotation by `angle` about `center` (plane) or about the line through
    /// `center` with direction `axis` (space).
    RotationAboutAxis {
        angle: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default)]
        axis: Option<Vec<f64>>,
    },
    /// `f(x) = |x − c|(x − c) + c`.
    RadialStretch {
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// `f(x) = |x − c|^{α−1}(x − c) + c`.
    RadialPower {
        alpha: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// In polar coordinates about `center`, `θ ↦ θ + β(ρ − r_in)(r_out − ρ)` for
    /// `r_in ≤ ρ ≤ r_out`; the identity elsewhere. Acts on the first two coordinates.
    AnnulusTwist {
        beta: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
        inner: f64,
        outer: f64,
    },
    /// Möbius automorphism of the ball `B(center, radius)`: the normalised map
    /// sending `a` to the center, followed by a rotation by `angle` in the
    /// first coordinate plane.
    Mobius {
        a: Vec<f64>,
        #[serde(default)]
        angle: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        radius: f64,
    },
    /// `f(x) = Mx + b`.
    Affine { matrix: Vec<Vec<f64>>, shift: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

fn center_or_origin(c: &Option<Vec<f64>>, dim: usize) -> Vec<f64> {
    c.clone().unwrap_or_else(|| vec![0.0; dim])
}

fn rotate_plane(v: &mut [f64], angle: f64) {
    let (s, c) = angle.sin_cos();
    let (x, y) = (v[0], v[1]);
    v[0] = c * x - s * y;
    v[1] = s * x + c * y;
}

/// Rodrigues rotation of `v` about the unit vector `k`.
fn rotate_about(v: &[f64], k: &[f64], angle: f64) -> Vec<f64> {
    let (s, c) = angle.sin_cos();
    let cross = [
        k[1] * v[2] - k[2] * v[1],
        k[2] * v[0] - k[0] * v[2],
        k[0] * v[1] - k[1] * v[0],
    ];
    let kv: f64 = k.iter().zip(v).map(|(a, b)| a * b).sum();
    (0..3)
        .map(|i| v[i] * c + cross[i] * s + k[i] * kv * (1.0 - c))
        .collect()
}

/// The normalised ball automorphism with `σ_a(a) = 0`; `σ_a⁻¹ = σ_{−a}`.
fn ball_mobius(x: &[f64], a: &[f64]) -> Vec<f64> {
    let a2: f64 = a.iter().map(|v| v * v).sum();
    let x2: f64 = x.iter().map(|v| v * v).sum();
    let xa: f64 = x.iter().zip(a).map(|(p, q)| p * q).sum();
    let xma2: f64 = x.iter().zip(a).map(|(p, q)| (p - q) * (p - q)).sum();
    let den = 1.0 - 2.0 * xa + x2 * a2;
    x.iter()
        .zip(a)
        .map(|(xi, ai)| ((1.0 - a2) * (xi - ai) - xma2 * ai) / den)
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl MapKind {
    pub fn name(&self) -> &'static str {
        match self {
            MapKind::Identity => "identity",
            MapKind::RotationAboutAxis { .. } => "rotation_about_axis",
            MapKind::RadialStretch { .. } => "radial_stretch",
            MapKind::RadialPower { .. } => "radial_power",
            MapKind::AnnulusTwist { .. } => "annulus_twist",
            MapKind::Mobius { .. } => "mobius",
            MapKind::Affine { .. } => "affine",
        }
    }

    /// Checks parameters against the ambient dimension.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let check_len = |v: &Option<Vec<f64>>, what: &str| match v {
            Some(c) if c.len() != dim => Err(Error::InvalidParameter(format!(
                "{what} has {} coordinates, expected {dim}",
                c.len()
            ))),
            _ => Ok(()),
        };
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must be finite")))
            }
        };
        match self {
            MapKind::Identity => Ok(()),
            MapKind::RotationAboutAxis { angle, center, axis } => {
                finite(*angle, "angle")?;
                check_len(center, "center")?;
                match (dim, axis) {
                    (2, Some(_)) => Err(Error::InvalidParameter(
                        "a planar rotation takes no axis".into(),
                    )),
                    (2, None) => Ok(()),
                    (3, a) => {
                        check_len(a, "axis")?;
                        if a.as_ref().is_some_and(|a| !(norm(a) > 0.0)) {
                            return Err(Error::InvalidParameter("axis must be nonzero".into()));
                        }
                        Ok(())
                    }
                    _ => Err(Error::InvalidParameter(
                        "rotations are defined in dimensions 2 and 3".into(),
                    )),
                }
            }
            MapKind::RadialStretch { center } => check_len(center, "center"),
            MapKind::RadialPower { alpha, center } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidParameter("alpha must be positive".into()));
                }
                check_len(center, "center")
            }
            MapKind::AnnulusTwist {
                beta,
                center,
                inner,
                outer,
            } => {
                finite(*beta, "beta")?;
                if !(*inner >= 0.0 && inner < outer && outer.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "annulus twist needs 0 <= inner < outer".into(),
                    ));
                }
                check_len(center, "center")
            }
            MapKind::Mobius {
                a,
                angle,
                center,
                radius,
            } => {
                if a.len() != dim {
                    return Err(Error::InvalidParameter(format!(
                        "a has {} coordinates, expected {dim}",
                        a.len()
                    )));
                }
                if !(norm(a) < 1.0) {
                    return Err(Error::InvalidParameter("|a| must be < 1".into()));
                }
                finite(*angle, "angle")?;
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidParameter("radius must be positive".into()));
                }
                check_len(center, "center")
            }
            MapKind::Affine { matrix, shift } => {
                if matrix.len() != dim || matrix.iter().any(|r| r.len() != dim) || shift.len() != dim {
                    return Err(Error::InvalidParameter(format!(
                        "affine map needs a {dim} x {dim} matrix and a {dim}-vector"
                    )));
                }
                if self.affine_matrix().unwrap().determinant().abs() < 1e-14 {
                    return Err(Error::InvalidParameter("affine matrix is singular".into()));
                }
                Ok(())
            }
        }
    }

    fn affine_matrix(&self) -> Option<DMatrix<f64>> {
        match self {
            MapKind::Affine { matrix, .. } => {
                let n = matrix.len();
                Some(DMatrix::from_fn(n, n, |i, j| matrix[i][j]))
            }
            _ => None,
        }
    }

    /// Evaluates the map. Parameters are assumed validated.
    pub fn apply(&self, x: &Point) -> Point {
        let dim = x.dim();
        let v = x.coords();
        let out: Vec<f64> = match self {
            MapKind::Identity => v.to_vec(),
            MapKind::RotationAboutAxis { angle, center, axis } => {
                let c = center_or_origin(center, dim);
                let rel: Vec<f64> = v.iter().zip(&c).map(|(a, b)| a - b).collect();
                let rot = if dim == 2 {
                    let mut r = rel;
                    rotate_plane(&mut r, *angle);
                    r
                } else {
                    let k = axis.clone().unwrap_or_else(|| vec![0.0, 0.0, 1.0]);
                    let n = norm(&k);
                    let k: Vec<f64> = k.iter().map(|a| a / n).collect();
                    rotate_about(&rel, &k, *angle)
                };
                rot.iter().zip(&c).map(|(a, b)| a + b).collect()
            }
            MapKind::RadialStretch { center } => radial(v, &center_or_origin(center, dim), 2.0),
            MapKind::RadialPower { alpha, center } => {
                radial(v, &center_or_origin(center, dim), *alpha)
            }
            MapKind::AnnulusTwist {
                beta,
                center,
                inner,
                outer,
            } => {
                let c = center_or_origin(center, dim);
                let mut rel: Vec<f64> = v.iter().zip(&c).map(|(a, b)| a - b).collect();
                let rho = norm(&rel);
                if rho > *inner && rho < *outer {
                    rotate_plane(&mut rel, beta * (rho - inner) * (outer - rho));
                }
                rel.iter().zip(&c).map(|(a, b)| a + b).collect()
            }
            MapKind::Mobius {
                a,
                angle,
                center,
                radius,
            } => {
                let c = center_or_origin(center, dim);
                let u: Vec<f64> = v.iter().zip(&c).map(|(p, q)| (p - q) / radius).collect();
                let mut m = ball_mobius(&u, a);
                if *angle != 0.0 {
                    rotate_plane(&mut m, *angle);
                }
                m.iter().zip(&c).map(|(p, q)| q + radius * p).collect()
            }
            MapKind::Affine { matrix, shift } => (0..dim)
                .map(|i| {
                    matrix[i].iter().zip(v).map(|(m, x)| m * x).sum::<f64>() + shift[i]
                })
                .collect(),
        };
        Point::from_vec(out)
    }

    /// The inverse map of the same family.
    pub fn inverse(&self) -> Result<MapKind> {
        Ok(match self {
            MapKind::Identity => MapKind::Identity,
            MapKind::RotationAboutAxis { angle, center, axis } => MapKind::RotationAboutAxis {
                angle: -angle,
                center: center.clone(),
                axis: axis.clone(),
            },
            MapKind::RadialStretch { center } => MapKind::RadialPower {
                alpha: 0.5,
                center: center.clone(),
            },
            MapKind::RadialPower { alpha, center } => MapKind::RadialPower {
                alpha: 1.0 / alpha,
                center: center.clone(),
            },
            MapKind::AnnulusTwist {
                beta,
                center,
                inner,
                outer,
            } => MapKind::AnnulusTwist {
                beta: -beta,
                center: center.clone(),
                inner: *inner,
                outer: *outer,
            },
            MapKind::Mobius { angle, .. } if *angle != 0.0 => {
                return Err(Error::InvalidParameter(
                    "inverse of a rotated Möbius map is not in the family".into(),
                ))
            }
            MapKind::Mobius {
                a, center, radius, ..
            } => MapKind::Mobius {
                a: a.iter().map(|v| -v).collect(),
                angle: 0.0,
                center: center.clone(),
                radius: *radius,
            },
            MapKind::Affine { shift, .. } => {
                let m = self.affine_matrix().unwrap();
                let inv = m
                    .try_inverse()
                    .ok_or_else(|| Error::InvalidParameter("affine matrix is singular".into()))?;
                let n = shift.len();
                let b = inv.clone() * DMatrix::from_column_slice(n, 1, shift);
                MapKind::Affine {
                    matrix: (0..n).map(|i| (0..n).map(|j| inv[(i, j)]).collect()).collect(),
                    shift: (0..n).map(|i| -b[(i, 0)]).collect(),
                }
            }
        })
    }

    /// Closed-form `K` where the family has one.
    pub fn exact_dilatation(&self) -> Option<f64> {
        match self {
            MapKind::Identity | MapKind::RotationAboutAxis { .. } | MapKind::Mobius { .. } => Some(1.0),
            MapKind::RadialStretch { .. } => Some(2.0),
            MapKind::RadialPower { alpha, .. } => Some(alpha.max(1.0 / alpha)),
            MapKind::AnnulusTwist { .. } => None,
            MapKind::Affine { .. } => {
                let sv = self.affine_matrix()?.singular_values();
                Some(sv.max() / sv.min())
            }
        }
    }

    /// Euclidean isometry kinds.
    pub fn is_isometry(&self) -> bool {
        match self {
            MapKind::Identity | MapKind::RotationAboutAxis { .. } => true,
            MapKind::Affine { .. } => self
                .affine_matrix()
                .map(|m| {
                    let sv = m.singular_values();
                    (sv.max() - 1.0).abs() < 1e-12 && (sv.min() - 1.0).abs() < 1e-12
                })
                .unwrap_or(false),
            _ => false,
        }
    }
}

fn radial(v: &[f64], c: &[f64], alpha: f64) -> Vec<f64> {
    let rel: Vec<f64> = v.iter().zip(c).map(|(a, b)| a - b).collect();
    let rho = norm(&rel);
    if rho == 0.0 {
        return v.to_vec();
    }
    let s = rho.powf(alpha - 1.0);
    rel.iter().zip(c).map(|(a, b)| b + s * a).collect()
}

/// A self-map with its declared dilatation bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfMap {
    pub kind: MapKind,
    /// Declared `K`; defaults to the closed form of the family when it has one.
    pub declared_k: Option<f64>,
}

impl SelfMap {
    pub fn new(kind: MapKind) -> Self {
        let declared_k = kind.exact_dilatation();
        Self { kind, declared_k }
    }

    pub fn identity() -> Self {
        Self::new(MapKind::Identity)
    }

    pub fn apply(&self, x: &Point) -> Point {
        self.kind.apply(x)
    }

    /// Evaluates the map and requires the image to lie in `dom`.
    pub fn apply_checked(&self, dom: &Domain, x: &Point) -> Result<Point> {
        x.check_dim(dom.dim())?;
        let y = self.apply(x);
        if dom.contains(&y) {
            Ok(y)
        } else {
            Err(Error::MapLeavesDomain(y.into_coords()))
        }
    }

    pub fn inverse(&self) -> Result<SelfMap> {
        Ok(SelfMap::new(self.kind.inverse()?))
    }

    /// Validates the pairing of this map with a domain on seeded samples:
    /// interior points must stay inside and boundary points must stay within
    /// `tol` of the boundary.
    pub fn check_compatible(&self, dom: &Domain, samples: usize, seed: u64) -> Result<()> {
        self.kind.validate(dom.dim())?;
        for x in dom.interior_sample(samples, 0.0, seed) {
            self.apply_checked(dom, &x)?;
        }
        let tol = 10.0 * dom.min_clip();
        if let Ok(bd) = dom.boundary_sample(samples, seed) {
            for p in bd {
                let y = self.apply(&p);
                if dom.dist_unchecked(&y) > tol || dom.contains(&y) && dom.signed_distance(&y) > tol {
                    return Err(Error::MapLeavesDomain(y.into_coords()));
                }
            }
        }
        Ok(())
    }
}

/// One point of a dilatation field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilatationSample {
    pub point: Point,
    pub h: f64,
    /// `(r, max/min ratio)` at every radius tried, by decreasing `r`.
    pub per_radius: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DilatationField {
    pub samples: Vec<DilatationSample>,
}

impl DilatationField {
    /// `K̂`, the largest sampled `H`.
    pub fn max(&self) -> f64 {
        self.samples.iter().map(|s| s.h).fold(1.0, f64::max)
    }
}

/// Unit directions: equally spaced in the plane (64), Fibonacci points in
/// space (256).
pub fn sphere_directions(dim: usize) -> Result<Vec<Vec<f64>>> {
    match dim {
        2 => Ok((0..64)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 64.0;
                vec![t.cos(), t.sin()]
            })
            .collect()),
        3 => Ok(fibonacci_sphere(256, 0.0).into_iter().map(|p| p.to_vec()).collect()),
        _ => Err(Error::InvalidParameter(
            "dilatation directions are defined in dimensions 2 and 3".into(),
        )),
    }
}

/// Geometric ladder `r₀·2^{-i}`, `i = 0..=6`, with `r₀ = d(x)/2`.
pub fn default_radii(dom: &Domain, x: &Point) -> Vec<f64> {
    let r0 = 0.5 * dom.signed_distance(x);
    (0..=6).map(|i| r0 / 2f64.powi(i)).collect()
}

/// `H` at `x`: the max over the two smallest radii of
/// `max |f(x) − f(y)| / min |f(x) − f(y)|` over `|y − x| = r`.
pub fn dilatation_estimate(
    map: &SelfMap,
    dom: &Domain,
    x: &Point,
    radii: &[f64],
) -> Result<DilatationSample> {
    x.check_dim(dom.dim())?;
    let d = dom.signed_distance(x);
    if d <= 0.0 {
        return Err(Error::PointOnBoundary(d));
    }
    if radii.is_empty() {
        return Err(Error::InvalidParameter("no radii given".into()));
    }
    for &r in radii {
        if !(r > 0.0) || r > 0.5 * d {
            return Err(Error::RadiusTooLarge {
                radius: r,
                bound: 0.5 * d,
            });
        }
    }
    let dirs = sphere_directions(dom.dim())?;
    let fx = map.apply(x);
    let mut per_radius: Vec<(f64, f64)> = radii
        .iter()
        .map(|&r| {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for u in &dirs {
                let y = Point::from_vec(x.coords().iter().zip(u).map(|(a, b)| a + r * b).collect());
                let v = map.apply(&y).dist(&fx);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            (r, hi / lo)
        })
        .collect();
    per_radius.sort_by(|a, b| b.0.total_cmp(&a.0));
    let h = per_radius
        .iter()
        .rev()
        .take(2)
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DilatationSample {
        point: x.clone(),
        h,
        per_radius,
    })
}

/// Dilatation estimates at many points, each with its default radius ladder.
pub fn dilatation_field(map: &SelfMap, dom: &Domain, points: &[Point]) -> Result<DilatationField> {
    let samples = points
        .par_iter()
        .map(|x| dilatation_estimate(map, dom, x, &default_radii(dom, x)))
        .collect::<Result<_>>()?;
    Ok(DilatationField { samples })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryIdentityReport {
    /// `sup |f(ξ) − ξ|` over the tested points.
    pub defect: f64,
    pub worst: Option<usize>,
    pub shell_depth: f64,
    /// Acceptance threshold `10 × shell_depth`.
    pub tau_id: f64,
    pub accepted: bool,
    pub points_tested: usize,
}

/// Largest displacement of the tested boundary (or near-boundary) points.
pub fn boundary_identity_defect(
    map: &SelfMap,
    points: &[Point],
    shell_depth: f64,
) -> Result<BoundaryIdentityReport> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut defect = 0.0f64;
    let mut worst = None;
    for (i, p) in points.iter().enumerate() {
        let v = map.apply(p).dist(p);
        if v > defect {
            defect = v;
            worst = Some(i);
        }
    }
    let tau_id = 10.0 * shell_depth;
    Ok(BoundaryIdentityReport {
        defect,
        worst,
        shell_depth,
        tau_id,
        accepted: defect <= tau_id,
        points_tested: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn paper_examples() {
        let rot = SelfMap::new(MapKind::RotationAboutAxis {
            angle: PI,
            center: None,
            axis: None,
        });
        let y = rot.apply(&Point::xyz(1.0, 0.0, 0.0));
        assert!(y.dist(&Point::xyz(-1.0, 0.0, 0.0)) < 1e-15);
        let st = SelfMap::new(MapKind::RadialStretch { center: None });
        for m in [3.0, 7.0, 50.0] {
            let y = st.apply(&Point::xy(1.0 / m, 0.0));
            assert!((y.coords()[0] - 1.0 / (m * m)).abs() < 1e-15);
        }
        let x = Point::xy(0.3, -0.2);
        assert_eq!(SelfMap::identity().apply(&x), x);
    }

    #[test]
    fn inverses_compose_to_identity() {
        let kinds = vec![
            MapKind::RadialStretch { center: None },
            MapKind::RadialPower {
                alpha: 1.7,
                center: Some(vec![0.1, 0.0]),
            },
            MapKind::AnnulusTwist {
                beta: 0.5,
                center: None,
                inner: 0.5,
                outer: 1.0,
            },
            MapKind::Mobius {
                a: vec![0.3, -0.2],
                angle: 0.0,
                center: None,
                radius: 1.0,
            },
            MapKind::Affine {
                matrix: vec![vec![2.0, 1.0], vec![0.0, 1.0]],
                shift: vec![0.5, -1.0],
            },
        ];
        let x = Point::xy(0.4, 0.5);
        for k in kinds {
            let inv = k.inverse().unwrap();
            let back = inv.apply(&k.apply(&x));
            assert!(back.dist(&x) < 1e-12, "{}: {:?}", k.name(), back);
        }
    }

    #[test]
    fn isometries_have_unit_dilatation() {
        let d = Domain::z_axis_complement();
        let rot = SelfMap::new(MapKind::RotationAboutAxis {
            angle: 1.1,
            center: None,
            axis: None,
        });
        let x = Point::xyz(0.7, 0.2, 0.1);
        let h = dilatation_estimate(&rot, &d, &x, &default_radii(&d, &x)).unwrap().h;
        assert!((h - 1.0).abs() < 1e-9, "{h}");
    }

    #[test]
    fn radial_stretch_dilatation_is_two() {
        let d = Domain::punctured_unit_disk();
        let st = SelfMap::new(MapKind::RadialStretch { center: None });
        let x = Point::xy(0.35, 0.2);
        let h = dilatation_estimate(&st, &d, &x, &default_radii(&d, &x)).unwrap().h;
        assert!((h - 2.0).abs() < 0.1, "{h}");
    }

    #[test]
    fn radius_bound_is_enforced() {
        let d = Domain::unit_disk();
        let x = Point::xy(0.5, 0.0);
        assert!(matches!(
            dilatation_estimate(&SelfMap::identity(), &d, &x, &[0.3]),
            Err(Error::RadiusTooLarge { .. })
        ));
    }

    #[test]
    fn twist_fixes_both_circles() {
        let tw = SelfMap::new(MapKind::AnnulusTwist {
            beta: 0.5,
            center: None,
            inner: 0.5,
            outer: 1.0,
        });
        let dom = Domain::annulus(Point::xy(0.0, 0.0), 0.5, 1.0).unwrap();
        let bd = dom.boundary_sample(200, 1).unwrap();
        let r = boundary_identity_defect(&tw, &bd, dom.min_clip()).unwrap();
        assert!(r.accepted, "{}", r.defect);
        tw.check_compatible(&dom, 500, 2).unwrap();
    }

    #[test]
    fn shear_does_not_preserve_the_ball() {
        let shear = SelfMap::new(MapKind::Affine {
            matrix: vec![vec![1.0, 0.5], vec![0.0, 1.0]],
            shift: vec![0.0, 0.0],
        });
        assert!(shear.check_compatible(&Domain::unit_disk(), 500, 0).is_err());
    }
}
