//! Line integrals of conformal densities along polylines.
//!
//! Every segment is first cut into pieces no longer than half the smaller
//! boundary distance at their ends. Since `d` is 1-Lipschitz this keeps each
//! piece inside `D` and bounds the variation of `1/d` on it, so the adaptive
//! Simpson pass that follows cannot step over a hidden singularity.

use super::{Domain, Point, Polyline};
use crate::error::{Error, Result};

pub const DEFAULT_TAU_QUAD: f64 = 1e-6;

const MAX_SPLIT_DEPTH: u32 = 64;
const MAX_SIMPSON_DEPTH: u32 = 40;

/// Density integrated along a curve.
#[derive(Clone, Copy)]
pub enum Density<'a> {
    /// `ϱ = 1/d`, giving quasihyperbolic length.
    ReciprocalBoundaryDistance,
    /// `ϱ ≡ c`, giving `c` times Euclidean length.
    Constant(f64),
    /// `ϱ = e^{-ε k(·, w)}` integrated against quasihyperbolic arclength,
    /// i.e. `e^{-ε k}/d` against Euclidean arclength.
    Bhk {
        epsilon: f64,
        k_to_base: &'a (dyn Fn(&Point) -> f64 + Sync),
    },
}

impl std::fmt::Debug for Density<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Density::ReciprocalBoundaryDistance => write!(f, "ReciprocalBoundaryDistance"),
            Density::Constant(c) => write!(f, "Constant({c})"),
            Density::Bhk { epsilon, .. } => write!(f, "Bhk(eps={epsilon})"),
        }
    }
}

/// `∫_γ ϱ ds` for a polyline inside `dom`, with relative tolerance `tau`.
pub fn line_integral(dom: &Domain, poly: &Polyline, density: Density<'_>, tau: f64) -> Result<f64> {
    let mut total = 0.0;
    for (a, b) in poly.segments() {
        a.check_dim(dom.dim())?;
        b.check_dim(dom.dim())?;
        total += segment_integral(dom, a, b, density, tau)?;
    }
    Ok(total)
}

/// Both the quasihyperbolic and the Euclidean length of a segment.
pub(crate) fn segment_weights(dom: &Domain, a: &Point, b: &Point, tau: f64) -> Result<(f64, f64)> {
    let pieces = split_segment(dom, a, b)?;
    let len = a.dist(b);
    let qh = pieces
        .iter()
        .map(|p| piece_integral(dom, p, Density::ReciprocalBoundaryDistance, tau))
        .sum::<Result<f64>>()?;
    Ok((qh, len))
}

pub(crate) fn segment_integral(
    dom: &Domain,
    a: &Point,
    b: &Point,
    density: Density<'_>,
    tau: f64,
) -> Result<f64> {
    let pieces = split_segment(dom, a, b)?;
    if let Density::Constant(c) = density {
        return Ok(c * a.dist(b));
    }
    pieces
        .iter()
        .map(|p| piece_integral(dom, p, density, tau))
        .sum()
}

struct Piece {
    a: Point,
    b: Point,
    da: f64,
    db: f64,
}

fn checked_depth(dom: &Domain, x: &Point) -> Result<f64> {
    let s = dom.signed_distance(x);
    let clip = dom.min_clip();
    if s > clip {
        Ok(s)
    } else {
        Err(Error::SingularDensity { distance: s, clip })
    }
}

fn split_segment(dom: &Domain, a: &Point, b: &Point) -> Result<Vec<Piece>> {
    let da = checked_depth(dom, a)?;
    let db = checked_depth(dom, b)?;
    let mut out = Vec::new();
    let mut stack = vec![(a.clone(), b.clone(), da, db, 0u32)];
    while let Some((p, q, dp, dq, depth)) = stack.pop() {
        if p.dist(&q) <= 0.5 * dp.min(dq) {
            out.push(Piece {
                a: p,
                b: q,
                da: dp,
                db: dq,
            });
            continue;
        }
        if depth >= MAX_SPLIT_DEPTH {
            return Err(Error::SingularDensity {
                distance: dp.min(dq),
                clip: dom.min_clip(),
            });
        }
        let m = p.lerp(&q, 0.5);
        let dm = checked_depth(dom, &m)?;
        // pushed in reverse so pieces come out ordered from a to b
        stack.push((m.clone(), q, dm, dq, depth + 1));
        stack.push((p, m, dp, dm, depth + 1));
    }
    Ok(out)
}

fn density_value(x: &Point, d: f64, density: Density<'_>) -> f64 {
    match density {
        Density::ReciprocalBoundaryDistance => 1.0 / d,
        Density::Constant(c) => c,
        Density::Bhk { epsilon, k_to_base } => (-epsilon * k_to_base(x)).exp() / d,
    }
}

fn piece_integral(dom: &Domain, piece: &Piece, density: Density<'_>, tau: f64) -> Result<f64> {
    let len = piece.a.dist(&piece.b);
    if len == 0.0 {
        return Ok(0.0);
    }
    let eval = |t: f64| -> Result<f64> {
        let x = piece.a.lerp(&piece.b, t);
        let d = checked_depth(dom, &x)?;
        Ok(density_value(&x, d, density) * len)
    };
    let fa = density_value(&piece.a, piece.da, density) * len;
    let fb = density_value(&piece.b, piece.db, density) * len;
    let fm = eval(0.5)?;
    let whole = (fa + 4.0 * fm + fb) / 6.0;
    let tol = tau.max(1e-15) * whole.abs();
    adaptive_simpson(&eval, 0.0, 1.0, fa, fm, fb, whole, tol, 0)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &dyn Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let h = b - a;
    let left = h / 12.0 * (fa + 4.0 * flm + fm);
    let right = h / 12.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= MAX_SIMPSON_DEPTH || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?
        + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::curve_length;
    use std::f64::consts::E;

    #[test]
    fn half_plane_vertical_segment_is_log_ratio() {
        let d = Domain::upper_half_plane();
        let p = Polyline::new(vec![Point::xy(0.0, 1.0), Point::xy(0.0, E)]).unwrap();
        let v = line_integral(&d, &p, Density::ReciprocalBoundaryDistance, 1e-8).unwrap();
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn disk_radius_segment_is_log_two() {
        let d = Domain::unit_disk();
        let p = Polyline::new(vec![Point::xy(0.0, 0.0), Point::xy(0.5, 0.0)]).unwrap();
        let v = line_integral(&d, &p, Density::ReciprocalBoundaryDistance, 1e-8).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-8 * 2f64.ln(), "{v}");
    }

    #[test]
    fn constant_density_is_scaled_length() {
        let d = Domain::unit_disk();
        let p = Polyline::new(vec![
            Point::xy(-0.3, 0.1),
            Point::xy(0.2, 0.4),
            Point::xy(0.5, -0.2),
        ])
        .unwrap();
        let one = line_integral(&d, &p, Density::Constant(1.0), DEFAULT_TAU_QUAD).unwrap();
        assert!((one - curve_length(&p)).abs() < 1e-12);
        let three = line_integral(&d, &p, Density::Constant(3.0), DEFAULT_TAU_QUAD).unwrap();
        assert!((three - 3.0 * curve_length(&p)).abs() < 1e-12);
    }

    #[test]
    fn halving_tolerance_is_stable() {
        let d = Domain::punctured_unit_disk();
        let p = Polyline::new(vec![Point::xy(-0.6, 0.05), Point::xy(0.7, 0.02)]).unwrap();
        let tau = 1e-5;
        let a = line_integral(&d, &p, Density::ReciprocalBoundaryDistance, tau).unwrap();
        let b = line_integral(&d, &p, Density::ReciprocalBoundaryDistance, tau / 2.0).unwrap();
        assert!((a - b).abs() <= tau * b, "{a} {b}");
    }

    #[test]
    fn crossing_the_puncture_is_singular() {
        let d = Domain::punctured_unit_disk();
        let p = Polyline::new(vec![Point::xy(-0.5, 0.0), Point::xy(0.5, 0.0)]).unwrap();
        assert!(matches!(
            line_integral(&d, &p, Density::ReciprocalBoundaryDistance, 1e-6),
            Err(Error::SingularDensity { .. })
        ));
    }

    #[test]
    fn crossing_a_hole_is_rejected() {
        let d = Domain::annulus(Point::xy(0.0, 0.0), 0.5, 1.0).unwrap();
        let p = Polyline::new(vec![Point::xy(-0.75, 0.0), Point::xy(0.75, 0.0)]).unwrap();
        assert!(line_integral(&d, &p, Density::Constant(1.0), 1e-6).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let d = Domain::unit_disk();
        let p = Polyline::new(vec![Point::xyz(0.0, 0.0, 0.0), Point::xyz(0.1, 0.0, 0.0)]).unwrap();
        assert!(matches!(
            line_integral(&d, &p, Density::Constant(1.0), 1e-6),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
