use super::{Domain, Point};
use crate::error::{Error, Result};

/// Piecewise-linear curve through a list of vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    vertices: Vec<Point>,
}

impl Polyline {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::DegenerateCurve(format!(
                "{} vertices, need at least 2",
                vertices.len()
            )));
        }
        let dim = vertices[0].dim();
        for v in &vertices {
            v.check_dim(dim)?;
        }
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::DegenerateCurve(
                "consecutive vertices coincide".into(),
            ));
        }
        Ok(Self { vertices })
    }

    /// Like [`Polyline::new`] but also requires every vertex to lie in `dom`.
    pub fn in_domain(dom: &Domain, vertices: Vec<Point>) -> Result<Self> {
        let poly = Self::new(vertices)?;
        for v in &poly.vertices {
            v.check_dim(dom.dim())?;
            if !dom.contains(v) {
                return Err(Error::PointOnBoundary(dom.signed_distance(v)));
            }
        }
        Ok(poly)
    }

    /// Builds a path, dropping consecutive duplicates; a single point yields `None`.
    pub(crate) fn from_path(mut vertices: Vec<Point>) -> Option<Self> {
        vertices.dedup();
        (vertices.len() >= 2).then_some(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn segments(&self) -> impl Iterator<Item = (&Point, &Point)> {
        self.vertices.windows(2).map(|w| (&w[0], &w[1]))
    }
}

/// Euclidean length of a polyline.
pub fn curve_length(poly: &Polyline) -> f64 {
    poly.segments().map(|(a, b)| a.dist(b)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_segments() {
        let p = Polyline::new(vec![Point::xy(0.0, 0.0), Point::xy(1.0, 0.0)]).unwrap();
        assert_eq!(curve_length(&p), 1.0);
        let p = Polyline::new(vec![
            Point::xy(0.0, 0.0),
            Point::xy(1.0, 0.0),
            Point::xy(1.0, 1.0),
        ])
        .unwrap();
        assert_eq!(curve_length(&p), 2.0);
    }

    #[test]
    fn inscribed_polygon_matches_chord_sum() {
        let n = 64;
        let verts: Vec<Point> = (0..=n)
            .map(|i| {
                let t = 2.0 * PI * (i % n) as f64 / n as f64;
                Point::xy(t.cos(), t.sin())
            })
            .collect();
        let p = Polyline::new(verts).unwrap();
        let expected = 64.0 * 2.0 * (PI / 64.0).sin();
        assert!((curve_length(&p) - expected).abs() < 1e-12);
        assert!((curve_length(&p) - 6.2810).abs() < 1e-3);
    }

    #[test]
    fn degenerate_curves_are_rejected() {
        assert!(matches!(
            Polyline::new(vec![Point::xy(0.0, 0.0)]),
            Err(Error::DegenerateCurve(_))
        ));
        assert!(matches!(
            Polyline::new(vec![Point::xy(0.0, 0.0), Point::xy(0.0, 0.0)]),
            Err(Error::DegenerateCurve(_))
        ));
    }

    #[test]
    fn vertices_must_be_inside() {
        let d = Domain::unit_disk();
        assert!(Polyline::in_domain(&d, vec![Point::xy(0.0, 0.0), Point::xy(2.0, 0.0)]).is_err());
        assert!(Polyline::in_domain(&d, vec![Point::xy(0.0, 0.0), Point::xy(0.5, 0.0)]).is_ok());
    }
}
