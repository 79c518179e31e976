use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// A point of `R^n`, `n >= 2`, with finite coordinates.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidPoint(format!(
                "dimension {} is below 2",
                coords.len()
            )));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite coordinate {c}")));
        }
        Ok(Self { coords })
    }

    /// Builds a point without validation. Callers guarantee the invariants.
    pub(crate) fn from_vec(coords: Vec<f64>) -> Self {
        debug_assert!(coords.len() >= 2);
        Self { coords }
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Self::from_vec(vec![x, y])
    }

    pub fn xyz(x: f64, y: f64, z: f64) -> Self {
        Self::from_vec(vec![x, y, z])
    }

    pub fn origin(dim: usize) -> Self {
        Self::from_vec(vec![0.0; dim.max(2)])
    }

    /// The `i`-th standard basis vector.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut c = vec![0.0; dim.max(2)];
        c[i] = 1.0;
        Self::from_vec(c)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim(),
            })
        }
    }

    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    #[inline]
    pub fn dot(&self, other: &Point) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum()
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point::from_vec(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn add(&self, other: &Point) -> Point {
        Point::from_vec(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Point {
        Point::from_vec(self.coords.iter().map(|a| a * s).collect())
    }

    /// `self + t (other - self)`.
    #[inline]
    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        Point::from_vec(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + t * (b - a))
                .collect(),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.coords
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords)
    }
}
