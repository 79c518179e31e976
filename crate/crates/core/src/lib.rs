//! Numerical laboratory for quasihyperbolic geometry on Euclidean domains.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: points, domains with exact boundary distance, polylines and
//!   line integrals of conformal densities.
//! - [`graph`]: the adaptive Whitney-style point cloud on which every
//!   intrinsic metric is discretised, plus the shortest-path machinery.
//! - [`metric`]: the distance ratio metric `j`, the quasihyperbolic metric `k`,
//!   the inner metric `d_I`, and uniformity diagnostics.
//! - [`gromov`]: Gromov products, δ-hyperbolicity estimators, rough
//!   starlikeness and rough-isometry defects.
//! - [`boundary`]: uniform perfectness, cross-ratios and empirical
//!   quasisymmetry / quasimöbius moduli.
//! - [`uniformize`]: the conformal deformation `e^{-εk(·,w)}`, its metric,
//!   boundary shells and visual metrics.
//! - [`qcmaps`]: the self-map zoo, dilatation estimates and boundary-identity
//!   checks.
//! - [`harness`]: reproducible experiments with replayable verdicts.

pub mod boundary;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod gromov;
pub mod harness;
pub mod metric;
pub mod qcmaps;
pub mod uniformize;

pub use error::{Error, Result};
pub use geometry::{BBox, Domain, DomainKind, Point, Polyline};
pub use graph::{MetricGraph, ResolutionSpec};
