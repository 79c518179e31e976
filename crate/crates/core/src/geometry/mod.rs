//! Points, domains, curves and line integrals.

mod curve;
mod domain;
mod point;
mod quadrature;

pub use curve::{curve_length, Polyline};
pub use domain::{
    fibonacci_sphere, BBox, BoundarySamplerFn, CustomDomain, Domain, DomainKind, SignedDistanceFn,
    CLIP_FRACTION,
};
pub use point::Point;
pub use quadrature::{line_integral, Density, DEFAULT_TAU_QUAD};

pub(crate) use quadrature::segment_weights;
