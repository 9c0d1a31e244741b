//! Reverse isoperimetric inequality for λ-convex curves on the hyperbolic
//! plane of curvature `−k²`.
//!
//! - [`hyperbolic`]: hyperboloid-model points, isometries and cycles
//! - [`support`]: support functions and the length/area functionals
//! - [`bounds`]: the sharp area bounds in the three curvature regimes
//! - [`shapes`]: λ-lunes and λ-polygons
//! - [`control`]: the optimal-control formulation and its Pontryagin certificate

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod control;
pub mod error;
pub mod hyperbolic;
pub mod shapes;
pub mod support;

pub use bounds::{classify, max_length, reverse_bound, BoundResult, Regime};
pub use error::{Error, Result};
pub use hyperbolic::{CycleKind, CyclePlane, HPoint, Isometry};
pub use shapes::{build_lune, lune_for_length, polygon_from_regions, random_polygon, LambdaPolygon, Lune};
pub use support::{length_and_area, CurveMeasurements, SupportProfile};
