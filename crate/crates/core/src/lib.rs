//! Construction and validation of analysis-suitable G1 (AS-G1) planar
//! multi-patch spline parameterizations.
//!
//! The pipeline: load a multi-patch geometry, detect its topology, fit
//! linear gluing data per interface, assemble the boundary/vertex/G1
//! constraint sets over the control points, eliminate them exactly, and
//! minimize a quadratic closeness-plus-quality objective over the remaining
//! free coefficients. The result can be certified AS-G1, used to build a C1
//! isogeometric space, and validated by L2 approximation convergence
//! studies.
//!
//! All core math is generic over the scalar type: [`scalar::Rat`]
//! (arbitrary-precision rationals, the default for geometry and constraint
//! work) or `f64` (for the large L2 studies).

pub mod bernstein;
pub mod c1;
pub mod constraints;
pub mod gluing;
pub mod io;
pub mod linalg;
pub mod multipatch;
pub mod optimizer;
pub mod projection;
pub mod samples;
pub mod scalar;
pub mod spline;
pub mod svg;

pub use scalar::{Point2, Rat, Scalar};
pub use spline::NumberMode;

/// Exact-rational instantiations (the default pipeline).
pub type RatSpace = spline::SplineSpace<Rat>;
pub type RatScalarSpline = spline::ScalarSpline<Rat>;
pub type RatCurveSpline = spline::CurveSpline<Rat>;
pub type RatPatchSpline = spline::PatchSpline<Rat>;

/// Float instantiations (tolerance-based comparisons).
pub type F64Space = spline::SplineSpace<f64>;
pub type F64ScalarSpline = spline::ScalarSpline<f64>;
pub type F64CurveSpline = spline::CurveSpline<f64>;
pub type F64PatchSpline = spline::PatchSpline<f64>;
