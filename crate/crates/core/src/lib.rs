//! curvelab computes curvature quantities, intrinsic and extrinsic
//! integrals, and scale-invariant Sobolev norms of the mean curvature on
//! smooth parametric surfaces in 3-space, and runs a battery of numerical
//! identity and inequality checks on them.

pub mod chart;
pub mod expr;
pub mod geometry;
pub mod intrinsic;
pub mod jet;
pub mod ode;
pub mod quad;
pub mod record;
