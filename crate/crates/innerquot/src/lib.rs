//! Approximation of unimodular functions on the unit circle by quotients of
//! inner functions, at finite degree and with machine-checkable certificates.
//!
//! A unimodular step function (scalar or matrix-valued) is approximated in
//! operator norm, outside a small reported union of arcs around its jumps, by
//! the boundary quotient of two finite Blaschke products (scalars) or two
//! Blaschke-Potapov / conjugated-diagonal inner functions (matrices). The
//! pipeline follows the reduction quantize → binary factorize → diagonalize →
//! scalar synthesis → assemble, and every result ships with a certificate
//! combining a dense grid maximum with an explicit Lipschitz slack.

pub mod blaschke;
pub mod linalg;
pub mod model;
pub mod certify;
pub mod cli;
pub mod pipeline;
pub mod potapov;
pub mod solver;

pub use blaschke::{quotient_boundary_eval, ArgumentTrace, FiniteBlaschke};
pub use model::{arc_measure, quantize_range, Arc, ArcPartition, ArcSet, StepUnimodular};
