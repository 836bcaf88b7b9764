//! Numerical laboratory for twisted products of natural Hamiltonians.

pub mod catalog;
pub mod dual;
pub mod dynamics;
pub mod expr;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod sampling;
pub mod scalar;

pub use dual::Dual;
pub use expr::{EvalPoint, Expression};
pub use model::{
    build_system, BlockStructure, ModelError, NaturalBlock, PhasePoint, ProbeSet, StackelMatrix, TwistedSystem,
};
pub use scalar::Scalar;

/// First-order dual over `f64`.
pub type Dual64 = Dual<f64>;
/// Nested dual over `f64`, carrying exact second partials.
pub type HyperDual64 = Dual<Dual<f64>>;
