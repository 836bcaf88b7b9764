//! Block structures, block-Stäckel matrices and twisted Hamiltonians.
//!
//! A [`TwistedSystem`] combines per-block natural Hamiltonians
//! `H_r = ½ g_r^{ij} p_i p_j + V_r` with the twist functions `α^r`, the first
//! row of `S⁻¹`, into `H = α^r H_r`. The remaining rows of `S⁻¹` give the
//! first integrals `K_a = (S⁻¹)_a^r H_r`.
//!
//! Indices are 0-based throughout: block `r ∈ 0..n`, integral `a ∈ 0..n` with
//! `a = 0` the Hamiltonian itself.

mod jet;
mod structure;
mod system;

use thiserror::Error;

use crate::expr::EvalError;
use crate::linalg::LinalgError;

pub use jet::InverseJet;
pub use structure::{BlockStructure, PhasePoint};
pub use system::{build_system, NaturalBlock, ProbeSet, StackelMatrix, TwistedSystem, PROBE_SAMPLES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid block structure: {0}")]
    Structure(String),
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension { what: String, expected: usize, got: usize },
    #[error("{entry} depends on `{variable}`, which belongs to block {owner}, not block {block}")]
    ForeignVariable { entry: String, variable: String, block: usize, owner: usize },
    #[error("{entry} uses `{variable}`, which is not a coordinate")]
    UnknownVariable { entry: String, variable: String },
    #[error("metric of {entry} is not symmetric")]
    Asymmetric { entry: String },
    #[error("Stäckel matrix unusable at q = {point:?}: {source}")]
    SingularStackel { point: Vec<f64>, source: LinalgError },
    #[error("metric of block {block} is degenerate at q = {point:?}")]
    DegenerateMetric { block: usize, point: Vec<f64> },
    #[error("twist function α^{block} vanishes at q = {point:?}")]
    VanishingTwist { block: usize, point: Vec<f64> },
    #[error("{what} index {index} out of range 0..{limit}")]
    IndexOutOfRange { what: &'static str, index: usize, limit: usize },
    #[error("evaluating {entry}: {source}")]
    Eval { entry: String, source: EvalError },
}

impl ModelError {
    pub(crate) fn eval(entry: impl Into<String>) -> impl FnOnce(EvalError) -> ModelError {
        let entry = entry.into();
        move |source| ModelError::Eval { entry, source }
    }
}
