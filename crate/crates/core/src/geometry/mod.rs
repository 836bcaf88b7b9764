//! Tensor-calculus checks: Poisson brackets, curvature, Killing tensors,
//! Nijenhuis/Haantjes normality and the block separability residuals.
//!
//! Every check returns a max-norm; thresholds belong to the caller.

mod blocks;
mod curvature;
mod normality;
mod phase;
mod tensor;

use thiserror::Error;

use crate::expr::EvalError;
use crate::model::ModelError;

pub use blocks::{
    block_eigenvalues, block_eisenhart_residual, block_eisenhart_residual_against, block_levi_civita_residual, block_spectrum, relative_eigenvalues,
    spectrum, EigenCluster, LeviCivitaResidual, Spectrum, CLUSTER_TOL,
};
pub use curvature::{christoffel, killing_residual, riemann, scalar_curvature, Connection, Riemann};
pub use normality::{characteristic_condition, haantjes, nijenhuis, tsn_residuals, HaantjesReport, Tensor3};
pub use phase::{poisson_bracket, PhaseScalar};
pub use tensor::{jacobian_of, seed, MetricField, TensorField2, Variance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("evaluating {entry}: {source}")]
    Eval { entry: String, source: EvalError },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{what} must have dimension {expected}")]
    Dimension { what: String, expected: usize },
    #[error("metric is degenerate at {point:?}")]
    Degenerate { point: Vec<f64> },
    #[error("a metric must be a symmetric contravariant field")]
    NotMetric,
    #[error("index raising/lowering needs a metric")]
    NeedsMetric,
    #[error("eigenvalue {re} + {im}i is not real")]
    ComplexEigenvalue { re: f64, im: f64 },
}
