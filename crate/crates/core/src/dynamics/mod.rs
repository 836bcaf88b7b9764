//! Full and block-reduced dynamics of twisted Hamiltonians.
//!
//! Full-system states are laid out as `[q (N), p (N), τ (n)]`: the block
//! clocks `τ̇_r = α^r(q)` ride along with the Hamiltonian flow so their
//! values come with the same dense output as the orbit.

mod clock;
mod compare;
mod fields;
mod frequency;
mod integrator;

use thiserror::Error;

use crate::model::{ModelError, PhasePoint, TwistedSystem};

pub use clock::{block_clock, BlockClock};
pub use compare::{compare_block_orbits, CompareConfig, ComparisonReport, ComparisonSeries, SignChangePolicy};
pub use fields::{block_state, embed_block, full_field, full_field_into, reduced_field, reduced_field_into};
pub use frequency::estimate_frequency;
pub use integrator::{integrate, IntegrateError, IntegratorConfig, IntegratorStats, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{stage}: {source}")]
    Integration { stage: String, source: IntegrateError<ModelError> },
    #[error("trajectory has {got} components; block clocks need {expected}")]
    MissingClocks { expected: usize, got: usize },
    #[error("α^{block} changes sign at t = {t}; no initial segment of constant sign")]
    EmptySegment { block: usize, t: f64 },
    #[error("block index {block} out of range 0..{n}")]
    NoSuchBlock { block: usize, n: usize },
}

/// Integrates the full system from `p0`, carrying the block clocks.
pub fn integrate_full(
    sys: &TwistedSystem,
    p0: &PhasePoint,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    let mut y0 = p0.to_state();
    y0.extend(std::iter::repeat_n(0.0, sys.n_blocks()));
    integrate(|_, y, dy| full_field_into(sys, y, dy), &y0, t_span, cfg)
        .map_err(|source| DynamicsError::Integration { stage: "full system".into(), source })
}

/// Integrates the reduced flow of `H̃_r` from a block state over `τ_span`.
pub fn integrate_reduced(
    sys: &TwistedSystem,
    r: usize,
    c: &[f64],
    block0: &[f64],
    tau_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    integrate(|_, y, dy| reduced_field_into(sys, r, c, y, dy), block0, tau_span, cfg)
        .map_err(|source| DynamicsError::Integration { stage: format!("reduced block {}", r + 1), source })
}

/// Phase point (without clocks) of a full-system state.
pub fn phase_point(sys: &TwistedSystem, state: &[f64]) -> PhasePoint {
    PhasePoint::from_state(state, sys.dim())
}

#[cfg(test)]
mod tests;
