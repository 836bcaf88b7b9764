use std::sync::Arc;

use super::{CatalogEntry, CatalogError, Domain};
use crate::expr::Expression;
use crate::model::{build_system, BlockStructure, NaturalBlock, PhasePoint, ProbeSet, StackelMatrix};
use crate::sampling::CoordinateBox;

/// `q^i(t) = c_1^i sin(α^i ω_i t) + c_2^i cos(α^i ω_i t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorSolution {
    pub omega: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl OscillatorSolution {
    /// Effective angular frequencies `α^i ω_i`.
    pub fn frequencies(&self) -> Vec<f64> {
        self.omega.iter().zip(&self.alpha).map(|(w, a)| w * a).collect()
    }

    /// `(c_1^i, c_2^i)` for an initial point at `t = 0`.
    pub fn coefficients(&self, p0: &PhasePoint) -> Vec<(f64, f64)> {
        (0..self.omega.len()).map(|i| (p0.p[i] / self.omega[i], p0.q[i])).collect()
    }

    pub fn at(&self, p0: &PhasePoint, t: f64) -> PhasePoint {
        let n = self.omega.len();
        let mut q = vec![0.0; n];
        let mut p = vec![0.0; n];
        for (i, (c1, c2)) in self.coefficients(p0).into_iter().enumerate() {
            let nu = self.alpha[i] * self.omega[i];
            q[i] = c1 * (nu * t).sin() + c2 * (nu * t).cos();
            // q̇ = α p
            p[i] = nu * (c1 * (nu * t).cos() - c2 * (nu * t).sin()) / self.alpha[i];
        }
        PhasePoint { q, p }
    }
}

/// Harmonic oscillators `H_i = ½(p_i² + ω_i² q_i²)` twisted by constants `α^i > 0`.
///
/// `S⁻¹` has first row `α` and rows `e_a` below it, so `K_a = H_a` for `a ≥ 1`.
pub fn oscillators(omega: &[f64], alpha: &[f64]) -> Result<CatalogEntry, CatalogError> {
    let n = omega.len();
    if n == 0 || alpha.len() != n {
        return Err(CatalogError::Parameter(format!("need equally many ω and α, got {} and {}", n, alpha.len())));
    }
    if let Some(a) = alpha.iter().find(|&&a| !(a > 0.0)) {
        return Err(CatalogError::Parameter(format!("twist constants must be positive, got {a}")));
    }
    let c = |x: f64| Expression::constant(x);
    let mut rows = vec![vec![c(0.0); n]; n];
    rows[0][0] = c(1.0 / alpha[0]);
    for a in 1..n {
        rows[0][a] = c(-alpha[a] / alpha[0]);
        rows[a][a] = c(1.0);
    }
    let stackel = StackelMatrix::new(rows)?;
    let structure = BlockStructure::with_sizes(&vec![1; n])?;
    let blocks = omega
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let v = Expression::parse(&format!("{:e}*q{}^2", 0.5 * w * w, i + 1)).expect("generated potential");
            NaturalBlock::diagonal(vec![c(1.0)], v)
        })
        .collect();
    let region = CoordinateBox::new(vec![(-1.0, 1.0); n]);
    let system = Arc::new(build_system(structure, stackel, blocks, ProbeSet::points(vec![vec![0.0; n]]))?);
    let initial = PhasePoint::new((0..n).map(|i| 1.0 / (i + 1) as f64).collect(), vec![0.0; n]);
    Ok(CatalogEntry {
        name: "oscillators".into(),
        system,
        initial,
        domain: Domain::new(region, "|q^i| ≤ 1", |_| true),
        cartesian: None,
        solution: Some(OscillatorSolution { omega: omega.to_vec(), alpha: alpha.to_vec() }),
    })
}
