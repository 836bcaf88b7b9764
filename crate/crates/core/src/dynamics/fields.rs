//! Hamiltonian vector fields of `H = α^r H_r` and of the reduced `H̃_r`.

use crate::dual::Dual;
use crate::model::{ModelError, PhasePoint, TwistedSystem};

/// `∂H_r/∂q^k` for every `k` in block `r`, exact via dual numbers.
fn block_energy_gradient(sys: &TwistedSystem, r: usize, q: &[f64], p: &[f64]) -> Result<Vec<f64>, ModelError> {
    let range = sys.structure().range(r);
    let pd: Vec<Dual<f64>> = p.iter().map(|&x| Dual::constant(x)).collect();
    range
        .map(|k| {
            let qd: Vec<Dual<f64>> =
                q.iter().enumerate().map(|(i, &x)| Dual::new(x, if i == k { 1.0 } else { 0.0 })).collect();
            Ok(sys.block_energy_qp(r, &qd, &pd)?.eps)
        })
        .collect()
}

/// `g_r p_r` for block `r`.
fn block_velocity(sys: &TwistedSystem, r: usize, q: &[f64], p: &[f64]) -> Result<Vec<f64>, ModelError> {
    Ok(sys.block_metric(r, q)?.matvec(&p[sys.structure().range(r)]))
}

/// Writes `(∂H/∂p, −∂H/∂q)` and, when `out` has room, the clock rates
/// `τ̇_r = α^r` after them. `state` is `[q, p, ..]`.
pub fn full_field_into(sys: &TwistedSystem, state: &[f64], out: &mut [f64]) -> Result<(), ModelError> {
    let dim = sys.dim();
    let n = sys.n_blocks();
    let (q, p) = (&state[..dim], &state[dim..2 * dim]);
    let jet = sys.inverse_jet(q, false)?;
    let pt_h: Vec<f64> = (0..n).map(|r| sys.block_energy_qp(r, q, p)).collect::<Result<_, _>>()?;
    for r in 0..n {
        let alpha = jet.alpha(r);
        let range = sys.structure().range(r);
        let vel = block_velocity(sys, r, q, p)?;
        let grad = block_energy_gradient(sys, r, q, p)?;
        for (i, k) in range.enumerate() {
            out[k] = alpha * vel[i];
            let dalpha: f64 = (0..n).map(|s| jet.d(0, s, k) * pt_h[s]).sum();
            out[dim + k] = -(dalpha + alpha * grad[i]);
        }
    }
    if out.len() >= 2 * dim + n {
        for r in 0..n {
            out[2 * dim + r] = jet.alpha(r);
        }
    }
    Ok(())
}

/// Hamiltonian vector field of `H`, `(q̇, ṗ)` with `2N` components.
pub fn full_field(sys: &TwistedSystem, pt: &PhasePoint) -> Result<Vec<f64>, ModelError> {
    let mut out = vec![0.0; 2 * sys.dim()];
    full_field_into(sys, &pt.to_state(), &mut out)?;
    Ok(out)
}

/// Embeds a block state `[q_r, p_r]` into zero-filled global vectors.
pub fn embed_block(sys: &TwistedSystem, r: usize, block_state: &[f64]) -> PhasePoint {
    let dim = sys.dim();
    let range = sys.structure().range(r);
    let m = range.len();
    assert_eq!(block_state.len(), 2 * m, "block state has wrong length");
    let mut q = vec![0.0; dim];
    let mut p = vec![0.0; dim];
    q[range.clone()].copy_from_slice(&block_state[..m]);
    p[range].copy_from_slice(&block_state[m..]);
    PhasePoint { q, p }
}

/// Block slice `[q_r, p_r]` of a phase point.
pub fn block_state(sys: &TwistedSystem, r: usize, pt: &PhasePoint) -> Vec<f64> {
    let s = sys.structure();
    pt.block_q(s, r).iter().chain(pt.block_p(s, r)).copied().collect()
}

/// Writes the Hamiltonian field of `H̃_r = H_r − c_a S^a_r` on `T*M_r`.
pub fn reduced_field_into(
    sys: &TwistedSystem,
    r: usize,
    c: &[f64],
    block: &[f64],
    out: &mut [f64],
) -> Result<(), ModelError> {
    let n = sys.n_blocks();
    if c.len() != n {
        return Err(ModelError::Dimension { what: "separation constants".into(), expected: n, got: c.len() });
    }
    let pt = embed_block(sys, r, block);
    let range = sys.structure().range(r);
    let m = range.len();
    let vel = block_velocity(sys, r, &pt.q, &pt.p)?;
    let grad = block_energy_gradient(sys, r, &pt.q, &pt.p)?;
    for (i, k) in range.enumerate() {
        let mut shift = 0.0;
        for (a, &ca) in c.iter().enumerate() {
            let e = sys.stackel_bound(r, a);
            if ca != 0.0 && e.depends_on(k) {
                shift += ca * e.partial(&pt.q, k).map_err(ModelError::eval(format!("Stäckel entry S[{}][{}]", r + 1, a + 1)))?;
            }
        }
        out[i] = vel[i];
        out[m + i] = -(grad[i] - shift);
    }
    Ok(())
}

pub fn reduced_field(sys: &TwistedSystem, r: usize, c: &[f64], block: &[f64]) -> Result<Vec<f64>, ModelError> {
    let mut out = vec![0.0; block.len()];
    reduced_field_into(sys, r, c, block, &mut out)?;
    Ok(out)
}
