//! Block eigenvalues and the block-Eisenhart / block-Levi-Civita residuals.

use nalgebra::DMatrix;

use super::GeometryError;
use crate::linalg::Mat;
use crate::model::{InverseJet, ModelError, TwistedSystem};

/// Relative gap below which eigenvalues are grouped: `1e-8 · (1 + |λ|)`.
pub const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenCluster {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub clusters: Vec<EigenCluster>,
    /// Multiplicities unchanged when the grouping tolerance is multiplied by 10.
    pub stable: bool,
}

impl Spectrum {
    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.multiplicity).collect()
    }

    /// Every eigenvalue listed with repetition, ascending.
    pub fn values(&self) -> Vec<f64> {
        self.clusters.iter().flat_map(|c| std::iter::repeat_n(c.value, c.multiplicity)).collect()
    }
}

fn group(sorted: &[f64], tol: f64) -> Vec<EigenCluster> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for &x in sorted {
        match out.last_mut() {
            Some((sum, count, last)) if (x - *last).abs() <= tol * (1.0 + x.abs().max(last.abs())) => {
                *sum += x;
                *count += 1;
                *last = x;
            }
            _ => out.push((x, 1, x)),
        }
    }
    out.into_iter().map(|(sum, count, _)| EigenCluster { value: sum / count as f64, multiplicity: count }).collect()
}

/// Groups eigenvalues into multiplicity clusters.
pub fn spectrum(values: &[f64]) -> Spectrum {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let clusters = group(&v, CLUSTER_TOL);
    let coarse = group(&v, 10.0 * CLUSTER_TOL);
    let stable = coarse.len() == clusters.len();
    Spectrum { clusters, stable }
}

/// Roots of `det(k − λ G) = 0` for contravariant `k` and `G`, i.e. the
/// eigenvalues of `k^{ia} g_{aj}`. Fails if any root is not real.
pub fn relative_eigenvalues(k: &Mat<f64>, g: &Mat<f64>) -> Result<Vec<f64>, GeometryError> {
    let n = k.rows();
    let gl = g.inverse().map_err(|_| GeometryError::Degenerate { point: Vec::new() })?;
    let m = &(k * &gl);
    let dm = DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
    let scale = 1.0 + m.max_abs();
    let mut out = Vec::with_capacity(n);
    for z in dm.complex_eigenvalues().iter() {
        if z.im.abs() > 1e-9 * scale {
            return Err(GeometryError::ComplexEigenvalue { re: z.re, im: z.im });
        }
        out.push(z.re);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

fn check_twist(jet: &InverseJet, q: &[f64]) -> Result<(), GeometryError> {
    let alpha = jet.alphas();
    let scale = alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    for (r, a) in alpha.iter().enumerate() {
        if a.abs() <= 1e-12 * scale.max(1e-300) {
            return Err(ModelError::VanishingTwist { block: r, point: q.to_vec() }.into());
        }
    }
    Ok(())
}

/// `λ^r_a = (S⁻¹)^r_a / α^r`, one value per block.
pub fn block_eigenvalues(sys: &TwistedSystem, a: usize, q: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let n = sys.n_blocks();
    if a >= n {
        return Err(ModelError::IndexOutOfRange { what: "first integral", index: a, limit: n }.into());
    }
    let ci = sys.twist_rows(q)?;
    let alpha = ci.inverse.row(0);
    let scale = alpha.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (0..n)
        .map(|r| {
            if alpha[r].abs() <= 1e-12 * scale.max(1e-300) {
                Err(ModelError::VanishingTwist { block: r, point: q.to_vec() }.into())
            } else {
                Ok(ci.inverse[(a, r)] / alpha[r])
            }
        })
        .collect()
}

/// Block eigenvalues repeated `n_r` times and grouped.
pub fn block_spectrum(sys: &TwistedSystem, a: usize, q: &[f64]) -> Result<Spectrum, GeometryError> {
    let lam = block_eigenvalues(sys, a, q)?;
    let values: Vec<f64> =
        lam.iter().enumerate().flat_map(|(r, &l)| std::iter::repeat_n(l, sys.structure().size(r))).collect();
    Ok(spectrum(&values))
}

/// `max |∂_{r_k}λ^s_a − (λ^r_a − λ^s_a) ∂_{r_k} ln|α^s||` over `r, s, r_k`.
pub fn block_eisenhart_residual(sys: &TwistedSystem, a: usize, q: &[f64]) -> Result<f64, GeometryError> {
    block_eisenhart_residual_against(sys, sys, a, q)
}

/// Block-Eisenhart residual of `K_a` taken from `integrals` against the
/// twist functions of `hamiltonian`; both must share the block structure.
pub fn block_eisenhart_residual_against(
    hamiltonian: &TwistedSystem,
    integrals: &TwistedSystem,
    a: usize,
    q: &[f64],
) -> Result<f64, GeometryError> {
    let n = hamiltonian.n_blocks();
    if integrals.structure() != hamiltonian.structure() {
        return Err(GeometryError::Dimension { what: "block structure of the integrals".into(), expected: n });
    }
    if a >= n {
        return Err(ModelError::IndexOutOfRange { what: "first integral", index: a, limit: n }.into());
    }
    if n == 1 {
        return Ok(0.0);
    }
    let h = hamiltonian.inverse_jet(q, false)?;
    check_twist(&h, q)?;
    let k = integrals.inverse_jet(q, false)?;
    let row = |s: usize| k.inverse[(a, s)];
    let lam: Vec<f64> = (0..n).map(|s| row(s) / h.alpha(s)).collect();
    let mut worst = 0.0f64;
    for kk in 0..hamiltonian.dim() {
        let r = hamiltonian.structure().block_of(kk);
        for s in 0..n {
            let al = h.alpha(s);
            let dal = h.d(0, s, kk);
            let dlam = (k.d(a, s, kk) * al - row(s) * dal) / (al * al);
            worst = worst.max((dlam - (lam[r] - lam[s]) * dal / al).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeviCivitaResidual {
    pub metric: f64,
    pub potential: f64,
}

/// Max-norms of the block-Levi-Civita equations for the twist functions and
/// for `V = α^m V_m`, over coordinates `r_i`, `s_j` in distinct blocks.
pub fn block_levi_civita_residual(sys: &TwistedSystem, q: &[f64]) -> Result<LeviCivitaResidual, GeometryError> {
    let n = sys.n_blocks();
    let dim = sys.dim();
    let mut out = LeviCivitaResidual { metric: 0.0, potential: 0.0 };
    if n == 1 {
        return Ok(out);
    }
    let jet = sys.inverse_jet(q, true)?;
    let st = sys.structure();
    let vr: Vec<f64> = (0..n).map(|r| sys.block_potential(r, q)).collect::<Result<_, _>>()?;
    // ∂_k V_{block(k)}
    let dv_own: Vec<f64> = (0..dim)
        .map(|k| {
            let r = st.block_of(k);
            sys.potential_bound(r)
                .partial(q, k)
                .map_err(|source| GeometryError::Model(ModelError::Eval { entry: format!("block {} potential", r + 1), source }))
        })
        .collect::<Result<_, _>>()?;
    let dv = |k: usize| -> f64 { (0..n).map(|m| jet.d(0, m, k) * vr[m]).sum::<f64>() + jet.alpha(st.block_of(k)) * dv_own[k] };
    let ddv = |k: usize, l: usize| -> f64 {
        let (r, s) = (st.block_of(k), st.block_of(l));
        (0..n).map(|m| jet.dd(0, m, k, l) * vr[m]).sum::<f64>() + jet.d(0, s, k) * dv_own[l] + jet.d(0, r, l) * dv_own[k]
    };
    for k in 0..dim {
        let r = st.block_of(k);
        for l in 0..dim {
            let s = st.block_of(l);
            if r == s {
                continue;
            }
            let (ar, as_) = (jet.alpha(r), jet.alpha(s));
            let (dk_as, dl_ar) = (jet.d(0, s, k), jet.d(0, r, l));
            for m in 0..n {
                let res = ar * as_ * jet.dd(0, m, k, l) - ar * dk_as * jet.d(0, m, l) - as_ * dl_ar * jet.d(0, m, k);
                out.metric = out.metric.max(res.abs());
            }
            let res = ar * as_ * ddv(k, l) - ar * dk_as * dv(l) - as_ * dl_ar * dv(k);
            out.potential = out.potential.max(res.abs());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouping_and_stability() {
        let s = spectrum(&[2.0, 0.0, 2.0 + 1e-12, 5.0]);
        assert_eq!(s.multiplicities(), vec![1, 2, 1]);
        assert!(s.stable);
        let borderline = spectrum(&[1.0, 1.0 + 5e-8]);
        assert_eq!(borderline.multiplicities(), vec![1, 1]);
        assert!(!borderline.stable);
    }

    #[test]
    fn relative_eigenvalues_of_scaled_metric() {
        let g = Mat::from_rows(&[vec![2.0, 0.0], vec![0.0, -1.0]]);
        let k = Mat::from_rows(&[vec![6.0, 0.0], vec![0.0, -5.0]]);
        assert_eq!(relative_eigenvalues(&k, &g).unwrap(), vec![3.0, 5.0]);
        let rot = Mat::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]);
        assert!(relative_eigenvalues(&rot, &Mat::identity(2)).is_err());
    }
}
