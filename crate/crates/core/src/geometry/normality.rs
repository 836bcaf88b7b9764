//! Nijenhuis and Haantjes tensors, the Tonolo–Schouten–Nijenhuis
//! contractions and the characteristic condition `d(T dV) = 0`.
//!
//! Antisymmetrisation `[ab]` carries weight ½ and `[abc]` weight 1/3!.

use super::tensor::{jacobian_of, seed, MetricField, TensorField2};
use super::GeometryError;
use crate::dual::Dual;
use crate::expr::{BoundExpr, Expression};
use crate::linalg::Mat;

/// Three-index array `A^i_{jk}` over `n` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.n + j) * self.n + k] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

/// Mixed components `T^i_j` and `∂_l T^i_j` (`dt[l]`).
fn mixed_jet(t: &TensorField2, g: Option<&MetricField>, q: &[f64]) -> Result<(Mat<f64>, Vec<Mat<f64>>), GeometryError> {
    jacobian_of(q, |qd| t.mixed_at(g, qd))
}

/// `N^i_{jk} = T^i_l T^l_{[j,k]} + T^l_{[j} T^i_{k],l}`
/// `= ½[T^i_l(∂_k T^l_j − ∂_j T^l_k) + T^l_j ∂_l T^i_k − T^l_k ∂_l T^i_j]`.
pub fn nijenhuis(t: &TensorField2, g: Option<&MetricField>, q: &[f64]) -> Result<Tensor3, GeometryError> {
    let (m, dm) = mixed_jet(t, g, q)?;
    Ok(nijenhuis_from(&m, &dm))
}

fn nijenhuis_from(m: &Mat<f64>, dm: &[Mat<f64>]) -> Tensor3 {
    let n = m.rows();
    let mut out = Tensor3::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in (j + 1)..n {
                let mut v = 0.0;
                for l in 0..n {
                    v += m[(i, l)] * (dm[k][(l, j)] - dm[j][(l, k)]);
                    v += m[(l, j)] * dm[l][(i, k)] - m[(l, k)] * dm[l][(i, j)];
                }
                out.set(i, j, k, 0.5 * v);
                out.set(i, k, j, -0.5 * v);
            }
        }
    }
    out
}

/// Haantjes tensor and the max-norm of the Haantjes condition.
#[derive(Debug, Clone, PartialEq)]
pub struct HaantjesReport {
    /// `H^κ_{μλ} = 2T^ν_{[μ}∂_{|ν|}T^κ_{λ]} − 2T^κ_ν ∂_{[μ}T^ν_{λ]}`.
    pub tensor: Tensor3,
    /// `max |H^κ_{νσ}T^ν_μT^σ_λ − 2H^σ_{ν[λ}T^ν_{μ]}T^κ_σ + H^ν_{μλ}T^κ_σT^σ_ν|`.
    pub condition_residual: f64,
}

pub fn haantjes(t: &TensorField2, g: Option<&MetricField>, q: &[f64]) -> Result<HaantjesReport, GeometryError> {
    let (m, dm) = mixed_jet(t, g, q)?;
    let n = m.rows();
    let mut h = Tensor3::zeros(n);
    for kappa in 0..n {
        for mu in 0..n {
            for lam in 0..n {
                let mut v = 0.0;
                for nu in 0..n {
                    v += m[(nu, mu)] * dm[nu][(kappa, lam)] - m[(nu, lam)] * dm[nu][(kappa, mu)];
                    v -= m[(kappa, nu)] * (dm[mu][(nu, lam)] - dm[lam][(nu, mu)]);
                }
                h.set(kappa, mu, lam, v);
            }
        }
    }
    let m2 = &m * &m;
    let mut worst = 0.0f64;
    for kappa in 0..n {
        for mu in 0..n {
            for lam in 0..n {
                let mut v = 0.0;
                for nu in 0..n {
                    for sg in 0..n {
                        v += h.get(kappa, nu, sg) * m[(nu, mu)] * m[(sg, lam)];
                        v -= (h.get(sg, nu, lam) * m[(nu, mu)] - h.get(sg, nu, mu) * m[(nu, lam)]) * m[(kappa, sg)];
                    }
                    v += h.get(nu, mu, lam) * m2[(kappa, nu)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(HaantjesReport { tensor: h, condition_residual: worst })
}

/// Max-norms of `N^l_{[ij} g_{k]l}`, `N^l_{[ij} K_{k]l}` and `N^l_{[ij} K_{k]m} K^m_l`.
pub fn tsn_residuals(k: &TensorField2, g: &MetricField, q: &[f64]) -> Result<[f64; 3], GeometryError> {
    let (m, dm) = mixed_jet(k, Some(g), q)?;
    let nij = nijenhuis_from(&m, &dm);
    let gl = g.covariant(q)?;
    let kl = &gl * &m;
    let kkl = &kl * &m;
    let n = m.rows();
    let mut out = [0.0f64; 3];
    for (slot, c) in [&gl, &kl, &kkl].into_iter().enumerate() {
        let contract = |i: usize, j: usize, kk: usize| (0..n).map(|l| nij.get(l, i, j) * c[(kk, l)]).sum::<f64>();
        for i in 0..n {
            for j in 0..n {
                for kk in 0..n {
                    // N antisymmetric in its lower pair, so the six-term sum folds to three
                    let v = (contract(i, j, kk) + contract(j, kk, i) + contract(kk, i, j)) / 3.0;
                    out[slot] = out[slot].max(v.abs());
                }
            }
        }
    }
    Ok(out)
}

/// Max-norm of `d(T dV)`, the exterior derivative of `ω_i = T^j_i ∂_j V`.
pub fn characteristic_condition(
    t: &TensorField2,
    v: &Expression,
    g: Option<&MetricField>,
    q: &[f64],
) -> Result<f64, GeometryError> {
    let bv: BoundExpr = v.bind(t.names()).map_err(|source| GeometryError::Eval { entry: "potential".into(), source })?;
    let n = t.dim();
    let omega = |qd: &[Dual<f64>]| -> Result<Vec<Dual<f64>>, GeometryError> {
        let tm = t.mixed_at(g, qd)?;
        let grad = (0..n)
            .map(|j| bv.eval(&seed(qd, j)).map(|d| d.eps))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|source| GeometryError::Eval { entry: "potential".into(), source })?;
        Ok((0..n).map(|i| (0..n).fold(Dual::constant(0.0), |acc, j| acc + tm[(j, i)] * grad[j])).collect())
    };
    // domega[l][i] = ∂_l ω_i
    let domega = (0..n)
        .map(|l| omega(&seed(q, l)).map(|w| w.iter().map(|d| d.eps).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((domega[i][j] - domega[j][i]).abs());
        }
    }
    Ok(worst)
}
