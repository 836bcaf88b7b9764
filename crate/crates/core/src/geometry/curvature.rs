//! Levi-Civita connection, Riemann tensor and the Killing equation.

use super::tensor::{jacobian_of, seed, MetricField, TensorField2};
use super::GeometryError;
use crate::dual::Dual;
use crate::linalg::Mat;
use crate::scalar::Scalar;

/// Christoffel symbols `Γ^i_{jk}`, symmetric in `(j, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection<T = f64> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Connection<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.data[(i * self.n + j) * self.n + k]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.real().abs()).fold(0.0, f64::max)
    }
}

/// `Γ^i_{jk} = ½ g^{im}(∂_j g_{mk} + ∂_k g_{mj} − ∂_m g_{jk})`.
pub fn christoffel<T: Scalar>(g: &MetricField, q: &[T]) -> Result<Connection<T>, GeometryError> {
    let n = g.dim();
    let (_, dg) = jacobian_of(q, |qd| g.covariant(qd))?;
    let gu = g.inverse_metric(q)?;
    let half = T::lit(0.5);
    let mut data = vec![T::zero(); n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let mut s = T::zero();
                for m in 0..n {
                    s = s + gu[(i, m)] * (dg[j][(m, k)] + dg[k][(m, j)] - dg[m][(j, k)]);
                }
                let v = half * s;
                data[(i * n + j) * n + k] = v;
                data[(i * n + k) * n + j] = v;
            }
        }
    }
    Ok(Connection { n, data })
}

/// `R^i_{jkl}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Riemann<T = f64> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Riemann<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        self.data[self.idx(i, j, k, l)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.real().abs()).fold(0.0, f64::max)
    }

    /// Largest `|R^i_{jkl} + R^i_{jlk}|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        worst = worst.max((self.get(i, j, k, l) + self.get(i, j, l, k)).real().abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest `|R^i_{jkl} + R^i_{klj} + R^i_{ljk}|`.
    pub fn bianchi_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let s = self.get(i, j, k, l) + self.get(i, k, l, j) + self.get(i, l, j, k);
                        worst = worst.max(s.real().abs());
                    }
                }
            }
        }
        worst
    }

    /// Ricci tensor `R_{jl} = R^i_{jil}`.
    pub fn ricci(&self) -> Mat<T> {
        Mat::from_fn(self.n, self.n, |j, l| (0..self.n).fold(T::zero(), |acc, i| acc + self.get(i, j, i, l)))
    }
}

/// `R^i_{jkl} = ∂_kΓ^i_{lj} − ∂_lΓ^i_{kj} + Γ^i_{km}Γ^m_{lj} − Γ^i_{lm}Γ^m_{kj}`,
/// with `∂Γ` from nested dual numbers.
pub fn riemann<T: Scalar>(g: &MetricField, q: &[T]) -> Result<Riemann<T>, GeometryError> {
    let n = g.dim();
    let gamma = christoffel(g, q)?;
    let dgamma: Vec<Connection<Dual<T>>> = (0..n).map(|k| christoffel(g, &seed(q, k))).collect::<Result<_, _>>()?;
    let d = |k: usize, i: usize, l: usize, j: usize| dgamma[k].get(i, l, j).eps;
    let mut out = Riemann { n, data: vec![T::zero(); n * n * n * n] };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in (k + 1)..n {
                    let mut v = d(k, i, l, j) - d(l, i, k, j);
                    for m in 0..n {
                        v = v + gamma.get(i, k, m) * gamma.get(m, l, j) - gamma.get(i, l, m) * gamma.get(m, k, j);
                    }
                    let a = out.idx(i, j, k, l);
                    let b = out.idx(i, j, l, k);
                    out.data[a] = v;
                    out.data[b] = -v;
                }
            }
        }
    }
    Ok(out)
}

/// Scalar curvature `g^{jl} R_{jl}`.
pub fn scalar_curvature(g: &MetricField, q: &[f64]) -> Result<f64, GeometryError> {
    let ric = riemann(g, q)?.ricci();
    let gu = g.inverse_metric(q)?;
    let n = g.dim();
    Ok((0..n).flat_map(|j| (0..n).map(move |l| (j, l))).map(|(j, l)| gu[(j, l)] * ric[(j, l)]).sum())
}

/// Max-norm of the symmetrised covariant derivative `∇_(i K_jk)`.
pub fn killing_residual(g: &MetricField, k: &TensorField2, q: &[f64]) -> Result<f64, GeometryError> {
    let n = g.dim();
    let (kl, dk) = jacobian_of(q, |qd| k.covariant_at(Some(g), qd))?;
    let gamma = christoffel(g, q)?;
    let nabla = |i: usize, j: usize, l: usize| -> f64 {
        let mut v = dk[i][(j, l)];
        for m in 0..n {
            v -= gamma.get(m, i, j) * kl[(m, l)] + gamma.get(m, i, l) * kl[(j, m)];
        }
        v
    };
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            for l in j..n {
                let s = nabla(i, j, l) + nabla(i, l, j) + nabla(j, i, l) + nabla(j, l, i) + nabla(l, i, j) + nabla(l, j, i);
                worst = worst.max((s / 6.0).abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Variance;

    fn polar() -> MetricField {
        MetricField::diagonal(&["r", "t"], &["1", "r^(-2)"]).unwrap()
    }

    fn sphere() -> MetricField {
        MetricField::diagonal(&["th", "ph"], &["1", "sin(th)^(-2)"]).unwrap()
    }

    #[test]
    fn polar_christoffels() {
        let c = christoffel(&polar(), &[2.0f64, 0.3]).unwrap();
        assert!((c.get(0, 1, 1) + 2.0).abs() < 1e-14);
        assert!((c.get(1, 0, 1) - 0.5).abs() < 1e-14);
        assert_eq!(c.get(1, 0, 1), c.get(1, 1, 0));
        assert!(riemann(&polar(), &[2.0, 0.3]).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn unit_sphere_curvature() {
        let q = [0.7, 1.1];
        let r = riemann(&sphere(), &q).unwrap();
        assert!((r.get(0, 1, 0, 1) - 0.7f64.sin().powi(2)).abs() < 1e-12);
        assert!(r.antisymmetry_defect() < 1e-12 && r.bianchi_defect() < 1e-12);
        assert!((scalar_curvature(&sphere(), &q).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn metric_is_killing_and_counterexample_is_not() {
        let g = MetricField::euclidean(&["x", "y", "z"]);
        let k = TensorField2::identity(&["x", "y", "z"], Variance::Covariant);
        assert!(killing_residual(&g, &k, &[0.1, 0.2, 0.3]).unwrap() < 1e-15);
        let bad = TensorField2::diagonal(&["x", "y", "z"], &["x", "0", "0"], Variance::Covariant).unwrap();
        assert!(killing_residual(&g, &bad, &[0.1, 0.2, 0.3]).unwrap() > 0.1);
        let sph = sphere();
        let gs = TensorField2::diagonal(&["th", "ph"], &["1", "sin(th)^2"], Variance::Covariant).unwrap();
        assert!(killing_residual(&sph, &gs, &[0.4, 0.2]).unwrap() < 1e-14);
    }

    #[test]
    fn christoffels_match_finite_differences() {
        let g = MetricField::diagonal(&["u", "v"], &["exp(u*v)", "1+u^2"]).unwrap();
        let q = [0.3, -0.4];
        let c = christoffel(&g, &q).unwrap();
        let h = 1e-6;
        let dg = |k: usize| {
            let mut a = q;
            let mut b = q;
            a[k] += h;
            b[k] -= h;
            g.covariant(&a).unwrap().sub(&g.covariant(&b).unwrap()).scale(0.5 / h)
        };
        let d = [dg(0), dg(1)];
        let gu = g.inverse_metric(&q).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let fd: f64 =
                        (0..2).map(|m| 0.5 * gu[(i, m)] * (d[j][(m, k)] + d[k][(m, j)] - d[m][(j, k)])).sum();
                    assert!((fd - c.get(i, j, k)).abs() <= 1e-6 * (1.0 + fd.abs()));
                }
            }
        }
    }
}
