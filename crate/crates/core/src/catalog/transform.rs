//! Point transformations lifted to canonical transformations.

use crate::geometry::seed;
use crate::linalg::{LinalgError, Mat};
use crate::model::PhasePoint;
use crate::scalar::Scalar;

/// A diffeomorphism between coordinate charts, `new = forward(old)`.
pub trait PointMap {
    fn dim(&self) -> usize;
    fn forward<T: Scalar>(&self, old: &[T]) -> Vec<T>;
    fn backward<T: Scalar>(&self, new: &[T]) -> Vec<T>;
}

/// `new = A old` for invertible `A`.
#[derive(Debug, Clone)]
pub struct LinearMap {
    a: Mat<f64>,
    inv: Mat<f64>,
}

impl LinearMap {
    pub fn new(a: Mat<f64>) -> Result<Self, LinalgError> {
        let inv = a.inverse()?;
        Ok(Self { a, inv })
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.a
    }
}

fn apply<T: Scalar>(m: &Mat<f64>, x: &[T]) -> Vec<T> {
    (0..m.rows()).map(|i| (0..m.cols()).fold(T::zero(), |acc, j| acc + T::lit(m[(i, j)]) * x[j])).collect()
}

impl PointMap for LinearMap {
    fn dim(&self) -> usize {
        self.a.rows()
    }

    fn forward<T: Scalar>(&self, old: &[T]) -> Vec<T> {
        apply(&self.a, old)
    }

    fn backward<T: Scalar>(&self, new: &[T]) -> Vec<T> {
        apply(&self.inv, new)
    }
}

/// `z ↦ (r, φ_1, φ_2, φ_3)` with `z^4 = r cos φ_1`, `z^3 = r sin φ_1 cos φ_2`,
/// `z^2 = r sin φ_1 sin φ_2 cos φ_3`, `z^1 = r sin φ_1 sin φ_2 sin φ_3`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HyperSpherical4;

impl PointMap for HyperSpherical4 {
    fn dim(&self) -> usize {
        4
    }

    fn forward<T: Scalar>(&self, z: &[T]) -> Vec<T> {
        let r = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2] + z[3] * z[3]).sqrt();
        let phi1 = (z[3] / r).acos();
        let rho2 = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt();
        let phi2 = (z[2] / rho2).acos();
        let phi3 = z[0].atan2(z[1]);
        vec![r, phi1, phi2, phi3]
    }

    fn backward<T: Scalar>(&self, s: &[T]) -> Vec<T> {
        let (r, p1, p2, p3) = (s[0], s[1], s[2], s[3]);
        let a = r * p1.sin();
        let b = a * p2.sin();
        vec![b * p3.sin(), b * p3.cos(), a * p2.cos(), r * p1.cos()]
    }
}

/// `second ∘ first`.
#[derive(Debug, Clone)]
pub struct Chain<A, B>(pub A, pub B);

impl<A: PointMap, B: PointMap> PointMap for Chain<A, B> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn forward<T: Scalar>(&self, old: &[T]) -> Vec<T> {
        self.1.forward(&self.0.forward(old))
    }

    fn backward<T: Scalar>(&self, new: &[T]) -> Vec<T> {
        self.0.backward(&self.1.backward(new))
    }
}

/// Cotangent lift of a point map: `q' = φ(q)`, `p'_i = (∂q^j/∂q'^i) p_j`.
#[derive(Debug, Clone)]
pub struct CanonicalTransform<M> {
    pub map: M,
}

impl<M: PointMap> CanonicalTransform<M> {
    pub fn new(map: M) -> Self {
        Self { map }
    }

    /// `J^j_i = ∂q^j/∂q'^i` at new coordinates `q'`, by dual numbers.
    pub fn jacobian_old_wrt_new<T: Scalar>(&self, new: &[T]) -> Mat<T> {
        let n = self.map.dim();
        let mut j = Mat::zeros(n, n);
        for i in 0..n {
            let col = self.map.backward(&seed(new, i));
            for (row, d) in col.iter().enumerate() {
                j[(row, i)] = d.eps;
            }
        }
        j
    }

    pub fn to_new<T: Scalar>(&self, pt: &PhasePoint<T>) -> PhasePoint<T> {
        let q = self.map.forward(&pt.q);
        let p = self.jacobian_old_wrt_new(&q).transpose().matvec(&pt.p);
        PhasePoint { q, p }
    }

    pub fn to_old<T: Scalar>(&self, pt: &PhasePoint<T>) -> Result<PhasePoint<T>, LinalgError> {
        let q = self.map.backward(&pt.q);
        let jt = self.jacobian_old_wrt_new(&pt.q).transpose();
        let p = jt.lu()?.solve(&pt.p);
        Ok(PhasePoint { q, p })
    }
}
