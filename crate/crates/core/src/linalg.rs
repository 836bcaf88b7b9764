//! Small dense matrices and LU factorisation with partial pivoting.
//!
//! Everything here is generic over [`Scalar`] so the same factorisation can be
//! pushed through dual numbers. Pivot selection looks at real parts only.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use thiserror::Error;

use crate::scalar::Scalar;

/// Condition number above which a factorisation is rejected.
pub const COND_ERROR: f64 = 1e12;
/// Condition number above which results carry a warning.
pub const COND_WARN: f64 = 1e8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular (zero pivot in column {column})")]
    Singular { column: usize },
    #[error("matrix is ill-conditioned (1-norm condition number {cond:.3e} > {limit:.0e})")]
    IllConditioned { cond: f64, limit: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.iter().flatten().copied().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape");
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| acc + self[(i, k)] * other[(k, j)])
        })
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec shape");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    /// Maximum absolute column sum (real parts).
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].real().abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry (real parts).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.real().abs()).fold(0.0, f64::max)
    }

    pub fn real_parts(&self) -> Mat<f64> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(Scalar::real).collect() }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn lu(&self) -> Result<Lu<T>, LinalgError> {
        Lu::factor(self)
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        Ok(self.lu()?.inverse())
    }

    pub fn det(&self) -> T {
        match self.lu() {
            Ok(lu) => lu.det(),
            Err(_) => T::zero(),
        }
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Mul for &Mat<T> {
    type Output = Mat<T>;
    fn mul(self, rhs: Self) -> Mat<T> {
        self.matmul(rhs)
    }
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

/// LU factorisation `P A = L U` with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    n: usize,
    lu: Mat<T>,
    perm: Vec<usize>,
    sign: i32,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(a: &Mat<T>) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::Dimension { expected: a.rows, got: a.cols });
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].real().abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == 0.0 || !pmax.is_finite() {
                return Err(LinalgError::Singular { column: k });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] = lu[(i, j)] - factor * u;
                }
            }
        }
        Ok(Self { n, lu, perm, sign })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn det(&self) -> T {
        let d = (0..self.n).fold(T::one(), |acc, i| acc * self.lu[(i, i)]);
        if self.sign < 0 {
            -d
        } else {
            d
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] = x[i] - self.lu[(i, j)] * x[j];
            }
            x[i] = x[i] / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> Mat<T> {
        let n = self.n;
        let mut inv = Mat::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e[j] = T::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
            e[j] = T::zero();
        }
        inv
    }
}

/// Inverse together with its 1-norm condition number.
#[derive(Clone, Debug)]
pub struct ConditionedInverse {
    pub inverse: Mat<f64>,
    pub det: f64,
    pub cond: f64,
}

impl ConditionedInverse {
    pub fn ill_conditioned_warning(&self) -> bool {
        self.cond > COND_WARN
    }
}

/// Inverts `a`, rejecting singular or ill-conditioned (`cond > 1e12`) input.
pub fn checked_inverse(a: &Mat<f64>) -> Result<ConditionedInverse, LinalgError> {
    let lu = a.lu()?;
    let inverse = lu.inverse();
    let cond = a.norm1() * inverse.norm1();
    if !cond.is_finite() || cond > COND_ERROR {
        return Err(LinalgError::IllConditioned { cond, limit: COND_ERROR });
    }
    Ok(ConditionedInverse { inverse, det: lu.det(), cond })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Dual;

    fn adjugate_inverse3(a: &Mat<f64>) -> (f64, Mat<f64>) {
        let m = |i: usize, j: usize| a[(i, j)];
        let cof = |i: usize, j: usize| {
            let r: Vec<usize> = (0..3).filter(|&k| k != i).collect();
            let c: Vec<usize> = (0..3).filter(|&k| k != j).collect();
            let minor = m(r[0], c[0]) * m(r[1], c[1]) - m(r[0], c[1]) * m(r[1], c[0]);
            if (i + j).is_multiple_of(2) {
                minor
            } else {
                -minor
            }
        };
        let det = (0..3).map(|j| m(0, j) * cof(0, j)).sum::<f64>();
        (det, Mat::from_fn(3, 3, |i, j| cof(j, i) / det))
    }

    #[test]
    fn lu_matches_adjugate_oracle() {
        let a = Mat::<f64>::from_rows(&[vec![2.0, 1.0, 2.0], vec![3.0, 0.0, 2.0], vec![4.0, 0.0, 1.0]]);
        let (det, inv) = adjugate_inverse3(&a);
        let lu = a.lu().unwrap();
        assert!((lu.det() - det).abs() < 1e-14);
        assert!((det - 5.0).abs() < 1e-14);
        assert!(lu.inverse().sub(&inv).max_abs() < 1e-15);
        let row0 = lu.inverse().row(0).to_vec();
        assert!((row0[0] - 0.0).abs() < 1e-15 && (row0[1] + 0.2).abs() < 1e-15 && (row0[2] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(a.lu(), Err(LinalgError::Singular { .. })));
        let b = Mat::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-14]]);
        assert!(matches!(checked_inverse(&b), Err(LinalgError::IllConditioned { .. })));
    }

    #[test]
    fn condition_number_of_identity_is_one() {
        let inv = checked_inverse(&Mat::identity(4)).unwrap();
        assert_eq!(inv.cond, 1.0);
        assert!(!inv.ill_conditioned_warning());
    }

    #[test]
    fn lu_propagates_dual_derivatives() {
        // d/dt inv(A + tB) at t=0 = -A^{-1} B A^{-1}
        let a = Mat::<f64>::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let b = Mat::from_rows(&[vec![0.5, -1.0], vec![0.25, 2.0]]);
        let ad = Mat::from_fn(2, 2, |i, j| Dual::new(a[(i, j)], b[(i, j)]));
        let inv = ad.inverse().unwrap();
        let ai = a.inverse().unwrap();
        let expected = ai.matmul(&b).matmul(&ai).scale(-1.0);
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv[(i, j)].eps - expected[(i, j)]).abs() < 1e-14);
            }
        }
    }
}
