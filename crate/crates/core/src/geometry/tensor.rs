use std::sync::Arc;

use super::GeometryError;
use crate::dual::Dual;
use crate::expr::{BoundExpr, Expression};
use crate::linalg::Mat;
use crate::model::TwistedSystem;
use crate::scalar::Scalar;

/// Position of the two indices of a 2-tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variance {
    /// `K^{ij}`
    Contravariant,
    /// `K_{ij}`
    Covariant,
    /// `K^i_j`
    Mixed,
}

#[derive(Debug, Clone)]
enum Source {
    Grid { grid: Vec<Vec<Expression>>, bound: Vec<Vec<BoundExpr>> },
    /// Contravariant `k_a` of a twisted system (`a = 0` is the metric).
    Integral { sys: Arc<TwistedSystem>, a: usize },
}

/// `N × N` field of components over named coordinates.
#[derive(Debug, Clone)]
pub struct TensorField2 {
    names: Vec<String>,
    variance: Variance,
    source: Source,
}

impl TensorField2 {
    pub fn new(names: Vec<String>, grid: Vec<Vec<Expression>>, variance: Variance) -> Result<Self, GeometryError> {
        let n = names.len();
        if grid.len() != n || grid.iter().any(|row| row.len() != n) {
            return Err(GeometryError::Dimension { what: "tensor grid".into(), expected: n });
        }
        let bound = grid
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, e)| {
                        e.bind(&names).map_err(|source| GeometryError::Eval { entry: format!("component ({},{})", i + 1, j + 1), source })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { names, variance, source: Source::Grid { grid, bound } })
    }

    pub fn parse<S: AsRef<str>>(names: &[&str], rows: &[Vec<S>], variance: Variance) -> Result<Self, GeometryError> {
        let grid = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| Expression::parse(s.as_ref()).map_err(|e| GeometryError::Parse(e.to_string())))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(names.iter().map(|s| s.to_string()).collect(), grid, variance)
    }

    pub fn diagonal<S: AsRef<str>>(names: &[&str], diag: &[S], variance: Variance) -> Result<Self, GeometryError> {
        let n = diag.len();
        let rows: Vec<Vec<String>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { diag[i].as_ref().to_string() } else { "0".into() }).collect())
            .collect();
        Self::parse(names, &rows, variance)
    }

    pub fn identity(names: &[&str], variance: Variance) -> Self {
        Self::diagonal(names, &vec!["1"; names.len()], variance).expect("constant grid")
    }

    /// The contravariant tensor `k_a` of a twisted system.
    pub fn from_integral(sys: Arc<TwistedSystem>, a: usize) -> Self {
        let names = sys.structure().names().to_vec();
        Self { names, variance: Variance::Contravariant, source: Source::Integral { sys, a } }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn grid(&self) -> Option<&[Vec<Expression>]> {
        match &self.source {
            Source::Grid { grid, .. } => Some(grid),
            Source::Integral { .. } => None,
        }
    }

    /// Whether the components are symmetric (structurally for grids).
    pub fn is_symmetric(&self) -> bool {
        match &self.source {
            Source::Grid { grid, .. } => {
                (0..grid.len()).all(|i| (0..i).all(|j| grid[i][j].to_string() == grid[j][i].to_string()))
            }
            Source::Integral { .. } => true,
        }
    }

    pub fn eval<T: Scalar>(&self, q: &[T]) -> Result<Mat<T>, GeometryError> {
        let n = self.dim();
        if q.len() != n {
            return Err(GeometryError::Dimension { what: "point".into(), expected: n });
        }
        match &self.source {
            Source::Grid { bound, .. } => {
                let mut m = Mat::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] = bound[i][j].eval(q).map_err(|source| GeometryError::Eval {
                            entry: format!("component ({},{})", i + 1, j + 1),
                            source,
                        })?;
                    }
                }
                Ok(m)
            }
            Source::Integral { sys, a } => Ok(sys.integral_tensor(*a, q)?),
        }
    }
}

/// A contravariant metric `G^{ij}`.
#[derive(Debug, Clone)]
pub struct MetricField(TensorField2);

impl MetricField {
    pub fn contravariant(field: TensorField2) -> Result<Self, GeometryError> {
        if field.variance() != Variance::Contravariant || !field.is_symmetric() {
            return Err(GeometryError::NotMetric);
        }
        Ok(Self(field))
    }

    pub fn diagonal<S: AsRef<str>>(names: &[&str], diag: &[S]) -> Result<Self, GeometryError> {
        Self::contravariant(TensorField2::diagonal(names, diag, Variance::Contravariant)?)
    }

    pub fn euclidean(names: &[&str]) -> Self {
        Self(TensorField2::identity(names, Variance::Contravariant))
    }

    /// `G^{r_i r_j} = α^r g_r^{ij}` of a twisted system.
    pub fn from_system(sys: Arc<TwistedSystem>) -> Self {
        Self(TensorField2::from_integral(sys, 0))
    }

    pub fn field(&self) -> &TensorField2 {
        &self.0
    }

    pub fn names(&self) -> &[String] {
        self.0.names()
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn inverse_metric<T: Scalar>(&self, q: &[T]) -> Result<Mat<T>, GeometryError> {
        self.0.eval(q)
    }

    /// Covariant components `g_{ij}`.
    pub fn covariant<T: Scalar>(&self, q: &[T]) -> Result<Mat<T>, GeometryError> {
        self.0.eval(q)?.inverse().map_err(|_| GeometryError::Degenerate { point: q.iter().map(Scalar::real).collect() })
    }
}

/// Seeds coordinate `k` of `q` as the active tangent direction.
pub fn seed<T: Scalar>(q: &[T], k: usize) -> Vec<Dual<T>> {
    q.iter().enumerate().map(|(i, &x)| Dual::new(x, if i == k { T::one() } else { T::zero() })).collect()
}

/// Value and all first partials of a matrix-valued map.
pub fn jacobian_of<T: Scalar>(
    q: &[T],
    f: impl Fn(&[Dual<T>]) -> Result<Mat<Dual<T>>, GeometryError>,
) -> Result<(Mat<T>, Vec<Mat<T>>), GeometryError> {
    let mut value = None;
    let mut parts = Vec::with_capacity(q.len());
    for k in 0..q.len() {
        let m = f(&seed(q, k))?;
        if value.is_none() {
            value = Some(m.map(|d| d.re));
        }
        parts.push(m.map(|d| d.eps));
    }
    let value = match value {
        Some(v) => v,
        None => f(&[])?.map(|d| d.re),
    };
    Ok((value, parts))
}

impl TensorField2 {
    /// Components as `K_{ij}`, using `g` to lower indices.
    pub fn covariant_at<T: Scalar>(&self, g: Option<&MetricField>, q: &[T]) -> Result<Mat<T>, GeometryError> {
        let k = self.eval(q)?;
        match self.variance {
            Variance::Covariant => Ok(k),
            Variance::Contravariant => {
                let gl = g.ok_or(GeometryError::NeedsMetric)?.covariant(q)?;
                Ok(&(&gl * &k) * &gl)
            }
            Variance::Mixed => {
                let gl = g.ok_or(GeometryError::NeedsMetric)?.covariant(q)?;
                Ok(&gl * &k)
            }
        }
    }

    /// Components as `K^i_j`.
    pub fn mixed_at<T: Scalar>(&self, g: Option<&MetricField>, q: &[T]) -> Result<Mat<T>, GeometryError> {
        let k = self.eval(q)?;
        match self.variance {
            Variance::Mixed => Ok(k),
            Variance::Contravariant => {
                let gl = g.ok_or(GeometryError::NeedsMetric)?.covariant(q)?;
                Ok(&k * &gl)
            }
            Variance::Covariant => {
                let gu = g.ok_or(GeometryError::NeedsMetric)?.inverse_metric(q)?;
                Ok(&gu * &k)
            }
        }
    }

    /// Components as `K^{ij}`.
    pub fn contravariant_at<T: Scalar>(&self, g: Option<&MetricField>, q: &[T]) -> Result<Mat<T>, GeometryError> {
        let k = self.eval(q)?;
        match self.variance {
            Variance::Contravariant => Ok(k),
            Variance::Mixed => {
                let gu = g.ok_or(GeometryError::NeedsMetric)?.inverse_metric(q)?;
                Ok(&k * &gu)
            }
            Variance::Covariant => {
                let gu = g.ok_or(GeometryError::NeedsMetric)?.inverse_metric(q)?;
                Ok(&(&gu * &k) * &gu)
            }
        }
    }
}
