use crate::linalg::{checked_inverse, LinalgError, Mat};

/// `S⁻¹` at a point together with its first and (optionally) second partials
/// with respect to the global coordinates.
///
/// The partials come from differentiating `S S⁻¹ = I`:
/// `∂_k A = −A (∂_k S) A` and
/// `∂_l ∂_k A = −(∂_l A (∂_k S) A + A (∂_k ∂_l S) A + A (∂_k S) ∂_l A)`.
#[derive(Debug, Clone)]
pub struct InverseJet {
    pub inverse: Mat<f64>,
    pub cond: f64,
    pub first: Vec<Mat<f64>>,
    pub second: Option<Vec<Vec<Mat<f64>>>>,
}

impl InverseJet {
    /// `ds[k] = ∂_k S`; `dds[k][l] = ∂_k ∂_l S` when second partials are wanted.
    pub fn new(s: &Mat<f64>, ds: &[Mat<f64>], dds: Option<&[Vec<Mat<f64>>]>) -> Result<Self, LinalgError> {
        let ci = checked_inverse(s)?;
        let a = ci.inverse;
        let first: Vec<Mat<f64>> = ds.iter().map(|d| (&(&a * d) * &a).scale(-1.0)).collect();
        let second = dds.map(|dds| {
            let n = ds.len();
            let mut out = vec![vec![Mat::zeros(a.rows(), a.cols()); n]; n];
            for k in 0..n {
                let dk_a = &ds[k] * &a;
                let a_dk = &a * &ds[k];
                for l in k..n {
                    let t1 = &first[l] * &dk_a;
                    let t2 = &(&a * &dds[k][l]) * &a;
                    let t3 = &a_dk * &first[l];
                    let m = t1.add(&t2).add(&t3).scale(-1.0);
                    out[l][k] = m.clone();
                    out[k][l] = m;
                }
            }
            out
        });
        Ok(Self { inverse: a, cond: ci.cond, first, second })
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    /// `α^r = (S⁻¹)^r_1`.
    pub fn alpha(&self, r: usize) -> f64 {
        self.inverse[(0, r)]
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.inverse.row(0).to_vec()
    }

    /// `∂_k (S⁻¹)^r_a`.
    pub fn d(&self, a: usize, r: usize, k: usize) -> f64 {
        self.first[k][(a, r)]
    }

    /// `∂_k ∂_l (S⁻¹)^r_a`; panics if second partials were not requested.
    pub fn dd(&self, a: usize, r: usize, k: usize, l: usize) -> f64 {
        self.second.as_ref().expect("second partials not computed")[k][l][(a, r)]
    }
}
