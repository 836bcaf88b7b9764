use std::sync::Arc;

use super::tensor::{seed, TensorField2};
use super::GeometryError;
use crate::expr::{BoundExpr, Expression};
use crate::model::{PhasePoint, TwistedSystem};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
enum Potential {
    Expr(BoundExpr),
    Integral { sys: Arc<TwistedSystem>, a: usize },
}

/// `F = ½ K^{ij} p_i p_j + W(q)`.
#[derive(Debug, Clone)]
pub struct PhaseScalar {
    kinetic: TensorField2,
    potential: Potential,
}

impl PhaseScalar {
    /// `kinetic` must be contravariant.
    pub fn new(kinetic: TensorField2, potential: &Expression) -> Result<Self, GeometryError> {
        if kinetic.variance() != super::Variance::Contravariant {
            return Err(GeometryError::NotMetric);
        }
        let bound = potential
            .bind(kinetic.names())
            .map_err(|source| GeometryError::Eval { entry: "potential".into(), source })?;
        Ok(Self { kinetic, potential: Potential::Expr(bound) })
    }

    /// `W(q)` alone (zero kinetic part).
    pub fn position(names: &[&str], w: &str) -> Result<Self, GeometryError> {
        let n = names.len();
        let zeros = vec![vec!["0"; n]; n];
        let k = TensorField2::parse(names, &zeros, super::Variance::Contravariant)?;
        Self::new(k, &Expression::parse(w).map_err(|e| GeometryError::Parse(e.to_string()))?)
    }

    /// `K_a` of a twisted system; `a = 0` is `H`.
    pub fn integral(sys: Arc<TwistedSystem>, a: usize) -> Self {
        Self { kinetic: TensorField2::from_integral(sys.clone(), a), potential: Potential::Integral { sys, a } }
    }

    pub fn dim(&self) -> usize {
        self.kinetic.dim()
    }

    pub fn kinetic(&self) -> &TensorField2 {
        &self.kinetic
    }

    fn potential_at<T: Scalar>(&self, q: &[T]) -> Result<T, GeometryError> {
        match &self.potential {
            Potential::Expr(b) => b.eval(q).map_err(|source| GeometryError::Eval { entry: "potential".into(), source }),
            Potential::Integral { sys, a } => Ok(sys.integral_potential(*a, q)?),
        }
    }

    pub fn value<T: Scalar>(&self, q: &[T], p: &[T]) -> Result<T, GeometryError> {
        let k = self.kinetic.eval(q)?;
        let kp = k.matvec(p);
        let kin = p.iter().zip(&kp).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        Ok(kin / T::lit(2.0) + self.potential_at(q)?)
    }

    /// `∂F/∂q` by dual numbers.
    pub fn grad_q(&self, pt: &PhasePoint) -> Result<Vec<f64>, GeometryError> {
        let pd: Vec<_> = pt.p.iter().map(|&x| crate::dual::Dual::constant(x)).collect();
        (0..pt.q.len()).map(|k| Ok(self.value(&seed(&pt.q, k), &pd)?.eps)).collect()
    }

    /// `∂F/∂p_i = K^{ij} p_j`.
    pub fn grad_p(&self, pt: &PhasePoint) -> Result<Vec<f64>, GeometryError> {
        Ok(self.kinetic.eval(&pt.q)?.matvec(&pt.p))
    }
}

/// `{F, G} = Σ_i ∂F/∂q^i ∂G/∂p_i − ∂F/∂p_i ∂G/∂q^i`.
pub fn poisson_bracket(f: &PhaseScalar, g: &PhaseScalar, pt: &PhasePoint) -> Result<f64, GeometryError> {
    if f.dim() != g.dim() || pt.dim() != f.dim() {
        return Err(GeometryError::Dimension { what: "phase space".into(), expected: f.dim() });
    }
    let (fq, fp) = (f.grad_q(pt)?, f.grad_p(pt)?);
    let (gq, gp) = (g.grad_q(pt)?, g.grad_p(pt)?);
    Ok((0..pt.dim()).map(|i| fq[i] * gp[i] - fp[i] * gq[i]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Variance;

    #[test]
    fn canonical_pair() {
        let q1 = PhaseScalar::position(&["q1", "q2"], "q1").unwrap();
        let k = TensorField2::diagonal(&["q1", "q2"], &["1", "0"], Variance::Contravariant).unwrap();
        let half_p1_sq = PhaseScalar::new(k, &Expression::constant(0.0)).unwrap();
        let pt = PhasePoint::new(vec![0.3, 0.4], vec![1.0, 5.0]);
        assert_eq!(poisson_bracket(&q1, &half_p1_sq, &pt).unwrap(), 1.0);
        assert_eq!(poisson_bracket(&half_p1_sq, &q1, &pt).unwrap(), -1.0);
    }

    #[test]
    fn bracket_is_antisymmetric_and_matches_finite_differences() {
        let names = ["x", "y"];
        let f = PhaseScalar::new(
            TensorField2::parse(&names, &[vec!["1+x^2", "y"], vec!["y", "2"]], Variance::Contravariant).unwrap(),
            &Expression::parse("x*y^2").unwrap(),
        )
        .unwrap();
        let g = PhaseScalar::new(
            TensorField2::parse(&names, &[vec!["exp(y)", "0"], vec!["0", "x"]], Variance::Contravariant).unwrap(),
            &Expression::parse("cos(x)").unwrap(),
        )
        .unwrap();
        let pt = PhasePoint::new(vec![0.4, -0.3], vec![0.7, 1.2]);
        let b = poisson_bracket(&f, &g, &pt).unwrap();
        assert_eq!(b, -poisson_bracket(&g, &f, &pt).unwrap());
        let h = 1e-6;
        let fd = |s: &PhaseScalar, qi: bool, i: usize| {
            let (mut a, mut c) = (pt.clone(), pt.clone());
            if qi {
                a.q[i] += h;
                c.q[i] -= h;
            } else {
                a.p[i] += h;
                c.p[i] -= h;
            }
            (s.value(&a.q, &a.p).unwrap() - s.value(&c.q, &c.p).unwrap()) / (2.0 * h)
        };
        let oracle: f64 = (0..2).map(|i| fd(&f, true, i) * fd(&g, false, i) - fd(&f, false, i) * fd(&g, true, i)).sum();
        assert!((b - oracle).abs() < 1e-6 * (1.0 + b.abs()));
    }
}
