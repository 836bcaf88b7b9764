use super::CatalogError;
use crate::expr::{EvalPoint, Expression};
use crate::geometry::{riemann, scalar_curvature, GeometryError, MetricField};
use crate::sampling::{rejection_sample, CoordinateBox, DEFAULT_SEED};

const NAMES: [&str; 3] = ["u", "v", "w"];

/// Parameters of the two block-separable E³ families with blocks `{u}`, `{v, w}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum E3Kind {
    /// `G = diag(f⁻², l⁻², l⁻²)`, `l = c_2 exp(c_0(w² − v²)/2 − c_1 v − c_3 w)`.
    CaseI { c0: f64, c1: f64, c2: f64, c3: f64 },
    /// `G = diag(1, l²f², l²f²)`, `l = −1/(c_1 u + c_2)`.
    CaseII { c1: f64, c2: f64 },
}

/// A member of one of the E³ families with its sampling region.
#[derive(Debug, Clone)]
pub struct E3Family {
    pub name: String,
    pub kind: E3Kind,
    pub f: Expression,
    pub l: Expression,
    pub metric: MetricField,
    pub region: CoordinateBox,
}

fn check_f(f: &Expression) -> Result<(), CatalogError> {
    match f.free_variables().into_iter().find(|v| v != "v" && v != "w") {
        Some(v) => Err(CatalogError::Parameter(format!("f may only depend on v and w, found `{v}`"))),
        None => Ok(()),
    }
}

fn metric(diag: [String; 3]) -> Result<MetricField, CatalogError> {
    Ok(MetricField::diagonal(&NAMES, &diag)?)
}

pub fn e3_case_i(c0: f64, c1: f64, c2: f64, c3: f64, f: Expression) -> Result<E3Family, CatalogError> {
    if c2 == 0.0 {
        return Err(CatalogError::Parameter("c2 must be nonzero".into()));
    }
    check_f(&f)?;
    let l = Expression::parse(&format!("{c2:e}*exp({:e}*(w^2-v^2) - {c1:e}*v - {c3:e}*w)", c0 / 2.0))
        .expect("generated expression");
    let metric = metric([format!("1/({f})^2"), format!("1/({l})^2"), format!("1/({l})^2")])?;
    Ok(E3Family {
        name: "e3-case-i".into(),
        kind: E3Kind::CaseI { c0, c1, c2, c3 },
        f,
        l,
        metric,
        region: CoordinateBox::new(vec![(-1.0, 1.0), (-0.5, 0.5), (-0.5, 0.5)]),
    })
}

pub fn e3_case_ii(c1: f64, c2: f64, f: Expression) -> Result<E3Family, CatalogError> {
    if c1 == 0.0 && c2 == 0.0 {
        return Err(CatalogError::Parameter("c1 and c2 cannot both vanish".into()));
    }
    check_f(&f)?;
    let l = Expression::parse(&format!("-1/({c1:e}*u + {c2:e})")).expect("generated expression");
    let metric = metric(["1".into(), format!("({l})^2*({f})^2"), format!("({l})^2*({f})^2")])?;
    // c1 u + c2 ∈ [0.5, 2], away from the pole
    let u_range = if c1 == 0.0 {
        (-1.0, 1.0)
    } else {
        let u0 = (0.5 - c2) / c1;
        let u1 = (2.0 - c2) / c1;
        (u0.min(u1), u0.max(u1))
    };
    Ok(E3Family {
        name: "e3-case-ii".into(),
        kind: E3Kind::CaseII { c1, c2 },
        f,
        l,
        metric,
        region: CoordinateBox::new(vec![u_range, (-1.0, 1.0), (-1.0, 1.0)]),
    })
}

/// Case i presets.
pub struct CaseI;

impl CaseI {
    /// Constant `l` and `f`: cylindrical coordinates over a Cartesian plane.
    pub fn flat() -> E3Family {
        e3_case_i(0.0, 0.0, 1.0, 0.0, Expression::constant(1.0)).expect("preset")
    }

    /// `c_0 = 0`, `c_1 = 1`, `c_3 = ½` with `f = 2 + Re exp(−(c_1 − i c_3)(v + i w))`.
    pub fn curved() -> E3Family {
        let f = Expression::parse("2 + exp(-v - 0.5*w)*cos(w - 0.5*v)").expect("preset");
        e3_case_i(0.0, 1.0, 1.0, 0.5, f).expect("preset")
    }
}

/// Case ii presets.
pub struct CaseII;

impl CaseII {
    /// Spherical coordinates: unit-sphere leaves in stereographic `(v, w)`.
    pub fn sphere() -> E3Family {
        e3_case_ii(1.0, 0.0, Expression::parse("(1 + v^2 + w^2)/2").expect("preset")).expect("preset")
    }

    /// `c_1 = 0`: flat leaves, `f = e^v`.
    pub fn plane() -> E3Family {
        e3_case_ii(0.0, -1.0, Expression::parse("exp(v)").expect("preset")).expect("preset")
    }
}

/// Value with first and second partials in `v` and `w` (or `u`).
struct Jet2 {
    f: f64,
    d: [f64; 2],
    dd: [[f64; 2]; 2],
}

fn jet2(e: &Expression, p: &EvalPoint, vars: [&str; 2]) -> Result<Jet2, GeometryError> {
    let err = |source| GeometryError::Eval { entry: e.to_string(), source };
    let mut out = Jet2 { f: e.evaluate(p).map_err(err)?, d: [0.0; 2], dd: [[0.0; 2]; 2] };
    for i in 0..2 {
        out.d[i] = e.derivative(p, vars[i]).map_err(err)?;
        for j in 0..2 {
            out.dd[i][j] = e.second_derivative(p, vars[i], vars[j]).map_err(err)?;
        }
    }
    Ok(out)
}

impl E3Family {
    fn point(q: &[f64]) -> EvalPoint {
        EvalPoint::new().with("u", q[0]).with("v", q[1]).with("w", q[2])
    }

    pub fn l_at(&self, q: &[f64]) -> Result<f64, GeometryError> {
        self.l.evaluate(&Self::point(q)).map_err(|source| GeometryError::Eval { entry: "l".into(), source })
    }

    pub fn f_at(&self, q: &[f64]) -> Result<f64, GeometryError> {
        self.f.evaluate(&Self::point(q)).map_err(|source| GeometryError::Eval { entry: "f".into(), source })
    }

    /// Flatness equations for `l` and `f` at `q`, labelled.
    ///
    /// Case i: the four leaf equations in `l, f`, then the three reduced
    /// equations for `f` once `l` has the exponential form. Case ii: the
    /// `l` equation, the coupled `f` equation and the leaf-curvature equation.
    pub fn residuals(&self, q: &[f64]) -> Result<Vec<(String, f64)>, GeometryError> {
        let p = Self::point(q);
        let f = jet2(&self.f, &p, ["v", "w"])?;
        let (fv, fw, fvv, fww, fvw) = (f.d[0], f.d[1], f.dd[0][0], f.dd[1][1], f.dd[0][1]);
        Ok(match self.kind {
            E3Kind::CaseI { c0, c1, c3, .. } => {
                let l = jet2(&self.l, &p, ["v", "w"])?;
                let (lv, lw) = (l.d[0], l.d[1]);
                let (a, b) = (c1 - c0 * q[1], c3 + c0 * q[2]);
                vec![
                    ("l leaf".into(), l.f * (l.dd[0][0] + l.dd[1][1]) - lv * lv - lw * lw),
                    ("f vv".into(), l.f * fvv - lv * fv + lw * fw),
                    ("f ww".into(), l.f * fww + lv * fv - lw * fw),
                    ("f vw".into(), l.f * fvw - lv * fw - lw * fv),
                    ("reduced vv".into(), fvv + a * fv - b * fw),
                    ("reduced ww".into(), fww - a * fv + b * fw),
                    ("reduced vw".into(), fvw + b * fv + a * fw),
                ]
            }
            E3Kind::CaseII { c1, .. } => {
                let pu = Self::point(q);
                let err = |source| GeometryError::Eval { entry: "l".into(), source };
                let l = self.l.evaluate(&pu).map_err(err)?;
                let lu = self.l.derivative(&pu, "u").map_err(err)?;
                let luu = self.l.second_derivative(&pu, "u", "u").map_err(err)?;
                let leaf = f.f * (fvv + fww) - fv * fv - fw * fw;
                vec![
                    ("l ode".into(), luu * l - 2.0 * lu * lu),
                    ("f coupled".into(), l.powi(4) * leaf - lu * lu),
                    ("leaf curvature".into(), leaf - c1 * c1),
                ]
            }
        })
    }

    /// `max |R^i_{jkl}|` of the 3-metric at `q`.
    pub fn riemann_max(&self, q: &[f64]) -> Result<f64, GeometryError> {
        Ok(riemann(&self.metric, q)?.max_abs())
    }

    /// Metric of the leaf `u = q[0]` over `(v, w)`.
    pub fn leaf_metric(&self, u: f64) -> Result<MetricField, GeometryError> {
        let l = self.l_at(&[u, 0.0, 0.0])?;
        let diag = match self.kind {
            E3Kind::CaseI { .. } => format!("1/({})^2", self.l),
            E3Kind::CaseII { .. } => format!("{:e}*({})^2", l * l, self.f),
        };
        MetricField::diagonal(&["v", "w"], &[diag.clone(), diag])
    }

    /// Scalar curvature of the leaf through `q`.
    pub fn leaf_scalar_curvature(&self, q: &[f64]) -> Result<f64, GeometryError> {
        scalar_curvature(&self.leaf_metric(q[0])?, &q[1..])
    }

    /// Predicted leaf scalar curvature: `2 l² c_1²` in Case ii, `0` in Case i.
    pub fn expected_leaf_curvature(&self, q: &[f64]) -> Result<f64, GeometryError> {
        Ok(match self.kind {
            E3Kind::CaseI { .. } => 0.0,
            E3Kind::CaseII { c1, .. } => 2.0 * self.l_at(q)?.powi(2) * c1 * c1,
        })
    }

    /// The leaf component `R^v_{wvw}` at `q`.
    pub fn leaf_mixed_component(&self, q: &[f64]) -> Result<f64, GeometryError> {
        Ok(riemann(&self.leaf_metric(q[0])?, &q[1..])?.get(0, 1, 0, 1))
    }

    /// Predicted `R^v_{wvw}`: `c_1²/f²` in Case ii, `0` in Case i.
    pub fn expected_leaf_mixed_component(&self, q: &[f64]) -> Result<f64, GeometryError> {
        Ok(match self.kind {
            E3Kind::CaseI { .. } => 0.0,
            E3Kind::CaseII { c1, .. } => c1 * c1 / self.f_at(q)?.powi(2),
        })
    }

    /// Seeded points of the sampling region where `f` and `l` are nonzero.
    pub fn sample(&self, count: usize, seed: Option<u64>) -> Vec<Vec<f64>> {
        rejection_sample(&self.region, count, seed.unwrap_or(DEFAULT_SEED), |q| {
            matches!((self.f_at(q), self.l_at(q)), (Ok(f), Ok(l)) if f.abs() > 1e-3 && l.abs() > 1e-3 && l.is_finite())
        })
    }

    /// Same family, different `f`.
    pub fn with_f(&self, f: Expression) -> Result<Self, CatalogError> {
        match self.kind {
            E3Kind::CaseI { c0, c1, c2, c3 } => e3_case_i(c0, c1, c2, c3, f),
            E3Kind::CaseII { c1, c2 } => e3_case_ii(c1, c2, f),
        }
    }
}
