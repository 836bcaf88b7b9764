//! Slot-bound evaluation.
//!
//! A [`BoundExpr`] is an [`Expression`] whose variables have been resolved to
//! positions in a value slice. Evaluation is generic over [`Scalar`], which is
//! how exact derivatives are obtained: evaluate on [`Dual`] inputs.

use super::{BinOp, EvalError, Expr, Expression, Func, Node, Span};
use crate::dual::Dual;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
enum Op {
    Const(f64),
    Slot(usize),
    Neg(Box<Code>),
    Bin(BinOp, Box<Code>, Box<Code>),
    PowInt(Box<Code>, i32),
    PowConst(Box<Code>, f64),
    Call(Func, Box<Code>),
}

#[derive(Debug, Clone)]
struct Code {
    op: Op,
    span: Span,
}

/// An expression compiled against a fixed ordering of variable names.
#[derive(Debug, Clone)]
pub struct BoundExpr {
    code: Code,
    source: Expression,
    slots: Vec<usize>,
}

impl BoundExpr {
    /// Binds `expr` to `names`; every free variable must appear in `names`.
    pub fn bind(expr: &Expression, names: &[String]) -> Result<Self, EvalError> {
        let mut slots = Vec::new();
        let code = compile(&expr.root, names, &mut slots)?;
        slots.sort_unstable();
        slots.dedup();
        Ok(Self { code, source: expr.clone(), slots })
    }

    pub fn expression(&self) -> &Expression {
        &self.source
    }

    /// Slots actually read by this expression, sorted.
    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    pub fn depends_on(&self, slot: usize) -> bool {
        self.slots.binary_search(&slot).is_ok()
    }

    pub fn is_constant(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn eval<T: Scalar>(&self, vals: &[T]) -> Result<T, EvalError> {
        run(&self.code, vals)
    }

    /// Exact partial derivative with respect to slot `k`.
    pub fn partial(&self, vals: &[f64], k: usize) -> Result<f64, EvalError> {
        if !self.depends_on(k) {
            self.eval(vals)?;
            return Ok(0.0);
        }
        let seeded: Vec<Dual<f64>> =
            vals.iter().enumerate().map(|(i, &v)| Dual::new(v, if i == k { 1.0 } else { 0.0 })).collect();
        Ok(self.eval(&seeded)?.eps)
    }

    /// Exact second partial; symmetric in `(k, l)` bit for bit.
    pub fn second_partial(&self, vals: &[f64], k: usize, l: usize) -> Result<f64, EvalError> {
        let (k, l) = if k <= l { (k, l) } else { (l, k) };
        if !self.depends_on(k) || !self.depends_on(l) {
            self.eval(vals)?;
            return Ok(0.0);
        }
        let seeded: Vec<Dual<Dual<f64>>> = vals
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let inner = Dual::new(v, if i == l { 1.0 } else { 0.0 });
                Dual::new(inner, Dual::constant(if i == k { 1.0 } else { 0.0 }))
            })
            .collect();
        Ok(self.eval(&seeded)?.eps.eps)
    }

    /// Value and gradient over all `vals.len()` slots.
    pub fn value_and_gradient(&self, vals: &[f64]) -> Result<(f64, Vec<f64>), EvalError> {
        let value = self.eval(vals)?;
        let mut grad = vec![0.0; vals.len()];
        for &k in &self.slots {
            grad[k] = self.partial(vals, k)?;
        }
        Ok((value, grad))
    }
}

fn compile(e: &Expr, names: &[String], slots: &mut Vec<usize>) -> Result<Code, EvalError> {
    let op = match &e.node {
        Node::Num(x) => Op::Const(*x),
        Node::Var(name) => {
            let k = names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| EvalError::Unbound { name: name.clone() })?;
            slots.push(k);
            Op::Slot(k)
        }
        Node::Neg(inner) => Op::Neg(Box::new(compile(inner, names, slots)?)),
        Node::Call(f, arg) => Op::Call(*f, Box::new(compile(arg, names, slots)?)),
        Node::Bin(BinOp::Pow, base, exponent) if exponent.is_closed() => {
            let p: f64 = run(&compile(exponent, &[], &mut Vec::new())?, &[] as &[f64])?;
            let base = Box::new(compile(base, names, slots)?);
            if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
                Op::PowInt(base, p as i32)
            } else {
                Op::PowConst(base, p)
            }
        }
        Node::Bin(op, a, b) => {
            Op::Bin(*op, Box::new(compile(a, names, slots)?), Box::new(compile(b, names, slots)?))
        }
    };
    Ok(Code { op, span: e.span })
}

fn domain(span: Span, what: &'static str, value: f64) -> EvalError {
    EvalError::Domain { what, span, value }
}

fn run<T: Scalar>(c: &Code, vals: &[T]) -> Result<T, EvalError> {
    let out = match &c.op {
        Op::Const(x) => T::lit(*x),
        Op::Slot(k) => vals[*k],
        Op::Neg(a) => -run(a, vals)?,
        Op::Bin(op, a, b) => {
            let x = run(a, vals)?;
            let y = run(b, vals)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y.real() == 0.0 {
                        return Err(domain(c.span, "division by zero", x.real()));
                    }
                    x / y
                }
                BinOp::Pow => {
                    let (xr, yr) = (x.real(), y.real());
                    if xr < 0.0 {
                        return Err(domain(c.span, "negative base with variable exponent", xr));
                    }
                    if xr == 0.0 && yr <= 0.0 {
                        return Err(domain(c.span, "zero base with non-positive exponent", yr));
                    }
                    if xr == 0.0 {
                        // derivative through ln(0) is undefined; only the value is meaningful
                        T::zero()
                    } else {
                        x.powf(y)
                    }
                }
            }
        }
        Op::PowInt(a, n) => {
            let x = run(a, vals)?;
            if *n < 0 && x.real() == 0.0 {
                return Err(domain(c.span, "division by zero", 0.0));
            }
            x.powi(*n)
        }
        Op::PowConst(a, p) => {
            let x = run(a, vals)?;
            let xr = x.real();
            if xr < 0.0 {
                return Err(domain(c.span, "negative base with non-integer exponent", xr));
            }
            if xr == 0.0 && *p < 0.0 {
                return Err(domain(c.span, "division by zero", 0.0));
            }
            x.powf(T::lit(*p))
        }
        Op::Call(f, a) => {
            let x = run(a, vals)?;
            let xr = x.real();
            let y = match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => x.tan(),
                Func::Exp => x.exp(),
                Func::Ln => {
                    if xr <= 0.0 {
                        return Err(domain(c.span, "ln of non-positive value", xr));
                    }
                    x.ln()
                }
                Func::Sqrt => {
                    if xr < 0.0 {
                        return Err(domain(c.span, "sqrt of negative value", xr));
                    }
                    x.sqrt()
                }
                Func::Abs => x.abs(),
            };
            if !y.real().is_finite() {
                return Err(domain(c.span, "non-finite function value", xr));
            }
            y
        }
    };
    Ok(out)
}
