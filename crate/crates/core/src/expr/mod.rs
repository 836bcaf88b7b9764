//! Scalar expressions over named coordinates.
//!
//! The grammar (documented in `docs/expression-grammar.md`) covers real
//! literals, variables, `+ - * / ^`, unary minus and the functions `sin cos
//! tan exp ln sqrt abs`. Derivatives are exact: evaluation runs on forward-mode
//! dual numbers, nested once for second partials.

mod eval;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use eval::BoundExpr;

/// Half-open byte range in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bytes {}..{}", self.start, self.end)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<&'static str>, found: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("invalid number `{text}` at byte {offset}")]
    InvalidNumber { offset: usize, text: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownFunction { offset, .. }
            | ParseError::InvalidNumber { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unbound variable `{name}`")]
    Unbound { name: String },
    #[error("domain error: {what} ({value}) at {span}")]
    Domain { what: &'static str, span: Span, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 7] = [Func::Sin, Func::Cos, Func::Tan, Func::Exp, Func::Ln, Func::Sqrt, Func::Abs];

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// AST node with its source span.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub node: Node,
    pub span: Span,
}

impl Expr {
    fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        let span = Span::new(a.span.start, b.span.end);
        Expr { node: Node::Bin(op, Box::new(a), Box::new(b)), span }
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match &self.node {
            Node::Num(_) => {}
            Node::Var(v) => {
                out.insert(v.clone());
            }
            Node::Neg(a) | Node::Call(_, a) => a.collect_vars(out),
            Node::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// No free variables.
    fn is_closed(&self) -> bool {
        match &self.node {
            Node::Num(_) => true,
            Node::Var(_) => false,
            Node::Neg(a) | Node::Call(_, a) => a.is_closed(),
            Node::Bin(_, a, b) => a.is_closed() && b.is_closed(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Num(x) if *x < 0.0 || x.is_sign_negative() => write!(f, "(-{:?})", -x),
            Node::Num(x) => write!(f, "{x:?}"),
            Node::Var(v) => f.write_str(v),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Bin(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// A parsed scalar expression. Immutable; cheap to clone.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Expr,
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        let root = parse::Parser::new(source)?.parse_all()?;
        Ok(Self { root })
    }

    pub fn constant(x: f64) -> Self {
        Self { root: Expr { node: Node::Num(x), span: Span::default() } }
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.root.collect_vars(&mut out);
        out
    }

    pub fn is_constant(&self) -> bool {
        self.root.is_closed()
    }

    pub fn bind(&self, names: &[String]) -> Result<BoundExpr, EvalError> {
        BoundExpr::bind(self, names)
    }

    fn bind_point(&self, p: &EvalPoint) -> Result<(BoundExpr, Vec<f64>, Vec<String>), EvalError> {
        let names: Vec<String> = self.free_variables().into_iter().collect();
        let vals = names
            .iter()
            .map(|n| p.get(n).ok_or_else(|| EvalError::Unbound { name: n.clone() }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((self.bind(&names)?, vals, names))
    }

    pub fn evaluate(&self, p: &EvalPoint) -> Result<f64, EvalError> {
        let (bound, vals, _) = self.bind_point(p)?;
        bound.eval(&vals)
    }

    /// Exact ∂e/∂v at `p`; zero when `v` does not occur.
    pub fn derivative(&self, p: &EvalPoint, v: &str) -> Result<f64, EvalError> {
        let (bound, vals, names) = self.bind_point(p)?;
        match names.iter().position(|n| n == v) {
            Some(k) => bound.partial(&vals, k),
            None => bound.eval(&vals).map(|_| 0.0),
        }
    }

    /// Exact ∂²e/∂v1∂v2 at `p`.
    pub fn second_derivative(&self, p: &EvalPoint, v1: &str, v2: &str) -> Result<f64, EvalError> {
        let (bound, vals, names) = self.bind_point(p)?;
        match (names.iter().position(|n| n == v1), names.iter().position(|n| n == v2)) {
            (Some(k), Some(l)) => bound.second_partial(&vals, k, l),
            _ => bound.eval(&vals).map(|_| 0.0),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl std::str::FromStr for Expression {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// Variable assignment used by [`Expression::evaluate`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalPoint(BTreeMap<String, f64>);

impl EvalPoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for EvalPoint {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

pub fn parse(source: &str) -> Result<Expression, ParseError> {
    Expression::parse(source)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(pairs: &[(&str, f64)]) -> EvalPoint {
        pairs.iter().map(|&(k, v)| (k, v)).collect()
    }

    #[test]
    fn pendula_entries() {
        let e = parse("2*q1^2+2").unwrap();
        assert_eq!(e.evaluate(&at(&[("q1", 0.0)])).unwrap(), 2.0);
        let e = parse("(q2)^3+2").unwrap();
        assert_eq!(e.evaluate(&at(&[("q2", 0.0)])).unwrap(), 2.0);
        let e = parse("(q3)^2+1").unwrap();
        assert_eq!(e.evaluate(&at(&[("q3", 0.5)])).unwrap(), 1.25);
        assert_eq!(parse("cos(q1)").unwrap().evaluate(&at(&[("q1", 0.0)])).unwrap(), 1.0);
    }

    #[test]
    fn single_variable() {
        let e = parse("q2").unwrap();
        assert!(matches!(e.root().node, Node::Var(ref v) if v == "q2"));
        assert_eq!(e.free_variables().into_iter().collect::<Vec<_>>(), vec!["q2".to_string()]);
    }

    #[test]
    fn syntax_error_offset() {
        let err = parse("sin(*3").unwrap_err();
        assert_eq!(err.offset(), 4);
        assert!(matches!(err, ParseError::Syntax { .. }));
        assert!(matches!(parse("foo(1)"), Err(ParseError::UnknownFunction { offset: 0, .. })));
        assert_eq!(parse("1 + ").unwrap_err().offset(), 4);
        assert_eq!(parse("(1+2").unwrap_err().offset(), 4);
        assert_eq!(parse("1 2").unwrap_err().offset(), 2);
        assert!(parse("sin 1").is_err());
        assert_eq!(parse("x # y").unwrap_err().offset(), 2);
    }

    #[test]
    fn precedence_and_associativity() {
        let p = at(&[("x", 2.0)]);
        let v = |s: &str| parse(s).unwrap().evaluate(&p).unwrap();
        assert_eq!(v("-x^2"), -4.0);
        assert_eq!(v("2^3^2"), 512.0);
        assert_eq!(v("2^-1"), 0.5);
        assert_eq!(v("1+2*3"), 7.0);
        assert_eq!(v("8/2/2"), 2.0);
        assert_eq!(v("1-2-3"), -4.0);
        assert_eq!(v("-2*x"), -4.0);
        assert_eq!(v("1.5e1+x"), 17.0);
    }

    #[test]
    fn derivatives() {
        let p = at(&[("q1", 0.3), ("q3", 2.0)]);
        assert_eq!(parse("1+q1").unwrap().derivative(&p, "q1").unwrap(), 1.0);
        assert_eq!(parse("(q3)^2+1").unwrap().derivative(&p, "q3").unwrap(), 4.0);
        assert_eq!(parse("cos(q1)").unwrap().derivative(&p, "q5").unwrap(), 0.0);
        let p = at(&[("q1", 0.0), ("q2", 5.0)]);
        assert_eq!(parse("q1*q2").unwrap().second_derivative(&p, "q1", "q2").unwrap(), 1.0);
        assert_eq!(parse("cos(q1)").unwrap().second_derivative(&p, "q1", "q1").unwrap(), -1.0);
    }

    #[test]
    fn evaluation_errors() {
        let e = parse("ln(x - 1)").unwrap();
        match e.evaluate(&at(&[("x", 0.5)])) {
            Err(EvalError::Domain { span, .. }) => assert_eq!(span, Span::new(0, 9)),
            other => panic!("expected domain error, got {other:?}"),
        }
        assert!(matches!(parse("1/(x-x)").unwrap().evaluate(&at(&[("x", 1.0)])), Err(EvalError::Domain { .. })));
        assert!(matches!(parse("y+1").unwrap().evaluate(&at(&[("x", 1.0)])), Err(EvalError::Unbound { .. })));
        assert!(matches!(parse("x^0.5").unwrap().evaluate(&at(&[("x", -1.0)])), Err(EvalError::Domain { .. })));
        assert_eq!(parse("x^3").unwrap().evaluate(&at(&[("x", -2.0)])).unwrap(), -8.0);
        assert!(matches!(parse("sqrt(x)").unwrap().evaluate(&at(&[("x", -2.0)])), Err(EvalError::Domain { .. })));
    }

    #[test]
    fn display_reparses() {
        let src = "-2*sin(q1)^2 + q2/(1+q3^-2) - exp(-q1)";
        let e = parse(src).unwrap();
        let again = parse(&e.to_string()).unwrap();
        let p = at(&[("q1", 0.4), ("q2", -1.1), ("q3", 0.7)]);
        assert_eq!(e.evaluate(&p).unwrap(), again.evaluate(&p).unwrap());
        assert_eq!(Expression::constant(-3.0).to_string(), "(-3.0)");
    }
}
