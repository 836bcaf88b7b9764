//! Forward-mode dual numbers.
//!
//! `Dual<T>` carries a value and one tangent. Seeding a single input with
//! tangent `1` and evaluating any [`Scalar`] code yields the exact partial
//! derivative along that input. Because `Dual<T>` is itself a [`Scalar`],
//! nesting (`Dual<Dual<f64>>`) gives exact second partials.
//!
//! Comparisons (`PartialEq`, `PartialOrd`, `min`, `max`) only look at the real
//! part.

use std::cmp::Ordering;
use std::fmt;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_traits::{Float, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Default)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    #[inline]
    pub fn new(re: T, eps: T) -> Self {
        Self { re, eps }
    }

    /// A constant: zero tangent.
    #[inline]
    pub fn constant(re: T) -> Self {
        Self { re, eps: T::zero() }
    }

    /// An independent variable: unit tangent.
    #[inline]
    pub fn variable(re: T) -> Self {
        Self { re, eps: T::one() }
    }

    /// Chain rule helper: value `f(re)` with derivative `df(re)`.
    #[inline]
    fn chain(self, f: T, df: T) -> Self {
        Self { re: f, eps: self.eps * df }
    }
}

impl<T: Scalar> fmt::Debug for Dual<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dual({:?}, {:?})", self.re, self.eps)
    }
}

impl<T: Scalar> fmt::Display for Dual<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}ε", self.re, self.eps)
    }
}

impl<T: Scalar> PartialEq for Dual<T> {
    fn eq(&self, other: &Self) -> bool {
        self.re == other.re
    }
}

impl<T: Scalar> PartialOrd for Dual<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.re.partial_cmp(&other.re)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.re * rhs.re, self.eps * rhs.re + self.re * rhs.eps)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = T::one() / rhs.re;
        Self::new(self.re * inv, (self.eps * rhs.re - self.re * rhs.eps) * inv * inv)
    }
}

impl<T: Scalar> Rem for Dual<T> {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        let q = (self.re / rhs.re).trunc();
        Self::new(self.re % rhs.re, self.eps - rhs.eps * q)
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl<T: Scalar> $tr for Dual<T> {
            #[inline]
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /, RemAssign rem_assign %);

impl<T: Scalar> Zero for Dual<T> {
    fn zero() -> Self {
        Self::constant(T::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
}

impl<T: Scalar> One for Dual<T> {
    fn one() -> Self {
        Self::constant(T::one())
    }
}

impl<T: Scalar> Num for Dual<T> {
    type FromStrRadixErr = T::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        T::from_str_radix(s, radix).map(Self::constant)
    }
}

impl<T: Scalar> ToPrimitive for Dual<T> {
    fn to_i64(&self) -> Option<i64> {
        self.re.to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.re.to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        self.re.to_f64()
    }
}

impl<T: Scalar> NumCast for Dual<T> {
    fn from<N: ToPrimitive>(n: N) -> Option<Self> {
        <T as NumCast>::from(n).map(Self::constant)
    }
}

impl<T: Scalar> FromPrimitive for Dual<T> {
    fn from_i64(n: i64) -> Option<Self> {
        T::from_i64(n).map(Self::constant)
    }
    fn from_u64(n: u64) -> Option<Self> {
        T::from_u64(n).map(Self::constant)
    }
    fn from_f64(n: f64) -> Option<Self> {
        T::from_f64(n).map(Self::constant)
    }
}

impl<T: Scalar> Float for Dual<T> {
    fn nan() -> Self {
        Self::constant(T::nan())
    }
    fn infinity() -> Self {
        Self::constant(T::infinity())
    }
    fn neg_infinity() -> Self {
        Self::constant(T::neg_infinity())
    }
    fn neg_zero() -> Self {
        Self::constant(T::neg_zero())
    }
    fn min_value() -> Self {
        Self::constant(T::min_value())
    }
    fn min_positive_value() -> Self {
        Self::constant(T::min_positive_value())
    }
    fn max_value() -> Self {
        Self::constant(T::max_value())
    }
    fn epsilon() -> Self {
        Self::constant(T::epsilon())
    }
    fn is_nan(self) -> bool {
        self.re.is_nan() || self.eps.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.re.is_infinite() || self.eps.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.eps.is_finite()
    }
    fn is_normal(self) -> bool {
        self.re.is_normal()
    }
    fn classify(self) -> FpCategory {
        self.re.classify()
    }
    fn floor(self) -> Self {
        Self::constant(self.re.floor())
    }
    fn ceil(self) -> Self {
        Self::constant(self.re.ceil())
    }
    fn round(self) -> Self {
        Self::constant(self.re.round())
    }
    fn trunc(self) -> Self {
        Self::constant(self.re.trunc())
    }
    fn fract(self) -> Self {
        Self::new(self.re.fract(), self.eps)
    }
    fn abs(self) -> Self {
        if self.re > T::zero() {
            self
        } else if self.re < T::zero() {
            -self
        } else {
            Self::constant(self.re.abs())
        }
    }
    fn signum(self) -> Self {
        Self::constant(self.re.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.re.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.re.is_sign_negative()
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        let inv = self.re.recip();
        self.chain(inv, -inv * inv)
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let lower = self.re.powi(n - 1);
        self.chain(lower * self.re, T::lit(n as f64) * lower)
    }
    fn powf(self, b: Self) -> Self {
        if b.eps.is_zero() {
            let lower = self.re.powf(b.re - T::one());
            return self.chain(lower * self.re, b.re * lower);
        }
        let v = self.re.powf(b.re);
        let d_base = if self.eps.is_zero() {
            T::zero()
        } else {
            b.re * self.re.powf(b.re - T::one()) * self.eps
        };
        Self::new(v, d_base + v * self.re.ln() * b.eps)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, T::one() / (T::lit(2.0) * s))
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn exp2(self) -> Self {
        let e = self.re.exp2();
        self.chain(e, e * T::lit(std::f64::consts::LN_2))
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), self.re.recip())
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn log2(self) -> Self {
        self.chain(self.re.log2(), (self.re * T::lit(std::f64::consts::LN_2)).recip())
    }
    fn log10(self) -> Self {
        self.chain(self.re.log10(), (self.re * T::lit(std::f64::consts::LN_10)).recip())
    }
    fn max(self, other: Self) -> Self {
        if other.re > self.re {
            other
        } else {
            self
        }
    }
    fn min(self, other: Self) -> Self {
        if other.re < self.re {
            other
        } else {
            self
        }
    }
    fn abs_sub(self, other: Self) -> Self {
        if self.re > other.re {
            self - other
        } else {
            Self::zero()
        }
    }
    fn cbrt(self) -> Self {
        let c = self.re.cbrt();
        self.chain(c, (T::lit(3.0) * c * c).recip())
    }
    fn hypot(self, other: Self) -> Self {
        (self * self + other * other).sqrt()
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn tan(self) -> Self {
        let c = self.re.cos();
        self.chain(self.re.tan(), (c * c).recip())
    }
    fn asin(self) -> Self {
        self.chain(self.re.asin(), (T::one() - self.re * self.re).sqrt().recip())
    }
    fn acos(self) -> Self {
        self.chain(self.re.acos(), -(T::one() - self.re * self.re).sqrt().recip())
    }
    fn atan(self) -> Self {
        self.chain(self.re.atan(), (T::one() + self.re * self.re).recip())
    }
    fn atan2(self, other: Self) -> Self {
        let den = self.re * self.re + other.re * other.re;
        Self::new(self.re.atan2(other.re), (other.re * self.eps - self.re * other.eps) / den)
    }
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
    fn exp_m1(self) -> Self {
        self.chain(self.re.exp_m1(), self.re.exp())
    }
    fn ln_1p(self) -> Self {
        self.chain(self.re.ln_1p(), (T::one() + self.re).recip())
    }
    fn sinh(self) -> Self {
        self.chain(self.re.sinh(), self.re.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.re.cosh(), self.re.sinh())
    }
    fn tanh(self) -> Self {
        let c = self.re.cosh();
        self.chain(self.re.tanh(), (c * c).recip())
    }
    fn asinh(self) -> Self {
        self.chain(self.re.asinh(), (self.re * self.re + T::one()).sqrt().recip())
    }
    fn acosh(self) -> Self {
        self.chain(self.re.acosh(), (self.re * self.re - T::one()).sqrt().recip())
    }
    fn atanh(self) -> Self {
        self.chain(self.re.atanh(), (T::one() - self.re * self.re).recip())
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        self.re.integer_decode()
    }
}

impl<T: Scalar> Scalar for Dual<T> {}

/// Derivative of a univariate function at `x`.
pub fn derivative<T: Scalar, F: Fn(Dual<T>) -> Dual<T>>(x: T, f: F) -> T {
    f(Dual::variable(x)).eps
}

/// Gradient of a multivariate function, one forward sweep per input.
pub fn gradient<T: Scalar, F: Fn(&[Dual<T>]) -> Dual<T>>(x: &[T], f: F) -> Vec<T> {
    let mut seeded: Vec<Dual<T>> = x.iter().map(|&v| Dual::constant(v)).collect();
    (0..x.len())
        .map(|i| {
            seeded[i].eps = T::one();
            let d = f(&seeded).eps;
            seeded[i].eps = T::zero();
            d
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = Dual<f64>;
    type DD = Dual<Dual<f64>>;

    fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6_f64.max(1e-6 * x.abs());
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn elementary_functions_match_finite_differences() {
        let cases: Vec<(&str, fn(D) -> D, fn(f64) -> f64, f64)> = vec![
            ("sin", |x| x.sin(), f64::sin, 0.7),
            ("cos", |x| x.cos(), f64::cos, -1.3),
            ("tan", |x| x.tan(), f64::tan, 0.4),
            ("exp", |x| x.exp(), f64::exp, 0.9),
            ("ln", |x| x.ln(), f64::ln, 2.5),
            ("sqrt", |x| x.sqrt(), f64::sqrt, 3.1),
            ("abs", |x| x.abs(), f64::abs, -0.8),
            ("recip", |x| x.recip(), f64::recip, 1.7),
            ("atan", |x| x.atan(), f64::atan, 0.3),
            ("powi", |x| x.powi(-3), |x| x.powi(-3), 1.2),
            ("powf", |x| x.powf(D::constant(2.5)), |x| x.powf(2.5), 1.4),
            ("cbrt", |x| x.cbrt(), f64::cbrt, 2.0),
            ("tanh", |x| x.tanh(), f64::tanh, 0.5),
        ];
        for (name, fd, fr, x) in cases {
            let ad = fd(D::variable(x)).eps;
            let fdv = central(fr, x);
            assert!((ad - fdv).abs() <= 1e-6 * (1.0 + fdv.abs()), "{name}: {ad} vs {fdv}");
        }
    }

    #[test]
    fn variable_exponent_power() {
        // d/dx x^x = x^x (ln x + 1)
        let x = 1.7;
        let d = D::variable(x);
        let got = d.powf(d).eps;
        assert!((got - x.powf(x) * (x.ln() + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn nested_duals_give_second_derivative() {
        // f = sin(x) * x^2 ; f'' = -sin x x^2 + 4 x cos x + 2 sin x
        let x = 0.9;
        let v = DD::new(D::variable(x), D::constant(1.0));
        let f = v.sin() * v * v;
        let expected = -x.sin() * x * x + 4.0 * x * x.cos() + 2.0 * x.sin();
        assert!((f.eps.eps - expected).abs() < 1e-12);
    }

    #[test]
    fn gradient_of_product() {
        let g = gradient(&[2.0, 3.0], |v| v[0] * v[1] * v[1]);
        assert_eq!(g, vec![9.0, 12.0]);
    }

    #[test]
    fn atan2_derivative() {
        let y = D::variable(0.5);
        let x = D::constant(2.0);
        let d = y.atan2(x).eps;
        assert!((d - 2.0 / (4.0 + 0.25)).abs() < 1e-14);
    }
}
