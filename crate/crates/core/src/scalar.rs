//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! Expression evaluation, the dense linear algebra and the integrator are all
//! written against [`Scalar`], so the same code runs on `f64`, `f32` and on
//! the forward-mode [`Dual`](crate::dual::Dual) numbers used for exact
//! derivatives (including nested duals for second derivatives).

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// A real-like number usable throughout the crate.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Embeds an `f64` constant.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    /// The underlying real value, dropping any infinitesimal parts.
    #[inline]
    fn real(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {}
impl Scalar for f32 {}
