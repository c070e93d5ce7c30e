use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast};

/// Real scalar the numeric core is generic over.
///
/// Quadrature nodes, Gamma draws and log-Gamma values are produced in `f64`
/// and cast; tolerances scale with the precision of the type.
pub trait Scalar:
    Float + FromPrimitive + NumCast + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Absolute tolerance on `Σθᵢ = 1` for a simplex point.
    fn simplex_tolerance() -> Self;

    /// Default residual tolerance for the multiplier solve.
    fn solver_tolerance() -> Self;

    /// Smallest bracket width the bisection will narrow to.
    fn bracket_width() -> Self;
}

impl Scalar for f64 {
    fn simplex_tolerance() -> Self {
        1e-12
    }

    fn solver_tolerance() -> Self {
        1e-9
    }

    fn bracket_width() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn simplex_tolerance() -> Self {
        1e-5
    }

    fn solver_tolerance() -> Self {
        1e-4
    }

    fn bracket_width() -> Self {
        1e-6
    }
}

/// Lossless-enough cast from an `f64` literal.
#[inline]
pub(crate) fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub(crate) fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().expect("scalar converts to f64")
}
