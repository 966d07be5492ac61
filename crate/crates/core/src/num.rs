//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast};

/// Floating-point scalar used by statistics, link weights, cores and correlations.
pub trait Real:
    Float + FromPrimitive + NumCast + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 literal representable")
    }

    /// Conversion from a count or index.
    fn from_count(n: usize) -> Self {
        <Self as NumCast>::from(n).expect("count representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Integer millions of USD converted at a computation boundary.
pub fn millions<F: Real>(m: i64) -> F {
    <F as NumCast>::from(m).expect("i64 representable as float")
}
