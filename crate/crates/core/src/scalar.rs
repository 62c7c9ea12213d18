use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01};

/// Floating point scalar the numerical kernels are written against: `f32` or `f64`.
///
/// Sampling primitives live on the trait so generic code does not need a
/// `Distribution<T>` bound for every distribution it touches.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal or intermediate into `Self`, rounding as needed.
    #[inline]
    fn lit(x: f64) -> Self {
        // from_f64 only fails for types that cannot represent floats at all.
        Self::from_f64(x).unwrap()
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap()
    }

    /// A uniform draw on the open interval (0, 1).
    fn sample_open01<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// A unit-mean exponential draw.
    fn sample_exp1<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

macro_rules! impl_real {
    ($($t:ty),*) => {$(
        impl Real for $t {
            #[inline]
            fn sample_open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
                Open01.sample(rng)
            }

            #[inline]
            fn sample_exp1<R: Rng + ?Sized>(rng: &mut R) -> Self {
                Exp1.sample(rng)
            }
        }
    )*};
}

impl_real!(f32, f64);
