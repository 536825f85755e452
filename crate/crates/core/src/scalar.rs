//! Floating-point abstraction shared by every numeric module.
//!
//! Simulation and surrogate code is written once against [`Real`] and
//! instantiated for `f64` (the default everywhere in the binary) or `f32`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// f32 or f64.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("finite constant")
    }

    fn as_f64(self) -> f64;

    /// Complementary error function.
    fn erfc(self) -> Self;

    /// Uniform draw on `[0, 1)`.
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Standard normal draw.
    fn sample_std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Unit-mean exponential draw.
    fn sample_exp1<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform draw on `[lo, hi]`.
    #[inline]
    fn sample_range<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self {
        lo + (hi - lo) * Self::sample_unit(rng)
    }

    #[inline]
    fn from_db(self) -> Self {
        Self::c(10.0).powf(self / Self::c(10.0))
    }

    #[inline]
    fn to_db(self) -> Self {
        Self::c(10.0) * self.log10()
    }
}

macro_rules! impl_real {
    ($t:ty, $erfc:path) => {
        impl Real for $t {
            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }

            #[inline]
            fn erfc(self) -> Self {
                $erfc(self)
            }

            #[inline]
            fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.random::<$t>()
            }

            #[inline]
            fn sample_std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample::<$t, _>(StandardNormal)
            }

            #[inline]
            fn sample_exp1<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample::<$t, _>(Exp1)
            }
        }
    };
}

impl_real!(f64, libm::erfc);
impl_real!(f32, libm::erfcf);

/// Standard normal probability density.
#[inline]
pub fn norm_pdf<T: Real>(x: T) -> T {
    (-(x * x) / T::c(2.0)).exp() / (T::c(2.0) * T::PI()).sqrt()
}

/// Standard normal cumulative distribution.
#[inline]
pub fn norm_cdf<T: Real>(x: T) -> T {
    T::c(0.5) * (-x / T::SQRT_2()).erfc()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_and_pdf_reference_points() {
        assert!((norm_cdf(0.0f64) - 0.5).abs() < 1e-15);
        assert!((norm_cdf(1.959963984540054f64) - 0.975).abs() < 1e-12);
        assert!((norm_pdf(0.0f64) - 0.3989422804014327).abs() < 1e-15);
        assert!((norm_cdf(1.0f32) - 0.841_344_7).abs() < 1e-6);
    }

    #[test]
    fn db_round_trip() {
        let x = 3.7f64;
        assert!((x.from_db().to_db() - x).abs() < 1e-12);
        assert!((2.0f64.to_db() - 3.010299956639812).abs() < 1e-12);
    }
}
