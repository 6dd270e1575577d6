//! Scalar abstraction: the numerical kernels are generic over the floating
//! point type, with `f64` as the concrete type used by the experiment harness.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Floating point scalar for lattice fields, kernels and norms.
///
/// `f32` and `f64` implement this; everything downstream (complex partition
/// functions via `num_complex::Complex<S>`, chaos evaluations, wavelet
/// tables) is written against it.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, for constants and tolerances.
    fn from_f64_c(x: f64) -> Self;

    /// Lossy conversion to `f64`, for reporting and serialization.
    fn to_f64_c(self) -> f64;

    /// One standard normal draw.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One uniform draw on `[0, 1)`.
    fn uniform_01<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn from_f64_c(x: f64) -> Self {
                x as $t
            }
            #[inline]
            fn to_f64_c(self) -> f64 {
                self as f64
            }
            #[inline]
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }
            #[inline]
            fn uniform_01<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.gen::<$t>()
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Critical inverse temperature of the square lattice Ising model,
/// `log(1 + sqrt(2)) / 2 = 0.44068679350977151...` (17 digits:
/// 0.44068679350977151; the f64 nearest value is returned).
pub fn critical_beta<S: Scalar>() -> S {
    S::from_f64_c(0.5 * (1.0 + std::f64::consts::SQRT_2).ln())
}
