//! Scalar abstraction shared by the rotation algebra, the factorizations and
//! the QR solver.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst};

/// Real floating-point type the numerical kernels are generic over.
///
/// Implemented for `f32` and `f64`. Random draws are produced in `f64` and
/// cast into `T`.
pub trait Real: Float + FloatConst + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` constant, saturating tiny values to the smallest
    /// positive normal number of `Self`.
    fn of(x: f64) -> Self {
        match <Self as num_traits::NumCast>::from(x) {
            Some(v) if v != Self::zero() || x == 0.0 => v,
            _ if x > 0.0 => Self::min_positive_value(),
            _ if x < 0.0 => -Self::min_positive_value(),
            _ => Self::zero(),
        }
    }

    /// Magnitude below which a phase is treated as undefined and taken as 0.
    fn phase_floor() -> Self {
        Self::of(1e-300)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `e^{i Arg z}` computed as `z/|z|`, with `Arg 0 := 0`.
///
/// Avoids trigonometric round trips, so real inputs give exactly `±1`.
pub fn unit_phase<T: Real>(z: Complex<T>) -> Complex<T> {
    let r = z.norm();
    if r <= T::phase_floor() {
        Complex::new(T::one(), T::zero())
    } else {
        z.unscale(r)
    }
}

pub(crate) fn cone<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

pub(crate) fn to_c64<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(
        z.re.to_f64().unwrap_or(f64::NAN),
        z.im.to_f64().unwrap_or(f64::NAN),
    )
}

pub(crate) fn from_c64<T: Real>(z: Complex<f64>) -> Complex<T> {
    Complex::new(T::of(z.re), T::of(z.im))
}
