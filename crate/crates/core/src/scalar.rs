//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; only used for constants and sampled values.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to every Real")
    }

    /// Conversion from a count or an index.
    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize converts to every Real")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type Cplx<T> = Complex<T>;

/// `max(|Re z|, |Im z|)`: the per-component size that governs whether
/// quantization stays on two levels.
#[inline]
pub fn component_inf_norm<T: Real>(z: Cplx<T>) -> T {
    z.re.abs().max(z.im.abs())
}

/// Largest [`component_inf_norm`] over a slice; zero for an empty slice.
pub fn inf_norm<T: Real>(values: &[Cplx<T>]) -> T {
    values
        .iter()
        .fold(T::zero(), |acc, &z| acc.max(component_inf_norm(z)))
}

/// Squared Euclidean norm.
pub fn norm_sqr<T: Real>(values: &[Cplx<T>]) -> T {
    values.iter().map(|z| z.norm_sqr()).sum()
}

/// Hermitian inner product `<a, b> = sum conj(a_i) b_i`.
pub fn inner<T: Real>(a: &[Cplx<T>], b: &[Cplx<T>]) -> Cplx<T> {
    a.iter()
        .zip(b)
        .fold(Cplx::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}
