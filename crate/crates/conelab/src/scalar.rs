//! Scalar abstraction: every numeric routine in this crate is generic over a
//! floating-point type implementing [`Real`].
//!
//! `f64` is the production lane (the default tolerances assume it); `f32`
//! compiles and works at correspondingly looser tolerances.

use std::fmt;

/// Floating-point scalar usable throughout the crate.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + serde::Serialize
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Lift an `f64` constant into the working scalar type.
///
/// All literal constants in the crate are exactly representable in f32 and
/// f64 (small dyadic rationals) or are tolerances where rounding is harmless.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("constant must be representable in the scalar type")
}

/// Round-trip into `f64` for reporting and serialization.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("scalar must convert to f64")
}
