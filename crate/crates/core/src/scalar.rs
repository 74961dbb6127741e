//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All weights, angles and determinants are generic over a real floating
//! point type `T`; complex quantities are `Complex<T>`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar usable by the numeric core: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for constants and tolerances.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `e^{i x}`.
pub fn cis<T: Scalar>(x: T) -> Complex<T> {
    Complex::new(x.cos(), x.sin())
}

/// The imaginary unit.
pub fn im_unit<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

pub fn real<T: Scalar>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Relative error with denominator `max(|a|, |b|, 1e-300)`.
pub fn rel_err<T: Scalar>(a: Complex<T>, b: Complex<T>) -> f64 {
    let a = Complex::new(a.re.to_f64_lossy(), a.im.to_f64_lossy());
    let b = Complex::new(b.re.to_f64_lossy(), b.im.to_f64_lossy());
    let denom = a.norm().max(b.norm()).max(1e-300);
    (a - b).norm() / denom
}

pub fn rel_err_real<T: Scalar>(a: T, b: T) -> f64 {
    rel_err(real(a), real(b))
}

/// Numeric tolerances. Defaults are tuned for `f64` at desk scale.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Absolute tolerance on circumradius and angle checks.
    pub geom: f64,
    /// Relative tolerance for complex identities.
    pub num: f64,
    /// Absolute pivot magnitude below which a column counts as zero.
    pub pivot: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            geom: 1e-9,
            num: 1e-9,
            pivot: 1e-13,
        }
    }
}

impl Tolerances {
    /// Looser defaults for single precision.
    pub fn single_precision() -> Self {
        Tolerances {
            geom: 1e-4,
            num: 1e-4,
            pivot: 1e-7,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rel_err_is_symmetric_and_scaled() {
        let a = Complex::new(1.0, 0.0);
        let b = Complex::new(1.0 + 1e-12, 0.0);
        assert!(rel_err(a, b) < 2e-12);
        assert_eq!(rel_err(a, b), rel_err(b, a));
        assert_eq!(rel_err(Complex::new(0.0f64, 0.0), Complex::new(0.0, 0.0)), 0.0);
    }

    #[test]
    fn cis_matches_euler() {
        let z = cis(std::f64::consts::FRAC_PI_2);
        assert!((z - Complex::new(0.0, 1.0)).norm() < 1e-15);
        let z32 = cis(std::f32::consts::PI);
        assert!((z32 + Complex::new(1.0f32, 0.0)).norm() < 1e-6);
    }
}
