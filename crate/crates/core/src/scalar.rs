//! Scalar abstraction shared by every numerical module.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating point scalar: `f32` or `f64`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` constant into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("finite constant")
}

/// Machine epsilon of the working scalar.
#[inline]
pub fn eps<T: Real>() -> T {
    T::default_epsilon()
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn cplx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(lit(re), lit(im))
}

pub fn cast_complex<T: Real>(z: Complex<f64>) -> Complex<T> {
    cplx(z.re, z.im)
}

#[inline]
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}

pub fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    let r = z.re.exp();
    Complex::new(r * z.im.cos(), r * z.im.sin())
}

/// Principal branch logarithm. `None` at the origin.
pub fn cln<T: Real>(z: Complex<T>) -> Option<Complex<T>> {
    if z.re == T::zero() && z.im == T::zero() {
        return None;
    }
    Some(Complex::new(cabs(z).ln(), z.im.atan2(z.re)))
}

/// Integer power with exact handling of non-negative exponents at zero.
pub fn cpowi<T: Real>(z: Complex<T>, k: i32) -> Option<Complex<T>> {
    if k >= 0 {
        let mut acc = Complex::new(T::one(), T::zero());
        let mut base = z;
        let mut e = k as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            e >>= 1;
        }
        Some(acc)
    } else {
        if z.re == T::zero() && z.im == T::zero() {
            return None;
        }
        let inv = Complex::new(T::one(), T::zero()) / z;
        cpowi(inv, -k)
    }
}
