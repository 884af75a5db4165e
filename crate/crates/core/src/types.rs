//! Shared scalar and matrix aliases.

use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = nalgebra::DMatrix<C64>;
pub type CVec = nalgebra::DVector<C64>;

/// Shorthand complex constructor.
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Unit-modulus complex number with the given phase.
pub fn cis(theta: f64) -> C64 {
    C64::cis(theta)
}
