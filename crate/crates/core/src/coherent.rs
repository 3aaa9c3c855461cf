//! Real-amplitude coherent states in the convention `<x|n> ~ H_n(x) exp(-x^2/2)`,
//! where `|alpha>` is centred at `x = sqrt(2) alpha`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

/// `pi^(-1/4)`.
pub fn gaussian_norm() -> f64 {
    PI.powf(-0.25)
}

/// `<x|alpha> = pi^(-1/4) exp(-(x - sqrt(2) alpha)^2 / 2)`.
pub fn wavefunction_x(alpha: f64, x: f64) -> f64 {
    let u = x - SQRT_2 * alpha;
    gaussian_norm() * (-0.5 * u * u).exp()
}

/// `<p|alpha> = pi^(-1/4) exp(-p^2/2 - i sqrt(2) alpha p)`.
pub fn wavefunction_p(alpha: f64, p: f64) -> Complex64 {
    Complex64::from_polar(gaussian_norm() * (-0.5 * p * p).exp(), -SQRT_2 * alpha * p)
}

/// `<a|b> = exp(-(a - b)^2 / 2)` for real amplitudes.
pub fn overlap(a: f64, b: f64) -> f64 {
    let d = a - b;
    (-0.5 * d * d).exp()
}
