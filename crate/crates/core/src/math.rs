//! Scalar helpers backed by `libm`, so the numerics build without `std`.

pub use core::f64::consts::{PI, TAU};

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// Distance from `x` to the nearest integer.
#[inline]
pub fn dist_to_int(x: f64) -> f64 {
    (x - round(x)).abs()
}

/// Reduces an angle to `[0, 2π)`.
#[inline]
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta - TAU * floor(theta / TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// The twist coefficient `(1 - e^{-2πη}) / η`, continuous at η = 0.
#[inline]
pub fn twist(eta: f64) -> f64 {
    if eta.abs() < 1e-300 {
        TAU
    } else {
        -expm1(-TAU * eta) / eta
    }
}

/// Uniform grid on `[0, 2π)`.
pub fn angle_grid(m: usize) -> alloc::vec::Vec<f64> {
    (0..m).map(|j| TAU * j as f64 / m as f64).collect()
}
