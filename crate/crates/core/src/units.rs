//! Frequency conventions.
//!
//! User-facing frequencies are linear frequencies in MHz (the `x/2π` values
//! quoted for the device). Internally every energy is an angular frequency
//! in rad/ns with ħ = 1, so times come out in ns.

use std::f64::consts::TAU;

/// ω = 2π·f·10⁻³ rad/ns for f in MHz.
#[inline]
pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    TAU * f_mhz * 1e-3
}

#[inline]
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / (TAU * 1e-3)
}
