//! Conversions between lab units and the rad/s, seconds convention used internally.

use std::f64::consts::TAU;

/// `2π × x MHz` in rad/s.
pub fn two_pi_mhz(x: f64) -> f64 {
    TAU * x * 1e6
}

/// `2π × x kHz` in rad/s.
pub fn two_pi_khz(x: f64) -> f64 {
    TAU * x * 1e3
}

/// Angular frequency in rad/s expressed as `x` in `2π × x MHz`.
pub fn to_two_pi_mhz(w: f64) -> f64 {
    w / (TAU * 1e6)
}

pub fn micros(x: f64) -> f64 {
    x * 1e-6
}
