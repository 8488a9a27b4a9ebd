//! Unit conversions.
//!
//! Interfaces (config files, CLI, reports) speak GHz, MHz, ns, µs and volts.
//! Internally every frequency is an *angular* frequency in rad/ns and every
//! time is in ns, so phases are plain products `ω·t` and typical magnitudes
//! stay near unity.

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

/// Linear frequency in GHz → angular frequency in rad/ns.
pub fn ghz(f: f64) -> f64 {
    TWO_PI * f
}

/// Linear frequency in MHz → angular frequency in rad/ns.
pub fn mhz(f: f64) -> f64 {
    TWO_PI * f * 1e-3
}

/// Angular frequency in rad/ns → linear frequency in GHz.
pub fn to_ghz(w: f64) -> f64 {
    w / TWO_PI
}

/// Angular frequency in rad/ns → linear frequency in MHz.
pub fn to_mhz(w: f64) -> f64 {
    w / TWO_PI * 1e3
}

/// Time in µs → ns.
pub fn us(t: f64) -> f64 {
    t * 1e3
}

/// Wrap a phase to (−π, π].
pub fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(TWO_PI);
    if p > PI {
        p -= TWO_PI;
    }
    p
}
