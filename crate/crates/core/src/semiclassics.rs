//! Leading-order complex WKB for `-(ix)^N` and the comparison `|x|^N` estimate.
//!
//! For `N ≥ 2` the phase integral between the turning points `x_∓` can be
//! deformed onto the two rays through the origin, giving
//!
//! ```text
//! (n + 1/2) π = 2 sin(π/N) E^(1/N + 1/2) ∫₀¹ √(1 - s^N) ds
//! ```
//!
//! which inverts in closed form. Below `N = 2` the path joining the turning
//! points crosses the cut and the estimate is not offered.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// One semiclassical level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WkbEstimate {
    pub n: u32,
    pub e: f64,
    pub exponent: f64,
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `[Γ(3/2+1/N) √π (n+1/2) / (s Γ(1+1/N))]^(2N/(N+2))`; `s` is `sin(π/N)` for
/// `-(ix)^N` and `1` for `|x|^N`.
fn closed_form(level: f64, exponent: f64, sine: f64) -> f64 {
    let inv = 1.0 / exponent;
    let base = gamma(1.5 + inv) * PI.sqrt() * (level + 0.5) / (sine * gamma(1.0 + inv));
    base.powf(2.0 * exponent / (exponent + 2.0))
}

/// The same formula continued below `N = 2` (finite for `N > 1`). Only used
/// for scan-step heuristics, never reported as a WKB estimate.
pub(crate) fn level_scale(level: f64, exponent: f64) -> f64 {
    closed_form(level, exponent, (PI / exponent).sin())
}

pub fn wkb_energy(n: u32, exponent: f64) -> Result<f64> {
    if !(exponent >= 2.0) {
        return Err(Error::domain(format!(
            "WKB estimate requires N >= 2 (the phase path crosses the cut below), got N = {exponent}"
        )));
    }
    Ok(closed_form(n as f64, exponent, (PI / exponent).sin()))
}

pub fn wkb_estimate(n: u32, exponent: f64) -> Result<WkbEstimate> {
    Ok(WkbEstimate {
        n,
        e: wkb_energy(n, exponent)?,
        exponent,
    })
}

/// `∫₀¹ √(1 - s^N) ds`, with `s = 1 - u²` removing the square-root endpoint.
pub fn root_integral(exponent: f64) -> f64 {
    let integrand = |u: f64| {
        if u == 0.0 {
            return 0.0;
        }
        // 1 - (1 - u²)^N without cancellation for small u
        let one_minus = -(exponent * (-u * u).ln_1p()).exp_m1();
        2.0 * u * one_minus.max(0.0).sqrt()
    };
    quad::integrate(integrand, 0.0, 1.0, 1e-13)
}

/// Phase `∫_{x_-}^{x_+} √(E + (ix)^N) dx` along the two rays through 0.
pub fn wkb_quantization_integral(e: f64, exponent: f64) -> Result<f64> {
    if !(exponent >= 2.0) {
        return Err(Error::domain(format!(
            "WKB phase integral requires N >= 2, got N = {exponent}"
        )));
    }
    if !(e > 0.0) {
        return Err(Error::domain(format!("energy must be > 0, got {e}")));
    }
    Ok(2.0 * (PI / exponent).sin() * e.powf(1.0 / exponent + 0.5) * root_integral(exponent))
}

/// Leading-order WKB for the Hermitian `|x|^N` potential.
pub fn hermitian_wkb_energy(n: u32, exponent: f64) -> Result<f64> {
    if !(exponent > 0.0) {
        return Err(Error::domain(format!("exponent N must be > 0, got {exponent}")));
    }
    Ok(closed_form(n as f64, exponent, 1.0))
}
