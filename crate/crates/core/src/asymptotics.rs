//! Ground-state asymptotics as `N → 1⁺`.
//!
//! With `N = 1 + ε` the ground-state energy diverges roughly like
//! `(-ln ε)^(2/3)`; it is the root of
//!
//! ```text
//! 1 = ε e^(4/3 E^(3/2)) E^(-3/2) [√3 ln(2√E) + π - (1 - γ)√3] / 8
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const E_LO: f64 = 0.5;
const E_HI: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonEnergy {
    pub eps: f64,
    pub e: f64,
}

fn bracket_term(e: f64) -> f64 {
    let s3 = 3.0_f64.sqrt();
    s3 * (2.0 * e.sqrt()).ln() + PI - (1.0 - EULER_GAMMA) * s3
}

pub fn eq13_residual(e: f64, eps: f64) -> f64 {
    eps * (4.0 / 3.0 * e.powf(1.5)).exp() * e.powf(-1.5) * bracket_term(e) / 8.0 - 1.0
}

/// Logarithm of the right-hand side; same root as [`eq13_residual`] but
/// free of overflow across the whole bracket.
fn log_balance(e: f64, eps: f64) -> f64 {
    eps.ln() + 4.0 / 3.0 * e.powf(1.5) - 1.5 * e.ln() + (bracket_term(e) / 8.0).ln()
}

pub fn ground_energy_near_one(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::domain(format!("eps must lie in (0, 0.5], got {eps}")));
    }
    roots::brent(|e| Ok(log_balance(e, eps)), E_LO, E_HI, 1e-12, 200)
}

pub fn epsilon_energy(eps: f64) -> Result<EpsilonEnergy> {
    Ok(EpsilonEnergy {
        eps,
        e: ground_energy_near_one(eps)?,
    })
}
