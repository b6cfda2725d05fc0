//! The Hamiltonian family `H = p^2 + m^2 x^2 - (ix)^N` and its complex-plane
//! geometry: branch-correct powers of `ix`, anti-Stokes wedges and turning
//! points.
//!
//! Positions where `(ix)^N` is evaluated are carried in polar form with an
//! unreduced argument ([`BranchedPoint`]). In the spectral chart the argument
//! lives in `(-3π/2, π/2)`, which places the cut on the positive imaginary
//! axis; the negative real axis is `θ = -π`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One member of the family, selected by the exponent `N` and mass term `m²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub n: f64,
    pub m2: f64,
}

impl HamiltonianSpec {
    pub fn new(n: f64, m2: f64) -> Result<Self> {
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::domain(format!("exponent N must be > 0, got {n}")));
        }
        if !(m2.is_finite() && m2 >= 0.0) {
            return Err(Error::domain(format!("mass term m2 must be >= 0, got {m2}")));
        }
        Ok(Self { n, m2 })
    }

    /// Massless member `p^2 - (ix)^N`.
    pub fn massless(n: f64) -> Result<Self> {
        Self::new(n, 0.0)
    }

    /// `Q(x) = m² x² - (ix)^N - E`, so that `ψ'' = Q ψ`.
    pub fn q(&self, x: BranchedPoint, e: Complex64) -> Complex64 {
        let z = x.to_complex();
        self.m2 * z * z - ix_pow(x, self.n) - e
    }
}

/// A point of the cut (or, for trajectories, unwound) complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchedPoint {
    pub r: f64,
    pub theta: f64,
}

impl BranchedPoint {
    pub fn new(r: f64, theta: f64) -> Self {
        Self { r, theta }
    }

    /// Spectral-chart representative of a Cartesian point: `θ ∈ [-3π/2, π/2)`.
    pub fn from_complex(z: Complex64) -> Self {
        let (r, mut theta) = z.to_polar();
        if theta >= FRAC_PI_2 {
            theta -= 2.0 * PI;
        }
        Self { r, theta }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.r, self.theta)
    }

    /// Whether the argument lies in the cut plane used for spectra.
    pub fn in_spectral_chart(self) -> bool {
        self.theta > -1.5 * PI && self.theta < FRAC_PI_2
    }
}

/// `(ix)^N = r^N exp(iN(θ + π/2))`, continuous in the unreduced argument.
///
/// `r = 0` gives zero for `N > 0`.
pub fn ix_pow(x: BranchedPoint, n: f64) -> Complex64 {
    if x.r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(x.r.powf(n), n * (x.theta + FRAC_PI_2))
}

/// Checked variant of [`ix_pow`] that rejects the singular `r = 0, N < 0` case.
pub fn try_ix_pow(x: BranchedPoint, n: f64) -> Result<Complex64> {
    if x.r < 0.0 {
        return Err(Error::domain(format!("modulus must be >= 0, got {}", x.r)));
    }
    if x.r == 0.0 && n < 0.0 {
        return Err(Error::domain("(ix)^N is singular at x = 0 for N < 0"));
    }
    Ok(ix_pow(x, n))
}

/// Anti-Stokes directions of the left and right wedges and their opening.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WedgeGeometry {
    pub theta_left: f64,
    pub theta_right: f64,
    pub opening: f64,
}

impl WedgeGeometry {
    /// Left-wedge centre mapped to `(-π, π]` for display.
    pub fn theta_left_display(&self) -> f64 {
        let t = self.theta_left;
        if t <= -PI {
            t + 2.0 * PI
        } else {
            t
        }
    }

    /// True when `angle` lies strictly inside the wedge centred at `centre`.
    pub fn contains(&self, centre: f64, angle: f64) -> bool {
        (angle - centre).abs() < 0.5 * self.opening
    }
}

pub fn wedge_geometry(n: f64) -> WedgeGeometry {
    let tilt = (n - 2.0) * PI / (2.0 * (n + 2.0));
    WedgeGeometry {
        theta_left: -PI + tilt,
        theta_right: -tilt,
        opening: 2.0 * PI / (n + 2.0),
    }
}

/// Classical turning points joined by the WKB phase integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPair {
    pub x_minus: Complex64,
    pub x_plus: Complex64,
}

pub fn turning_points(e: f64, n: f64) -> Result<TurningPair> {
    if !(e > 0.0) {
        return Err(Error::domain(format!("energy must be > 0, got {e}")));
    }
    if !(n > 0.0) {
        return Err(Error::domain(format!("exponent N must be > 0, got {n}")));
    }
    let modulus = e.powf(1.0 / n);
    Ok(TurningPair {
        x_minus: Complex64::from_polar(modulus, PI * (1.5 - 1.0 / n)),
        x_plus: Complex64::from_polar(modulus, -PI * (0.5 - 1.0 / n)),
    })
}

/// Unwound argument of the `n`-th zero of `E + (ix)^N`, counting
/// anticlockwise from `x_+` (`n = 0`).
pub fn turning_angle(n: u32, exponent: f64) -> f64 {
    (4.0 * n as f64 - exponent + 2.0) * PI / (2.0 * exponent)
}
