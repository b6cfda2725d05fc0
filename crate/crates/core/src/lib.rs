//! Spectra and complex classical motion for the PT-symmetric family
//! `H = p² + m²x² - (ix)^N`.
//!
//! Eigenvalues come from three independent routes: complex-contour shooting
//! inside the Stokes wedges ([`shooting`]), diagonalization in a harmonic
//! oscillator basis ([`basis`]) and semiclassical estimates ([`semiclassics`],
//! [`asymptotics`]). [`classical`] integrates the complex trajectories.

pub mod asymptotics;
pub mod basis;
pub mod classical;
pub mod error;
pub mod model;
pub mod ode;
pub mod quad;
pub mod roots;
pub mod semiclassics;
pub mod shooting;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{ix_pow, turning_angle, turning_points, wedge_geometry, BranchedPoint, HamiltonianSpec, TurningPair, WedgeGeometry};
pub use shooting::{Classification, EigenvalueRecord, Method, Shooter, ShootingConfig};

pub use num_complex::Complex64;
