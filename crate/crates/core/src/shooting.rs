//! Complex-contour shooting for `-ψ'' + m²x²ψ - (ix)^N ψ = E ψ`.
//!
//! Each wedge contributes one solution, obtained by integrating inward along
//! a ray `x = r e^{iθ}` from a WKB-normalised start deep inside the wedge to
//! the origin. The ray equation `u''(r) = e^{2iθ} Q(r e^{iθ}) u` is split into
//! four real first-order equations. Eigenvalues are the zeros of the
//! Wronskian of the two solutions at `x = 0`.
//!
//! For real `E` the left solution is the PT mirror of the right one,
//! `ψ_L(x) = c·conj(ψ_R(-conj x))`, so the Wronskian reduces to
//! `c · d/dx |ψ_R|²` at the origin. Real levels are bracketed by sign changes
//! of that real function; levels off the axis are polished by complex secant
//! iteration on the Wronskian with frozen ray lengths.

use std::f64::consts::{FRAC_PI_6, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis;
use crate::error::{Error, Result};
use crate::model::{wedge_geometry, BranchedPoint, HamiltonianSpec, WedgeGeometry};
use crate::ode::{Dopri5, Tolerances};
use crate::roots;
use crate::semiclassics;

/// Largest exponent accepted by the shooting solver.
pub const MAX_EXPONENT: f64 = 12.0;

/// An integration ray inside one wedge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourRay {
    pub angle: f64,
    pub outer_radius: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

/// Boundary data of both wedge solutions at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchResult {
    pub w: Complex64,
    pub psi_left0: Complex64,
    pub psi_right0: Complex64,
    pub dpsi_left0: Complex64,
    pub dpsi_right0: Complex64,
}

impl MatchResult {
    fn new(left: (Complex64, Complex64), right: (Complex64, Complex64)) -> Self {
        let (psi_left0, dpsi_left0) = left;
        let (psi_right0, dpsi_right0) = right;
        Self {
            w: psi_left0 * dpsi_right0 - dpsi_left0 * psi_right0,
            psi_left0,
            psi_right0,
            dpsi_left0,
            dpsi_right0,
        }
    }

    /// `|W|` divided by the norms of both boundary vectors; lies in `[0, 1]`
    /// and does not depend on how either solution is normalised.
    pub fn normalized(&self) -> f64 {
        let left = (self.psi_left0.norm_sqr() + self.dpsi_left0.norm_sqr()).sqrt();
        let right = (self.psi_right0.norm_sqr() + self.dpsi_right0.norm_sqr()).sqrt();
        self.w.norm() / (left * right)
    }

    /// `d/dx |ψ_R|²` at the origin relative to `|ψ_R|² + |ψ_R'|²`.
    pub fn patching(&self) -> f64 {
        patching_value(self.psi_right0, self.dpsi_right0)
    }
}

fn patching_value(psi: Complex64, dpsi: Complex64) -> f64 {
    2.0 * (psi.conj() * dpsi).re / (psi.norm_sqr() + dpsi.norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Shoot,
    Matrix,
    Wkb,
    Asymptotic,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Shoot => "shoot",
            Method::Matrix => "matrix",
            Method::Wkb => "wkb",
            Method::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Real,
    ComplexPair,
}

impl Classification {
    pub fn of(e: Complex64, tol_real: f64) -> Self {
        if e.im.abs() <= tol_real * e.re.abs().max(1.0) {
            Classification::Real
        } else {
            Classification::ComplexPair
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Real => "real",
            Classification::ComplexPair => "complex-pair",
        }
    }
}

/// One spectral point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueRecord {
    pub n: usize,
    pub energy: Complex64,
    pub method: Method,
    pub residual: f64,
    /// `None` when the polisher did not converge.
    pub classification: Option<Classification>,
    /// Truncation-convergence estimate, set by the matrix method.
    pub convergence: Option<f64>,
}

impl EigenvalueRecord {
    pub fn is_real(&self) -> bool {
        self.classification == Some(Classification::Real)
    }
}

/// Sorts by `Re E`, then `Im E`, and renumbers.
pub fn sort_records(records: &mut [EigenvalueRecord]) {
    records.sort_by(|a, b| {
        a.energy
            .re
            .total_cmp(&b.energy.re)
            .then(a.energy.im.total_cmp(&b.energy.im))
    });
    for (i, r) in records.iter_mut().enumerate() {
        r.n = i;
    }
}

/// Numerical settings of the shooting solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingConfig {
    /// Required decay exponent `Re ∫₀^R e^{iθ}√Q dr` at the ray end.
    pub exponent_threshold: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Offsets added to the anti-Stokes angles (radians).
    pub left_offset: f64,
    pub right_offset: f64,
    /// Multiplies the threshold radius.
    pub radius_factor: f64,
    pub tol_real: f64,
    /// Residual acceptance relative to the scan maximum of the normalised mismatch.
    pub accept_ratio: f64,
    pub dedup_tol: f64,
    pub max_secant_iter: usize,
    /// Basis size used for complex seeds in [`Shooter::spectrum`].
    pub seed_basis: usize,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            exponent_threshold: 25.0,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            left_offset: 0.0,
            right_offset: 0.0,
            radius_factor: 1.0,
            tol_real: 1e-8,
            accept_ratio: 1e-8,
            dedup_tol: 1e-7,
            max_secant_iter: 60,
            seed_basis: 96,
        }
    }
}

fn check_shooting_domain(spec: &HamiltonianSpec) -> Result<()> {
    let ok = if spec.m2 > 0.0 {
        spec.n >= 1.0 && spec.n <= MAX_EXPONENT
    } else {
        spec.n > 1.0 && spec.n <= MAX_EXPONENT
    };
    if ok {
        Ok(())
    } else if spec.m2 > 0.0 {
        Err(Error::domain(format!(
            "shooting with m2 > 0 supports 1 <= N <= {MAX_EXPONENT}, got N = {}",
            spec.n
        )))
    } else {
        Err(Error::domain(format!(
            "shooting supports 1 < N <= {MAX_EXPONENT}, got N = {}",
            spec.n
        )))
    }
}

/// `e^{iθ}√Q` on the decaying branch, `Re > 0`.
fn decay_rate(spec: &HamiltonianSpec, e: Complex64, angle: f64, r: f64) -> Result<Complex64> {
    let rot = Complex64::from_polar(1.0, angle);
    let w = rot * spec.q(BranchedPoint::new(r, angle), e).sqrt();
    if w.re.abs() <= 1e-9 * w.norm() {
        return Err(Error::Contour(format!(
            "no decaying branch at r = {r}, angle = {angle}: ray is on a Stokes line"
        )));
    }
    Ok(if w.re > 0.0 { w } else { -w })
}

/// Smallest `R` with `Re ∫₀^R e^{iθ}√Q dr ≥ threshold`, the square root being
/// continued along the ray and oriented by its sign at `R`.
pub fn threshold_radius(spec: &HamiltonianSpec, e: Complex64, angle: f64, threshold: f64) -> Result<f64> {
    const R_MAX: f64 = 1e3;
    let rot = Complex64::from_polar(1.0, angle);
    let rate = |r: f64| rot * spec.q(BranchedPoint::new(r, angle), e).sqrt();
    let mut r = 0.0;
    let mut prev = rate(0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    while r < R_MAX {
        let dr = 0.02 / prev.norm().max(1.0);
        let mut next = rate(r + dr);
        if (next + prev).norm() < (next - prev).norm() {
            next = -next;
        }
        acc += 0.5 * dr * (prev + next);
        r += dr;
        prev = next;
        if next.re.signum() * acc.re >= threshold {
            return Ok(r);
        }
    }
    Err(Error::Contour(format!(
        "decay exponent {threshold} not reached within r = {R_MAX} along angle {angle}"
    )))
}

impl ContourRay {
    pub fn for_spec(spec: &HamiltonianSpec, e: Complex64, angle: f64, cfg: &ShootingConfig) -> Result<Self> {
        let r = threshold_radius(spec, e, angle, cfg.exponent_threshold)?;
        Ok(Self {
            angle,
            outer_radius: r * cfg.radius_factor,
            rel_tol: cfg.rel_tol,
            abs_tol: cfg.abs_tol,
        })
    }
}

/// Integrates the ray equation from `r = R` to `0` starting from `(u, du/dr)`.
/// Returns `ψ(0)` and `dψ/dx(0)`.
fn integrate_from(
    spec: &HamiltonianSpec,
    e: Complex64,
    ray: &ContourRay,
    u: Complex64,
    du: Complex64,
) -> Result<(Complex64, Complex64)> {
    let rot2 = Complex64::from_polar(1.0, 2.0 * ray.angle);
    let angle = ray.angle;
    let spec = *spec;
    let rhs = move |r: f64, y: &[f64; 4]| {
        let u = Complex64::new(y[0], y[1]);
        let q = spec.q(BranchedPoint::new(r, angle), e);
        let acc = rot2 * q * u;
        [y[2], y[3], acc.re, acc.im]
    };
    let solver = Dopri5::new(Tolerances {
        rel_tol: ray.rel_tol,
        abs_tol: ray.abs_tol,
        max_steps: 500_000,
    });
    let y0 = [u.re, u.im, du.re, du.im];
    let (_, y) = solver.integrate(rhs, ray.outer_radius, y0, 0.0, 1e-3 * ray.outer_radius, |_, _| true)?;
    let psi0 = Complex64::new(y[0], y[1]);
    let du0 = Complex64::new(y[2], y[3]);
    Ok((psi0, Complex64::from_polar(1.0, -ray.angle) * du0))
}

/// One wedge solution with WKB start `u(R) = Q^{-1/4}`, `u'(R) = -e^{iθ}√Q u(R)`.
pub fn integrate_ray(spec: &HamiltonianSpec, e: Complex64, ray: &ContourRay) -> Result<(Complex64, Complex64)> {
    let q = spec.q(BranchedPoint::new(ray.outer_radius, ray.angle), e);
    let rate = decay_rate(spec, e, ray.angle, ray.outer_radius)?;
    let u = q.powf(-0.25);
    integrate_from(spec, e, ray, u, -rate * u)
}

/// Fixed-step RK4 version of [`integrate_ray`], for verification.
pub fn integrate_ray_fixed(
    spec: &HamiltonianSpec,
    e: Complex64,
    ray: &ContourRay,
    steps: usize,
) -> Result<(Complex64, Complex64)> {
    let q = spec.q(BranchedPoint::new(ray.outer_radius, ray.angle), e);
    let rate = decay_rate(spec, e, ray.angle, ray.outer_radius)?;
    let u = q.powf(-0.25);
    let du = -rate * u;
    let rot2 = Complex64::from_polar(1.0, 2.0 * ray.angle);
    let angle = ray.angle;
    let spec = *spec;
    let rhs = move |r: f64, y: &[f64; 4]| {
        let u = Complex64::new(y[0], y[1]);
        let acc = rot2 * spec.q(BranchedPoint::new(r, angle), e) * u;
        [y[2], y[3], acc.re, acc.im]
    };
    let y = crate::ode::rk4_fixed(rhs, ray.outer_radius, [u.re, u.im, du.re, du.im], 0.0, steps);
    Ok((
        Complex64::new(y[0], y[1]),
        Complex64::from_polar(1.0, -ray.angle) * Complex64::new(y[2], y[3]),
    ))
}

/// The shooting eigensolver for one Hamiltonian.
#[derive(Debug, Clone)]
pub struct Shooter {
    pub spec: HamiltonianSpec,
    pub cfg: ShootingConfig,
    wedges: WedgeGeometry,
}

impl Shooter {
    pub fn new(spec: HamiltonianSpec) -> Result<Self> {
        Self::with_config(spec, ShootingConfig::default())
    }

    pub fn with_config(spec: HamiltonianSpec, cfg: ShootingConfig) -> Result<Self> {
        check_shooting_domain(&spec)?;
        let wedges = wedge_geometry(spec.n);
        for (offset, side) in [(cfg.left_offset, "left"), (cfg.right_offset, "right")] {
            if offset.abs() >= 0.5 * wedges.opening {
                return Err(Error::Contour(format!(
                    "{side} ray offset {offset} leaves the wedge (half-opening {})",
                    0.5 * wedges.opening
                )));
            }
        }
        Ok(Self { spec, cfg, wedges })
    }

    pub fn left_angle(&self) -> f64 {
        self.wedges.theta_left + self.cfg.left_offset
    }

    pub fn right_angle(&self) -> f64 {
        self.wedges.theta_right + self.cfg.right_offset
    }

    pub fn rays(&self, e: Complex64) -> Result<(ContourRay, ContourRay)> {
        Ok((
            ContourRay::for_spec(&self.spec, e, self.left_angle(), &self.cfg)?,
            ContourRay::for_spec(&self.spec, e, self.right_angle(), &self.cfg)?,
        ))
    }

    pub fn mismatch(&self, e: Complex64) -> Result<MatchResult> {
        let (left, right) = self.rays(e)?;
        self.mismatch_on(e, &left, &right)
    }

    fn mismatch_on(&self, e: Complex64, left: &ContourRay, right: &ContourRay) -> Result<MatchResult> {
        Ok(MatchResult::new(
            integrate_ray(&self.spec, e, left)?,
            integrate_ray(&self.spec, e, right)?,
        ))
    }

    /// Real patching function `d/dx|ψ_R|²(0) / (|ψ_R|² + |ψ_R'|²)` at real `E`.
    pub fn patching(&self, e: f64) -> Result<f64> {
        let e = Complex64::new(e, 0.0);
        let ray = ContourRay::for_spec(&self.spec, e, self.right_angle(), &self.cfg)?;
        let (psi, dpsi) = integrate_ray(&self.spec, e, &ray)?;
        Ok(patching_value(psi, dpsi))
    }

    /// Wronskian as an analytic function of `E`, ray lengths frozen at `anchor`.
    fn frozen_wronskian(&self, anchor: Complex64) -> Result<impl Fn(Complex64) -> Result<Complex64> + '_> {
        let (left, right) = self.rays(anchor)?;
        Ok(move |e: Complex64| Ok(self.mismatch_on(e, &left, &right)?.w))
    }

    fn secant_polish(&self, seed: Complex64, step: Complex64, deflate: &[Complex64]) -> Result<Complex64> {
        let w = self.frozen_wronskian(seed)?;
        let f = |e: Complex64| {
            let mut v = w(e)?;
            for d in deflate {
                v /= e - d;
            }
            Ok(v)
        };
        roots::complex_secant(f, seed, seed + step, 1e-13, self.cfg.max_secant_iter)
    }

    fn record(&self, e: Complex64, residual: f64, converged: bool) -> EigenvalueRecord {
        EigenvalueRecord {
            n: 0,
            energy: e,
            method: Method::Shoot,
            residual,
            classification: converged.then(|| Classification::of(e, self.cfg.tol_real)),
            convergence: None,
        }
    }

    /// Local level spacing estimate used for the default scan step.
    fn spacing_at(&self, e: f64) -> f64 {
        let n = self.spec.n;
        let mut spacing = f64::INFINITY;
        if n > 1.0 {
            let c = semiclassics::level_scale(0.0, n) / 0.5_f64.powf(2.0 * n / (n + 2.0));
            let p = 2.0 * n / (n + 2.0);
            let level = (e.max(1e-3) / c).powf(1.0 / p).max(0.5);
            spacing = p * c * level.powf(p - 1.0);
        }
        if self.spec.m2 > 0.0 {
            spacing = spacing.min(2.0 * self.spec.m2.sqrt());
        }
        spacing
    }

    pub fn default_scan_step(&self, e: f64) -> f64 {
        (0.25 * self.spacing_at(e)).min(0.5)
    }

    /// Scans `E ∈ (0, e_max]` and returns every level found on or near the
    /// real axis. `scan_step = None` uses the spacing-adapted default.
    pub fn find_real_eigenvalues(&self, e_max: f64, scan_step: Option<f64>) -> Result<Vec<EigenvalueRecord>> {
        if !(e_max > 0.0) {
            return Err(Error::domain(format!("e_max must be > 0, got {e_max}")));
        }
        if let Some(s) = scan_step {
            if !(s > 0.0) {
                return Err(Error::domain(format!("scan_step must be > 0, got {s}")));
            }
        }
        // grid
        let mut grid = Vec::new();
        let mut e = scan_step.unwrap_or_else(|| self.default_scan_step(0.0)).min(e_max) * 0.5;
        while e <= e_max {
            grid.push(e);
            e += scan_step.unwrap_or_else(|| self.default_scan_step(e));
        }
        if grid.last().is_none_or(|&last| last < e_max) {
            grid.push(e_max);
        }
        let samples: Vec<MatchResult> = grid
            .iter()
            .map(|&e| self.mismatch(Complex64::new(e, 0.0)))
            .collect::<Result<_>>()?;
        let p: Vec<f64> = samples.iter().map(MatchResult::patching).collect();
        let wn: Vec<f64> = samples.iter().map(MatchResult::normalized).collect();
        let w_max = wn.iter().cloned().fold(0.0, f64::max);
        let accept = self.cfg.accept_ratio * w_max.max(f64::MIN_POSITIVE);

        let mut found: Vec<EigenvalueRecord> = Vec::new();
        let push_unique = |found: &mut Vec<EigenvalueRecord>, rec: EigenvalueRecord| {
            let tol = self.cfg.dedup_tol * rec.energy.norm().max(1.0);
            if !found.iter().any(|f| (f.energy - rec.energy).norm() < tol) {
                found.push(rec);
            }
        };

        // sign changes of the patching function bracket real levels
        for i in 0..grid.len() - 1 {
            if p[i] == 0.0 || p[i].signum() != p[i + 1].signum() {
                let root = roots::brent(|e| self.patching(e), grid[i], grid[i + 1], 1e-13, 200);
                match root {
                    Ok(e) => {
                        let e = Complex64::new(e, 0.0);
                        let residual = self.mismatch(e)?.normalized();
                        if residual < accept {
                            push_unique(&mut found, self.record(e, residual, true));
                        }
                    }
                    Err(Error::NoConvergence { best_re, residual, .. }) => {
                        push_unique(&mut found, self.record(Complex64::new(best_re, 0.0), residual, false));
                    }
                    Err(err) => return Err(err),
                }
            }
        }

        // interior minima of |W| without a sign change: unresolved close pairs
        // or conjugate pairs just off the axis
        for i in 1..grid.len() - 1 {
            if !(wn[i] < wn[i - 1] && wn[i] <= wn[i + 1]) {
                continue;
            }
            let bracketed = (p[i - 1].signum() != p[i].signum()) || (p[i].signum() != p[i + 1].signum());
            if bracketed {
                continue;
            }
            let seed = Complex64::new(grid[i], 0.0);
            let step = Complex64::new(0.1 * (grid[i + 1] - grid[i]), 0.05 * (grid[i + 1] - grid[i]));
            let first = match self.secant_polish(seed, step, &[]) {
                Ok(z) => z,
                Err(Error::NoConvergence { .. }) => continue,
                Err(err) => return Err(err),
            };
            if (first - seed).norm() > 2.0 * (grid[i + 1] - grid[i - 1]) || !(first.re > 0.0) {
                continue;
            }
            let mut members = vec![first];
            if Classification::of(first, self.cfg.tol_real) == Classification::ComplexPair {
                members.push(first.conj());
            } else if let Ok(second) = self.secant_polish(seed, step.conj(), &[first]) {
                if (second - seed).norm() <= 2.0 * (grid[i + 1] - grid[i - 1]) {
                    members.push(second);
                }
            }
            for z in members {
                let z = if Classification::of(z, self.cfg.tol_real) == Classification::Real {
                    Complex64::new(z.re, 0.0)
                } else {
                    z
                };
                let residual = self.mismatch(z)?.normalized();
                if residual < accept {
                    push_unique(&mut found, self.record(z, residual, true));
                }
            }
        }
        sort_records(&mut found);
        Ok(found)
    }

    /// Polishes a complex seed by secant iteration on the Wronskian.
    pub fn refine_complex(&self, e0: Complex64) -> Result<EigenvalueRecord> {
        let step = Complex64::new(1e-3, 1e-3) * e0.norm().max(1.0);
        let z = self.secant_polish(e0, step, &[])?;
        let z = if Classification::of(z, self.cfg.tol_real) == Classification::Real {
            Complex64::new(z.re, 0.0)
        } else {
            z
        };
        let residual = self.mismatch(z)?.normalized();
        Ok(self.record(z, residual, true))
    }

    /// Scan ceiling expected to contain `count` levels.
    fn scan_ceiling(&self, count: usize) -> f64 {
        let level = count as f64 + 2.0;
        let mut e_max: f64 = 0.0;
        if self.spec.n > 1.0 {
            e_max = semiclassics::level_scale(level, self.spec.n);
        }
        if self.spec.m2 > 0.0 {
            let m = self.spec.m2.sqrt();
            e_max = e_max.max((2.0 * level + 1.0) * m + 0.25 / self.spec.m2);
        }
        e_max
    }

    /// The `count` lowest levels by `Re E`.
    pub fn spectrum(&self, count: usize) -> Result<Vec<EigenvalueRecord>> {
        if count == 0 {
            return Err(Error::domain("count must be >= 1"));
        }
        let mut e_max = self.scan_ceiling(count);
        let mut records = Vec::new();
        for _ in 0..4 {
            records = self.find_real_eigenvalues(e_max, None)?;
            records.retain(|r| r.classification.is_some());
            let real = records.iter().filter(|r| r.is_real()).count();
            if real >= count || self.spec.n < 2.0 {
                break;
            }
            e_max *= 1.5;
        }
        let real = records.iter().filter(|r| r.is_real()).count();
        if real < count && self.spec.n > 1.0 && self.spec.n < 4.0 {
            let seeds = basis::matrix_spectrum(&self.spec, self.cfg.seed_basis, count + 4)?;
            for seed in seeds {
                if seed.classification != Some(Classification::ComplexPair) || seed.energy.im < 0.0 {
                    continue;
                }
                let polished = match self.refine_complex(seed.energy) {
                    Ok(r) => r,
                    Err(Error::NoConvergence { .. }) => continue,
                    Err(err) => return Err(err),
                };
                for z in [polished.energy, polished.energy.conj()] {
                    let tol = self.cfg.dedup_tol * z.norm().max(1.0);
                    if !records.iter().any(|r| (r.energy - z).norm() < tol) {
                        records.push(EigenvalueRecord { energy: z, ..polished });
                    }
                }
            }
        }
        sort_records(&mut records);
        records.truncate(count);
        Ok(records)
    }
}

pub fn mismatch(spec: &HamiltonianSpec, e: Complex64) -> Result<MatchResult> {
    Shooter::new(*spec)?.mismatch(e)
}

pub fn find_real_eigenvalues(spec: &HamiltonianSpec, e_max: f64, scan_step: Option<f64>) -> Result<Vec<EigenvalueRecord>> {
    Shooter::new(*spec)?.find_real_eigenvalues(e_max, scan_step)
}

pub fn refine_complex(spec: &HamiltonianSpec, e0: Complex64) -> Result<EigenvalueRecord> {
    Shooter::new(*spec)?.refine_complex(e0)
}

pub fn spectrum(spec: &HamiltonianSpec, count: usize) -> Result<Vec<EigenvalueRecord>> {
    Shooter::new(*spec)?.spectrum(count)
}

/// Number of real levels below the scan ceiling for `pair_index + 2` levels.
fn real_levels(m2: f64, n: f64, pair_index: usize) -> Result<usize> {
    let shooter = Shooter::new(HamiltonianSpec::new(n, m2)?)?;
    let e_max = shooter.scan_ceiling(pair_index + 1);
    let found = shooter.find_real_eigenvalues(e_max, None)?;
    Ok(found.iter().filter(|r| r.is_real()).count())
}

/// Exponent `N*` at which levels `pair_index` and `pair_index + 1` coalesce,
/// bisected on "both levels real" to within `n_tol`.
pub fn find_merge_n(m2: f64, pair_index: usize, n_lo: f64, n_hi: f64, n_tol: f64) -> Result<f64> {
    if !(n_lo < n_hi) {
        return Err(Error::Bracket(format!("need n_lo < n_hi, got [{n_lo}, {n_hi}]")));
    }
    let pred = |n: f64| Ok(real_levels(m2, n, pair_index)? >= pair_index + 2);
    roots::bisect_predicate(pred, n_lo, n_hi, n_tol)
}

/// Whether levels `pair_index` and `pair_index + 1` are both real at `N`.
pub fn pair_is_real(m2: f64, n: f64, pair_index: usize) -> Result<bool> {
    Ok(real_levels(m2, n, pair_index)? >= pair_index + 2)
}

/// `Ai(z)` and `Ai'(z)` from the large-`|z|` series, `|arg z| < π`.
fn airy_asymptotic(z: Complex64) -> (Complex64, Complex64) {
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let mut u = 1.0;
    let mut sum_u = Complex64::new(1.0, 0.0);
    let mut sum_v = Complex64::new(1.0, 0.0);
    let mut zk = Complex64::new(1.0, 0.0);
    for k in 1..=6 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        zk *= -zeta.inv();
        sum_u += u * zk;
        sum_v += v * zk;
    }
    let pre = (-zeta).exp() / (2.0 * PI.sqrt());
    let quarter = z.powf(0.25);
    (pre / quarter * sum_u, -pre * quarter * sum_v)
}

/// Defects `d/dx|ψ|²` at the origin of both `N = 1` wedge solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryPatch {
    pub right: f64,
    pub left: f64,
    pub psi_right0: Complex64,
    pub psi_left0: Complex64,
}

/// Integrates both `N = 1` wedge solutions, normalised as
/// `Ai(∓x e^{±iπ/6} + E e^{±2iπ/3})`, and reports `d/dx|ψ|²` at `x = 0`.
pub fn airy_patch(e: f64) -> Result<AiryPatch> {
    if !e.is_finite() {
        return Err(Error::domain(format!("energy must be finite, got {e}")));
    }
    let spec = HamiltonianSpec { n: 1.0, m2: 0.0 };
    let cfg = ShootingConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        ..ShootingConfig::default()
    };
    let solve = |angle: f64, shift: Complex64| -> Result<(Complex64, Complex64)> {
        let ray = ContourRay::for_spec(&spec, Complex64::new(e, 0.0), angle, &cfg)?;
        // along either ray the Airy argument is r + shift, and du/dr = Ai'
        let (ai, dai) = airy_asymptotic(ray.outer_radius + shift);
        integrate_from(&spec, Complex64::new(e, 0.0), &ray, ai, dai)
    };
    let right = solve(FRAC_PI_6, Complex64::from_polar(e, -2.0 * PI / 3.0))?;
    let left = solve(-PI - FRAC_PI_6, Complex64::from_polar(e, 2.0 * PI / 3.0))?;
    let defect = |(psi, dpsi): (Complex64, Complex64)| 2.0 * (psi.conj() * dpsi).re;
    Ok(AiryPatch {
        right: defect(right),
        left: defect(left),
        psi_right0: right.0,
        psi_left0: left.0,
    })
}

/// `d/dx |Ai(x e^{-iπ/6} + E e^{-2iπ/3})|²` at `x = 0`, from the integrated
/// right-wedge solution at `N = 1`.
pub fn airy_defect(e: f64) -> Result<f64> {
    Ok(airy_patch(e)?.right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn harmonic() -> Shooter {
        Shooter::new(HamiltonianSpec::massless(2.0).unwrap()).unwrap()
    }

    #[test]
    fn domain_limits() {
        assert!(Shooter::new(HamiltonianSpec::massless(1.0).unwrap()).unwrap_err().is_domain());
        assert!(Shooter::new(HamiltonianSpec::massless(12.5).unwrap()).is_err());
        assert!(Shooter::new(HamiltonianSpec::new(1.0, 1.0).unwrap()).is_ok());
        assert!(Shooter::new(HamiltonianSpec::new(0.8, 1.0).unwrap()).is_err());
    }

    #[test]
    fn offset_outside_wedge_rejected() {
        let cfg = ShootingConfig {
            right_offset: 1.0,
            ..ShootingConfig::default()
        };
        let err = Shooter::with_config(HamiltonianSpec::massless(3.0).unwrap(), cfg).unwrap_err();
        assert!(matches!(err, Error::Contour(_)));
    }

    #[test]
    fn stokes_line_start_rejected() {
        // N = 2, E = 0 on the wedge boundary θ = π/4: e^{iθ}√Q is imaginary
        let spec = HamiltonianSpec::massless(2.0).unwrap();
        let ray = ContourRay {
            angle: std::f64::consts::FRAC_PI_4,
            outer_radius: 6.0,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
        };
        assert!(matches!(integrate_ray(&spec, c(0.0), &ray), Err(Error::Contour(_))));
    }

    #[test]
    fn harmonic_ground_state_wronskian() {
        let s = harmonic();
        let ground = s.mismatch(c(1.0)).unwrap();
        let off = s.mismatch(c(2.0)).unwrap();
        assert!(ground.normalized() < 1e-8, "{}", ground.normalized());
        assert!(off.normalized() > 1e-2);
        assert!(s.mismatch(c(3.0)).unwrap().normalized() < 1e-8);
        assert!(s.mismatch(Complex64::new(1.0, 0.5)).unwrap().normalized() > 1e-2);
    }

    #[test]
    fn wronskian_identity() {
        let m = harmonic().mismatch(Complex64::new(1.7, 0.3)).unwrap();
        let w = m.psi_left0 * m.dpsi_right0 - m.dpsi_left0 * m.psi_right0;
        assert_eq!(m.w, w);
    }

    #[test]
    fn fixed_step_agrees_with_adaptive() {
        let spec = HamiltonianSpec::massless(3.0).unwrap();
        let cfg = ShootingConfig::default();
        let e = c(4.0);
        let ray = ContourRay::for_spec(&spec, e, wedge_geometry(3.0).theta_right, &cfg).unwrap();
        let (a, da) = integrate_ray(&spec, e, &ray).unwrap();
        let (b, db) = integrate_ray_fixed(&spec, e, &ray, 20_000).unwrap();
        assert!((a - b).norm() < 1e-7 * a.norm());
        assert!((da - db).norm() < 1e-7 * da.norm());
    }

    #[test]
    fn threshold_radius_reaches_exponent() {
        let spec = HamiltonianSpec::massless(2.0).unwrap();
        // on the real axis the exponent is ∫_{1}^{R} √(r² - 1) dr
        let r = threshold_radius(&spec, c(1.0), 0.0, 25.0).unwrap();
        let exact = |r: f64| 0.5 * (r * (r * r - 1.0).sqrt() - (r + (r * r - 1.0).sqrt()).ln());
        assert!((exact(r) - 25.0).abs() < 0.1, "R = {r}, exponent {}", exact(r));
    }

    #[test]
    fn harmonic_levels() {
        let found = harmonic().find_real_eigenvalues(10.0, None).unwrap();
        let es: Vec<f64> = found.iter().map(|r| r.energy.re).collect();
        assert_eq!(es.len(), 5, "{es:?}");
        for (k, e) in es.iter().enumerate() {
            assert_abs_diff_eq!(*e, 2.0 * k as f64 + 1.0, epsilon = 1e-6);
        }
        assert!(found.iter().all(|r| r.is_real()));
    }

    #[test]
    fn refine_converges_to_ground_state() {
        let r = harmonic().refine_complex(Complex64::new(1.1, 0.1)).unwrap();
        assert!((r.energy - c(1.0)).norm() < 1e-8);
        assert!(r.is_real());
    }

    #[test]
    fn massive_linear_levels() {
        let s = Shooter::new(HamiltonianSpec::new(1.0, 1.0).unwrap()).unwrap();
        assert!(s.mismatch(c(1.25)).unwrap().normalized() < 1e-8);
        let levels = s.spectrum(2).unwrap();
        assert_abs_diff_eq!(levels[0].energy.re, 1.25, epsilon = 1e-6);
        assert_abs_diff_eq!(levels[1].energy.re, 3.25, epsilon = 1e-6);
    }

    #[test]
    fn spectrum_edge_cases() {
        assert!(harmonic().spectrum(0).unwrap_err().is_domain());
        let three = harmonic().spectrum(3).unwrap();
        assert_eq!(three.len(), 3);
        assert!(harmonic().find_real_eigenvalues(-1.0, None).is_err());
        assert!(harmonic().find_real_eigenvalues(0.5, None).unwrap().is_empty());
    }

    #[test]
    fn airy_series_matches_known_values() {
        let rel = |a: Complex64, b: f64| ((a.re - b) / b).abs();
        let (ai, dai) = airy_asymptotic(c(5.0));
        assert!(rel(ai, 1.083_444_281_360_743e-4) < 1e-6);
        assert!(rel(dai, -2.474_138_908_684_623e-4) < 1e-6);
        let (ai, dai) = airy_asymptotic(c(12.0));
        assert!(rel(ai, 1.393_184_688_875_363e-13) < 1e-10);
        assert!(rel(dai, -4.854_736_554_985_317e-13) < 1e-10);
    }

    #[test]
    fn airy_defect_is_constant() {
        for &e in &[0.0, 1.0] {
            let d = airy_defect(e).unwrap();
            assert_abs_diff_eq!(d, -1.0 / (2.0 * PI), epsilon = 1e-3);
        }
        let patch = airy_patch(1.0).unwrap();
        assert_abs_diff_eq!(patch.left, 1.0 / (2.0 * PI), epsilon = 1e-3);
        assert!((patch.psi_left0 - patch.psi_right0.conj()).norm() < 1e-6 * patch.psi_right0.norm());
    }
}
