//! Complex classical motion for `H = p² - (ix)^N` at real energy.
//!
//! Hamilton's equations `ẋ = 2p`, `ṗ = iN (ix)^{N-1}` are integrated with
//! `p² - (ix)^N = E` as a monitored invariant; with `v = ẋ` this is
//! `±dx [E + (ix)^N]^{-1/2} = 2 dt`. Turning points are ordinary points of
//! this system, so no square-root branch switching is needed there. The
//! argument of `x` is unwound step by step so `(ix)^{N-1}` follows the
//! trajectory across sheets of the Riemann surface.

use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{turning_points, BranchedPoint, HamiltonianSpec};
use crate::ode::{Dopri5, Tolerances};
use crate::semiclassics::gamma;

/// Relative distance below which a return to the start closes the orbit.
const CLOSE_TOL: f64 = 1e-6;

/// Particle state with unwound position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryState {
    pub x: BranchedPoint,
    pub t: f64,
    /// Sign relating `v` to the principal root, `v = 2·sign·√(E + (ix)^N)`.
    pub branch_sign: i8,
    pub v: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub t: f64,
    pub x: Complex64,
    pub theta: f64,
    pub v: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    ClosedOrbit,
    Escaped,
    StepLimit,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::ClosedOrbit => "closed-orbit",
            Outcome::Escaped => "escaped",
            Outcome::StepLimit => "step-limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryResult {
    pub path: Vec<PathPoint>,
    pub outcome: Outcome,
    pub period: Option<f64>,
    pub escape_angle: Option<f64>,
    /// `|x(T) - x₀|` at the detected return.
    pub return_distance: Option<f64>,
    /// `max |(v/2)² - E - (ix)^N|` along the path.
    pub energy_defect: f64,
    pub final_state: TrajectoryState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryOptions {
    /// Largest step; also the output resolution of `path`.
    pub dt: f64,
    pub t_max: f64,
    /// Stop once `|x|` exceeds this.
    pub escape_radius: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl TrajectoryOptions {
    /// Defaults for energy `e`: step `T/2000` for `N ≥ 2`, else
    /// `1e-3 E^{(2-N)/(2N)}`; escape radius `10³ E^{1/N}`.
    pub fn for_energy(exponent: f64, e: f64) -> Self {
        let dt = if exponent >= 2.0 {
            classical_period(e, exponent).map(|t| t / 2000.0).unwrap_or(1e-3)
        } else {
            1e-3 * e.powf((2.0 - exponent) / (2.0 * exponent))
        };
        let t_max = if exponent >= 2.0 {
            3.0 * classical_period(e, exponent).unwrap_or(10.0)
        } else {
            1e4
        };
        Self {
            dt,
            t_max,
            escape_radius: 1e3 * e.powf(1.0 / exponent),
            rel_tol: 1e-12,
            abs_tol: 1e-14,
        }
    }
}

/// `a + wrap(b - a)`, the representative of angle `b` nearest to `a`.
fn nearest_angle(a: f64, b: f64) -> f64 {
    let mut d = (b - a) % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d < -PI {
        d += 2.0 * PI;
    }
    a + d
}

fn ix_power_near(x: Complex64, theta_ref: f64, power: f64) -> Complex64 {
    let r = x.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let theta = nearest_angle(theta_ref, x.arg());
    Complex64::from_polar(r.powf(power), power * (theta + 0.5 * PI))
}

fn split(y: &[f64; 4]) -> (Complex64, Complex64) {
    (Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]))
}

pub fn integrate_trajectory(
    spec: &HamiltonianSpec,
    e: f64,
    x0: BranchedPoint,
    opts: &TrajectoryOptions,
) -> Result<TrajectoryResult> {
    if spec.m2 != 0.0 {
        return Err(Error::domain("classical dynamics is implemented for m2 = 0 only"));
    }
    if !(e > 0.0) {
        return Err(Error::domain(format!("energy must be > 0, got {e}")));
    }
    if !(opts.dt > 0.0 && opts.t_max > 0.0) {
        return Err(Error::domain("dt and t_max must be > 0"));
    }
    let n = spec.n;
    let theta_ref = Cell::new(x0.theta);
    let rhs = |_t: f64, y: &[f64; 4]| {
        let (x, p) = split(y);
        let force = Complex64::new(0.0, n) * ix_power_near(x, theta_ref.get(), n - 1.0);
        [2.0 * p.re, 2.0 * p.im, force.re, force.im]
    };
    let mut rhs = rhs;

    let x_start = x0.to_complex();
    let start_potential = crate::model::ix_pow(x0, n);
    // start at rest on a turning point, otherwise on the principal root
    let p0 = {
        let p_sq = e + start_potential;
        if p_sq.norm() < 1e-12 * e {
            Complex64::new(0.0, 0.0)
        } else {
            p_sq.sqrt()
        }
    };
    let energy_defect_at = |x: Complex64, theta: f64, p: Complex64| {
        (p * p - e - ix_power_near(x, theta, n)).norm()
    };

    let solver = Dopri5::new(Tolerances {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_steps: usize::MAX,
    });
    let mut t = 0.0;
    let mut y = [x_start.re, x_start.im, p0.re, p0.im];
    let mut k1 = rhs(t, &y);
    let mut h = opts.dt;
    let mut path = vec![PathPoint {
        t,
        x: x_start,
        theta: x0.theta,
        v: 2.0 * p0,
    }];
    let mut max_defect = energy_defect_at(x_start, x0.theta, p0);
    let scale = x_start.norm().max(e.powf(1.0 / n));
    let mut left_start = false;
    let approach = |y: &[f64; 4]| {
        let (x, p) = split(y);
        ((x - x_start).conj() * p).re
    };
    let mut outcome = Outcome::StepLimit;
    let mut period = None;
    let mut return_distance = None;
    let mut escape_angle = None;

    while t < opts.t_max {
        let step_h = h.min(opts.dt).min(opts.t_max - t);
        let trial = solver.trial_step(&mut rhs, t, &y, &k1, step_h);
        if !(trial.error <= 1.0) {
            h = step_h * (0.9 * trial.error.powf(-0.2)).clamp(0.1, 0.9);
            if !h.is_finite() || h < 1e-14 {
                return Err(Error::Trajectory(format!("step size underflow at t = {t}")));
            }
            continue;
        }
        let (x_new, p_new) = split(&trial.y);
        let theta_new = nearest_angle(theta_ref.get(), x_new.arg());

        // closest return to the start after having left its neighbourhood
        if left_start && approach(&y) < 0.0 && approach(&trial.y) >= 0.0 {
            let (tau, y_hit) = refine_event(&solver, &mut rhs, t, &y, &k1, step_h, approach);
            let (x_hit, p_hit) = split(&y_hit);
            if (x_hit - x_start).norm() <= CLOSE_TOL * scale {
                let theta_hit = nearest_angle(theta_ref.get(), x_hit.arg());
                max_defect = max_defect.max(energy_defect_at(x_hit, theta_hit, p_hit));
                t += tau;
                theta_ref.set(theta_hit);
                path.push(PathPoint { t, x: x_hit, theta: theta_hit, v: 2.0 * p_hit });
                y = y_hit;
                outcome = Outcome::ClosedOrbit;
                period = Some(t);
                return_distance = Some((x_hit - x_start).norm());
                break;
            }
        }

        t += step_h;
        y = trial.y;
        k1 = trial.dydt;
        theta_ref.set(theta_new);
        max_defect = max_defect.max(energy_defect_at(x_new, theta_new, p_new));
        path.push(PathPoint { t, x: x_new, theta: theta_new, v: 2.0 * p_new });
        if (x_new - x_start).norm() > 0.25 * scale {
            left_start = true;
        }
        if x_new.norm() >= opts.escape_radius {
            outcome = Outcome::Escaped;
            escape_angle = Some(theta_new);
            break;
        }
        h = step_h
            * if trial.error == 0.0 {
                5.0
            } else {
                (0.9 * trial.error.powf(-0.2)).clamp(0.2, 5.0)
            };
    }

    let (x_end, p_end) = split(&y);
    let theta_end = theta_ref.get();
    let principal = (e + ix_power_near(x_end, theta_end, n)).sqrt();
    let branch_sign = if (p_end - principal).norm() <= (p_end + principal).norm() { 1 } else { -1 };
    Ok(TrajectoryResult {
        path,
        outcome,
        period,
        escape_angle,
        return_distance,
        energy_defect: max_defect,
        final_state: TrajectoryState {
            x: BranchedPoint::new(x_end.norm(), theta_end),
            t,
            branch_sign,
            v: 2.0 * p_end,
        },
    })
}

/// Finds `τ ∈ (0, h]` where `g` changes sign by bisection on sub-steps.
fn refine_event<F, G>(
    solver: &Dopri5,
    rhs: &mut F,
    t: f64,
    y: &[f64; 4],
    k1: &[f64; 4],
    h: f64,
    g: G,
) -> (f64, [f64; 4])
where
    F: FnMut(f64, &[f64; 4]) -> [f64; 4],
    G: Fn(&[f64; 4]) -> f64,
{
    let (mut lo, mut hi) = (0.0, h);
    let mut y_hi = solver.trial_step(rhs, t, y, k1, h).y;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let y_mid = solver.trial_step(rhs, t, y, k1, mid).y;
        if g(&y_mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
            y_hi = y_mid;
        }
        if hi - lo <= 1e-15 * (t + h).max(1.0) {
            break;
        }
    }
    (hi, y_hi)
}

/// Closed-form period `2 E^{(2-N)/(2N)} cos[(N-2)π/(2N)] Γ(1+1/N)√π / Γ(1/2+1/N)`.
pub fn classical_period(e: f64, exponent: f64) -> Result<f64> {
    if !(exponent >= 2.0) {
        return Err(Error::domain(format!(
            "the orbit is closed only for N >= 2 (infinite period below), got N = {exponent}"
        )));
    }
    if !(e > 0.0) {
        return Err(Error::domain(format!("energy must be > 0, got {e}")));
    }
    let inv = 1.0 / exponent;
    Ok(2.0
        * e.powf((2.0 - exponent) / (2.0 * exponent))
        * ((exponent - 2.0) * PI / (2.0 * exponent)).cos()
        * gamma(1.0 + inv)
        * PI.sqrt()
        / gamma(0.5 + inv))
}

fn start_at_plus(e: f64, exponent: f64) -> Result<BranchedPoint> {
    let tp = turning_points(e, exponent)?;
    Ok(BranchedPoint::new(tp.x_plus.norm(), tp.x_plus.arg()))
}

/// Trajectory from `x_+` with default options.
pub fn trajectory_from_plus(spec: &HamiltonianSpec, e: f64) -> Result<TrajectoryResult> {
    let x0 = start_at_plus(e, spec.n)?;
    integrate_trajectory(spec, e, x0, &TrajectoryOptions::for_energy(spec.n, e))
}

/// First-return time of the orbit started at rest at `x_+`.
pub fn measure_period(spec: &HamiltonianSpec, e: f64) -> Result<f64> {
    if !(spec.n >= 2.0) {
        return Err(Error::domain(format!("measure_period requires N >= 2, got {}", spec.n)));
    }
    let result = trajectory_from_plus(spec, e)?;
    result
        .period
        .ok_or_else(|| Error::Trajectory(format!("orbit did not close (outcome {:?})", result.outcome)))
}

/// Asymptotic unwound direction `Nπ/(2-N)` of the escaping spiral.
pub fn spiral_escape_angle(exponent: f64) -> Result<f64> {
    if !(exponent > 0.0 && exponent < 2.0) {
        return Err(Error::domain(format!(
            "the trajectory escapes only for 0 < N < 2, got N = {exponent}"
        )));
    }
    Ok(exponent * PI / (2.0 - exponent))
}

/// Unwound argument at which the trajectory from `x_+` crosses `escape_radius`.
pub fn measure_escape_angle(spec: &HamiltonianSpec, e: f64, escape_radius: Option<f64>) -> Result<f64> {
    if !(spec.n > 1.0 && spec.n < 2.0) {
        return Err(Error::domain(format!("measure_escape_angle requires 1 < N < 2, got {}", spec.n)));
    }
    let x0 = start_at_plus(e, spec.n)?;
    let mut opts = TrajectoryOptions::for_energy(spec.n, e);
    if let Some(r) = escape_radius {
        opts.escape_radius = r;
    }
    // coarser output step far out; accuracy is set by the tolerances
    opts.dt = opts.dt.max(1e-2);
    let result = integrate_trajectory(spec, e, x0, &opts)?;
    result
        .escape_angle
        .ok_or_else(|| Error::Trajectory(format!("no escape before t = {} ({:?})", opts.t_max, result.outcome)))
}

/// Unwound arguments of successive local minima of `|v|` along a path,
/// i.e. the passes close to zeros of `E + (ix)^N`.
pub fn closest_approaches(path: &[PathPoint]) -> Vec<f64> {
    path.windows(3)
        .filter(|w| w[1].v.norm() < w[0].v.norm() && w[1].v.norm() <= w[2].v.norm())
        .map(|w| w[1].theta)
        .collect()
}
