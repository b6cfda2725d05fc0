//! Explicit Runge-Kutta integrators on fixed-size real state vectors.
//!
//! [`Dopri5`] is the Dormand-Prince 5(4) embedded pair with the usual PI-free
//! step controller; [`rk4_fixed`] is the classical fourth-order method used
//! as a fixed-step reference.

use crate::error::{Error, Result};

/// Adaptive step parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 200_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..D {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Outcome of a single trial step.
pub struct StepResult<const D: usize> {
    pub y: [f64; D],
    pub error: f64,
    pub dydt: [f64; D],
}

/// Dormand-Prince 5(4) with first-same-as-last reuse.
pub struct Dopri5 {
    pub tol: Tolerances,
    pub h_min: f64,
    pub h_max: f64,
}

impl Dopri5 {
    pub fn new(tol: Tolerances) -> Self {
        Self {
            tol,
            h_min: 1e-14,
            h_max: f64::INFINITY,
        }
    }

    pub fn with_max_step(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    /// One trial step from `(t, y)` with derivative `k1` already evaluated.
    pub fn trial_step<const D: usize, F>(
        &self,
        f: &mut F,
        t: f64,
        y: &[f64; D],
        k1: &[f64; D],
        h: f64,
    ) -> StepResult<D>
    where
        F: FnMut(f64, &[f64; D]) -> [f64; D],
    {
        let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
        let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &y_new);

        let mut err_sq = 0.0;
        for i in 0..D {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = self.tol.abs_tol + self.tol.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale).powi(2);
        }
        StepResult {
            y: y_new,
            error: (err_sq / D as f64).sqrt(),
            dydt: k7,
        }
    }

    /// Integrates from `t0` to `t1` (either direction), calling `observe`
    /// after every accepted step. `observe` returning `false` stops early.
    pub fn integrate<const D: usize, F, O>(
        &self,
        mut f: F,
        t0: f64,
        y0: [f64; D],
        t1: f64,
        h_init: f64,
        mut observe: O,
    ) -> Result<(f64, [f64; D])>
    where
        F: FnMut(f64, &[f64; D]) -> [f64; D],
        O: FnMut(f64, &[f64; D]) -> bool,
    {
        let span = t1 - t0;
        if span == 0.0 {
            return Ok((t0, y0));
        }
        let dir = span.signum();
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut h = h_init.abs().min(span.abs()).max(self.h_min) * dir;
        let mut steps = 0usize;
        loop {
            if steps >= self.tol.max_steps {
                return Err(Error::Integration {
                    r: t,
                    reason: format!("step limit {} reached", self.tol.max_steps),
                });
            }
            steps += 1;
            if h.abs() > self.h_max {
                h = self.h_max * dir;
            }
            let remaining = t1 - t;
            let last = (h.abs() >= remaining.abs()) || (remaining.abs() - h.abs()) < 1e-12 * span.abs();
            if last {
                h = remaining;
            }
            let step = self.trial_step(&mut f, t, &y, &k1, h);
            if !step.error.is_finite() {
                if h.abs() <= self.h_min {
                    return Err(Error::Integration {
                        r: t,
                        reason: "non-finite state".into(),
                    });
                }
                h *= 0.25;
                continue;
            }
            if step.error <= 1.0 {
                t = if last { t1 } else { t + h };
                y = step.y;
                k1 = step.dydt;
                if !observe(t, &y) || last {
                    return Ok((t, y));
                }
                let factor = if step.error == 0.0 {
                    5.0
                } else {
                    (0.9 * step.error.powf(-0.2)).clamp(0.2, 5.0)
                };
                h *= factor;
            } else {
                let factor = (0.9 * step.error.powf(-0.2)).clamp(0.1, 0.9);
                h *= factor;
                if h.abs() < self.h_min {
                    return Err(Error::Integration {
                        r: t,
                        reason: "step size underflow".into(),
                    });
                }
            }
        }
    }
}

/// Classical RK4 with `steps` equal steps from `t0` to `t1`.
pub fn rk4_fixed<const D: usize, F>(mut f: F, t0: f64, y0: [f64; D], t1: f64, steps: usize) -> [f64; D]
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
{
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        y = rk4_step(&mut f, t, &y, h);
    }
    y
}

pub fn rk4_step<const D: usize, F>(f: &mut F, t: f64, y: &[f64; D], h: f64) -> [f64; D]
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, h, &[(0.5, &k1)]));
    let k3 = f(t + 0.5 * h, &axpy(y, h, &[(0.5, &k2)]));
    let k4 = f(t + h, &axpy(y, h, &[(1.0, &k3)]));
    axpy(y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)])
}
