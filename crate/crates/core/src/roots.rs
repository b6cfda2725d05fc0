//! Scalar root finders shared by the solvers.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Brent's method on a sign-changing bracket `[a, b]`.
pub fn brent<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket(format!(
            "f({a}) = {fa:e} and f({b}) = {fb:e} have the same sign"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        best_re: b,
        best_im: 0.0,
        residual: fb.abs(),
    })
}

/// Secant iteration for an analytic complex function, started from two
/// seeds. Converges when the update falls below `xtol * max(1, |z|)`.
pub fn complex_secant<F>(
    mut f: F,
    z0: Complex64,
    z1: Complex64,
    xtol: f64,
    max_iter: usize,
) -> Result<Complex64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let mut a = z0;
    let mut b = z1;
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    let mut best = if fa.norm() < fb.norm() { (a, fa.norm()) } else { (b, fb.norm()) };
    for _ in 0..max_iter {
        if fb.norm() == 0.0 {
            return Ok(b);
        }
        let denom = fb - fa;
        if denom.norm() == 0.0 {
            break;
        }
        let step = fb * (b - a) / denom;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        a = b;
        fa = fb;
        b -= step;
        fb = f(b)?;
        if fb.norm() < best.1 {
            best = (b, fb.norm());
        }
        if step.norm() <= xtol * b.norm().max(1.0) {
            return Ok(b);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        best_re: best.0.re,
        best_im: best.0.im,
        residual: best.1,
    })
}

/// Bisection on a boolean predicate. `pred(hi)` must differ from `pred(lo)`;
/// returns the midpoint of the final bracket.
pub fn bisect_predicate<F>(mut pred: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    let p_lo = pred(lo)?;
    let p_hi = pred(hi)?;
    if p_lo == p_hi {
        return Err(Error::Bracket(format!(
            "predicate is {p_lo} at both {lo} and {hi}"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? == p_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
