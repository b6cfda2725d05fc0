//! Truncated matrix of `H` in unit-frequency harmonic-oscillator functions.
//!
//! The kinetic and `m²x²` parts come from ladder algebra. For the potential,
//! `ψ_m ψ_n` has parity `(-1)^{m+n}`, so on the real line
//!
//! ```text
//! ⟨m|(ix)^N|n⟩ = [c₊ + (-1)^{m+n} c₋] ∫₀^∞ x^N ψ_m ψ_n dx,   c± = (±i)^N
//! ```
//!
//! With `t = x²` the half-line integral is a polynomial in `t` against the
//! weight `t^α e^{-t}` (`α = (N-1)/2` for even, `N/2` for odd parity), which
//! generalised Gauss-Laguerre integrates exactly.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ix_pow, BranchedPoint, HamiltonianSpec};
use crate::semiclassics::gamma;
use crate::shooting::{sort_records, Classification, EigenvalueRecord, Method};

pub const TOL_REAL: f64 = 1e-8;
pub const CONVERGED_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisTruncation {
    pub k: usize,
    pub quadrature_order: usize,
    /// Oscillator frequency of the basis, eigenfunctions of `p² + ω²x²`.
    pub omega: f64,
}

impl BasisTruncation {
    /// Unit frequency and default quadrature order `K + ceil(N) + 8`.
    pub fn new(k: usize, exponent: f64) -> Self {
        Self {
            k,
            quadrature_order: k + exponent.ceil() as usize + 8,
            omega: 1.0,
        }
    }

    pub fn with_omega(self, omega: f64) -> Self {
        Self { omega, ..self }
    }
}

/// Basis frequency used by [`matrix_spectrum`]: 1 up to `N = 3`, then
/// `1 + 4(N - 3)`, narrowing the basis as the wedges close on the real axis.
pub fn default_omega(exponent: f64) -> f64 {
    1.0 + 4.0 * (exponent - 3.0).max(0.0)
}

/// Dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexDenseMatrix {
    pub dim: usize,
    pub entries: Vec<Complex64>,
}

impl ComplexDenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.entries[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |M_ij - M_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..i {
                d = d.max((self.get(i, j) - self.get(j, i)).norm());
            }
        }
        d
    }

    /// `max |M - Π conj(M) Π|` with `Π = diag((-1)^i)`.
    pub fn pt_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                d = d.max((self.get(i, j) - sign * self.get(i, j).conj()).norm());
            }
        }
        d
    }

    /// Leading `k × k` block.
    pub fn leading(&self, k: usize) -> Self {
        Self::from_fn(k, |i, j| self.get(i, j))
    }

    fn to_faer(&self) -> Mat<Complex64> {
        Mat::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }
}

/// Nodes and exponentially rescaled weights `w_i e^{t_i}` of the
/// `order`-point rule for `∫₀^∞ t^α e^{-t} f(t) dt`.
#[derive(Debug, Clone)]
pub struct LaguerreRule {
    pub nodes: Vec<f64>,
    pub scaled_weights: Vec<f64>,
}

impl LaguerreRule {
    pub fn new(order: usize, alpha: f64) -> Result<Self> {
        if order == 0 || !(alpha > -1.0) {
            return Err(Error::domain(format!(
                "Laguerre rule needs order >= 1 and alpha > -1, got {order}, {alpha}"
            )));
        }
        let diag = |k: usize| 2.0 * k as f64 + alpha + 1.0;
        let off = |k: usize| (k as f64 * (k as f64 + alpha)).sqrt();
        let jacobi = Mat::<f64>::from_fn(order, order, |i, j| {
            if i == j {
                diag(i)
            } else if i == j + 1 {
                off(i)
            } else if j == i + 1 {
                off(j)
            } else {
                0.0
            }
        });
        let eig = jacobi
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::Eigen(format!("Jacobi matrix: {e:?}")))?;

        let log_norm0 = 0.5 * gamma(alpha + 1.0).ln();
        let mut nodes = Vec::with_capacity(order);
        let mut scaled_weights = Vec::with_capacity(order);
        for mut t in eig {
            // Newton polish on the degree-`order` orthogonal polynomial
            for _ in 0..3 {
                let (mut p_prev, mut p) = (0.0, 1.0);
                let (mut d_prev, mut d) = (0.0, 0.0);
                for k in 0..order {
                    let b_next = off(k + 1);
                    let p_next = ((t - diag(k)) * p - off(k) * p_prev) / b_next;
                    let d_next = ((t - diag(k)) * d + p - off(k) * d_prev) / b_next;
                    p_prev = p;
                    p = p_next;
                    d_prev = d;
                    d = d_next;
                    let scale = p.abs().max(p_prev.abs());
                    if scale > 1e100 {
                        p /= scale;
                        p_prev /= scale;
                        d /= scale;
                        d_prev /= scale;
                    }
                }
                if d == 0.0 {
                    break;
                }
                let dt = p / d;
                t -= dt;
                if dt.abs() <= 1e-15 * t.abs() {
                    break;
                }
            }
            // Christoffel weight via orthonormal Laguerre functions
            let phi0 = (0.5 * alpha * t.ln() - 0.5 * t - log_norm0).exp();
            let (mut f_prev, mut f) = (0.0, phi0);
            let mut sum = f * f;
            for k in 0..order - 1 {
                let f_next = ((t - diag(k)) * f - off(k) * f_prev) / off(k + 1);
                f_prev = f;
                f = f_next;
                sum += f * f;
            }
            nodes.push(t);
            scaled_weights.push(t.powf(alpha) / sum);
        }
        Ok(Self { nodes, scaled_weights })
    }
}

/// Normalised Hermite functions `ψ_0..ψ_{k-1}` at `x`.
pub fn hermite_functions(k: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; k];
    if k == 0 {
        return out;
    }
    out[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    if k > 1 {
        out[1] = std::f64::consts::SQRT_2 * x * out[0];
    }
    for n in 1..k.saturating_sub(1) {
        let nf = n as f64;
        out[n + 1] = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
    }
    out
}

/// Half-line moments `∫₀^∞ x^N ψ_m ψ_n dx` for `m, n < k`.
pub fn half_line_moments(k: usize, exponent: f64, order: usize) -> Result<Vec<f64>> {
    let even = LaguerreRule::new(order, 0.5 * (exponent - 1.0))?;
    let odd = LaguerreRule::new(order, 0.5 * exponent)?;
    let mut out = vec![0.0; k * k];
    for (rule, parity) in [(&even, 0usize), (&odd, 1usize)] {
        for (&t, &w) in rule.nodes.iter().zip(&rule.scaled_weights) {
            let x = t.sqrt();
            let psi = hermite_functions(k, x);
            let w = if parity == 1 { 0.5 * w / x } else { 0.5 * w };
            for m in 0..k {
                let wm = w * psi[m];
                let start = if (m % 2) == parity { 0 } else { 1 };
                for n in (start..k).step_by(2) {
                    out[m * k + n] += wm * psi[n];
                }
            }
        }
    }
    Ok(out)
}

fn check_basis_domain(spec: &HamiltonianSpec) -> Result<()> {
    if spec.n > 1.0 && spec.n < 4.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "real-axis basis requires 1 < N < 4, got N = {}",
            spec.n
        )))
    }
}

/// `⟨m|p² + m²x²|n⟩` from ladder algebra.
fn kinetic_and_mass(spec: &HamiltonianSpec, k: usize, omega: f64) -> ComplexDenseMatrix {
    let mut h = ComplexDenseMatrix::zeros(k);
    let mass = spec.m2 / omega;
    for n in 0..k {
        let nf = n as f64;
        h.set(n, n, Complex64::new((nf + 0.5) * (omega + mass), 0.0));
        if n + 2 < k {
            let v = 0.5 * ((nf + 1.0) * (nf + 2.0)).sqrt() * (mass - omega);
            h.set(n, n + 2, Complex64::new(v, 0.0));
            h.set(n + 2, n, Complex64::new(v, 0.0));
        }
    }
    h
}

/// `⟨m|(ix)^N|n⟩ = [c₊ + (-1)^{m+n} c₋] ∫₀^∞ x^N ψ_m ψ_n`.
pub fn potential_matrix(exponent: f64, trunc: BasisTruncation) -> Result<ComplexDenseMatrix> {
    let k = trunc.k;
    let moments = half_line_moments(k, exponent, trunc.quadrature_order)?;
    let c_plus = ix_pow(BranchedPoint::new(1.0, 0.0), exponent);
    let c_minus = ix_pow(BranchedPoint::new(1.0, -std::f64::consts::PI), exponent);
    let even = c_plus + c_minus;
    let odd = c_plus - c_minus;
    // the parity factors are exactly real / imaginary
    let scale = trunc.omega.powf(-0.5 * exponent);
    let even = Complex64::new(scale * even.re, 0.0);
    let odd = Complex64::new(0.0, scale * odd.im);
    Ok(ComplexDenseMatrix::from_fn(k, |m, n| {
        let phase = if (m + n) % 2 == 0 { even } else { odd };
        phase * moments[m * k + n]
    }))
}

pub fn ho_matrix(spec: &HamiltonianSpec, trunc: BasisTruncation) -> Result<ComplexDenseMatrix> {
    check_basis_domain(spec)?;
    if trunc.k < 2 {
        return Err(Error::domain(format!("basis size must be >= 2, got {}", trunc.k)));
    }
    if !(trunc.omega > 0.0 && trunc.omega.is_finite()) {
        return Err(Error::domain(format!("basis frequency must be > 0, got {}", trunc.omega)));
    }
    let mut h = kinetic_and_mass(spec, trunc.k, trunc.omega);
    let v = potential_matrix(spec.n, trunc)?;
    for (a, b) in h.entries.iter_mut().zip(&v.entries) {
        *a -= b;
    }
    Ok(h)
}

/// Full eigenvalue set with per-pair residual `‖Mv - λv‖ / ‖M‖_F`, sorted by `Re λ`.
pub fn diagonalize(m: &ComplexDenseMatrix) -> Result<Vec<(Complex64, f64)>> {
    if m.dim < 2 {
        return Err(Error::domain(format!("matrix dimension must be >= 2, got {}", m.dim)));
    }
    let a = m.to_faer();
    let evd = a.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let norm = m.frobenius().max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(m.dim);
    for j in 0..m.dim {
        let lambda: Complex64 = s[j];
        let vnorm = (0..m.dim).map(|i| u[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        let mut r2 = 0.0;
        for i in 0..m.dim {
            let mut acc = -lambda * u[(i, j)];
            for k in 0..m.dim {
                acc += m.get(i, k) * u[(k, j)];
            }
            r2 += acc.norm_sqr();
        }
        let residual = r2.sqrt() / (vnorm * norm);
        if !(residual <= 1e-10) {
            return Err(Error::Eigen(format!(
                "eigenpair {j} (λ = {lambda}) has residual {residual:e}"
            )));
        }
        out.push((lambda, residual));
    }
    out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    Ok(out)
}

/// The `count` eigenvalues of smallest modulus of the `K`-dimensional
/// truncation, sorted by `Re λ`, each with
/// the drift `|λ(K) - λ(K/2)|` against the nearest half-size eigenvalue.
pub fn matrix_spectrum(spec: &HamiltonianSpec, k: usize, count: usize) -> Result<Vec<EigenvalueRecord>> {
    check_basis_domain(spec)?;
    if k < 4 {
        return Err(Error::domain(format!("basis size must be >= 4, got {k}")));
    }
    let full = ho_matrix(spec, BasisTruncation::new(k, spec.n).with_omega(default_omega(spec.n)))?;
    let mut big = diagonalize(&full)?;
    let small = diagonalize(&full.leading(k / 2))?;
    // spurious eigenvalues of the truncation sit at large |λ|
    big.sort_by(|a, b| a.0.norm().total_cmp(&b.0.norm()));
    let mut records: Vec<EigenvalueRecord> = big
        .iter()
        .take(count)
        .map(|&(lambda, residual)| {
            let drift = small
                .iter()
                .map(|(mu, _)| (lambda - mu).norm())
                .fold(f64::INFINITY, f64::min);
            EigenvalueRecord {
                n: 0,
                energy: lambda,
                method: Method::Matrix,
                residual,
                classification: Some(Classification::of(lambda, TOL_REAL)),
                convergence: Some(drift),
            }
        })
        .collect();
    sort_records(&mut records);
    Ok(records)
}

impl EigenvalueRecord {
    /// Matrix records: drift estimate below [`CONVERGED_TOL`].
    pub fn is_converged(&self) -> bool {
        self.convergence.is_some_and(|d| d < CONVERGED_TOL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `⟨m|x^p|n⟩` by repeated application of `x = (a + a†)/√2`.
    fn ladder_x_power(p: usize, k: usize) -> Vec<f64> {
        let big = k + p + 2;
        let apply_x = |v: &[f64]| {
            let mut out = vec![0.0; big];
            for n in 0..big {
                if v[n] == 0.0 {
                    continue;
                }
                if n + 1 < big {
                    out[n + 1] += v[n] * ((n + 1) as f64).sqrt() / 2f64.sqrt();
                }
                if n > 0 {
                    out[n - 1] += v[n] * (n as f64).sqrt() / 2f64.sqrt();
                }
            }
            out
        };
        let mut m = vec![0.0; k * k];
        for n in 0..k {
            let mut v = vec![0.0; big];
            v[n] = 1.0;
            for _ in 0..p {
                v = apply_x(&v);
            }
            for row in 0..k {
                m[row * k + n] = v[row];
            }
        }
        m
    }

    #[test]
    fn laguerre_rule_integrates_moments() {
        let alpha: f64 = 0.75;
        let rule = LaguerreRule::new(20, alpha).unwrap();
        for p in 0..10 {
            let got: f64 = rule
                .nodes
                .iter()
                .zip(&rule.scaled_weights)
                .map(|(t, w)| w * (-t).exp() * t.powi(p))
                .sum();
            let exact = gamma(alpha + 1.0 + p as f64);
            assert!((got - exact).abs() < 1e-11 * exact, "p={p}: {got} vs {exact}");
        }
    }

    #[test]
    fn hermite_functions_orthonormal() {
        let k = 12;
        let rule = LaguerreRule::new(40, -0.5).unwrap();
        // ∫ψ_m ψ_n over the line = 2 × half-line for even m+n
        for m in 0..k {
            for n in (m % 2..k).step_by(2) {
                let s: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.scaled_weights)
                    .map(|(&t, &w)| {
                        let psi = hermite_functions(k, t.sqrt());
                        w * psi[m] * psi[n]
                    })
                    .sum();
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-12, "({m},{n}) = {s}");
            }
        }
    }

    #[test]
    fn harmonic_matrix_is_diagonal() {
        let spec = HamiltonianSpec::massless(2.0).unwrap();
        let h = ho_matrix(&spec, BasisTruncation::new(16, 2.0)).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let expect = if i == j { 2.0 * i as f64 + 1.0 } else { 0.0 };
                assert!((h.get(i, j) - c(expect, 0.0)).norm() < 1e-10, "({i},{j})");
            }
        }
        let eig = diagonalize(&h).unwrap();
        for (i, (l, _)) in eig.iter().enumerate() {
            assert!((l - c(2.0 * i as f64 + 1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn cubic_element() {
        let v = potential_matrix(3.0, BasisTruncation::new(4, 3.0)).unwrap();
        let expect = c(0.0, -3.0 / (2.0 * 2f64.sqrt()));
        assert!((v.get(0, 1) - expect).norm() < 1e-12, "{}", v.get(0, 1));
    }

    #[test]
    fn integer_exponents_match_ladder_algebra() {
        let k = 24;
        for p in [2usize, 3, 4] {
            let v = potential_matrix(p as f64, BasisTruncation::new(k, p as f64)).unwrap();
            let x = ladder_x_power(p, k);
            let ip = c(0.0, 1.0).powu(p as u32);
            for i in 0..k {
                for j in 0..k {
                    let d = (v.get(i, j) - ip * x[i * k + j]).norm();
                    assert!(d < 1e-10, "p={p} ({i},{j}) off by {d}");
                }
            }
        }
    }

    #[test]
    fn quadrature_order_drift() {
        let base = BasisTruncation::new(40, 2.5);
        let a = potential_matrix(2.5, base).unwrap();
        let b = potential_matrix(
            2.5,
            BasisTruncation {
                quadrature_order: base.quadrature_order + 30,
                ..base
            },
        )
        .unwrap();
        let drift = a
            .entries
            .iter()
            .zip(&b.entries)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(drift < 1e-12, "drift {drift:e}");
    }

    #[test]
    fn symmetric_and_pt_structured() {
        let spec = HamiltonianSpec::new(2.7, 0.3).unwrap();
        let h = ho_matrix(&spec, BasisTruncation::new(32, 2.7)).unwrap();
        assert!(h.symmetry_defect() < 1e-12);
        assert!(h.pt_defect() < 1e-12);
    }

    #[test]
    fn domain_checks() {
        let bad = HamiltonianSpec::massless(4.5).unwrap();
        assert!(ho_matrix(&bad, BasisTruncation::new(8, 4.5)).unwrap_err().is_domain());
        let one = HamiltonianSpec::massless(1.0).unwrap();
        assert!(matrix_spectrum(&one, 16, 3).is_err());
        assert!(diagonalize(&ComplexDenseMatrix::zeros(1)).is_err());
    }

    #[test]
    fn small_diagonalizations() {
        let d = ComplexDenseMatrix::from_fn(3, |i, j| if i == j { c(3.0 - i as f64, 0.0) } else { c(0.0, 0.0) });
        let eig = diagonalize(&d).unwrap();
        for (i, (l, r)) in eig.iter().enumerate() {
            assert!((l - c(i as f64 + 1.0, 0.0)).norm() < 1e-14);
            assert!(*r < 1e-14);
        }
        let swap = ComplexDenseMatrix::from_fn(2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let eig = diagonalize(&swap).unwrap();
        assert!((eig[0].0 - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((eig[1].0 - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn pt_random_matrix_conjugate_closed() {
        // deterministic pseudo-random PT-structured matrix
        let mut state = 0x2545_f491_4f6c_dd1d_u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let dim = 12;
        let mut m = ComplexDenseMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                let v = next();
                m.set(i, j, if (i + j) % 2 == 0 { c(v, 0.0) } else { c(0.0, v) });
            }
        }
        assert!(m.pt_defect() == 0.0);
        let eig = diagonalize(&m).unwrap();
        for (l, _) in &eig {
            let partner = eig.iter().map(|(mu, _)| (mu - l.conj()).norm()).fold(f64::INFINITY, f64::min);
            assert!(partner < 1e-10, "{l} has no conjugate partner");
        }
    }

    #[test]
    fn harmonic_spectrum_records() {
        let spec = HamiltonianSpec::massless(2.0).unwrap();
        let recs = matrix_spectrum(&spec, 32, 5).unwrap();
        for (i, r) in recs.iter().enumerate() {
            assert_abs_diff_eq!(r.energy.re, 2.0 * i as f64 + 1.0, epsilon = 1e-8);
            assert!(r.is_real() && r.is_converged());
        }
    }

    #[test]
    fn massive_ladder_terms() {
        // m² = 1, N = 2 gives p² + x² + x² = p² + 2x², levels (2n+1)√2
        let spec = HamiltonianSpec::new(2.0, 1.0).unwrap();
        let recs = matrix_spectrum(&spec, 64, 4).unwrap();
        for (i, r) in recs.iter().enumerate() {
            assert_abs_diff_eq!(r.energy.re, (2.0 * i as f64 + 1.0) * 2f64.sqrt(), epsilon = 1e-8);
        }
    }
}
