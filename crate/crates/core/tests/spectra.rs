use approx::assert_abs_diff_eq;
use pt_spectra::basis::matrix_spectrum;
use pt_spectra::classical::{measure_escape_angle, measure_period, spiral_escape_angle};
use pt_spectra::semiclassics::wkb_energy;
use pt_spectra::shooting::{find_merge_n, refine_complex, spectrum};
use pt_spectra::{Classification, Complex64, HamiltonianSpec};

fn massless(n: f64) -> HamiltonianSpec {
    HamiltonianSpec::massless(n).unwrap()
}

#[test]
fn complex_pair_from_matrix_seed() {
    let spec = massless(1.8);
    let seeds = matrix_spectrum(&spec, 96, 20).unwrap();
    let seed = seeds
        .iter()
        .find(|r| r.classification == Some(Classification::ComplexPair))
        .expect("a complex pair among the low levels at N = 1.8");
    let polished = refine_complex(&spec, seed.energy).unwrap();
    assert!((polished.energy - seed.energy).norm() < 1e-6);
    assert!(polished.residual < 1e-8);
    let partner = refine_complex(&spec, seed.energy.conj()).unwrap();
    assert!((partner.energy - polished.energy.conj()).norm() < 1e-7);
}

#[test]
fn merges_start_at_the_top() {
    let first = find_merge_n(0.0, 1, 1.3, 1.6, 1e-4).unwrap();
    let third = find_merge_n(0.0, 3, 1.5, 2.0, 1e-4).unwrap();
    assert!(third > first);
    assert!(third < 2.0);
}

#[test]
fn levels_rise_with_n_above_the_harmonic_point() {
    let mut prev = spectrum(&massless(2.0), 4).unwrap();
    for n in [2.5, 3.0, 3.5, 4.0] {
        let cur = spectrum(&massless(n), 4).unwrap();
        for (a, b) in prev.iter().zip(&cur).skip(1) {
            assert!(b.energy.re > a.energy.re, "N = {n}");
        }
        prev = cur;
    }
}

#[test]
fn wkb_improves_with_level() {
    let exact: Vec<f64> = spectrum(&massless(3.0), 6).unwrap().iter().map(|r| r.energy.re).collect();
    let rel: Vec<f64> = exact
        .iter()
        .enumerate()
        .map(|(n, e)| (wkb_energy(n as u32, 3.0).unwrap() - e).abs() / e)
        .collect();
    for w in rel.windows(2) {
        assert!(w[1] < w[0], "{rel:?}");
    }
}

#[test]
fn truncation_converges() {
    let spec = massless(3.0);
    let reference = spectrum(&spec, 3).unwrap();
    let err = |k: usize| {
        let m = matrix_spectrum(&spec, k, 3).unwrap();
        (0..3).map(|i| (m[i].energy - reference[i].energy).norm()).fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(24), err(64));
    assert!(fine < coarse, "{coarse} {fine}");
    assert!(fine < 1e-7);
}

#[test]
fn massive_spectrum_is_real_at_linear_point() {
    let spec = HamiltonianSpec::new(1.0, 1.0).unwrap();
    for (n, r) in spectrum(&spec, 5).unwrap().iter().enumerate() {
        assert_eq!(r.classification, Some(Classification::Real));
        assert_abs_diff_eq!(r.energy.re, 2.0 * n as f64 + 1.25, epsilon = 1e-8);
    }
}

#[test]
fn period_scales_with_energy() {
    // T(E) ∝ E^{1/N - 1/2}
    let n = 3.0;
    let t1 = measure_period(&massless(n), 1.0).unwrap();
    let t8 = measure_period(&massless(n), 8.0).unwrap();
    assert_abs_diff_eq!(t8 / t1, 8f64.powf(1.0 / n - 0.5), epsilon = 1e-6);
}

#[test]
fn escape_direction_tracks_power_law() {
    // x^{(2-N)/2} grows linearly in t, so arg x tends to Nπ / (2(2 - N))
    for n in [1.2, 1.5] {
        let measured = measure_escape_angle(&massless(n), 1.0, Some(1e8)).unwrap();
        let limit = n * std::f64::consts::PI / (2.0 * (2.0 - n));
        assert!((measured - limit).abs() < 0.05 * limit, "N = {n}: {measured} vs {limit}");
        assert!(spiral_escape_angle(n).unwrap() > measured);
    }
}

#[test]
fn energies_are_conjugation_closed() {
    let spec = massless(1.6);
    let all: Vec<Complex64> = matrix_spectrum(&spec, 96, 14).unwrap().iter().map(|r| r.energy).collect();
    for e in &all[..10] {
        assert!(all.iter().any(|f| (f - e.conj()).norm() < 1e-6 * e.norm()), "{e}");
    }
}
