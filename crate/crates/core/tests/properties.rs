use std::f64::consts::PI;
use std::sync::Arc;

use decolab::bandlimited::{fourier_at, make_fejer, make_gamma_reciprocal_with, product, BandlimitedFunction};
use decolab::linalg::CMatrix;
use decolab::paley_wiener::{standard_frequencies, verify_lemma};
use decolab::quadrature;
use decolab::quantum_core::{hs_inner, hs_norm, kernel_compose, OperatorKernel, PointerGrid, SystemObservable, SystemState};
use decolab::tripartite::{
    coherence_kernel, pointer_gram, reduced_density, thresholds, thresholds_from, Couplings, MeasurementModel,
};
use decolab::vonneumann::{
    gaussian_coherence_factor, gaussian_log_coherence_factor, postulated_reduction, premeasurement_density,
    VonNeumannModel,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn kernel_strategy(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n)
}

fn kernel(grid: &Arc<PointerGrid>, entries: &[(f64, f64)]) -> OperatorKernel {
    let n = grid.len();
    let m = CMatrix::from_fn(n, n, |i, j| {
        let (re, im) = entries[i * n + j];
        Complex64::new(re, im)
    });
    OperatorKernel::new(grid.clone(), m).unwrap()
}

fn amplitudes(raw: &[(f64, f64)]) -> Vec<Complex64> {
    raw.iter().map(|&(re, im)| Complex64::new(re, im)).collect()
}

fn qubit_model(amps: Vec<Complex64>, alpha: f64, lambda: f64) -> MeasurementModel {
    MeasurementModel::new(
        Couplings { hbar: 1.0, alpha, lambda },
        SystemObservable::new(vec![0.0, 1.0]).unwrap(),
        SystemState::normalized(amps).unwrap(),
        make_fejer(1.0, 64).unwrap(),
        make_fejer(0.5, 64).unwrap(),
        Arc::new(PointerGrid::uniform(40.0, 161).unwrap()),
    )
    .unwrap()
}

/// `∫|ψ|²` over `[−L, L]`, doubling L until the change drops below 1e−10.
fn position_norm_sq(f: &BandlimitedFunction) -> f64 {
    let panel = (0.5 / f.kappa()).min(1.0);
    let integral = |l: f64| quadrature::composite(&[-l, l], 16, panel).integrate(|x| f.value(x).norm_sqr());
    let mut l = 32.0 / f.kappa();
    let mut prev = integral(l);
    loop {
        l *= 2.0;
        let next = integral(l);
        if (next - prev).abs() < 1e-10 {
            return next;
        }
        prev = next;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hs_norm_obeys_cauchy_schwarz(n in 2usize..10, half in 0.5..20.0f64, seed in any::<u64>()) {
        let grid = Arc::new(PointerGrid::uniform(half, n).unwrap());
        let mut rng = StdRng::seed_from_u64(seed);
        let mut draw = || (0..n * n).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect::<Vec<_>>();
        let (x, y) = (kernel(&grid, &draw()), kernel(&grid, &draw()));
        let lhs = hs_inner(&x, &y).unwrap().norm();
        prop_assert!(lhs <= hs_norm(&x) * hs_norm(&y) * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn orthogonality_threshold_exceeds_decoherence_threshold(
        hbar in 0.1..3.0f64,
        kappa0 in 0.1..5.0f64,
        b0 in 0.1..5.0f64,
        a0 in 0.1..5.0f64,
        excess in 1.0001..10.0f64,
    ) {
        let lambda = excess * 2.0 * hbar * b0 / a0;
        let t = thresholds_from(hbar, kappa0, b0, a0, lambda).unwrap();
        let alpha_0 = t.alpha_0.unwrap();
        prop_assert!(alpha_0 > t.alpha_d);
    }

    #[test]
    fn compose_is_associative(n in 2usize..7, a in kernel_strategy(6), b in kernel_strategy(6), c in kernel_strategy(6)) {
        let grid = Arc::new(PointerGrid::gauss_legendre(3.0, n).unwrap());
        let (x, y, z) = (kernel(&grid, &a), kernel(&grid, &b), kernel(&grid, &c));
        let left = kernel_compose(&kernel_compose(&x, &y).unwrap(), &z).unwrap();
        let right = kernel_compose(&x, &kernel_compose(&y, &z).unwrap()).unwrap();
        let diff = (left.entries() - right.entries()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(diff <= 1e-10);
    }

    #[test]
    fn gaussian_factor_is_positive_and_decreasing(
        alpha in 0.01..1e3f64,
        step in 1e-3..10.0f64,
        gap in 0.1..3.0f64,
        mu in 0.1..10.0f64,
        omega in 0.1..10.0f64,
    ) {
        let log1 = gaussian_log_coherence_factor(alpha, gap, 0.0, mu, omega, 1.0).unwrap();
        let log2 = gaussian_log_coherence_factor(alpha + step, gap, 0.0, mu, omega, 1.0).unwrap();
        prop_assert!(log1.is_finite() && log2.is_finite());
        prop_assert!(log2 < log1 && log1 < 0.0);
        let f = gaussian_coherence_factor(alpha, gap, 0.0, mu, omega, 1.0).unwrap();
        prop_assert!(f >= 0.0 && f < 1.0);
        if log1 > -700.0 {
            prop_assert!(f > 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fejer_transform_is_exactly_zero_beyond_type(kappa in 0.1..4.0f64) {
        let f = make_fejer(kappa, 32).unwrap();
        for j in 1..=50 {
            let a = kappa * (1.0 + 2.0 * j as f64 / 50.0);
            prop_assert_eq!(fourier_at(&f, a), Complex64::new(0.0, 0.0));
            prop_assert_eq!(fourier_at(&f, -a), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn product_type_is_additive(kf in 0.1..3.0f64, kg in 0.1..3.0f64, a in 1.0001..3.0f64) {
        let (f, g) = (make_fejer(kf, 16).unwrap(), make_fejer(kg, 16).unwrap());
        let h = product(&f, &g).unwrap();
        prop_assert_eq!(h.kappa(), kf + kg);
        prop_assert_eq!(fourier_at(&h, a * (kf + kg)), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn reduced_density_conserves_branch_weights(
        raw in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2),
        alpha in 0.3..6.0f64,
    ) {
        let amps = amplitudes(&raw);
        prop_assume!(amps.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3);
        let m = qubit_model(amps, alpha, 2.0);
        let rho = reduced_density(&m).unwrap();
        let weights = m.state().weights();
        for (k, w) in weights.iter().enumerate() {
            prop_assert!(rho.branch_weight(k) >= 0.0);
            prop_assert!((rho.branch_weight(k) - w).abs() <= 1e-8);
        }
        prop_assert!((rho.trace().re - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn coherences_vanish_above_decoherence_threshold(
        excess in 1.0001..4.0f64,
        b in -30.0..30.0f64,
        b_prime in -30.0..30.0f64,
        lambda in 0.2..4.0f64,
    ) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = qubit_model(vec![Complex64::new(h, 0.0), Complex64::new(0.0, h)], 1.0, lambda);
        let alpha_d = thresholds(&m).unwrap().alpha_d;
        let m = m.with_alpha(excess * alpha_d).unwrap();
        prop_assert_eq!(coherence_kernel(&m, 0, 1, b, b_prime).unwrap(), Complex64::new(0.0, 0.0));
        prop_assert_eq!(coherence_kernel(&m, 1, 0, b, b_prime).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn premeasurement_is_pure_and_reduction_keeps_diagonal(
        raw in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3),
        lambda in 0.0..3.0f64,
    ) {
        let amps = amplitudes(&raw);
        prop_assume!(amps.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3);
        let vn = VonNeumannModel::with_meter_function(
            1.0,
            lambda,
            SystemObservable::new(vec![-1.0, 0.0, 2.5]).unwrap(),
            SystemState::normalized(amps).unwrap(),
            Arc::new(PointerGrid::uniform(30.0, 81).unwrap()),
            &make_fejer(0.5, 32).unwrap(),
        )
        .unwrap();
        let rho = premeasurement_density(&vn).unwrap();
        prop_assert!((rho.purity() - 1.0).abs() <= 1e-8);
        let reduced = postulated_reduction(&rho);
        for k in 0..3 {
            prop_assert_eq!(reduced.block(k, k), rho.block(k, k));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn pointers_are_orthogonal_above_both_thresholds(lambda in 1.5..4.0f64, excess in 1.05..3.0f64) {
        let wide = Arc::new(PointerGrid::uniform(80.0, 321).unwrap());
        let m = qubit_model(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)], 1.0, lambda).with_grid(wide).unwrap();
        let alpha_0 = thresholds(&m).unwrap().alpha_0.unwrap();
        let g = pointer_gram(&m.with_alpha(excess * alpha_0).unwrap()).unwrap();
        prop_assert!(g[(0, 1)] <= 1e-8, "overlap {}", g[(0, 1)]);
        prop_assert!(g[(1, 0)] <= 1e-8);
    }

    #[test]
    fn gamma_transform_is_exactly_zero_beyond_type(g_a in 1.5..4.0f64, g_b in 0.2..2.0f64) {
        let f = make_gamma_reciprocal_with(g_a, g_b, 32).unwrap();
        let kappa = PI * g_b;
        prop_assert_eq!(f.kappa(), kappa);
        for j in 1..=50 {
            let a = kappa * (1.0 + 2.0 * j as f64 / 50.0);
            prop_assert_eq!(fourier_at(&f, a), Complex64::new(0.0, 0.0));
        }
    }
}

#[test]
fn parseval_holds_for_library_functions() {
    let functions = [
        make_fejer(0.5, 64).unwrap(),
        make_fejer(1.0, 128).unwrap(),
        make_fejer(2.0, 64).unwrap(),
        make_gamma_reciprocal_with(2.0, 1.0, 128).unwrap(),
    ];
    for f in &functions {
        let spectral = f.spectrum().norm_sq();
        let position = position_norm_sq(f);
        assert!((position - spectral).abs() <= 1e-8, "kappa {}: {position} vs {spectral}", f.kappa());
    }
}

#[test]
fn lemma_passes_for_library_functions() {
    for f in [make_fejer(0.7, 64).unwrap(), make_gamma_reciprocal_with(2.5, 0.8, 128).unwrap()] {
        let report = verify_lemma(&f, &standard_frequencies(f.kappa(), 50)).unwrap();
        assert!(report.passed(), "kappa {}: {report:?}", f.kappa());
    }
}

#[test]
fn structural_and_quadrature_transforms_agree_inside_support() {
    let mut rng = StdRng::seed_from_u64(2024);
    for f in [make_fejer(1.0, 128).unwrap(), make_gamma_reciprocal_with(2.0, 1.0, 128).unwrap()] {
        let kappa = f.kappa();
        let mut freqs: Vec<f64> = (0..20).map(|_| rng.random_range(-kappa..kappa)).collect();
        freqs.sort_by(f64::total_cmp);
        let report = verify_lemma(&f, &freqs).unwrap();
        for ((a, s), q) in report.frequencies.iter().zip(&report.structural_magnitudes).zip(&report.quadrature_magnitudes) {
            assert!((s - q).abs() <= 1e-6, "kappa {kappa}, a = {a}: {s} vs {q}");
        }
    }
}

#[test]
fn fejer_transform_matches_its_triangle_spectrum() {
    let mut rng = StdRng::seed_from_u64(7);
    for kappa in [0.5, 1.0, 2.0] {
        let f = make_fejer(kappa, 64).unwrap();
        let c = (3.0 / (4.0 * PI * kappa)).sqrt();
        for _ in 0..20 {
            let a: f64 = rng.random_range(-kappa..kappa);
            let exact = 2.0 * PI * c * (1.0 - a.abs() / kappa);
            let got = fourier_at(&f, a);
            assert!((got.re - exact).abs() < 1e-12 && got.im.abs() < 1e-12, "kappa {kappa}, a {a}: {got} vs {exact}");
        }
    }
}
