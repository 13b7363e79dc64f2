use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::*;
use crate::bandlimited::{make_fejer, BandlimitedFunction, Parity, Reality, Spectrum};
use crate::error::Error;
use crate::quadrature;
use crate::quantum_core::{hs_norm, kernel_compose, PointerGrid, SystemObservable, SystemState};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn scenario(eigs: Vec<f64>, amps: Vec<Complex64>, alpha: f64, lambda: f64) -> MeasurementModel {
    MeasurementModel::new(
        Couplings { hbar: 1.0, alpha, lambda },
        SystemObservable::new(eigs).unwrap(),
        SystemState::normalized(amps).unwrap(),
        make_fejer(1.0, 128).unwrap(),
        make_fejer(0.5, 128).unwrap(),
        Arc::new(PointerGrid::uniform(40.0, 161).unwrap()),
    )
    .unwrap()
}

fn qubit(alpha: f64, lambda: f64) -> MeasurementModel {
    scenario(vec![0.0, 1.0], vec![c(1.0), c(1.0)], alpha, lambda)
}

/// Fejér wavefunction with half-width 1, written out independently.
fn fejer_probe(x: f64) -> f64 {
    let norm = (3.0 / (4.0 * PI)).sqrt();
    if x.abs() < 1e-6 {
        return norm * (1.0 - x * x / 12.0);
    }
    4.0 * norm * (0.5 * x).sin().powi(2) / (x * x)
}

/// `∫ e^{−iωq} ψ(q − s) ψ(q − s') dq` by composite Gauss–Legendre on a wide
/// window plus the analytic 1/q⁴ tail of the non-oscillating part.
fn overlap_by_quadrature(omega: f64, s: f64, s_prime: f64) -> Complex64 {
    let reach = 4000.0;
    let rule = quadrature::composite(&[-reach, reach], 16, 0.5);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&q, &w)| Complex64::from_polar(w * fejer_probe(q - s) * fejer_probe(q - s_prime), -omega * q))
        .sum()
}

#[test]
fn model_rejects_invalid_inputs() {
    let m = qubit(1.0, 2.0);
    assert!(matches!(m.with_alpha(0.0), Err(Error::InvalidParameter(_))));
    assert!(matches!(m.with_lambda(-1.0), Err(Error::InvalidParameter(_))));
    let spec = Spectrum::from_fn(1.0, &[-1.0, 1.0], 32, |k| Complex64::new(1.0 + 0.5 * k, 0.0)).unwrap().normalize().unwrap();
    let lopsided = BandlimitedFunction::new(spec, Parity::None, Reality::ComplexValued).unwrap();
    let err = MeasurementModel::new(
        m.couplings(),
        m.observable().clone(),
        m.state().clone(),
        lopsided,
        m.pointer0().clone(),
        m.grid().clone(),
    );
    assert!(matches!(err, Err(Error::InvalidParameter(_))));
    let raw = Spectrum::from_fn(1.0, &[-1.0, 0.0, 1.0], 32, |k| c(1.0 - k.abs())).unwrap();
    let unnormalized = BandlimitedFunction::new(raw, Parity::Even, Reality::RealValued).unwrap();
    let err = MeasurementModel::new(
        m.couplings(),
        m.observable().clone(),
        m.state().clone(),
        unnormalized,
        m.pointer0().clone(),
        m.grid().clone(),
    );
    assert!(matches!(err, Err(Error::Normalization(_))));
    assert_eq!(m.beta(), 4.0);
}

#[test]
fn thresholds_of_reference_qubit() {
    let t = thresholds(&qubit(1.0, 2.0)).unwrap();
    assert_eq!(t.alpha_d, 2.0);
    assert_eq!(t.lambda_0, 1.0);
    assert_eq!(t.alpha_0, Some(8.0));
    let t = thresholds(&qubit(1.0, 1.0)).unwrap();
    assert!(t.alpha_0.is_none());
}

#[test]
fn coherence_kernel_diagonal_is_probe_norm() {
    let m = qubit(1.0, 2.0);
    for b in [0.0, 1.5, -7.0] {
        let v = coherence_kernel(&m, 0, 0, b, b).unwrap();
        assert!((v - c(1.0)).norm() < 1e-10, "{v}");
    }
}

#[test]
fn coherence_kernel_vanishes_beyond_threshold() {
    let m = qubit(3.0, 2.0);
    let b = m.grid().points();
    for &(i, j) in &[(0, 0), (10, 150), (80, 80), (160, 3)] {
        assert_eq!(coherence_kernel(&m, 0, 1, b[i], b[j]).unwrap(), c(0.0));
        assert_eq!(coherence_kernel(&m, 1, 0, b[i], b[j]).unwrap(), c(0.0));
    }
    assert!(coherence_matrix(&m, 0, 1).unwrap().iter().all(|z| *z == c(0.0)));
}

#[test]
fn coherence_kernel_matches_position_quadrature() {
    let m = qubit(1.0, 2.0);
    let beta = m.beta();
    for (b, bp) in [(0.0, 0.0), (0.25, -0.5), (1.0, 2.0)] {
        let spectral = coherence_kernel(&m, 0, 1, b, bp).unwrap();
        let direct = overlap_by_quadrature(-1.0, beta * b, beta * bp);
        assert!(spectral.norm() > 1e-4);
        assert!((spectral - direct).norm() < 1e-6, "{spectral} vs {direct}");
    }
}

#[test]
fn coherence_matrix_matches_literal_kernel() {
    let m = qubit(1.5, 2.0);
    let j = coherence_matrix(&m, 1, 0).unwrap();
    let b = m.grid().points();
    for &(i, jj) in &[(80, 80), (78, 83), (70, 88)] {
        let lit = coherence_kernel(&m, 1, 0, b[i], b[jj]).unwrap();
        assert!((lit - j[(i, jj)]).norm() < 1e-9);
    }
}

#[test]
fn index_errors() {
    let m = qubit(1.0, 2.0);
    assert!(matches!(coherence_kernel(&m, 0, 2, 0.0, 0.0), Err(Error::IndexOutOfRange { index: 2, dim: 2 })));
    assert!(matches!(pointer_state(&m, 5), Err(Error::IndexOutOfRange { .. })));
    assert!(matches!(orthogonality_kernel(&m, 1, 1, 0.0, 0.0), Err(Error::InvalidPair(1, 1))));
}

#[test]
fn single_level_oracle_is_the_pointer_state() {
    let m = scenario(vec![0.3], vec![c(1.0)], 2.0, 2.0);
    let size = default_q_grid_size(&m).unwrap();
    let rho = dense_oracle(&m, size).unwrap();
    assert!(rho.diagnostics().is_valid());
    let pointer = pointer_state(&m, 0).unwrap();
    assert!(crate::linalg::max_abs_diff(rho.block(0, 0), pointer.entries()) < 1e-6);
    let purity = hs_norm(&pointer).powi(2);
    assert!((rho.purity() - purity).abs() < 1e-8);
    assert!(purity < 1.0 - 1e-3);
}

#[test]
fn oracle_above_threshold_has_no_coherence() {
    let m = qubit(3.0, 2.0);
    let rho = dense_oracle(&m, default_q_grid_size(&m).unwrap()).unwrap();
    assert!(rho.max_offdiag_norm() <= 1e-8);
    for k in 0..2 {
        assert!((rho.branch_weight(k) - 0.5).abs() < 1e-8);
    }
}

#[test]
fn oracle_rejects_short_position_grid() {
    let m = qubit(1.0, 2.0);
    assert!(matches!(dense_oracle(&m, 500), Err(Error::Coverage { .. })));
}

#[test]
fn reduced_density_zero_coherence_above_threshold() {
    let m = qubit(2.5, 2.0);
    let rho = reduced_density(&m).unwrap();
    assert_eq!(rho.max_offdiag_norm(), 0.0);
    let states = pointer_states(&m).unwrap();
    for k in 0..2 {
        let expected = states[k].entries() * c(0.5);
        assert!(crate::linalg::max_abs_diff(rho.block(k, k), &expected) < 1e-12);
    }
}

#[test]
fn reduced_density_keeps_coherence_below_threshold() {
    let rho = reduced_density(&qubit(1.0, 2.0)).unwrap();
    assert!(rho.max_offdiag_norm() > 1e-3);
    assert!(rho.diagnostics().is_valid());
}

#[test]
fn reduced_density_matches_oracle() {
    let amps = vec![c(0.6), Complex64::new(0.0, 0.5), c(-0.3)];
    for alpha in [0.5, 3.0] {
        let m = scenario(vec![0.0, 1.0, 2.5], amps.clone(), alpha, 2.0);
        let analytic = reduced_density(&m).unwrap();
        let oracle = dense_oracle(&m, default_q_grid_size(&m).unwrap()).unwrap();
        assert!(analytic.max_entry_diff(&oracle).unwrap() < 1e-6);
        let w = m.state().weights();
        for k in 0..3 {
            assert!((analytic.branch_weight(k) - w[k]).abs() < 1e-8);
        }
    }
}

#[test]
fn oracle_measures_induced_coupling() {
    let m = qubit(1.0, 2.0);
    let oracle = dense_oracle(&m, default_q_grid_size(&m).unwrap()).unwrap();
    let measured = effective_coupling(&m, &oracle).unwrap();
    assert!((measured - 2.0).abs() < 1e-9, "{measured}");
}

#[test]
fn pointer_state_basics() {
    let m = qubit(3.0, 2.0);
    for k in 0..2 {
        let rho = pointer_state(&m, k).unwrap();
        assert!((rho.trace() - c(1.0)).norm() < 1e-10);
        assert!(rho.hermiticity_residual() < 1e-14);
    }
    let ground = pointer_state(&m, 0).unwrap();
    assert!(ground.entries().iter().all(|z| z.im.abs() < 1e-15));
    let oracle = dense_oracle(&m, default_q_grid_size(&m).unwrap()).unwrap();
    for k in 0..2 {
        let scaled = oracle.block(k, k) * c(2.0);
        assert!(crate::linalg::max_abs_diff(&scaled, pointer_state(&m, k).unwrap().entries()) < 1e-6);
    }
}

#[test]
fn orthogonality_kernel_vanishes_above_threshold() {
    let m = qubit(10.0, 2.0);
    let b = m.grid().points();
    for &(i, j) in &[(0, 160), (80, 80), (40, 120), (100, 90)] {
        assert_eq!(orthogonality_kernel(&m, 0, 1, b[i], b[j]).unwrap(), c(0.0));
    }
}

#[test]
fn orthogonality_kernel_matches_composed_states() {
    let m = qubit(4.0, 2.0);
    let states = pointer_states(&m).unwrap();
    let composed = kernel_compose(&states[0], &states[1]).unwrap();
    let b = m.grid().points();
    let phi = m.pointer_samples();
    let renorm = phi[80].norm_sqr() / m.pointer0().value(b[80]).norm_sqr();
    let a = m.observable().eigenvalues();
    let mut largest = 0.0f64;
    for &(i, j) in &[(80, 80), (78, 84), (60, 100)] {
        let s = orthogonality_kernel(&m, 0, 1, b[i], b[j]).unwrap();
        let prefactor = Complex64::from_polar(renorm, m.lambda() * (a[0] * b[i] - a[1] * b[j])) * phi[i] * phi[j].conj();
        assert!((composed.entries()[(i, j)] - prefactor * s).norm() < 1e-6);
        largest = largest.max(s.norm());
    }
    assert!(largest > 1e-5);
}

#[test]
fn orthogonality_kernel_matches_direct_quadrature() {
    let m = qubit(4.0, 2.0);
    let beta = m.beta();
    let pointer = |x: f64| {
        let norm = (3.0 / (4.0 * PI * 0.5)).sqrt();
        if x.abs() < 1e-6 {
            norm * 0.5
        } else {
            4.0 * norm * (0.25 * x).sin().powi(2) / (0.5 * x * x)
        }
    };
    let f = |eta: f64| -> f64 {
        let y = beta * eta;
        if y.abs() < 1e-3 {
            1.0 - y * y / 20.0
        } else {
            6.0 * (y - y.sin()) / y.powi(3)
        }
    };
    let (b, bp) = (0.5, 1.0);
    let rule = quadrature::composite(&[-300.0, 300.0], 16, 0.5);
    let direct: Complex64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| Complex64::from_polar(w * pointer(x).powi(2) * f(bp - x) * f(x - b), 2.0 * x))
        .sum();
    let spectral = orthogonality_kernel(&m, 0, 1, b, bp).unwrap();
    assert!((spectral - direct).norm() < 1e-6, "{spectral} vs {direct}");
}

#[test]
fn gram_examples() {
    let single = scenario(vec![1.0], vec![c(1.0)], 3.0, 2.0);
    let g = pointer_gram(&single).unwrap();
    assert_eq!(g.shape(), (1, 1));
    assert!(g[(0, 0)] > 0.0);
    assert!(pointer_gram(&qubit(10.0, 2.0)).unwrap()[(0, 1)] <= 1e-8);
    for alpha in [5.0, 10.0, 20.0] {
        assert!(pointer_gram(&qubit(alpha, 0.5)).unwrap()[(0, 1)] > 1e-3);
    }
}

#[test]
fn pvm_in_orthogonal_regime() {
    let m = qubit(10.0, 2.0);
    let pvm = extract_pvm(&m, DEFAULT_RANK_TOL).unwrap();
    assert!(pvm.checks.within(1e-6), "{:?}", pvm.checks);
    let states = pointer_states(&m).unwrap();
    for (p, rho) in pvm.projectors.iter().zip(&states) {
        assert!(p.trace().re >= 1.0 - 1e-9);
        let reproduced = kernel_compose(p, rho).unwrap();
        assert!(hs_norm(&reproduced.sub(rho).unwrap()) < 1e-6);
    }
}

#[test]
fn pvm_requires_orthogonal_pointers() {
    match extract_pvm(&qubit(4.0, 2.0), DEFAULT_RANK_TOL) {
        Err(Error::Precondition(msg)) => assert!(msg.contains("0 and 1"), "{msg}"),
        other => panic!("expected precondition error, got {other:?}"),
    }
}

#[test]
fn sweep_crosses_decoherence_threshold() {
    let m = qubit(1.0, 2.0);
    let options = SweepOptions { run_oracle: false, ..Default::default() };
    let report = coherence_sweep(&m, &[1.0, 1.9, 2.1, 3.0], &options).unwrap();
    let norms: Vec<f64> = report.rows.iter().map(|r| r.max_offdiag_coherence).collect();
    assert!(norms[0] > 0.0 && norms[1] > 0.0);
    assert_eq!(norms[2], 0.0);
    assert_eq!(norms[3], 0.0);
    let decohered: Vec<bool> = report.rows.iter().map(|r| r.decohered).collect();
    assert_eq!(decohered, vec![false, false, true, true]);
    let alpha_d = report.thresholds.as_ref().unwrap().alpha_d;
    assert!(report.first_zero_coherence().unwrap() >= alpha_d);
    assert!(report.rows.iter().all(|r| r.beta == 4.0 / r.alpha));
}

#[test]
fn threshold_itself_is_not_decohered() {
    let m = qubit(1.0, 2.0);
    let options = SweepOptions { run_oracle: false, ..Default::default() };
    let row = sweep_point(&m, 2.0, &options).unwrap();
    assert!(!row.decohered);
}

#[test]
fn sweep_rejects_unsorted_alphas() {
    let m = qubit(1.0, 2.0);
    assert!(coherence_sweep(&m, &[2.0, 1.0], &SweepOptions::default()).is_err());
    assert!(coherence_sweep(&m, &[], &SweepOptions::default()).is_err());
}
