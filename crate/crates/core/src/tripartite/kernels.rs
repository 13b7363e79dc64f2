use std::f64::consts::PI;

use num_complex::Complex64;

use super::MeasurementModel;
use crate::bandlimited::{autocorrelation_many, conjugate, fourier_at, product, scaled_autocorrelation, translate};
use crate::error::{Error, Result};
use crate::linalg::{cgemm, CMatrix};
use crate::quadrature;
use crate::quantum_core::{hs_norm, kernel_compose, CompositeDensity, GridKind, OperatorKernel, RealMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `α (a_k − a_l) / ħ`, the frequency at which the probe overlap is sampled.
fn probe_frequency(m: &MeasurementModel, k: usize, l: usize) -> f64 {
    let a = m.observable().eigenvalues();
    m.alpha() * (a[k] - a[l]) / m.hbar()
}

/// `J_kl(b, b')` evaluated by forming the band-limited product
/// `ψ(· − βb) conj ψ(· − βb')` (half-width 2κ0) and reading off its Fourier
/// transform. Beyond the certified half-width the result is a literal zero.
pub fn coherence_kernel(m: &MeasurementModel, k: usize, l: usize, b: f64, b_prime: f64) -> Result<Complex64> {
    m.check_index(k)?;
    m.check_index(l)?;
    let omega = probe_frequency(m, k, l);
    let probe = m.probe();
    if omega.abs() > 2.0 * probe.kappa() {
        return Ok(ZERO);
    }
    let beta = m.beta();
    let shifted = translate(probe, beta * b)?;
    let partner = conjugate(&translate(probe, beta * b_prime)?)?;
    let overlap = product(&shifted, &partner)?;
    Ok(fourier_at(&overlap, -omega))
}

/// `J_kl(b_i, b_j)` on the whole pointer grid, from the momentum-space form
///
/// ```text
/// J_kl(b, b') = 2π ∫ dk ψ̃(k) conj ψ̃(k − ω) e^{−iβbk} e^{iβb'(k − ω)}
/// ```
///
/// integrated over the overlap of the two supports. Disjoint supports give
/// the zero matrix.
pub fn coherence_matrix(m: &MeasurementModel, k: usize, l: usize) -> Result<CMatrix> {
    m.check_index(k)?;
    m.check_index(l)?;
    let grid = m.grid();
    let n = grid.len();
    let omega = probe_frequency(m, k, l);
    let spec = m.probe().spectrum();
    let kappa = spec.kappa();
    let lo = (-kappa).max(omega - kappa);
    let hi = kappa.min(omega + kappa);
    if omega.abs() > 2.0 * kappa || hi <= lo {
        return Ok(CMatrix::zeros(n, n));
    }
    let mut cuts = vec![lo, hi];
    cuts.extend(spec.breaks().iter().copied().filter(|&x| x > lo && x < hi));
    cuts.extend(spec.breaks().iter().map(|&x| x + omega).filter(|&x| x > lo && x < hi));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * kappa);

    let beta = m.beta();
    let b = grid.points();
    let reach = grid.half_range();
    let rule = quadrature::panel_rule(&cuts, spec.max_panel_nodes(), 2.0 * beta * reach);
    let weights: Vec<Complex64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&p, &w)| spec.amplitude_at(p) * spec.amplitude_at(p - omega).conj() * (2.0 * PI * w))
        .collect();
    let nodes = &rule.nodes;
    let left = CMatrix::from_fn(n, nodes.len(), |i, j| Complex64::from_polar(1.0, -beta * b[i] * nodes[j]) * weights[j]);
    let right = CMatrix::from_fn(nodes.len(), n, |j, i| Complex64::from_polar(1.0, beta * b[i] * (nodes[j] - omega)));
    Ok(cgemm(&left, &right))
}

/// Reduced system⊗pointer density after tracing out the probe.
pub fn reduced_density(m: &MeasurementModel) -> Result<CompositeDensity> {
    let dim = m.dim();
    let n = m.grid().len();
    let c = m.state().amps();
    let dressed: Vec<Vec<Complex64>> = (0..dim).map(|k| dressed_pointer(m, k)).collect();
    let mut blocks = vec![CMatrix::zeros(n, n); dim * dim];
    for k in 0..dim {
        for l in k..dim {
            let j = coherence_matrix(m, k, l)?;
            let ckl = c[k] * c[l].conj();
            let (pk, pl) = (&dressed[k], &dressed[l]);
            let block = CMatrix::from_fn(n, n, |i, jj| ckl * pk[i] * pl[jj].conj() * j[(i, jj)]);
            if l != k {
                blocks[l * dim + k] = block.adjoint();
            }
            blocks[k * dim + l] = block;
        }
    }
    CompositeDensity::new(dim, m.grid().clone(), blocks)
}

/// `e^{iλ a_k b_i / ħ} Φ0(b_i)`.
fn dressed_pointer(m: &MeasurementModel, k: usize) -> Vec<Complex64> {
    let rate = m.lambda() * m.observable().eigenvalues()[k] / m.hbar();
    m.grid()
        .points()
        .iter()
        .zip(m.pointer_samples())
        .map(|(&b, &p)| Complex64::from_polar(1.0, rate * b) * p)
        .collect()
}

/// `F(b_j − b_i) = A(β(b_j − b_i))` for every grid pair.
fn pointer_overlaps(m: &MeasurementModel) -> CMatrix {
    let grid = m.grid();
    let b = grid.points();
    let n = b.len();
    let beta = m.beta();
    if grid.kind() == GridKind::Uniform {
        let h = b[1] - b[0];
        let etas: Vec<f64> = (0..2 * n - 1).map(|d| beta * h * (d as f64 - (n - 1) as f64)).collect();
        let a = autocorrelation_many(m.probe(), &etas);
        CMatrix::from_fn(n, n, |i, j| a[j + n - 1 - i])
    } else {
        let etas: Vec<f64> = (0..n * n).map(|idx| beta * (b[idx % n] - b[idx / n])).collect();
        let a = autocorrelation_many(m.probe(), &etas);
        CMatrix::from_fn(n, n, |i, j| a[i * n + j])
    }
}

fn pointer_from_overlaps(m: &MeasurementModel, k: usize, overlaps: &CMatrix) -> Result<OperatorKernel> {
    let d = dressed_pointer(m, k);
    let n = d.len();
    let entries = CMatrix::from_fn(n, n, |i, j| d[i] * d[j].conj() * overlaps[(i, j)]);
    OperatorKernel::new_hermitian(m.grid().clone(), entries)
}

/// Pointer state `ρ_k` correlated with the k-th eigenstate.
pub fn pointer_state(m: &MeasurementModel, k: usize) -> Result<OperatorKernel> {
    m.check_index(k)?;
    pointer_from_overlaps(m, k, &pointer_overlaps(m))
}

/// All pointer states, sharing one evaluation of the probe overlap.
pub fn pointer_states(m: &MeasurementModel) -> Result<Vec<OperatorKernel>> {
    let overlaps = pointer_overlaps(m);
    (0..m.dim()).map(|k| pointer_from_overlaps(m, k, &overlaps)).collect()
}

/// `S_kl(b, b')`, the b''-integral left over in `ρ_k ρ_l`. The integrand is a
/// product of band-limited factors of total half-width `2b0 + 4λκ0/α`, so the
/// result is a literal zero when `λ|a_l − a_k|/ħ` exceeds it.
pub fn orthogonality_kernel(m: &MeasurementModel, k: usize, l: usize, b: f64, b_prime: f64) -> Result<Complex64> {
    m.check_index(k)?;
    m.check_index(l)?;
    if k == l {
        return Err(Error::InvalidPair(k, l));
    }
    let a = m.observable().eigenvalues();
    let omega = m.lambda() * (a[l] - a[k]) / m.hbar();
    let f = scaled_autocorrelation(m.probe(), m.beta())?;
    let pointer = m.pointer0();
    if omega.abs() > 2.0 * pointer.kappa() + 2.0 * f.kappa() {
        return Ok(ZERO);
    }
    let density = product(pointer, &conjugate(pointer)?)?;
    let integrand = product(&product(&density, &translate(&f, b_prime)?)?, &translate(&f, b)?)?;
    Ok(fourier_at(&integrand, omega))
}

/// `g_kl = ‖ρ_k ρ_l‖_HS`.
pub fn pointer_gram(m: &MeasurementModel) -> Result<RealMatrix> {
    let states = pointer_states(m)?;
    let dim = states.len();
    let mut g = RealMatrix::zeros(dim, dim);
    for k in 0..dim {
        for l in 0..dim {
            g[(k, l)] = hs_norm(&kernel_compose(&states[k], &states[l])?);
        }
    }
    Ok(g)
}
