//! Two-body measurement baseline: the system couples directly to the meter
//! through `λ A⊗B`, producing the pre-measurement state
//! `Σ_k c_k |φ_k⟩⊗|φ_k⟩` with `φ_k(b) = e^{iλa_k b/ħ} φ0(b)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::bandlimited::BandlimitedFunction;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::quantum_core::{CompositeDensity, PointerGrid, SystemObservable, SystemState};

#[derive(Debug, Clone)]
pub struct VonNeumannModel {
    hbar: f64,
    lambda: f64,
    observable: SystemObservable,
    state: SystemState,
    grid: Arc<PointerGrid>,
    meter0: Vec<Complex64>,
}

impl VonNeumannModel {
    pub fn new(
        hbar: f64,
        lambda: f64,
        observable: SystemObservable,
        state: SystemState,
        grid: Arc<PointerGrid>,
        meter0: Vec<Complex64>,
    ) -> Result<Self> {
        if !(hbar > 0.0) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidParameter(format!("coupling must be non-negative, got {lambda}")));
        }
        if observable.dim() != state.dim() {
            return Err(Error::InvalidParameter(format!(
                "observable has {} eigenvalues but state has {} amplitudes",
                observable.dim(),
                state.dim()
            )));
        }
        if meter0.len() != grid.len() {
            return Err(Error::GridMismatch("meter state does not match pointer grid".into()));
        }
        let n2: f64 = meter0.iter().zip(grid.weights()).map(|(z, u)| z.norm_sqr() * u).sum();
        if (n2 - 1.0).abs() > 1e-10 {
            return Err(Error::Normalization(format!("meter state has grid norm² {n2}")));
        }
        Ok(VonNeumannModel { hbar, lambda, observable, state, grid, meter0 })
    }

    /// Samples `f` on the grid and renormalizes it there.
    pub fn with_meter_function(
        hbar: f64,
        lambda: f64,
        observable: SystemObservable,
        state: SystemState,
        grid: Arc<PointerGrid>,
        f: &BandlimitedFunction,
    ) -> Result<Self> {
        let meter0 = sample_normalized(f, &grid)?;
        VonNeumannModel::new(hbar, lambda, observable, state, grid, meter0)
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn observable(&self) -> &SystemObservable {
        &self.observable
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    pub fn grid(&self) -> &Arc<PointerGrid> {
        &self.grid
    }

    /// Meter branch `φ_k(b_i)`.
    pub fn branch(&self, k: usize) -> Vec<Complex64> {
        let a = self.observable.eigenvalues()[k];
        self.grid
            .points()
            .iter()
            .zip(&self.meter0)
            .map(|(&b, &p)| Complex64::from_polar(1.0, self.lambda * a * b / self.hbar) * p)
            .collect()
    }
}

/// Samples `f` on the grid, rescaled to unit norm under the grid weights.
pub fn sample_normalized(f: &BandlimitedFunction, grid: &PointerGrid) -> Result<Vec<Complex64>> {
    let raw: Vec<Complex64> = grid.points().iter().map(|&b| f.value(b)).collect();
    let n2: f64 = raw.iter().zip(grid.weights()).map(|(z, u)| z.norm_sqr() * u).sum();
    if !(n2 > 0.0 && n2.is_finite()) {
        return Err(Error::Normalization("sampled state vanishes on the grid".into()));
    }
    let s = 1.0 / n2.sqrt();
    Ok(raw.into_iter().map(|z| z * s).collect())
}

/// Density of the pre-measurement state: block (k, l) is
/// `c_k conj(c_l) φ_k(b_i) conj(φ_l(b_j))`.
pub fn premeasurement_density(m: &VonNeumannModel) -> Result<CompositeDensity> {
    let dim = m.observable.dim();
    let n = m.grid.len();
    let c = m.state.amps();
    let branches: Vec<Vec<Complex64>> = (0..dim).map(|k| m.branch(k)).collect();
    let mut blocks = Vec::with_capacity(dim * dim);
    for k in 0..dim {
        for l in 0..dim {
            let ckl = c[k] * c[l].conj();
            let (pk, pl) = (&branches[k], &branches[l]);
            blocks.push(CMatrix::from_fn(n, n, |i, j| ckl * pk[i] * pl[j].conj()));
        }
    }
    CompositeDensity::new(dim, m.grid.clone(), blocks)
}

/// The postulated reduction: zero every block with k ≠ l, leave the diagonal
/// blocks untouched.
pub fn postulated_reduction(rho: &CompositeDensity) -> CompositeDensity {
    let mut out = rho.clone();
    let dim = rho.dim();
    for (idx, block) in out.blocks_mut().iter_mut().enumerate() {
        if idx / dim != idx % dim {
            block.fill(Complex64::new(0.0, 0.0));
        }
    }
    out
}

/// Suppression `exp(−α²(a_k − a_l)²/(4μωħ))` of a coherence when the probe
/// starts in an oscillator ground state. Positive for every finite α, though
/// it underflows to 0.0 in double precision once the exponent drops below
/// about −745.
pub fn gaussian_coherence_factor(alpha: f64, a_k: f64, a_l: f64, mu: f64, omega: f64, hbar: f64) -> Result<f64> {
    Ok(gaussian_log_coherence_factor(alpha, a_k, a_l, mu, omega, hbar)?.exp())
}

/// Natural logarithm of [`gaussian_coherence_factor`], finite wherever the
/// factor itself is representable only as 0.0.
pub fn gaussian_log_coherence_factor(alpha: f64, a_k: f64, a_l: f64, mu: f64, omega: f64, hbar: f64) -> Result<f64> {
    if !(mu > 0.0 && omega > 0.0 && hbar > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mass, frequency and hbar must be positive (got {mu}, {omega}, {hbar})"
        )));
    }
    let d = a_k - a_l;
    Ok(-(alpha * alpha) * d * d / (4.0 * mu * omega * hbar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandlimited::make_fejer;

    fn model(lambda: f64, amps: Vec<Complex64>, eigs: Vec<f64>) -> VonNeumannModel {
        let grid = Arc::new(PointerGrid::uniform(30.0, 121).unwrap());
        let f = make_fejer(0.5, 64).unwrap();
        VonNeumannModel::with_meter_function(
            1.0,
            lambda,
            SystemObservable::new(eigs).unwrap(),
            SystemState::normalized(amps).unwrap(),
            grid,
            &f,
        )
        .unwrap()
    }

    fn qubit(lambda: f64) -> VonNeumannModel {
        model(lambda, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)], vec![0.0, 1.0])
    }

    #[test]
    fn single_branch_is_pure_with_unit_trace() {
        let m = model(2.0, vec![Complex64::new(1.0, 0.0)], vec![0.7]);
        let rho = premeasurement_density(&m).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!((rho.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_coupling_shares_meter_kernel() {
        let m = qubit(0.0);
        let rho = premeasurement_density(&m).unwrap();
        let base = rho.block(0, 0) * Complex64::new(2.0, 0.0);
        for (k, l) in [(0, 1), (1, 0), (1, 1)] {
            let c = m.state().amps();
            let scaled = rho.block(k, l) / (c[k] * c[l].conj());
            assert!(crate::linalg::max_abs_diff(&scaled, &base) < 1e-12);
        }
    }

    #[test]
    fn absent_branch_has_zero_block() {
        let m = model(1.0, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], vec![0.0, 1.0]);
        let rho = premeasurement_density(&m).unwrap();
        assert!(rho.block(1, 1).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn premeasurement_is_pure_density() {
        let rho = premeasurement_density(&qubit(1.5)).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-8);
        assert!(rho.diagnostics().is_valid());
    }

    #[test]
    fn reduction_is_a_projection() {
        let rho = premeasurement_density(&qubit(1.5)).unwrap();
        let once = postulated_reduction(&rho);
        assert!(once.block(0, 1).iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        assert_eq!(once.block(0, 0), rho.block(0, 0));
        assert_eq!(once.block(1, 1), rho.block(1, 1));
        assert!((once.branch_weight(0) - 0.5).abs() < 1e-12);
        assert!((once.trace() - rho.trace()).norm() < 1e-15);
        assert_eq!(postulated_reduction(&once), once);
    }

    #[test]
    fn gaussian_factor_values() {
        assert_eq!(gaussian_coherence_factor(3.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap(), 1.0);
        let f = gaussian_coherence_factor(2.0, 1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert!((f - (-1.0f64).exp()).abs() < 1e-15);
        assert!(gaussian_coherence_factor(1.0, 1.0, 0.0, 0.0, 1.0, 1.0).is_err());
        let logs: Vec<f64> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&a| gaussian_coherence_factor(a, 1.0, 0.0, 1.0, 1.0, 1.0).unwrap().ln() / (a * a))
            .collect();
        assert!((logs[0] - logs[1]).abs() < 1e-12 && (logs[1] - logs[2]).abs() < 1e-12);
    }

    #[test]
    fn log_factor_stays_finite_where_factor_underflows() {
        let log = gaussian_log_coherence_factor(1e3, 1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(log, -250_000.0);
        assert_eq!(gaussian_coherence_factor(1e3, 1.0, 0.0, 1.0, 1.0, 1.0).unwrap(), 0.0);
        assert!(gaussian_coherence_factor(20.0, 1.0, 0.0, 1.0, 1.0, 1.0).unwrap() > 0.0);
    }
}
