use std::sync::Arc;

use num_complex::Complex64;

use crate::bandlimited::{symmetric_modulus, BandlimitedFunction};
use crate::error::{Error, Result};
use crate::quantum_core::{PointerGrid, SystemObservable, SystemState};
use crate::vonneumann::sample_normalized;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub hbar: f64,
    pub alpha: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct MeasurementModel {
    couplings: Couplings,
    observable: SystemObservable,
    state: SystemState,
    probe: BandlimitedFunction,
    pointer0: BandlimitedFunction,
    grid: Arc<PointerGrid>,
    pointer_samples: Vec<Complex64>,
}

impl MeasurementModel {
    pub fn new(
        couplings: Couplings,
        observable: SystemObservable,
        state: SystemState,
        probe: BandlimitedFunction,
        pointer0: BandlimitedFunction,
        grid: Arc<PointerGrid>,
    ) -> Result<Self> {
        check_couplings(&couplings)?;
        if observable.dim() != state.dim() {
            return Err(Error::InvalidParameter(format!(
                "observable has {} eigenvalues but state has {} amplitudes",
                observable.dim(),
                state.dim()
            )));
        }
        if !probe.spectrum().is_normalized() {
            return Err(Error::Normalization("probe state is not normalized".into()));
        }
        if !pointer0.spectrum().is_normalized() {
            return Err(Error::Normalization("pointer state is not normalized".into()));
        }
        if !symmetric_modulus(probe.spectrum()) {
            return Err(Error::InvalidParameter(
                "probe spectrum must satisfy |ψ̃(−k)| = |ψ̃(k)|".into(),
            ));
        }
        let pointer_samples = sample_normalized(&pointer0, &grid)?;
        Ok(MeasurementModel { couplings, observable, state, probe, pointer0, grid, pointer_samples })
    }

    pub fn hbar(&self) -> f64 {
        self.couplings.hbar
    }

    pub fn alpha(&self) -> f64 {
        self.couplings.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.couplings.lambda
    }

    pub fn couplings(&self) -> Couplings {
        self.couplings
    }

    /// Probe–pointer coupling `β = 2λ/α`.
    pub fn beta(&self) -> f64 {
        2.0 * self.couplings.lambda / self.couplings.alpha
    }

    pub fn observable(&self) -> &SystemObservable {
        &self.observable
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    pub fn probe(&self) -> &BandlimitedFunction {
        &self.probe
    }

    pub fn pointer0(&self) -> &BandlimitedFunction {
        &self.pointer0
    }

    pub fn grid(&self) -> &Arc<PointerGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.observable.dim()
    }

    /// `Φ0(b_i)`, rescaled to unit norm under the grid weights.
    pub fn pointer_samples(&self) -> &[Complex64] {
        &self.pointer_samples
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        self.with_couplings(Couplings { alpha, ..self.couplings })
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        self.with_couplings(Couplings { lambda, ..self.couplings })
    }

    pub fn with_couplings(&self, couplings: Couplings) -> Result<Self> {
        check_couplings(&couplings)?;
        Ok(MeasurementModel { couplings, ..self.clone() })
    }

    pub fn with_grid(&self, grid: Arc<PointerGrid>) -> Result<Self> {
        let pointer_samples = sample_normalized(&self.pointer0, &grid)?;
        Ok(MeasurementModel { grid, pointer_samples, ..self.clone() })
    }

    pub(crate) fn check_index(&self, k: usize) -> Result<()> {
        if k < self.dim() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: k, dim: self.dim() })
        }
    }
}

fn check_couplings(c: &Couplings) -> Result<()> {
    for (name, v) in [("hbar", c.hbar), ("alpha", c.alpha), ("lambda", c.lambda)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok(())
}
