use serde::{Deserialize, Serialize};

use super::MeasurementModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Decoherence threshold `2ħκ0/a0`.
    pub alpha_d: f64,
    /// Minimum induced coupling `2ħb0/a0`.
    pub lambda_0: f64,
    /// Orthogonality threshold `4ħκ0/(a0 − 2ħb0/λ)`, present only for λ > λ0.
    pub alpha_0: Option<f64>,
    /// Why `alpha_0` is absent.
    pub reason: Option<String>,
}

pub fn thresholds(m: &MeasurementModel) -> Result<Thresholds> {
    let a0 = m.observable().min_gap()?;
    thresholds_from(m.hbar(), m.probe().kappa(), m.pointer0().kappa(), a0, m.lambda())
}

/// Thresholds from the probe type `kappa0`, the pointer type `b0`, the
/// smallest eigenvalue gap `a0` and the induced coupling `lambda`.
pub fn thresholds_from(hbar: f64, kappa0: f64, b0: f64, a0: f64, lambda: f64) -> Result<Thresholds> {
    for (name, v) in [("hbar", hbar), ("kappa0", kappa0), ("b0", b0), ("a0", a0), ("lambda", lambda)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
        }
    }
    let alpha_d = 2.0 * hbar * kappa0 / a0;
    let lambda_0 = 2.0 * hbar * b0 / a0;
    if lambda <= lambda_0 {
        return Ok(Thresholds {
            alpha_d,
            lambda_0,
            alpha_0: None,
            reason: Some("induced coupling below λ0".into()),
        });
    }
    let alpha_0 = 4.0 * hbar * kappa0 / (a0 - 2.0 * hbar * b0 / lambda);
    if !(alpha_0 > alpha_d) {
        return Err(Error::InvalidState(format!(
            "orthogonality threshold {alpha_0} does not exceed decoherence threshold {alpha_d}"
        )));
    }
    Ok(Thresholds { alpha_d, lambda_0, alpha_0: Some(alpha_0), reason: None })
}
