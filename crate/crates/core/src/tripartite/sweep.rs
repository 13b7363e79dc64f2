use serde::{Deserialize, Serialize};

use super::{
    default_q_grid_size, dense_oracle, effective_coupling, pointer_gram, reduced_density, thresholds, MeasurementModel,
    Thresholds,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Compare every point against the dense oracle.
    pub run_oracle: bool,
    /// Oracle position-grid size; `None` picks [`default_q_grid_size`].
    pub q_grid_size: Option<usize>,
    /// Largest pointer overlap still counted as orthogonal.
    pub zero_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { run_oracle: true, q_grid_size: None, zero_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    /// Largest Hilbert–Schmidt norm of an off-diagonal block.
    pub max_offdiag_coherence: f64,
    /// `‖ρ_k ρ_l‖` for every pair, row-major.
    pub pointer_gram: Vec<Vec<f64>>,
    pub max_pointer_overlap: f64,
    /// Largest entrywise gap between the analytic and oracle densities.
    pub oracle_residual: Option<f64>,
    /// λ recovered from the oracle's branch phases.
    pub effective_coupling: Option<f64>,
    /// α above the decoherence threshold and coherences literally zero.
    pub decohered: bool,
    pub orthogonal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceReport {
    pub hbar: f64,
    pub lambda: f64,
    /// Absent for a one-level system, which has no eigenvalue gap.
    pub thresholds: Option<Thresholds>,
    pub zero_tol: f64,
    pub rows: Vec<SweepRow>,
}

impl DecoherenceReport {
    pub fn alphas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.alpha).collect()
    }

    /// First swept α whose coherences vanish identically.
    pub fn first_zero_coherence(&self) -> Option<f64> {
        self.rows.iter().find(|r| r.max_offdiag_coherence == 0.0).map(|r| r.alpha)
    }
}

/// Evaluates one coupling value of a sweep.
pub fn sweep_point(m: &MeasurementModel, alpha: f64, options: &SweepOptions) -> Result<SweepRow> {
    let model = m.with_alpha(alpha)?;
    let rho = reduced_density(&model)?;
    let max_offdiag_coherence = rho.max_offdiag_norm();
    let gram = pointer_gram(&model)?;
    let dim = model.dim();
    let mut max_pointer_overlap = 0.0f64;
    for k in 0..dim {
        for l in 0..dim {
            if k != l {
                max_pointer_overlap = max_pointer_overlap.max(gram[(k, l)]);
            }
        }
    }
    let (oracle_residual, effective) = if options.run_oracle {
        let size = match options.q_grid_size {
            Some(s) => s,
            None => default_q_grid_size(&model)?,
        };
        let oracle = dense_oracle(&model, size)?;
        (Some(rho.max_entry_diff(&oracle)?), effective_coupling(&model, &oracle).ok())
    } else {
        (None, None)
    };
    let alpha_d = model.observable().min_gap().ok().map(|a0| 2.0 * model.hbar() * model.probe().kappa() / a0);
    Ok(SweepRow {
        alpha,
        beta: model.beta(),
        max_offdiag_coherence,
        pointer_gram: (0..dim).map(|k| (0..dim).map(|l| gram[(k, l)]).collect()).collect(),
        max_pointer_overlap,
        oracle_residual,
        effective_coupling: effective,
        decohered: alpha_d.is_none_or(|d| alpha > d) && max_offdiag_coherence == 0.0,
        orthogonal: max_pointer_overlap <= options.zero_tol,
    })
}

/// Re-evaluates the model at each α (β = 2λ/α follows) and collects the
/// coherence, pointer-overlap and oracle figures.
pub fn coherence_sweep(m: &MeasurementModel, alphas: &[f64], options: &SweepOptions) -> Result<DecoherenceReport> {
    validate_alphas(alphas)?;
    let rows = alphas.iter().map(|&a| sweep_point(m, a, options)).collect::<Result<Vec<_>>>()?;
    Ok(report_from_rows(m, options, rows))
}

pub fn validate_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one alpha".into()));
    }
    if alphas.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::InvalidParameter("sweep alphas must be positive".into()));
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("sweep alphas must be strictly increasing".into()));
    }
    Ok(())
}

/// Assembles a report from independently computed rows.
pub fn report_from_rows(m: &MeasurementModel, options: &SweepOptions, rows: Vec<SweepRow>) -> DecoherenceReport {
    DecoherenceReport {
        hbar: m.hbar(),
        lambda: m.lambda(),
        thresholds: thresholds(m).ok(),
        zero_tol: options.zero_tol,
        rows,
    }
}
