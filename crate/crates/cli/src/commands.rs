use std::fmt;

use decolab::paley_wiener::{standard_frequencies, verify_lemma, LemmaReport};
use decolab::quantum_core::min_gap;
use decolab::tripartite::{
    default_q_grid_size, dense_oracle, effective_coupling, extract_pvm, pointer_gram, reduced_density,
    report_from_rows, sweep_point, thresholds, thresholds_from, validate_alphas, MeasurementModel, SweepOptions,
    DEFAULT_RANK_TOL,
};
use decolab::vonneumann::{
    gaussian_coherence_factor, gaussian_log_coherence_factor, postulated_reduction, premeasurement_density,
    VonNeumannModel,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::output::{num, opt_num, Report, Table};

/// Random frequencies added to the lemma grid when a seed is given.
pub const RANDOM_LEMMA_FREQUENCIES: usize = 20;
const LEMMA_GRID_POINTS: usize = 50;
const BRANCH_WEIGHT_TOL: f64 = 1e-8;
const PURITY_TOL: f64 = 1e-8;

/// Failure of a subcommand before it could produce a report.
#[derive(Debug)]
pub enum CommandError {
    /// The configuration describes an unusable model.
    Setup(String),
    /// A numerical routine refused to run or broke its own contract.
    Numerical(decolab::Error),
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommandError::Setup(msg) => write!(f, "cannot set up the experiment: {msg}"),
            CommandError::Numerical(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl From<decolab::Error> for CommandError {
    fn from(e: decolab::Error) -> Self {
        CommandError::Numerical(e)
    }
}

type CommandResult = Result<Report, CommandError>;

fn build_model(config: &ExperimentConfig) -> Result<MeasurementModel, CommandError> {
    config.model().map_err(|e| CommandError::Setup(e.to_string()))
}

fn gap(config: &ExperimentConfig) -> Result<f64, CommandError> {
    if config.system.eigenvalues.len() < 2 {
        return Err(CommandError::Setup("system.eigenvalues: thresholds need at least two levels".into()));
    }
    min_gap(&config.system.eigenvalues).map_err(|e| CommandError::Setup(format!("system.eigenvalues: {e}")))
}

fn bool_str(b: bool) -> String {
    b.to_string()
}

pub fn run_thresholds(config: &ExperimentConfig, hash: &str) -> CommandResult {
    let a0 = gap(config)?;
    let t = thresholds_from(config.hbar, config.probe.kappa(), config.pointer.kappa(), a0, config.couplings.lambda)?;
    let mut table = Table::new(&["alpha_d", "lambda_0", "alpha_0", "reason", "config_hash"]);
    table.push(vec![
        num(t.alpha_d),
        num(t.lambda_0),
        opt_num(t.alpha_0),
        t.reason.clone().unwrap_or_default(),
        hash.to_string(),
    ]);
    let json = json!({ "config_hash": hash, "min_gap": a0, "thresholds": t });
    Ok(Report { table, json, violations: Vec::new() })
}

pub fn run_coherence_sweep(config: &ExperimentConfig, hash: &str) -> CommandResult {
    let model = build_model(config)?;
    let alphas = config.alphas();
    validate_alphas(&alphas)?;
    let options = SweepOptions { run_oracle: true, q_grid_size: None, zero_tol: config.tolerances.zero };
    let rows = alphas
        .par_iter()
        .map(|&a| sweep_point(&model, a, &options))
        .collect::<decolab::Result<Vec<_>>>()?;
    let report = report_from_rows(&model, &options, rows);
    let alpha_d = report.thresholds.as_ref().map(|t| t.alpha_d);
    let mut violations = Vec::new();
    let mut table = Table::new(&[
        "alpha",
        "beta",
        "max_offdiag_coherence",
        "max_pointer_overlap",
        "oracle_residual",
        "effective_coupling",
        "decohered",
        "orthogonal",
        "config_hash",
    ]);
    for row in &report.rows {
        if let Some(r) = row.oracle_residual {
            if !(r <= config.tolerances.quadrature) {
                violations.push(format!(
                    "alpha = {}: oracle residual {r:.3e} exceeds {:.1e}",
                    row.alpha, config.tolerances.quadrature
                ));
            }
        }
        if alpha_d.is_some_and(|d| row.alpha > d) && row.max_offdiag_coherence != 0.0 {
            violations.push(format!(
                "alpha = {}: above the decoherence threshold but coherence norm is {:.3e}",
                row.alpha, row.max_offdiag_coherence
            ));
        }
        table.push(vec![
            num(row.alpha),
            num(row.beta),
            num(row.max_offdiag_coherence),
            num(row.max_pointer_overlap),
            opt_num(row.oracle_residual),
            opt_num(row.effective_coupling),
            bool_str(row.decohered),
            bool_str(row.orthogonal),
            hash.to_string(),
        ]);
    }
    let json = json!({ "config_hash": hash, "report": report });
    Ok(Report { table, json, violations })
}

pub fn run_orthogonality(config: &ExperimentConfig, hash: &str) -> CommandResult {
    let model = build_model(config)?;
    let alphas = config.alphas();
    validate_alphas(&alphas)?;
    let t = thresholds(&model).ok();
    let zero = config.tolerances.zero;
    let results = alphas
        .par_iter()
        .map(|&a| -> decolab::Result<_> {
            let m = model.with_alpha(a)?;
            let gram = pointer_gram(&m)?;
            let dim = m.dim();
            let mut overlap = 0.0f64;
            for k in 0..dim {
                for l in 0..dim {
                    if k != l {
                        overlap = overlap.max(gram[(k, l)]);
                    }
                }
            }
            let pvm = if overlap <= zero { Some(extract_pvm(&m, DEFAULT_RANK_TOL)?) } else { None };
            let gram: Vec<Vec<f64>> = (0..dim).map(|k| (0..dim).map(|l| gram[(k, l)]).collect()).collect();
            Ok((a, m.beta(), gram, overlap, pvm))
        })
        .collect::<decolab::Result<Vec<_>>>()?;
    let mut violations = Vec::new();
    let mut table = Table::new(&[
        "alpha",
        "beta",
        "max_pointer_overlap",
        "orthogonal",
        "pvm_max_cross",
        "pvm_max_idempotence",
        "pvm_completeness",
        "pvm_max_state_residual",
        "pvm_ranks",
        "config_hash",
    ]);
    let mut points = Vec::new();
    for (alpha, beta, gram, overlap, pvm) in results {
        let orthogonal = overlap <= zero;
        if let Some(a0) = t.as_ref().and_then(|t| t.alpha_0) {
            if alpha > a0 && !orthogonal {
                violations.push(format!(
                    "alpha = {alpha}: above the orthogonality threshold but pointer overlap is {overlap:.3e}"
                ));
            }
        }
        let checks = pvm.as_ref().map(|p| p.checks);
        if let Some(c) = checks {
            if !c.within(config.tolerances.quadrature) {
                violations.push(format!("alpha = {alpha}: projector checks exceed tolerance: {c:?}"));
            }
        }
        let ranks = pvm.as_ref().map(|p| p.ranks.clone());
        table.push(vec![
            num(alpha),
            num(beta),
            num(overlap),
            bool_str(orthogonal),
            opt_num(checks.map(|c| c.max_cross)),
            opt_num(checks.map(|c| c.max_idempotence)),
            opt_num(checks.map(|c| c.completeness)),
            opt_num(checks.map(|c| c.max_state_residual)),
            ranks
                .as_ref()
                .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";"))
                .unwrap_or_default(),
            hash.to_string(),
        ]);
        points.push(json!({
            "alpha": alpha,
            "beta": beta,
            "pointer_gram": gram,
            "max_pointer_overlap": overlap,
            "orthogonal": orthogonal,
            "pvm_checks": checks,
            "pvm_ranks": ranks,
        }));
    }
    let json = json!({ "config_hash": hash, "thresholds": t, "zero_tol": zero, "points": points });
    Ok(Report { table, json, violations })
}

pub fn run_dense_check(config: &ExperimentConfig, hash: &str) -> CommandResult {
    let model = build_model(config)?;
    let alphas = config.alphas();
    validate_alphas(&alphas)?;
    let weights = model.state().weights();
    let results = alphas
        .par_iter()
        .map(|&a| -> decolab::Result<_> {
            let m = model.with_alpha(a)?;
            let size = default_q_grid_size(&m)?;
            let oracle = dense_oracle(&m, size)?;
            let analytic = reduced_density(&m)?;
            let residual = analytic.max_entry_diff(&oracle)?;
            let weight_error = |rho: &decolab::quantum_core::CompositeDensity| {
                weights.iter().enumerate().map(|(k, w)| (rho.branch_weight(k) - w).abs()).fold(0.0, f64::max)
            };
            let coupling = if m.dim() > 1 { effective_coupling(&m, &oracle).ok() } else { None };
            Ok((a, m.beta(), size, residual, weight_error(&analytic), weight_error(&oracle), coupling))
        })
        .collect::<decolab::Result<Vec<_>>>()?;
    let tol = config.tolerances.quadrature;
    let mut violations = Vec::new();
    let mut table = Table::new(&[
        "alpha",
        "beta",
        "q_grid_size",
        "oracle_residual",
        "analytic_weight_error",
        "oracle_weight_error",
        "effective_coupling",
        "config_hash",
    ]);
    let mut points = Vec::new();
    for (alpha, beta, size, residual, w_analytic, w_oracle, coupling) in results {
        if !(residual <= tol) {
            violations.push(format!("alpha = {alpha}: oracle residual {residual:.3e} exceeds {tol:.1e}"));
        }
        if !(w_analytic.max(w_oracle) <= BRANCH_WEIGHT_TOL) {
            violations.push(format!(
                "alpha = {alpha}: branch weights drift by {:.3e}",
                w_analytic.max(w_oracle)
            ));
        }
        table.push(vec![
            num(alpha),
            num(beta),
            size.to_string(),
            num(residual),
            num(w_analytic),
            num(w_oracle),
            opt_num(coupling),
            hash.to_string(),
        ]);
        points.push(json!({
            "alpha": alpha,
            "beta": beta,
            "q_grid_size": size,
            "oracle_residual": residual,
            "analytic_weight_error": w_analytic,
            "oracle_weight_error": w_oracle,
            "effective_coupling": coupling,
        }));
    }
    let json = json!({ "config_hash": hash, "lambda": config.couplings.lambda, "tolerance": tol, "points": points });
    Ok(Report { table, json, violations })
}

/// Lemma frequency grid: the standard grid plus, when seeded, uniformly drawn
/// frequencies in `(0, 3τ)`.
pub fn lemma_frequencies(tau: f64, seed: Option<u64>) -> Vec<f64> {
    let mut freqs = standard_frequencies(tau, LEMMA_GRID_POINTS);
    if let Some(seed) = seed {
        let mut rng = StdRng::seed_from_u64(seed);
        freqs.extend((0..RANDOM_LEMMA_FREQUENCIES).map(|_| rng.random_range(0.0..3.0 * tau)));
    }
    freqs.sort_by(f64::total_cmp);
    freqs.dedup();
    freqs
}

pub fn run_lemma(config: &ExperimentConfig, hash: &str, seed: Option<u64>) -> CommandResult {
    let functions = [("probe", config.probe()?), ("pointer", config.pointer()?)];
    let reports = functions
        .par_iter()
        .map(|(name, f)| verify_lemma(f, &lemma_frequencies(f.kappa(), seed)).map(|r| (*name, r)))
        .collect::<decolab::Result<Vec<(&str, LemmaReport)>>>()?;
    let mut violations = Vec::new();
    let mut table = Table::new(&[
        "function",
        "frequency",
        "beyond_type",
        "structural_magnitude",
        "quadrature_magnitude",
        "config_hash",
    ]);
    for (name, r) in &reports {
        if !r.passed() {
            violations.push(format!(
                "{name}: lemma checks failed (structural zero {}, quadrature zero {}, bounds {})",
                r.structural_zero_beyond_type(),
                r.quadrature_zero_beyond_type(),
                r.bounds_hold()
            ));
        }
        for ((&a, &s), &q) in r.frequencies.iter().zip(&r.structural_magnitudes).zip(&r.quadrature_magnitudes) {
            table.push(vec![
                name.to_string(),
                num(a),
                bool_str(a.abs() > r.tau),
                num(s),
                num(q),
                hash.to_string(),
            ]);
        }
    }
    let mut json = json!({ "config_hash": hash, "seed": seed });
    for (name, r) in reports {
        json[name] = serde_json::to_value(r).expect("reports serialize");
    }
    Ok(Report { table, json, violations })
}

pub fn run_baseline(config: &ExperimentConfig, hash: &str) -> CommandResult {
    let pointer = config.pointer()?;
    let grid = config.pointer_grid(&pointer).map_err(|e| CommandError::Setup(e.to_string()))?;
    let vn = VonNeumannModel::with_meter_function(
        config.hbar,
        config.couplings.lambda,
        config.observable()?,
        config.state()?,
        std::sync::Arc::new(grid),
        &pointer,
    )
    .map_err(|e| CommandError::Setup(e.to_string()))?;
    let rho = premeasurement_density(&vn)?;
    let reduced = postulated_reduction(&rho);
    let purity = rho.purity();
    let trace_change = (reduced.trace() - rho.trace()).norm();
    let mut violations = Vec::new();
    if !((purity - 1.0).abs() <= PURITY_TOL) {
        violations.push(format!("premeasurement state is not pure: purity {purity}"));
    }
    if trace_change != 0.0 {
        violations.push(format!("reduction changed the trace by {trace_change:.3e}"));
    }
    let eigs = &config.system.eigenvalues;
    let b = config.baseline;
    let mut table =
        Table::new(&["alpha", "k", "l", "delta_a", "factor", "log_factor", "config_hash"]);
    let mut factors = Vec::new();
    for alpha in config.alphas() {
        for k in 0..eigs.len() {
            for l in k + 1..eigs.len() {
                let f = gaussian_coherence_factor(alpha, eigs[k], eigs[l], b.mu, b.omega, config.hbar)?;
                let log_f = gaussian_log_coherence_factor(alpha, eigs[k], eigs[l], b.mu, b.omega, config.hbar)?;
                if !(log_f.is_finite() && log_f < 0.0) {
                    violations.push(format!("alpha = {alpha}: log factor {log_f} for pair ({k}, {l})"));
                }
                table.push(vec![
                    num(alpha),
                    k.to_string(),
                    l.to_string(),
                    num(eigs[k] - eigs[l]),
                    num(f),
                    num(log_f),
                    hash.to_string(),
                ]);
                factors.push(json!({
                    "alpha": alpha, "k": k, "l": l, "factor": f, "log_factor": log_f,
                }));
            }
        }
    }
    let weights: Vec<f64> = (0..rho.dim()).map(|k| rho.branch_weight(k)).collect();
    let json = json!({
        "config_hash": hash,
        "premeasurement": {
            "purity": purity,
            "trace": rho.trace().re,
            "branch_weights": weights,
            "max_offdiag_norm": rho.max_offdiag_norm(),
        },
        "reduction": {
            "purity": reduced.purity(),
            "trace_change": trace_change,
            "max_offdiag_norm": reduced.max_offdiag_norm(),
        },
        "gaussian": { "mu": b.mu, "omega": b.omega, "factors": factors },
    });
    Ok(Report { table, json, violations })
}
