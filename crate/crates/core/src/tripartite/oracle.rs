use std::f64::consts::PI;

use num_complex::Complex64;

use super::MeasurementModel;
use crate::error::{Error, Result};
use crate::linalg::{cgemm, CMatrix};
use crate::quantum_core::CompositeDensity;

/// Largest probe mass allowed to fall outside the position grid.
pub const COVERAGE_TOL: f64 = 1e-10;

const CHUNK: usize = 2048;
const MAX_REACH_PERIODS: f64 = 1e6;

/// Position step for which the trapezoid sum of every integrand
/// `e^{−i(ω_k−ω_l)q} ψ(q − s) conj ψ(q − s')` equals its integral: the
/// integrand is band-limited to `|ω_k − ω_l| + 2κ0`.
fn position_step(m: &MeasurementModel) -> f64 {
    let a = m.observable().eigenvalues();
    let (lo, hi) = a.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let band = m.alpha() * (hi - lo) / m.hbar() + 2.0 * m.probe().kappa();
    0.9 * 2.0 * PI / band
}

fn missing_mass(m: &MeasurementModel, positions: impl Iterator<Item = f64>, h: f64) -> f64 {
    let probe = m.probe();
    1.0 - h * positions.map(|q| probe.value(q).norm_sqr()).sum::<f64>()
}

/// Smallest grid, at the oracle's position step, whose reach beyond the
/// extreme probe shifts leaves less than half of [`COVERAGE_TOL`] uncovered.
pub fn default_q_grid_size(m: &MeasurementModel) -> Result<usize> {
    let h = position_step(m);
    let limit = MAX_REACH_PERIODS / m.probe().kappa();
    let mut reach = 32.0 / m.probe().kappa();
    loop {
        let half = (reach / h).ceil() as i64;
        let deficit = missing_mass(m, (-half..=half).map(|j| j as f64 * h), h);
        if deficit <= 0.5 * COVERAGE_TOL {
            break;
        }
        if reach > limit {
            return Err(Error::Coverage { deficit, tolerance: COVERAGE_TOL });
        }
        reach *= 1.25;
    }
    let span = 2.0 * (reach + m.beta() * m.grid().half_range());
    Ok((span / h).ceil() as usize + 1)
}

/// Brute-force reduced density. Each branch evolves the probe under
/// `exp(−(i/ħ)(α a_k Q + β b P))`, applied as a half kick `e^{−iα a_k Q/(2ħ)}`,
/// the translation by `βb`, and a second half kick; the probe is then traced
/// out by trapezoid quadrature on `q_grid_size` positions.
pub fn dense_oracle(m: &MeasurementModel, q_grid_size: usize) -> Result<CompositeDensity> {
    if q_grid_size < 2 {
        return Err(Error::InvalidParameter(format!("position grid needs >= 2 points, got {q_grid_size}")));
    }
    let h = position_step(m);
    let start = -0.5 * (q_grid_size - 1) as f64 * h;
    let q = |r: usize| start + r as f64 * h;
    let beta = m.beta();
    let b = m.grid().points();
    let shifts: Vec<f64> = b.iter().map(|&x| beta * x).collect();

    let extremes = [shifts[0], shifts[shifts.len() - 1]];
    let deficit = extremes
        .iter()
        .map(|&s| missing_mass(m, (0..q_grid_size).map(|r| q(r) - s), h))
        .fold(0.0f64, f64::max);
    if deficit > COVERAGE_TOL {
        return Err(Error::Coverage { deficit, tolerance: COVERAGE_TOL });
    }

    let dim = m.dim();
    let n = b.len();
    let a = m.observable().eigenvalues();
    let hbar = m.hbar();
    let kicks: Vec<f64> = a.iter().map(|&ak| -m.alpha() * ak / (2.0 * hbar)).collect();
    let probe = m.probe();
    let mut sums = vec![CMatrix::zeros(n, n); dim * dim];
    for first in (0..q_grid_size).step_by(CHUNK) {
        let rows = CHUNK.min(q_grid_size - first);
        let shifted = CMatrix::from_fn(rows, n, |r, i| probe.value(q(first + r) - shifts[i]));
        let evolved: Vec<CMatrix> = kicks
            .iter()
            .map(|&kick| {
                CMatrix::from_fn(rows, n, |r, i| {
                    let x = q(first + r);
                    let translated = Complex64::from_polar(1.0, kick * (x - shifts[i])) * shifted[(r, i)];
                    Complex64::from_polar(1.0, kick * x) * translated
                })
            })
            .collect();
        for k in 0..dim {
            let xk = evolved[k].transpose();
            for l in k..dim {
                sums[k * dim + l] += cgemm(&xk, &evolved[l].map(|z| z.conj()));
            }
        }
    }

    let c = m.state().amps();
    let phi = m.pointer_samples();
    let mut blocks = vec![CMatrix::zeros(n, n); dim * dim];
    for k in 0..dim {
        for l in k..dim {
            let ckl = c[k] * c[l].conj() * h;
            let s = &sums[k * dim + l];
            let block = CMatrix::from_fn(n, n, |i, j| ckl * phi[i] * phi[j].conj() * s[(i, j)]);
            if l != k {
                blocks[l * dim + k] = block.adjoint();
            }
            blocks[k * dim + l] = block;
        }
    }
    CompositeDensity::new(dim, m.grid().clone(), blocks)
}

/// Measured system–pointer coupling: the relative phase of two populated
/// diagonal blocks at neighbouring grid points is `λ_eff (a_k − a_l) Δb / ħ`.
pub fn effective_coupling(m: &MeasurementModel, rho: &CompositeDensity) -> Result<f64> {
    let a = m.observable().eigenvalues();
    let w = m.state().weights();
    let populated: Vec<usize> = (0..a.len()).filter(|&k| w[k] > 1e-12).collect();
    let mut best: Option<(usize, usize)> = None;
    for (x, &k) in populated.iter().enumerate() {
        for &l in &populated[x + 1..] {
            if best.is_none_or(|(bk, bl)| (a[k] - a[l]).abs() > (a[bk] - a[bl]).abs()) {
                best = Some((k, l));
            }
        }
    }
    let (k, l) = best.ok_or_else(|| Error::InvalidState("effective coupling needs two populated branches".into()))?;
    let b = m.grid().points();
    let i = b.len() / 2;
    let j = i + 1;
    let db = b[i] - b[j];
    let spread = (a[k] - a[l]) * db / m.hbar();
    if (m.lambda() * spread).abs() >= PI {
        return Err(Error::Resolution(format!(
            "pointer grid step {:.3} too coarse to resolve the branch phase",
            -db
        )));
    }
    let r = rho.block(k, k)[(i, j)] * rho.block(l, l)[(i, j)].conj();
    Ok(r.arg() / spread)
}
