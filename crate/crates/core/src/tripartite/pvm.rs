use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{pointer_states, MeasurementModel};
use crate::error::{Error, Result};
use crate::linalg::{cgemm, hermitian_eigen, CMatrix};
use crate::quantum_core::{hs_norm, kernel_compose, OperatorKernel};

/// Default eigenvalue cut, relative to the largest eigenvalue of each ρ_k.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
const OVERLAP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvmChecks {
    /// Largest `‖Π_k Π_l‖` over k ≠ l.
    pub max_cross: f64,
    /// Largest `‖Π_k Π_k − Π_k‖`, the remainder included.
    pub max_idempotence: f64,
    /// `‖Σ_k Π_k + Π_0 − 1‖`.
    pub completeness: f64,
    /// Largest `‖Π_k ρ_k − ρ_k‖`.
    pub max_state_residual: f64,
    /// Largest overlap between eigenvectors of different ρ_k before the
    /// families are orthogonalized against each other.
    pub raw_max_overlap: f64,
}

impl PvmChecks {
    pub fn within(&self, tol: f64) -> bool {
        self.max_cross <= tol && self.max_idempotence <= tol && self.completeness <= tol && self.max_state_residual <= tol
    }
}

#[derive(Debug, Clone)]
pub struct Pvm {
    /// `Π_k`, projector onto the support of ρ_k.
    pub projectors: Vec<OperatorKernel>,
    /// `Π_0 = 1 − Σ_k Π_k`.
    pub remainder: OperatorKernel,
    pub ranks: Vec<usize>,
    pub checks: PvmChecks,
}

/// Projectors onto the supports of the pointer states, keeping eigenvectors
/// whose eigenvalue exceeds `rank_tol` times the largest one. Requires the
/// pointer states to be mutually orthogonal.
pub fn extract_pvm(m: &MeasurementModel, rank_tol: f64) -> Result<Pvm> {
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::InvalidParameter(format!("rank tolerance must lie in (0, 1), got {rank_tol}")));
    }
    let states = pointer_states(m)?;
    for k in 0..states.len() {
        for l in k + 1..states.len() {
            let overlap = hs_norm(&kernel_compose(&states[k], &states[l])?);
            if overlap > OVERLAP_TOL {
                return Err(Error::Precondition(format!(
                    "pointer states {k} and {l} are not orthogonal: ‖ρ_{k} ρ_{l}‖ = {overlap:.3e}"
                )));
            }
        }
    }
    let mut families = Vec::with_capacity(states.len());
    for state in &states {
        let (values, vectors) = hermitian_eigen(&state.weighted_matrix());
        let top = values.last().copied().unwrap_or(0.0);
        let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > rank_tol * top).collect();
        let relative = keep.iter().map(|&i| values[i] / top).collect();
        families.push((relative, CMatrix::from_fn(vectors.nrows(), keep.len(), |r, c| vectors[(r, keep[c])])));
    }
    let (families, raw_max_overlap) = orthogonalize(families)?;
    let grid = m.grid().clone();
    let ranks = families.iter().map(|f| f.ncols()).collect();
    let projectors = families
        .iter()
        .map(|f| OperatorKernel::from_weighted_matrix(grid.clone(), &cgemm(f, &f.adjoint())))
        .collect::<Result<Vec<_>>>()?;
    let identity = OperatorKernel::identity(grid);
    let mut remainder = identity.clone();
    for p in &projectors {
        remainder = remainder.sub(p)?;
    }

    let mut max_cross = 0.0f64;
    let mut max_idempotence = 0.0f64;
    let mut max_state_residual = 0.0f64;
    for (k, pk) in projectors.iter().enumerate() {
        for (l, pl) in projectors.iter().enumerate() {
            let composed = kernel_compose(pk, pl)?;
            if k == l {
                max_idempotence = max_idempotence.max(hs_norm(&composed.sub(pk)?));
            } else {
                max_cross = max_cross.max(hs_norm(&composed));
            }
        }
        let reproduced = kernel_compose(pk, &states[k])?;
        max_state_residual = max_state_residual.max(hs_norm(&reproduced.sub(&states[k])?));
    }
    max_idempotence = max_idempotence.max(hs_norm(&kernel_compose(&remainder, &remainder)?.sub(&remainder)?));
    let mut total = remainder.clone();
    for p in &projectors {
        total = total.add(p)?;
    }
    let completeness = hs_norm(&total.sub(&identity)?);
    Ok(Pvm {
        projectors,
        remainder,
        ranks,
        checks: PvmChecks { max_cross, max_idempotence, completeness, max_state_residual, raw_max_overlap },
    })
}

/// Makes the eigenvector families mutually orthogonal by Gram–Schmidt over
/// all vectors in order of decreasing relative eigenvalue. Eigenvectors with
/// tiny eigenvalues absorb the discretization error in `ρ_k ρ_l` and overlap
/// across families; ordering by eigenvalue leaves the dominant directions of
/// every ρ_k essentially untouched. Returns the families and the largest
/// cross-family overlap seen before orthogonalization.
fn orthogonalize(families: Vec<(Vec<f64>, CMatrix)>) -> Result<(Vec<CMatrix>, f64)> {
    let n = families.first().map_or(0, |(_, f)| f.nrows());
    let mut raw = 0.0f64;
    for (k, (_, fk)) in families.iter().enumerate() {
        for (_, fl) in &families[k + 1..] {
            raw = raw.max(cgemm(&fk.adjoint(), fl).iter().fold(0.0, |m, z| m.max(z.norm())));
        }
    }
    let mut order: Vec<(f64, usize, usize)> = families
        .iter()
        .enumerate()
        .flat_map(|(k, (rel, _))| rel.iter().enumerate().map(move |(c, &r)| (r, k, c)))
        .collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    if order.len() > n {
        return Err(Error::Precondition(format!(
            "pointer supports need {} dimensions but the grid has {n}",
            order.len()
        )));
    }
    let mut accepted: Vec<DVector<Complex64>> = Vec::with_capacity(order.len());
    let mut owner: Vec<usize> = Vec::with_capacity(order.len());
    for &(rel, k, c) in &order {
        let mut v = families[k].1.column(c).into_owned();
        for _ in 0..2 {
            for u in &accepted {
                let proj = u.dotc(&v);
                v -= u * proj;
            }
        }
        let norm = v.norm();
        if norm < 1e-3 {
            return Err(Error::Precondition(format!(
                "eigenvector of pointer state {k} with relative eigenvalue {rel:.3e} lies in the other supports"
            )));
        }
        accepted.push(v / Complex64::new(norm, 0.0));
        owner.push(k);
    }
    let out = (0..families.len())
        .map(|k| {
            let cols: Vec<&DVector<Complex64>> = accepted.iter().zip(&owner).filter(|(_, &o)| o == k).map(|(v, _)| v).collect();
            CMatrix::from_fn(n, cols.len(), |r, c| cols[c][r])
        })
        .collect();
    Ok((out, raw))
}
