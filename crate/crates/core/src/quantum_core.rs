//! Finite-dimensional system description and discretized operator kernels.
//!
//! An operator on the pointer line is stored as its kernel `K(b_i, b_j)`
//! sampled on a [`PointerGrid`]; integrals over `b` use the grid weights `u_i`.
//! The operator product is `(X∘Y)(b_i, b_j) = Σ_m u_m X(b_i, b_m) Y(b_m, b_j)`
//! and the trace is `Σ_i u_i K(b_i, b_i)`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::quadrature;

const STATE_NORM_TOL: f64 = 1e-12;

/// Non-degenerate spectrum `a_k` of the measured observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemObservable {
    eigenvalues: Vec<f64>,
}

impl SystemObservable {
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidParameter("observable needs at least one eigenvalue".into()));
        }
        if eigenvalues.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("eigenvalues must be finite".into()));
        }
        if eigenvalues.len() >= 2 {
            min_gap(&eigenvalues)?;
        }
        Ok(SystemObservable { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_gap(&self) -> Result<f64> {
        min_gap(&self.eigenvalues)
    }
}

/// Smallest positive difference `a0 = min{a_k − a_l : a_k > a_l}`.
pub fn min_gap(eigenvalues: &[f64]) -> Result<f64> {
    if eigenvalues.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "gap needs at least two eigenvalues, got {}",
            eigenvalues.len()
        )));
    }
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut gap = f64::INFINITY;
    for w in sorted.windows(2) {
        let d = w[1] - w[0];
        if d <= 0.0 {
            return Err(Error::Degeneracy(w[0], w[1]));
        }
        gap = gap.min(d);
    }
    Ok(gap)
}

/// Amplitudes `c_k = ⟨φ_k|ψ0⟩`, unit norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    amps: Vec<Complex64>,
}

impl SystemState {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let n2: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        if (n2 - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::Normalization(format!("Σ|c_k|² = {n2}, expected 1")));
        }
        Ok(SystemState { amps })
    }

    /// Rescales to unit norm; fails for the zero vector.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let n2: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        if !(n2 > 0.0 && n2.is_finite()) {
            return Err(Error::Normalization("state vector has zero norm".into()));
        }
        let s = 1.0 / n2.sqrt();
        Ok(SystemState { amps: amps.into_iter().map(|c| c * s).collect() })
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Branch weights `|c_k|²`.
    pub fn weights(&self) -> Vec<f64> {
        self.amps.iter().map(|c| c.norm_sqr()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// Trapezoid rule on equally spaced points.
    Uniform,
    GaussLegendre,
}

/// Samples `b_i` of the pointer coordinate with quadrature weights `u_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointerGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
    kind: GridKind,
}

impl PointerGrid {
    pub fn new(points: Vec<f64>, weights: Vec<f64>, kind: GridKind) -> Result<Self> {
        if points.len() < 2 || points.len() != weights.len() {
            return Err(Error::InvalidParameter("pointer grid needs >= 2 points with matching weights".into()));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("pointer grid points must be strictly increasing".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter("pointer grid weights must be positive".into()));
        }
        Ok(PointerGrid { points, weights, kind })
    }

    /// `n` equally spaced points on [−B, B] with trapezoid weights.
    pub fn uniform(half_range: f64, n: usize) -> Result<Self> {
        if !(half_range > 0.0) || n < 2 {
            return Err(Error::InvalidParameter(format!(
                "uniform grid needs B > 0 and n >= 2 (got {half_range}, {n})"
            )));
        }
        let h = 2.0 * half_range / (n - 1) as f64;
        let points = (0..n).map(|i| -half_range + h * i as f64).collect();
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        PointerGrid::new(points, weights, GridKind::Uniform)
    }

    /// `n` Gauss–Legendre points on [−B, B].
    pub fn gauss_legendre(half_range: f64, n: usize) -> Result<Self> {
        if !(half_range > 0.0) || n < 2 {
            return Err(Error::InvalidParameter(format!(
                "Gauss-Legendre grid needs B > 0 and n >= 2 (got {half_range}, {n})"
            )));
        }
        let r = quadrature::gauss_legendre_on(n, -half_range, half_range);
        PointerGrid::new(r.nodes, r.weights, GridKind::GaussLegendre)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn half_range(&self) -> f64 {
        self.points[0].abs().max(self.points[self.points.len() - 1].abs())
    }

    /// Same grid with twice the resolution over the same range.
    pub fn refined(&self) -> Result<Self> {
        match self.kind {
            GridKind::Uniform => PointerGrid::uniform(self.half_range(), 2 * self.len() - 1),
            GridKind::GaussLegendre => PointerGrid::gauss_legendre(self.half_range(), 2 * self.len()),
        }
    }
}

fn same_grid(a: &Arc<PointerGrid>, b: &Arc<PointerGrid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "kernels live on different grids ({} vs {} points)",
            a.len(),
            b.len()
        )))
    }
}

/// Discretized integral kernel on a pointer grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorKernel {
    grid: Arc<PointerGrid>,
    entries: CMatrix,
    hermitian: bool,
}

impl OperatorKernel {
    pub fn new(grid: Arc<PointerGrid>, entries: CMatrix) -> Result<Self> {
        let n = grid.len();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::GridMismatch(format!(
                "kernel is {}x{} but grid has {n} points",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("kernel has non-finite entries".into()));
        }
        Ok(OperatorKernel { grid, entries, hermitian: false })
    }

    /// Like [`new`](Self::new) but asserts `max|K − K†| ≤ 1e−10`.
    pub fn new_hermitian(grid: Arc<PointerGrid>, entries: CMatrix) -> Result<Self> {
        let mut k = OperatorKernel::new(grid, entries)?;
        let r = k.hermiticity_residual();
        if r > 1e-10 {
            return Err(Error::InvalidState(format!("kernel is not Hermitian: residual {r:e}")));
        }
        k.hermitian = true;
        Ok(k)
    }

    /// The kernel `δ_ij / u_i` of the identity operator on the grid.
    pub fn identity(grid: Arc<PointerGrid>) -> Self {
        let n = grid.len();
        let entries = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(1.0 / grid.weights()[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        OperatorKernel { grid, entries, hermitian: true }
    }

    /// Rank-one kernel `v(b_i) conj(v(b_j))`.
    pub fn outer(grid: Arc<PointerGrid>, v: &[Complex64]) -> Result<Self> {
        let n = grid.len();
        if v.len() != n {
            return Err(Error::GridMismatch(format!("vector has {} samples, grid {n}", v.len())));
        }
        let entries = CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj());
        Ok(OperatorKernel { grid, entries, hermitian: true })
    }

    pub fn grid(&self) -> &Arc<PointerGrid> {
        &self.grid
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn hermiticity_residual(&self) -> f64 {
        linalg::max_abs_diff(&self.entries, &self.entries.adjoint())
    }

    /// `Σ_i u_i K(b_i, b_i)`.
    pub fn trace(&self) -> Complex64 {
        self.grid
            .weights()
            .iter()
            .enumerate()
            .fold(Complex64::new(0.0, 0.0), |acc, (i, &u)| acc + self.entries[(i, i)] * u)
    }

    /// `U^{1/2} K U^{1/2}`: the matrix of the operator in the orthonormal
    /// basis of weighted grid functions.
    pub fn weighted_matrix(&self) -> CMatrix {
        let s: Vec<f64> = self.grid.weights().iter().map(|u| u.sqrt()).collect();
        CMatrix::from_fn(self.entries.nrows(), self.entries.ncols(), |i, j| self.entries[(i, j)] * (s[i] * s[j]))
    }

    /// Inverse of [`weighted_matrix`](Self::weighted_matrix).
    pub fn from_weighted_matrix(grid: Arc<PointerGrid>, m: &CMatrix) -> Result<Self> {
        let s: Vec<f64> = grid.weights().iter().map(|u| 1.0 / u.sqrt()).collect();
        let entries = CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (s[i] * s[j]));
        OperatorKernel::new(grid, entries)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        OperatorKernel { grid: self.grid.clone(), entries: &self.entries * c, hermitian: self.hermitian && c.im == 0.0 }
    }

    pub fn sub(&self, other: &OperatorKernel) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        OperatorKernel::new(self.grid.clone(), &self.entries - &other.entries)
    }

    pub fn add(&self, other: &OperatorKernel) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        OperatorKernel::new(self.grid.clone(), &self.entries + &other.entries)
    }
}

/// Quadrature Hilbert–Schmidt inner product `Σ_{ij} u_i u_j conj(x_ij) y_ij`.
pub fn hs_inner(x: &OperatorKernel, y: &OperatorKernel) -> Result<Complex64> {
    same_grid(&x.grid, &y.grid)?;
    let u = x.grid.weights();
    let n = u.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let mut col = Complex64::new(0.0, 0.0);
        for i in 0..n {
            col += x.entries[(i, j)].conj() * y.entries[(i, j)] * u[i];
        }
        acc += col * u[j];
    }
    Ok(acc)
}

/// `sqrt(hs_inner(x, x))`.
pub fn hs_norm(x: &OperatorKernel) -> f64 {
    let u = x.grid.weights();
    let n = u.len();
    let mut acc = 0.0;
    for j in 0..n {
        let mut col = 0.0;
        for i in 0..n {
            col += x.entries[(i, j)].norm_sqr() * u[i];
        }
        acc += col * u[j];
    }
    acc.sqrt()
}

/// Operator product `Σ_m u_m x(b_i, b_m) y(b_m, b_j)`.
pub fn kernel_compose(x: &OperatorKernel, y: &OperatorKernel) -> Result<OperatorKernel> {
    same_grid(&x.grid, &y.grid)?;
    let u = x.grid.weights();
    let mut xu = x.entries.clone();
    for (m, &w) in u.iter().enumerate() {
        xu.column_mut(m).scale_mut(w);
    }
    OperatorKernel::new(x.grid.clone(), linalg::cgemm(&xu, &y.entries))
}

/// System⊗pointer density stored as N×N blocks of pointer kernels; block
/// (k, l) holds `⟨φ_k, b_i| ρ |φ_l, b_j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeDensity {
    dim: usize,
    grid: Arc<PointerGrid>,
    blocks: Vec<CMatrix>,
}

/// Invariant diagnostics of a [`CompositeDensity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityDiagnostics {
    pub hermiticity_residual: f64,
    pub trace: f64,
    pub trace_imag: f64,
    pub min_eigenvalue: f64,
}

impl DensityDiagnostics {
    /// Hermitian within 1e−10, unit trace within 1e−8, eigenvalues ≥ −1e−8.
    pub fn is_valid(&self) -> bool {
        self.hermiticity_residual <= 1e-10
            && (self.trace - 1.0).abs() <= 1e-8
            && self.trace_imag.abs() <= 1e-8
            && self.min_eigenvalue >= -1e-8
    }
}

impl CompositeDensity {
    /// `blocks` in row-major (k, l) order.
    pub fn new(dim: usize, grid: Arc<PointerGrid>, blocks: Vec<CMatrix>) -> Result<Self> {
        if dim == 0 || blocks.len() != dim * dim {
            return Err(Error::InvalidParameter(format!(
                "expected {} blocks for dimension {dim}, got {}",
                dim * dim,
                blocks.len()
            )));
        }
        let n = grid.len();
        if blocks.iter().any(|b| b.nrows() != n || b.ncols() != n) {
            return Err(Error::GridMismatch("block shape does not match grid".into()));
        }
        Ok(CompositeDensity { dim, grid, blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &Arc<PointerGrid> {
        &self.grid
    }

    pub fn block(&self, k: usize, l: usize) -> &CMatrix {
        &self.blocks[k * self.dim + l]
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block_kernel(&self, k: usize, l: usize) -> OperatorKernel {
        OperatorKernel { grid: self.grid.clone(), entries: self.block(k, l).clone(), hermitian: k == l }
    }

    pub(crate) fn blocks_mut(&mut self) -> &mut [CMatrix] {
        &mut self.blocks
    }

    /// Weighted trace of block (k, k).
    pub fn branch_weight(&self, k: usize) -> f64 {
        self.block_kernel(k, k).trace().re
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).fold(Complex64::new(0.0, 0.0), |acc, k| acc + self.block_kernel(k, k).trace())
    }

    /// Largest HS norm among the blocks with k ≠ l.
    pub fn max_offdiag_norm(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.dim {
            for l in 0..self.dim {
                if k != l {
                    worst = worst.max(hs_norm(&self.block_kernel(k, l)));
                }
            }
        }
        worst
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.dim {
            for l in k..self.dim {
                worst = worst.max(linalg::max_abs_diff(self.block(k, l), &self.block(l, k).adjoint()));
            }
        }
        worst
    }

    /// `tr(ρ∘ρ)`.
    pub fn purity(&self) -> f64 {
        let u = self.grid.weights();
        let n = u.len();
        let mut acc = 0.0;
        for k in 0..self.dim {
            for l in 0..self.dim {
                let a = self.block(k, l);
                let b = self.block(l, k);
                for i in 0..n {
                    for j in 0..n {
                        acc += (a[(i, j)] * b[(j, i)]).re * u[i] * u[j];
                    }
                }
            }
        }
        acc
    }

    /// Full (N·n)² matrix in the weighted orthonormal basis.
    pub fn weighted_matrix(&self) -> CMatrix {
        let n = self.grid.len();
        let s: Vec<f64> = self.grid.weights().iter().map(|u| u.sqrt()).collect();
        let size = self.dim * n;
        CMatrix::from_fn(size, size, |r, c| {
            let (k, i) = (r / n, r % n);
            let (l, j) = (c / n, c % n);
            self.block(k, l)[(i, j)] * (s[i] * s[j])
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = linalg::hermitian_eigen(&self.weighted_matrix());
        vals[0]
    }

    pub fn diagnostics(&self) -> DensityDiagnostics {
        let t = self.trace();
        DensityDiagnostics {
            hermiticity_residual: self.hermiticity_residual(),
            trace: t.re,
            trace_imag: t.im,
            min_eigenvalue: self.min_eigenvalue(),
        }
    }

    /// Largest entrywise deviation from `other` across all blocks.
    pub fn max_entry_diff(&self, other: &CompositeDensity) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::InvalidParameter("densities differ in system dimension".into()));
        }
        same_grid(&self.grid, &other.grid)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .fold(0.0f64, |m, (a, b)| m.max(linalg::max_abs_diff(a, b))))
    }
}

/// Real and imaginary parts of a matrix, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&CMatrix> for MatrixRecord {
    fn from(m: &CMatrix) -> Self {
        let (r, c) = m.shape();
        let mut re = Vec::with_capacity(r * c);
        let mut im = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        MatrixRecord { re, im }
    }
}

impl MatrixRecord {
    fn to_matrix(&self, n: usize) -> Result<CMatrix> {
        if self.re.len() != n * n || self.im.len() != n * n {
            return Err(Error::GridMismatch("matrix record does not match grid size".into()));
        }
        Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new(self.re[i * n + j], self.im[i * n + j])))
    }
}

/// JSON form of an [`OperatorKernel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelRecord {
    pub grid: PointerGrid,
    pub hermitian: bool,
    pub entries: MatrixRecord,
}

impl Serialize for OperatorKernel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KernelRecord { grid: (*self.grid).clone(), hermitian: self.hermitian, entries: (&self.entries).into() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorKernel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = KernelRecord::deserialize(d)?;
        let n = r.grid.len();
        let grid = Arc::new(r.grid);
        let m = r.entries.to_matrix(n).map_err(serde::de::Error::custom)?;
        let k = if r.hermitian { OperatorKernel::new_hermitian(grid, m) } else { OperatorKernel::new(grid, m) };
        k.map_err(serde::de::Error::custom)
    }
}

/// JSON form of a [`CompositeDensity`]: blocks in (k, l) row-major order,
/// each block row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityRecord {
    pub dim: usize,
    pub grid: PointerGrid,
    pub blocks: Vec<MatrixRecord>,
}

impl Serialize for CompositeDensity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DensityRecord {
            dim: self.dim,
            grid: (*self.grid).clone(),
            blocks: self.blocks.iter().map(MatrixRecord::from).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CompositeDensity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = DensityRecord::deserialize(d)?;
        let n = r.grid.len();
        let blocks = r
            .blocks
            .iter()
            .map(|b| b.to_matrix(n))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        CompositeDensity::new(r.dim, Arc::new(r.grid), blocks).map_err(serde::de::Error::custom)
    }
}

/// Real N×N matrix helper used for Gram matrices.
pub type RealMatrix = DMatrix<f64>;
