//! Dense complex matrix helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

fn split(m: &CMatrix) -> (DMatrix<f64>, DMatrix<f64>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

/// Complex product through four real GEMMs, which nalgebra dispatches to its
/// blocked f64 kernel.
pub fn cgemm(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    CMatrix::from_fn(re.nrows(), re.ncols(), |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
}

/// Eigenvalues (ascending) and matching eigenvector columns of a Hermitian
/// matrix. The input is symmetrized first.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Largest entrywise modulus of `a − b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}
