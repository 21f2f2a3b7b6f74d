//! Dense complex linear algebra helpers shared across modules.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Absolute tolerance for Hermiticity checks (max entry of `M - M†`).
pub const HERM_TOL: f64 = 1e-10;
/// Eigenvalues above `-PSD_TOL` count as non-negative; values in
/// `[-PSD_TOL, 0)` are treated as 0.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as rank-deficient directions.
pub const RANK_TOL: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().sum()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    max_abs_diff(m, &m.adjoint()) <= tol
}

/// Eigendecomposition of a Hermitian matrix. Returns eigenvalues (ascending)
/// and the matrix whose columns are the matching orthonormal eigenvectors.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    // Symmetrize first so accumulated 1e-12-level asymmetry cannot leak
    // imaginary parts into the eigenvalues.
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = m.nrows();
    let mut vecs = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Apply `f` to the eigenvalues of a Hermitian matrix.
pub fn hermitian_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        let col = vecs.column(i);
        let fv = f(v);
        if fv != 0.0 {
            out += (col * col.adjoint()).scale(fv);
        }
    }
    out
}

/// Principal square root of a PSD Hermitian matrix; negative eigenvalues
/// within tolerance are clipped to 0.
pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    hermitian_map(m, |v| if v > 0.0 { v.sqrt() } else { 0.0 })
}

/// Inverse square root on the support of a PSD Hermitian matrix.
pub fn inv_sqrt_psd_support(m: &CMatrix) -> CMatrix {
    hermitian_map(m, |v| if v > RANK_TOL { 1.0 / v.sqrt() } else { 0.0 })
}

/// Trace norm `‖M‖₁ = Σ|λᵢ|` of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|v| v.abs()).sum()
}

/// Projector onto the strictly-positive eigenspace of a Hermitian matrix.
pub fn positive_projector(m: &CMatrix) -> CMatrix {
    hermitian_map(m, |v| if v > 0.0 { 1.0 } else { 0.0 })
}

/// Positive part `M₊` of the Jordan decomposition `M = M₊ - M₋`.
pub fn positive_part(m: &CMatrix) -> CMatrix {
    hermitian_map(m, |v| if v > 0.0 { v } else { 0.0 })
}

pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn basis_vector(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = cr(1.0);
    v
}
