//! Finite-dimensional quantum state algebra: states, composition, partial
//! trace, purification, channels, POVMs.
//!
//! All values are immutable after construction; every operation is a pure
//! function. Subsystem ordering is explicit in `dims` and operations take
//! index sets, never implicit position conventions.

pub mod channel;
pub mod cq;
pub mod linalg;
pub mod random;
pub mod serial;

pub use channel::{apply_channel, KrausChannel};
pub use cq::{povm_guess_probability, CqState, Povm};
pub use linalg::{CMatrix, CVector};

use crate::error::{Error, Result};
use linalg::{
    basis_vector, cr, hermitian_eigen, is_hermitian, kron, min_eigenvalue, trace, HERM_TOL,
    PSD_TOL, RANK_TOL,
};
use num_complex::Complex64;

/// Dense Hermitian PSD matrix with trace ≤ 1, tagged with the ordered list of
/// subsystem dimensions whose product is the matrix side length.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    /// Validates Hermiticity, positivity, and trace bounds at the module
    /// tolerances and enforces the global dimension cap.
    pub fn new(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let side: usize = dims.iter().product();
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidState("empty or zero subsystem dims".into()));
        }
        let cap = crate::max_dim();
        if side > cap {
            return Err(Error::DimensionCapExceeded { dim: side, cap });
        }
        if matrix.nrows() != side || matrix.ncols() != side {
            return Err(Error::DimensionMismatch {
                expected: side,
                got: matrix.nrows(),
            });
        }
        if !is_hermitian(&matrix, HERM_TOL) {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        let tr = trace(&matrix);
        if tr.im.abs() > HERM_TOL {
            return Err(Error::InvalidState("trace has imaginary part".into()));
        }
        if tr.re < -PSD_TOL || tr.re > 1.0 + PSD_TOL {
            return Err(Error::InvalidState(format!(
                "trace {:.12} outside [0, 1]",
                tr.re
            )));
        }
        let min_eig = min_eigenvalue(&matrix);
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:.3e}",
                min_eig
            )));
        }
        Ok(Self { matrix, dims })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - 1.0).abs() <= PSD_TOL
    }

    /// Basis state `|index⟩⟨index|` on the given subsystem layout.
    pub fn pure_basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let side: usize = dims.iter().product();
        if index >= side {
            return Err(Error::IndexOutOfRange {
                index,
                count: side,
            });
        }
        let mut m = CMatrix::zeros(side, side);
        m[(index, index)] = cr(1.0);
        Self::new(m, dims)
    }

    pub fn from_pure(psi: &PureVector) -> Result<Self> {
        Self::new(linalg::outer(&psi.amplitudes), psi.dims.clone())
    }

    /// Kronecker product; dims concatenate, traces multiply.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::new(kron(&self.matrix, &other.matrix), dims)
    }

    /// Trace out every subsystem not listed in `keep`. The result keeps the
    /// retained subsystems in their original order; the trace is preserved.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        for &k in keep {
            if k >= n {
                return Err(Error::IndexOutOfRange { index: k, count: n });
            }
        }
        let mut keep_sorted: Vec<usize> = keep.to_vec();
        keep_sorted.sort_unstable();
        keep_sorted.dedup();
        let traced: Vec<usize> = (0..n).filter(|i| !keep_sorted.contains(i)).collect();
        let kept_dims: Vec<usize> = keep_sorted.iter().map(|&i| self.dims[i]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&i| self.dims[i]).collect();
        let dk: usize = kept_dims.iter().product();
        let dt: usize = traced_dims.iter().product();

        let strides = strides_of(&self.dims);
        let full_index = |kept_idx: usize, traced_idx: usize| -> usize {
            let kd = decode(kept_idx, &kept_dims);
            let td = decode(traced_idx, &traced_dims);
            let mut idx = 0;
            for (pos, &sub) in keep_sorted.iter().enumerate() {
                idx += kd[pos] * strides[sub];
            }
            for (pos, &sub) in traced.iter().enumerate() {
                idx += td[pos] * strides[sub];
            }
            idx
        };

        let mut out = CMatrix::zeros(dk, dk);
        for r in 0..dk {
            for c in 0..dk {
                let mut acc = Complex64::default();
                for t in 0..dt {
                    acc += self.matrix[(full_index(r, t), full_index(c, t))];
                }
                out[(r, c)] = acc;
            }
        }
        Self::new(out, kept_dims)
    }

    /// Purification via eigendecomposition; the reference system has
    /// dimension equal to the rank. Only normalized states are accepted
    /// (smoothing handles subnormalized states separately).
    pub fn purify(&self) -> Result<PureVector> {
        if !self.is_normalized() {
            return Err(Error::InvalidState(
                "purify requires a normalized state".into(),
            ));
        }
        let (vals, vecs) = hermitian_eigen(&self.matrix);
        let kept: Vec<(f64, usize)> = vals
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > RANK_TOL)
            .map(|(i, &v)| (v, i))
            .collect();
        let rank = kept.len().max(1);
        let d = self.dim();
        let mut amps = CVector::zeros(d * rank);
        for (r, &(val, col)) in kept.iter().enumerate() {
            let v = vecs.column(col);
            let w = val.sqrt();
            for i in 0..d {
                amps[i * rank + r] = v[i].scale(w);
            }
        }
        let mut dims = self.dims.clone();
        dims.push(rank);
        PureVector::new(amps, dims)
    }

    /// Rearrange the subsystem order according to `perm`, where `perm[k]`
    /// names the original subsystem placed at position `k`.
    pub fn permute_subsystems(&self, perm: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        if perm.len() != n {
            return Err(Error::LengthMismatch(format!(
                "permutation length {} vs {} subsystems",
                perm.len(),
                n
            )));
        }
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let map = index_permutation(&self.dims, perm);
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                out[(map[r], map[c])] = self.matrix[(r, c)];
            }
        }
        Self::new(out, new_dims)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    /// Scale the whole operator by `factor ∈ [0, 1]` (subnormalization).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(0.0..=1.0 + PSD_TOL).contains(&factor) {
            return Err(Error::InvalidArgument(format!(
                "scale factor {factor} outside [0, 1]"
            )));
        }
        Self::new(self.matrix.scale(factor), self.dims.clone())
    }
}

/// Complex amplitude vector with a subsystem dimension list.
#[derive(Debug, Clone, PartialEq)]
pub struct PureVector {
    amplitudes: CVector,
    dims: Vec<usize>,
}

impl PureVector {
    pub fn new(amplitudes: CVector, dims: Vec<usize>) -> Result<Self> {
        let side: usize = dims.iter().product();
        if amplitudes.len() != side {
            return Err(Error::DimensionMismatch {
                expected: side,
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if norm > 1.0 + PSD_TOL {
            return Err(Error::InvalidState(format!("norm {norm:.12} above 1")));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Normalized basis state `|index⟩`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let side: usize = dims.iter().product();
        if index >= side {
            return Err(Error::IndexOutOfRange {
                index,
                count: side,
            });
        }
        Self::new(basis_vector(side, index), dims)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= PSD_TOL
    }

    pub fn to_density(&self) -> Result<DensityOperator> {
        DensityOperator::from_pure(self)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::new(self.amplitudes.kronecker(&other.amplitudes), dims)
    }

    pub fn overlap(&self, other: &Self) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// `ω = (1/dim) Σᵢ |i⟩⟨i|`.
pub fn maximally_mixed(dim: usize) -> Result<DensityOperator> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension 0".into()));
    }
    DensityOperator::new(
        CMatrix::identity(dim, dim).scale(1.0 / dim as f64),
        vec![dim],
    )
}

/// `|Φ⟩ = (1/√dim) Σᵢ |i⟩⊗|i⟩` with dims `[dim, dim]`.
pub fn maximally_entangled(dim: usize) -> Result<PureVector> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension 0".into()));
    }
    let mut amps = CVector::zeros(dim * dim);
    let w = 1.0 / (dim as f64).sqrt();
    for i in 0..dim {
        amps[i * dim + i] = cr(w);
    }
    PureVector::new(amps, vec![dim, dim])
}

pub(crate) fn strides_of(dims: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    strides
}

pub(crate) fn decode(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; dims.len()];
    for i in (0..dims.len()).rev() {
        out[i] = index % dims[i];
        index /= dims[i];
    }
    out
}

/// For each flat index of the original layout, the flat index it maps to
/// after reordering subsystems by `perm` (`perm[k]` = original subsystem at
/// new position `k`).
fn index_permutation(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let new_strides = strides_of(&new_dims);
    let total: usize = dims.iter().product();
    (0..total)
        .map(|idx| {
            let multi = decode(idx, dims);
            perm.iter()
                .enumerate()
                .map(|(new_pos, &orig)| multi[orig] * new_strides[new_pos])
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bell() -> DensityOperator {
        maximally_entangled(2).unwrap().to_density().unwrap()
    }

    #[test]
    fn tensor_basis_products() {
        let zero = DensityOperator::pure_basis(vec![2], 0).unwrap();
        let one = DensityOperator::pure_basis(vec![2], 1).unwrap();
        let zo = zero.tensor(&one).unwrap();
        assert_eq!(zo.dims(), &[2, 2]);
        // |01⟩⟨01| sits at flat index 1
        assert_abs_diff_eq!(zo.matrix()[(1, 1)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(zo.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn tensor_dims_and_trace() {
        let a = maximally_mixed(2).unwrap();
        let b = maximally_mixed(3).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.dims(), &[2, 3]);
        assert_eq!(ab.dim(), 6);
        assert_abs_diff_eq!(ab.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn partial_trace_bell_is_maximally_mixed() {
        let reduced = bell().partial_trace(&[0]).unwrap();
        let omega = maximally_mixed(2).unwrap();
        assert!(linalg::max_abs_diff(reduced.matrix(), omega.matrix()) < 1e-12);
    }

    #[test]
    fn partial_trace_product_factorizes() {
        let mut rng = random::rng(7);
        let a = random::random_density(&mut rng, &[3], 3).unwrap();
        let b = random::random_density(&mut rng, &[2], 2).unwrap();
        let ab = a.tensor(&b).unwrap();
        let back = ab.partial_trace(&[0]).unwrap();
        assert!(linalg::max_abs_diff(back.matrix(), a.matrix()) < 1e-10);
    }

    #[test]
    fn partial_trace_keeps_second() {
        let zo = DensityOperator::pure_basis(vec![2, 2], 0b01).unwrap();
        let second = zo.partial_trace(&[1]).unwrap();
        assert_abs_diff_eq!(second.matrix()[(1, 1)].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn purify_maximally_mixed_round_trip() {
        let omega = maximally_mixed(2).unwrap();
        let psi = omega.purify().unwrap();
        assert_eq!(psi.dims(), &[2, 2]);
        let back = psi.to_density().unwrap().partial_trace(&[0]).unwrap();
        assert!(linalg::max_abs_diff(back.matrix(), omega.matrix()) < 1e-9);
    }

    #[test]
    fn purify_pure_state_has_trivial_reference() {
        let plus = PureVector::new(
            CVector::from_vec(vec![cr(1.0 / 2f64.sqrt()), cr(1.0 / 2f64.sqrt())]),
            vec![2],
        )
        .unwrap();
        let rho = plus.to_density().unwrap();
        let psi = rho.purify().unwrap();
        assert_eq!(psi.dims(), &[2, 1]);
        assert_abs_diff_eq!(psi.overlap(&psi).re, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn purify_rejects_subnormalized() {
        let half = maximally_mixed(2).unwrap().scaled(0.5).unwrap();
        assert!(half.purify().is_err());
    }

    #[test]
    fn purify_random_rank2_qutrit_round_trip() {
        let mut rng = random::rng(42);
        let rho = random::random_density(&mut rng, &[3], 2).unwrap();
        let psi = rho.purify().unwrap();
        assert_eq!(psi.dims().last(), Some(&2));
        let back = psi.to_density().unwrap().partial_trace(&[0]).unwrap();
        assert!(linalg::max_abs_diff(back.matrix(), rho.matrix()) < 1e-9);
    }

    #[test]
    fn purify_partial_trace_round_trip_dims_up_to_16() {
        let mut rng = random::rng(11);
        for dims in [vec![2usize], vec![4], vec![2, 3], vec![4, 4], vec![16]] {
            let side: usize = dims.iter().product();
            let rho = random::random_density(&mut rng, &dims, side).unwrap();
            let psi = rho.purify().unwrap();
            let keep: Vec<usize> = (0..dims.len()).collect();
            let back = psi.to_density().unwrap().partial_trace(&keep).unwrap();
            assert!(linalg::max_abs_diff(back.matrix(), rho.matrix()) < 1e-9);
        }
    }

    #[test]
    fn maximally_entangled_marginal() {
        for d in [2usize, 3, 4] {
            let phi = maximally_entangled(d).unwrap();
            let reduced = phi.to_density().unwrap().partial_trace(&[1]).unwrap();
            let omega = maximally_mixed(d).unwrap();
            assert!(linalg::max_abs_diff(reduced.matrix(), omega.matrix()) < 1e-12);
        }
    }

    #[test]
    fn bell_vector_amplitudes() {
        let phi = maximally_entangled(2).unwrap();
        let amps = phi.amplitudes();
        let w = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(amps[0].re, w, epsilon = 1e-12);
        assert_abs_diff_eq!(amps[3].re, w, epsilon = 1e-12);
        assert_abs_diff_eq!(amps[1].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn maximally_mixed_diagonal() {
        let omega = maximally_mixed(2).unwrap();
        assert_abs_diff_eq!(omega.matrix()[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(omega.matrix()[(1, 1)].re, 0.5, epsilon = 1e-15);
        assert!(maximally_mixed(0).is_err());
    }

    #[test]
    fn rejects_non_hermitian_and_negative() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = cr(0.3);
        assert!(DensityOperator::new(m, vec![2]).is_err());
        let mut neg = CMatrix::zeros(2, 2);
        neg[(0, 0)] = cr(1.2);
        neg[(1, 1)] = cr(-0.2);
        assert!(DensityOperator::new(neg, vec![2]).is_err());
    }

    #[test]
    fn permute_subsystems_swaps() {
        let zero = DensityOperator::pure_basis(vec![2], 0).unwrap();
        let one = DensityOperator::pure_basis(vec![2], 1).unwrap();
        let zo = zero.tensor(&one).unwrap();
        let oz = zo.permute_subsystems(&[1, 0]).unwrap();
        let expect = one.tensor(&zero).unwrap();
        assert!(linalg::max_abs_diff(oz.matrix(), expect.matrix()) < 1e-12);
    }

    #[test]
    fn dimension_cap_enforced() {
        let big = CMatrix::identity(512, 512).scale(1.0 / 512.0);
        assert!(matches!(
            DensityOperator::new(big, vec![512]),
            Err(Error::DimensionCapExceeded { .. })
        ));
    }
}
