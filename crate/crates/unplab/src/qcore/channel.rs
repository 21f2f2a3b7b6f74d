//! Completely positive trace-preserving maps as Kraus-operator lists.

use super::linalg::{self, cr, kron, CMatrix, HERM_TOL};
use super::{strides_of, DensityOperator};
use crate::error::{Error, Result};

/// Completely positive map given by Kraus operators with input/output
/// dimension metadata. Complete positivity is structural; trace preservation
/// `Σ K†K = 1` is validated to 1e-10.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus: Vec<CMatrix>,
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMatrix>, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Result<Self> {
        let din: usize = in_dims.iter().product();
        let dout: usize = out_dims.iter().product();
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        }
        for k in &kraus {
            if k.nrows() != dout || k.ncols() != din {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operator is {}x{}, expected {}x{}",
                    k.nrows(),
                    k.ncols(),
                    dout,
                    din
                )));
            }
        }
        let mut sum = CMatrix::zeros(din, din);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        if linalg::max_abs_diff(&sum, &CMatrix::identity(din, din)) > HERM_TOL {
            return Err(Error::InvalidChannel(
                "Σ K†K deviates from identity beyond 1e-10".into(),
            ));
        }
        Ok(Self {
            kraus,
            in_dims,
            out_dims,
        })
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn in_dim(&self) -> usize {
        self.in_dims.iter().product()
    }

    pub fn out_dim(&self) -> usize {
        self.out_dims.iter().product()
    }

    pub fn identity(dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        Self::new(vec![CMatrix::identity(d, d)], dims.clone(), dims)
    }

    pub fn unitary(u: CMatrix, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Result<Self> {
        Self::new(vec![u], in_dims, out_dims)
    }

    /// Fully depolarizing channel on one `d`-dimensional system.
    pub fn depolarizing(d: usize) -> Result<Self> {
        let w = 1.0 / (d as f64).sqrt();
        let mut ops = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut k = CMatrix::zeros(d, d);
                k[(i, j)] = cr(w);
                ops.push(k);
            }
        }
        Self::new(ops, vec![d], vec![d])
    }

    /// Computational-basis dephasing on one `d`-dimensional system.
    pub fn dephasing(d: usize) -> Result<Self> {
        let ops = (0..d)
            .map(|i| {
                let mut k = CMatrix::zeros(d, d);
                k[(i, i)] = cr(1.0);
                k
            })
            .collect();
        Self::new(ops, vec![d], vec![d])
    }

    /// `σ ↦ τ ⊗ σ`: appends a fixed state in front of the input.
    pub fn append_front(tau: &DensityOperator, in_dims: Vec<usize>) -> Result<Self> {
        let din: usize = in_dims.iter().product();
        let (vals, vecs) = linalg::hermitian_eigen(tau.matrix());
        let mut ops = Vec::new();
        for (i, &v) in vals.iter().enumerate() {
            if v > linalg::RANK_TOL {
                let col = CMatrix::from_column_slice(tau.dim(), 1, vecs.column(i).as_slice());
                ops.push(kron(&col.scale(v.sqrt()), &CMatrix::identity(din, din)));
            }
        }
        let mut out_dims = tau.dims().to_vec();
        out_dims.extend_from_slice(&in_dims);
        Self::new(ops, in_dims, out_dims)
    }

    /// `σ ↦ σ ⊗ τ`: appends a fixed state after the input.
    pub fn append_back(tau: &DensityOperator, in_dims: Vec<usize>) -> Result<Self> {
        let din: usize = in_dims.iter().product();
        let (vals, vecs) = linalg::hermitian_eigen(tau.matrix());
        let mut ops = Vec::new();
        for (i, &v) in vals.iter().enumerate() {
            if v > linalg::RANK_TOL {
                let col = CMatrix::from_column_slice(tau.dim(), 1, vecs.column(i).as_slice());
                ops.push(kron(&CMatrix::identity(din, din), &col.scale(v.sqrt())));
            }
        }
        let mut out_dims = in_dims.clone();
        out_dims.extend_from_slice(tau.dims());
        Self::new(ops, in_dims, out_dims)
    }

    /// Apply to a state whose full dimension list matches `in_dims`.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.in_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim(),
                got: rho.dim(),
            });
        }
        let dout = self.out_dim();
        let mut out = CMatrix::zeros(dout, dout);
        for k in &self.kraus {
            out += k * rho.matrix() * k.adjoint();
        }
        DensityOperator::new(out, self.out_dims.clone())
    }

    /// Apply to a bare matrix (no state validation on the result).
    pub(crate) fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let dout = self.out_dim();
        let mut out = CMatrix::zeros(dout, dout);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        out
    }
}

/// CNOT unitary on two qubits, control first: `|c,t⟩ ↦ |c, t⊕c⟩`.
pub fn cnot_unitary() -> CMatrix {
    let mut u = CMatrix::zeros(4, 4);
    u[(0, 0)] = cr(1.0);
    u[(1, 1)] = cr(1.0);
    u[(2, 3)] = cr(1.0);
    u[(3, 2)] = cr(1.0);
    u
}

/// Apply `phi` to the subsystems of `rho` listed in `target` (ascending,
/// dims must match `phi.in_dims`). The channel's output subsystems replace
/// the targeted ones as a block at the position of the first target; all
/// untouched subsystems keep their relative order.
pub fn apply_channel(
    phi: &KrausChannel,
    rho: &DensityOperator,
    target: &[usize],
) -> Result<DensityOperator> {
    let n = rho.dims().len();
    let mut targets = target.to_vec();
    targets.sort_unstable();
    targets.dedup();
    if targets.len() != target.len() {
        return Err(Error::InvalidArgument("duplicate target indices".into()));
    }
    for &t in &targets {
        if t >= n {
            return Err(Error::IndexOutOfRange { index: t, count: n });
        }
    }
    let target_dims: Vec<usize> = targets.iter().map(|&t| rho.dims()[t]).collect();
    if target_dims != phi.in_dims {
        return Err(Error::InvalidChannel(format!(
            "channel in_dims {:?} do not match targeted dims {:?}",
            phi.in_dims, target_dims
        )));
    }
    let rest: Vec<usize> = (0..n).filter(|i| !targets.contains(i)).collect();

    // Permute targets to the front.
    let mut to_front: Vec<usize> = targets.clone();
    to_front.extend_from_slice(&rest);
    let fronted = rho.permute_subsystems(&to_front)?;

    let rest_dims: Vec<usize> = rest.iter().map(|&i| rho.dims()[i]).collect();
    let drest: usize = rest_dims.iter().product();
    let eye = CMatrix::identity(drest, drest);
    let mut out = CMatrix::zeros(phi.out_dim() * drest, phi.out_dim() * drest);
    for k in phi.kraus() {
        let lifted = kron(k, &eye);
        out += &lifted * fronted.matrix() * lifted.adjoint();
    }
    let mut fronted_dims = phi.out_dims.clone();
    fronted_dims.extend_from_slice(&rest_dims);
    let result = DensityOperator::new(out, fronted_dims)?;

    // Move the output block to the position of the first target.
    let q = phi.out_dims.len();
    let insert_at = targets[0];
    let mut final_perm: Vec<usize> = Vec::with_capacity(q + rest.len());
    let mut rest_pos = 0;
    for orig in 0..n {
        if orig == insert_at {
            final_perm.extend(0..q);
        }
        if rest.contains(&orig) {
            final_perm.push(q + rest_pos);
            rest_pos += 1;
        }
    }
    if insert_at >= n {
        final_perm.extend(0..q);
    }
    // Positions of subsystems we skipped (the non-first targets) do not
    // appear; `final_perm` must cover all q + rest subsystems.
    debug_assert_eq!(final_perm.len(), q + rest.len());
    result.permute_subsystems(&final_perm)
}

/// Flat-index helper for building controlled unitaries on explicit layouts.
pub fn flat_index(dims: &[usize], multi: &[usize]) -> usize {
    let strides = strides_of(dims);
    multi.iter().zip(strides.iter()).map(|(m, s)| m * s).sum()
}
