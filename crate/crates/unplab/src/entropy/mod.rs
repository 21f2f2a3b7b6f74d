//! Entropy computations: optimal guessing probability with certificates,
//! min-entropy, smooth-min-entropy lower bounds, von Neumann conditional
//! entropy and conditional mutual information, and unpredictability-entropy
//! interval estimation. Logs are base 2 throughout; entropies in bits.

pub mod guess;

pub use guess::{
    guessing_probability, min_entropy, smooth_min_entropy_lower, smoothing_candidates,
    unpredictability_interval, EntropyInterval, EntropyQuery, GuessCertificate, MinEntropy,
    SmoothMinEntropyLower, UnpredictabilityReport, DUAL_FEAS_TOL, SOLVER_GAP_TOL,
};

use crate::error::{Error, Result};
use crate::metrics::{purified_distance, AdversaryFamily};
use crate::qcore::linalg::{CMatrix, CVector, RANK_TOL};
use crate::qcore::{CqState, DensityOperator, PureVector};
use serde::{Deserialize, Serialize};

/// Von Neumann entropy `H(ρ) = −Σ λ log₂ λ` over eigenvalues above 1e-14.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    if !rho.is_normalized() {
        return Err(Error::InvalidState(
            "entropy requires a normalized state".into(),
        ));
    }
    Ok(rho
        .eigenvalues()
        .into_iter()
        .filter(|&v| v > 1e-14)
        .map(|v| -v * v.log2())
        .sum())
}

/// `H(A|B) = H(AB) − H(B)` where B is the listed conditioning subsystem set
/// (empty set means unconditional entropy).
pub fn conditional_entropy(rho: &DensityOperator, cond: &[usize]) -> Result<f64> {
    let h_all = von_neumann_entropy(rho)?;
    if cond.is_empty() {
        return Ok(h_all);
    }
    let h_cond = von_neumann_entropy(&rho.partial_trace(cond)?)?;
    Ok(h_all - h_cond)
}

/// Conditional mutual information `I(A:B|C) = H(AC) + H(BC) − H(ABC) − H(C)`
/// over the given disjoint subsystem groups; subsystems outside the groups
/// are traced out first. Strong subadditivity keeps this ≥ 0 up to numerics.
pub fn cmi(rho: &DensityOperator, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
    let mut all: Vec<usize> = Vec::new();
    for group in [a, b, c] {
        for &i in group {
            if all.contains(&i) {
                return Err(Error::InvalidArgument(
                    "subsystem groups must be disjoint".into(),
                ));
            }
            all.push(i);
        }
    }
    let mut keep = all.clone();
    keep.sort_unstable();
    let reduced = rho.partial_trace(&keep)?;
    // Re-map group indices into the reduced layout.
    let pos = |set: &[usize]| -> Vec<usize> {
        set.iter()
            .map(|i| keep.iter().position(|k| k == i).unwrap())
            .collect()
    };
    let (ra, rb, rc) = (pos(a), pos(b), pos(c));
    let union = |x: &[usize], y: &[usize]| -> Vec<usize> {
        let mut v: Vec<usize> = x.iter().chain(y.iter()).copied().collect();
        v.sort_unstable();
        v
    };
    let h = |subs: &[usize]| -> Result<f64> {
        if subs.is_empty() {
            return Ok(0.0);
        }
        von_neumann_entropy(&reduced.partial_trace(subs)?)
    };
    let h_ac = h(&union(&ra, &rc))?;
    let h_bc = h(&union(&rb, &rc))?;
    let h_abc = von_neumann_entropy(&reduced)?;
    let h_c = h(&rc)?;
    Ok(h_ac + h_bc - h_abc - h_c)
}

/// Extend `σ_A` to `σ_AB` with `Tr_B σ_AB = σ_A` and
/// `Δ_P(ρ_AB, σ_AB) ≤ Δ_P(ρ_A, σ_A)`, via Uhlmann-paired purifications:
/// purify ρ_AB, choose the purification of σ_A on the same purifying space
/// achieving the fidelity maximum, then trace out the reference.
///
/// `σ_A` must match the leading subsystems of `ρ_AB`.
pub fn extend_state(
    sigma_a: &DensityOperator,
    rho_ab: &DensityOperator,
) -> Result<DensityOperator> {
    let na = sigma_a.dims().len();
    if rho_ab.dims().len() < na || &rho_ab.dims()[..na] != sigma_a.dims() {
        return Err(Error::DimensionMismatch {
            expected: sigma_a.dim(),
            got: rho_ab.dim(),
        });
    }
    let da = sigma_a.dim();
    let db: usize = rho_ab.dims()[na..].iter().product();

    // Purification |φ⟩ of ρ_AB on (A, B, R); viewed as a purification of
    // ρ_A with purifying space C = B⊗R, padded so dim C ≥ dim A.
    let phi = rho_ab.purify()?;
    let dr = *phi.dims().last().unwrap();
    let dr_padded = if db * dr < da { da.div_ceil(db) } else { dr };
    let dc = db * dr_padded;
    let mut x_rho = CMatrix::zeros(da, dc);
    for ia in 0..da {
        for jb in 0..db {
            for r in 0..dr {
                x_rho[(ia, jb * dr_padded + r)] = phi.amplitudes()[(ia * db + jb) * dr + r];
            }
        }
    }

    // Uhlmann pairing: maximize |tr(X_ρ† √σ U)| over partial isometries U
    // with UU† spanning supp σ. The maximizer comes from the SVD of
    // M = X_ρ† √σ, completed orthonormally on any leftover support.
    let sqrt_sigma = crate::qcore::linalg::sqrt_psd(sigma_a.matrix());
    let m = x_rho.adjoint() * &sqrt_sigma; // dc × da
    let svd = m.clone().svd(true, true);
    let u_svd = svd.u.as_ref().unwrap(); // dc × min
    let vt = svd.v_t.as_ref().unwrap(); // min × da
    let rank_m = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_TOL)
        .count();

    // U = Σᵢ wᵢ qᵢ† with wᵢ = right singular vectors (in A), qᵢ = left (in C).
    let mut w_cols: Vec<CVector> = (0..rank_m)
        .map(|i| CVector::from_iterator(da, vt.row(i).iter().map(|z| z.conj())))
        .collect();
    let mut q_cols: Vec<CVector> = (0..rank_m)
        .map(|i| CVector::from_column_slice(u_svd.column(i).as_slice()))
        .collect();

    // Complete the w-basis across the rest of supp σ and pair with fresh
    // orthonormal directions in C.
    let (sig_vals, sig_vecs) = crate::qcore::linalg::hermitian_eigen(sigma_a.matrix());
    for (i, &v) in sig_vals.iter().enumerate() {
        if v <= RANK_TOL {
            continue;
        }
        let cand = CVector::from_column_slice(sig_vecs.column(i).as_slice());
        if let Some(w) = gram_schmidt(&cand, &w_cols) {
            if let Some(q) = fresh_direction(dc, &q_cols) {
                w_cols.push(w);
                q_cols.push(q);
            }
        }
    }

    let mut u = CMatrix::zeros(da, dc);
    for (w, q) in w_cols.iter().zip(q_cols.iter()) {
        u += w * q.adjoint();
    }
    let x_sigma = &sqrt_sigma * u; // da × dc

    let mut amps = CVector::zeros(da * db * dr_padded);
    for ia in 0..da {
        for jb in 0..db {
            for r in 0..dr_padded {
                amps[(ia * db + jb) * dr_padded + r] = x_sigma[(ia, jb * dr_padded + r)];
            }
        }
    }
    let mut dims = rho_ab.dims().to_vec();
    dims.push(dr_padded);
    let psi = PureVector::new(amps, dims)?;
    let keep: Vec<usize> = (0..rho_ab.dims().len()).collect();
    psi.to_density()?.partial_trace(&keep)
}

fn gram_schmidt(candidate: &CVector, basis: &[CVector]) -> Option<CVector> {
    let mut v = candidate.clone();
    for b in basis {
        let coeff = b.dotc(&v);
        v -= b * coeff;
    }
    let n = v.norm();
    if n > 1e-9 {
        Some(v.unscale(n))
    } else {
        None
    }
}

fn fresh_direction(dim: usize, basis: &[CVector]) -> Option<CVector> {
    for i in 0..dim {
        let cand = crate::qcore::linalg::basis_vector(dim, i);
        if let Some(v) = gram_schmidt(&cand, basis) {
            return Some(v);
        }
    }
    None
}

/// Both sides of the leakage chain rule at s = ∞ plus the slack
/// `H(X|BC) − H(X|B) + 2ℓ`, and optionally interval-form endpoints at a
/// finite budget.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainRuleReport {
    pub h_x_bc: f64,
    pub h_x_b: f64,
    pub ell: f64,
    pub slack: f64,
    pub interval_bc: Option<EntropyInterval>,
    pub interval_b: Option<EntropyInterval>,
    /// Conservative finite-budget slack `upper(X|BC) − lower(X|B) + 2ℓ`.
    pub interval_slack: Option<f64>,
}

/// Check `H(X|BC) ≥ H(X|B) − 2ℓ` where C is the listed subset of the side
/// subsystems and `ℓ = log₂ dim(C)`. At s = ∞ the unpredictability entropy
/// collapses to min-entropy, which is what the exact fields report.
pub fn verify_chain_rule(
    state: &CqState,
    c_subsystems: &[usize],
    epsilon: f64,
    family: Option<&AdversaryFamily>,
) -> Result<(ChainRuleReport, Vec<GuessCertificate>)> {
    let n_side = state.side_dims().len();
    for &c in c_subsystems {
        if c >= n_side {
            return Err(Error::IndexOutOfRange {
                index: c,
                count: n_side,
            });
        }
    }
    let b_subsystems: Vec<usize> = (0..n_side)
        .filter(|i| !c_subsystems.contains(i))
        .collect();
    let dim_c: usize = c_subsystems
        .iter()
        .map(|&i| state.side_dims()[i])
        .product();
    let ell = (dim_c as f64).log2();

    let me_bc = min_entropy(state)?;
    let state_b = state.side_partial_trace(&b_subsystems)?;
    let me_b = min_entropy(&state_b)?;
    let slack = me_bc.bits - me_b.bits + 2.0 * ell;

    let mut report = ChainRuleReport {
        h_x_bc: me_bc.bits,
        h_x_b: me_b.bits,
        ell,
        slack,
        interval_bc: None,
        interval_b: None,
        interval_slack: None,
    };
    let mut certs = vec![me_bc.certificate, me_b.certificate];

    if let Some(family) = family {
        let q_bc = EntropyQuery::new(state.clone(), epsilon, family.budget())?;
        let q_b = EntropyQuery::new(state_b, epsilon, family.budget())?;
        let rep_bc = unpredictability_interval(&q_bc, family)?;
        let rep_b = unpredictability_interval(&q_b, family)?;
        report.interval_slack = Some(rep_bc.interval.upper - rep_b.interval.lower + 2.0 * ell);
        report.interval_bc = Some(rep_bc.interval);
        report.interval_b = Some(rep_b.interval);
        certs.extend(rep_bc.certificates);
        certs.extend(rep_b.certificates);
    }
    Ok((report, certs))
}

/// Witness check for the extension property: the constructed extension must
/// not increase the purified distance.
pub fn extension_property_residual(
    sigma_a: &DensityOperator,
    rho_ab: &DensityOperator,
) -> Result<f64> {
    let na = sigma_a.dims().len();
    let sigma_ab = extend_state(sigma_a, rho_ab)?;
    let keep: Vec<usize> = (0..na).collect();
    let rho_a = rho_ab.partial_trace(&keep)?;
    let d_marginal = purified_distance(&rho_a, sigma_a)?;
    let d_joint = purified_distance(rho_ab, &sigma_ab)?;
    Ok(d_joint - d_marginal)
}
