//! Seeded random states and channels for sweeps and property tests.

use super::linalg::{c, CMatrix};
use super::{CqState, DensityOperator, KrausChannel};
use crate::error::Result;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian entry (Box-Muller).
fn gauss<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn ginibre<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(gauss(rng), gauss(rng)))
}

/// Random rank-`rank` density operator via the Ginibre construction
/// `GG†/tr(GG†)`.
pub fn random_density<R: Rng>(
    rng: &mut R,
    dims: &[usize],
    rank: usize,
) -> Result<DensityOperator> {
    let d: usize = dims.iter().product();
    let g = ginibre(rng, d, rank.clamp(1, d));
    let m = &g * g.adjoint();
    let tr = m.diagonal().sum().re;
    DensityOperator::new(m.scale(1.0 / tr), dims.to_vec())
}

/// Haar-ish random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    let g = ginibre(rng, d, d);
    let qr = g.qr();
    let r_diag = qr.r().diagonal();
    let mut q = qr.q();
    // Fix the phase ambiguity so columns are deterministic in distribution.
    for j in 0..d {
        let z = r_diag[j];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random CPTP channel with `n_kraus` Kraus operators, via a random isometry
/// sliced out of a Haar unitary on `d_out * n_kraus`.
pub fn random_kraus_channel<R: Rng>(
    rng: &mut R,
    d_in: usize,
    d_out: usize,
    n_kraus: usize,
) -> Result<KrausChannel> {
    let big = d_out * n_kraus;
    assert!(big >= d_in, "environment too small for an isometry");
    let u = random_unitary(rng, big);
    // Isometry V: |ψ⟩ ↦ U(|ψ⟩⊗|0⟩): columns 0..d_in of U, rows split into
    // (out, env) blocks; K_k = (I ⊗ ⟨k|) V.
    let mut kraus = Vec::with_capacity(n_kraus);
    for k in 0..n_kraus {
        let mut op = CMatrix::zeros(d_out, d_in);
        for i in 0..d_out {
            for j in 0..d_in {
                op[(i, j)] = u[(i * n_kraus + k, j)];
            }
        }
        kraus.push(op);
    }
    KrausChannel::new(kraus, vec![d_in], vec![d_out])
}

/// Random cq-state: a Dirichlet-ish distribution over `n_symbols` labels with
/// random conditional states of full rank on `side_dims`.
pub fn random_cq<R: Rng>(
    rng: &mut R,
    n_symbols: usize,
    side_dims: &[usize],
    alphabet_bits: Option<u32>,
) -> Result<CqState> {
    let mut weights: Vec<f64> = (0..n_symbols).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let side_dim: usize = side_dims.iter().product();
    let entries: Result<Vec<_>> = weights
        .into_iter()
        .enumerate()
        .map(|(i, p)| Ok((i as u64, p, random_density(rng, side_dims, side_dim)?)))
        .collect();
    CqState::new(entries?, alphabet_bits)
}
