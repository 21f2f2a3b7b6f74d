//! λ-bounded quantum leakage channels, their validators, the CNOT-copy
//! impossibility demo, Stinespring dilation, and chain-rule degradation
//! measurement.
//!
//! A leakage channel is the composition of a pre-processing map ψ on the
//! adversary side E and a leak map Λ that appends a register L of dimension
//! at most 2^λ while leaving the (A, E′) marginal invariant. The state under
//! test is classical on A, so Λ is represented as a classically-controlled
//! family of channels E′ → (L, E′); marginal invariance is checked on the
//! specific state, not as an operator identity. Register order after leakage
//! is (A, L, E′).

use crate::entropy::{min_entropy, GuessCertificate};
use crate::error::{Error, Result};
use crate::qcore::linalg::{self, cr, CMatrix};
use crate::qcore::serial::KrausChannelJson;
use crate::qcore::{CqState, DensityOperator, KrausChannel};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Leak map Λ: per-symbol channels from E′ to (L, E′); the L register is the
/// first output subsystem.
#[derive(Debug, Clone)]
pub enum LeakMap {
    /// One channel applied for every symbol.
    Uniform(KrausChannel),
    /// Classically controlled on the source symbol.
    PerSymbol(BTreeMap<u64, KrausChannel>),
}

impl LeakMap {
    fn channel_for(&self, symbol: u64) -> Option<&KrausChannel> {
        match self {
            LeakMap::Uniform(c) => Some(c),
            LeakMap::PerSymbol(map) => map.get(&symbol),
        }
    }

    fn any_channel(&self) -> &KrausChannel {
        match self {
            LeakMap::Uniform(c) => c,
            LeakMap::PerSymbol(map) => map.values().next().expect("non-empty leak map"),
        }
    }
}

/// Composed pair (ψ on E, Λ appending L) with a declared leakage bound λ and
/// a declared circuit size for ψ (`None` = unbounded).
#[derive(Debug, Clone)]
pub struct LeakageChannel {
    pub pre_process: Option<KrausChannel>,
    pub leak: LeakMap,
    pub lambda: f64,
    pub gate_cost_t: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeakageDiagnostics {
    pub valid: bool,
    pub dim_l: usize,
    pub lambda: f64,
    /// `‖Tr_L Λ(ρ_{AE′}) − ρ_{AE′}‖₁` on the state under test.
    pub invariance_residual: f64,
    pub failed_clause: Option<String>,
}

impl LeakageChannel {
    pub fn new(
        pre_process: Option<KrausChannel>,
        leak: LeakMap,
        lambda: f64,
        gate_cost_t: Option<u64>,
    ) -> Self {
        Self {
            pre_process,
            leak,
            lambda,
            gate_cost_t,
        }
    }

    /// Dimension of the appended L register (first output subsystem of Λ).
    pub fn dim_l(&self) -> usize {
        self.leak.any_channel().out_dims()[0]
    }

    /// λ = 0 channel that appends an untouched |0⟩_L of dimension 1 after an
    /// optional pre-processing stage.
    pub fn trivial(e_dims: Vec<usize>, pre: Option<KrausChannel>) -> Result<Self> {
        let l = DensityOperator::pure_basis(vec![1], 0)?;
        let chan = KrausChannel::append_front(&l, e_dims)?;
        Ok(Self::new(pre, LeakMap::Uniform(chan), 0.0, Some(0)))
    }

    /// λ = 1 channel that appends a fresh |0⟩ qubit carrying no information.
    pub fn junk_qubit(e_dims: Vec<usize>) -> Result<Self> {
        let l = DensityOperator::pure_basis(vec![2], 0)?;
        let chan = KrausChannel::append_front(&l, e_dims)?;
        Ok(Self::new(None, LeakMap::Uniform(chan), 1.0, Some(0)))
    }

    /// Classical leak of `f(x) = (x >> bit) & 1` into a qubit L.
    pub fn classical_bit(symbols: &[u64], bit: u32, e_dims: Vec<usize>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &x in symbols {
            let value = ((x >> bit) & 1) as usize;
            let l = DensityOperator::pure_basis(vec![2], value)?;
            map.insert(x, KrausChannel::append_front(&l, e_dims.clone())?);
        }
        Ok(Self::new(None, LeakMap::PerSymbol(map), 1.0, Some(1)))
    }

    /// Superdense leak: valid only when every conditional on E′ is the
    /// maximally mixed qubit. Discards E′ and prepares the Bell state
    /// selected by the two low bits of x on (L, E′), so a single leaked
    /// qubit hands the adversary both bits — the tightness witness for the
    /// 2λ chain-rule cost.
    pub fn superdense(symbols: &[u64]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &x in symbols {
            map.insert(x, bell_preparation_channel(x & 0b11)?);
        }
        Ok(Self::new(None, LeakMap::PerSymbol(map), 1.0, Some(2)))
    }

    /// The Lemma-8 copy attack as a (rejected) leakage channel: CNOTs the
    /// source bits straight onto E′ with no L register at all.
    pub fn cnot_copy_attack(symbols: &[u64], bits: u32) -> Result<Self> {
        let d = 1usize << bits;
        let mut map = BTreeMap::new();
        for &x in symbols {
            // X^x pattern: permutation |e⟩ → |e ⊕ x⟩ on E′, trivial L.
            let mut u = CMatrix::zeros(d, d);
            for e in 0..d {
                u[(e ^ (x as usize & (d - 1)), e)] = cr(1.0);
            }
            map.insert(x, KrausChannel::new(vec![u], vec![d], vec![1, d])?);
        }
        Ok(Self::new(None, LeakMap::PerSymbol(map), 0.0, Some(0)))
    }
}

fn bell_preparation_channel(x: u64) -> Result<KrausChannel> {
    // |Bell_x⟩ on (L, E′): (I ⊗ X^w Z^z)|Φ+⟩ with x = 2z + w.
    let z = (x >> 1) & 1;
    let w = x & 1;
    let mut bell = vec![linalg::c(0.0, 0.0); 4];
    let amp = 1.0 / 2f64.sqrt();
    for i in 0..2usize {
        let j = i ^ (w as usize);
        let sign = if z == 1 && j == 1 { -amp } else { amp };
        bell[i * 2 + j] = cr(sign);
    }
    let kraus = (0..2)
        .map(|j| {
            let mut k = CMatrix::zeros(4, 2);
            for (row, &b) in bell.iter().enumerate() {
                k[(row, j)] = b;
            }
            k
        })
        .collect();
    KrausChannel::new(kraus, vec![2], vec![2, 2])
}

/// Check the decomposition constraints and the marginal invariance of a
/// leakage channel on the specific cq-state under test.
pub fn validate_leakage_channel(
    chan: &LeakageChannel,
    state: &CqState,
) -> Result<LeakageDiagnostics> {
    let after_pre = match &chan.pre_process {
        Some(psi) => state.apply_to_side(psi)?,
        None => state.clone(),
    };
    let e_dims = after_pre.side_dims().to_vec();

    let mut diag = LeakageDiagnostics {
        valid: true,
        dim_l: chan.dim_l(),
        lambda: chan.lambda,
        invariance_residual: 0.0,
        failed_clause: None,
    };

    // Clause: the leak map covers the alphabet and acts on E′ only.
    for (x, _, _) in after_pre.iter() {
        let Some(leak) = chan.leak.channel_for(x) else {
            diag.valid = false;
            diag.failed_clause = Some(format!("leak map missing symbol {x}"));
            return Ok(diag);
        };
        if leak.in_dims() != e_dims.as_slice() {
            return Err(Error::DimensionMismatch {
                expected: after_pre.side_dim(),
                got: leak.in_dim(),
            });
        }
        if leak.out_dims().len() != e_dims.len() + 1
            || leak.out_dims()[1..] != *e_dims.as_slice()
        {
            diag.valid = false;
            diag.failed_clause = Some(
                "leak map must append one L register and keep the E′ layout".into(),
            );
            return Ok(diag);
        }
        if leak.out_dims()[0] != chan.dim_l() {
            diag.valid = false;
            diag.failed_clause = Some("inconsistent L dimension across symbols".into());
            return Ok(diag);
        }
    }

    // Clause: dim(L) ≤ 2^λ.
    if (chan.dim_l() as f64) > chan.lambda.exp2() + 1e-9 {
        diag.valid = false;
        diag.failed_clause = Some(format!(
            "dim(L) = {} exceeds 2^λ = {}",
            chan.dim_l(),
            chan.lambda.exp2()
        ));
        return Ok(diag);
    }

    // Clause: marginal invariance Tr_L Λ(ρ_{AE′}) = ρ_{AE′} on this state.
    let mut residual = 0.0;
    for (x, p, rho) in after_pre.iter() {
        let leak = chan.leak.channel_for(x).expect("covered above");
        let out = leak.apply(rho)?;
        let keep: Vec<usize> = (1..out.dims().len()).collect();
        let back = out.partial_trace(&keep)?;
        residual +=
            p * linalg::trace_norm_hermitian(&(back.matrix() - rho.matrix()));
    }
    diag.invariance_residual = residual;
    if residual > 1e-9 {
        diag.valid = false;
        diag.failed_clause = Some(format!(
            "marginal invariance violated: ‖Tr_L Λ(ρ) − ρ‖₁ = {residual:.3e}"
        ));
    }
    Ok(diag)
}

/// Apply a validated leakage channel; the returned cq-state has side
/// registers (L, E′) — the adversary-held marginal.
pub fn apply_leakage(chan: &LeakageChannel, state: &CqState) -> Result<CqState> {
    let diag = validate_leakage_channel(chan, state)?;
    if !diag.valid {
        return Err(Error::LeakageValidation {
            clause: diag.failed_clause.unwrap_or_else(|| "unknown".into()),
            detail: format!("residual {:.3e}", diag.invariance_residual),
        });
    }
    let after_pre = match &chan.pre_process {
        Some(psi) => state.apply_to_side(psi)?,
        None => state.clone(),
    };
    let entries: Result<Vec<_>> = after_pre
        .iter()
        .map(|(x, p, rho)| {
            let leak = chan.leak.channel_for(x).expect("validated");
            Ok((x, p, leak.apply(rho)?))
        })
        .collect();
    CqState::new(entries?, Some(state.alphabet_bits()))
}

/// Isometric dilation `V = Σₖ Kₖ ⊗ |k⟩_R` of a channel; the auxiliary
/// register R is appended last.
#[derive(Debug, Clone)]
pub struct DilationResult {
    pub isometry: CMatrix,
    pub aux_dim: usize,
}

pub fn stinespring_dilate(chan: &KrausChannel) -> Result<DilationResult> {
    let aux = chan.kraus().len();
    let din = chan.in_dim();
    let dout = chan.out_dim();
    let mut v = CMatrix::zeros(dout * aux, din);
    for (k, op) in chan.kraus().iter().enumerate() {
        for o in 0..dout {
            for i in 0..din {
                v[(o * aux + k, i)] = op[(o, i)];
            }
        }
    }
    let gram = v.adjoint() * &v;
    if linalg::max_abs_diff(&gram, &CMatrix::identity(din, din)) > 1e-10 {
        return Err(Error::InvalidChannel(
            "dilation is not an isometry".into(),
        ));
    }
    Ok(DilationResult {
        isometry: v,
        aux_dim: aux,
    })
}

impl DilationResult {
    /// `Tr_R[V ρ V†]`, for round-trip checks against the original channel.
    pub fn apply_and_trace_aux(&self, rho: &DensityOperator) -> Result<CMatrix> {
        let v = &self.isometry;
        let big = v * rho.matrix() * v.adjoint();
        let dout = v.nrows() / self.aux_dim;
        let mut out = CMatrix::zeros(dout, dout);
        for r in 0..dout {
            for c_ in 0..dout {
                let mut acc = linalg::c(0.0, 0.0);
                for k in 0..self.aux_dim {
                    acc += big[(r * self.aux_dim + k, c_ * self.aux_dim + k)];
                }
                out[(r, c_)] = acc;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegradationReport {
    pub h_before: f64,
    pub h_after: f64,
    pub lambda: f64,
    /// `H_after − (H_before − 2λ)`; the chain rule requires ≥ 0 up to
    /// numerics.
    pub slack: f64,
    pub diagnostics: LeakageDiagnostics,
    /// Budget consumed by the reduction at finite s per the chain-rule
    /// accounting `2s + 2λ + 5 + t`.
    pub budget_cost: Option<u64>,
}

/// Measure min-entropy before and after a leakage channel and report the
/// chain-rule slack `H(A|LE′) − (H(A|E) − 2λ)`.
pub fn measure_chain_degradation(
    state: &CqState,
    chan: &LeakageChannel,
    _epsilon: f64,
) -> Result<(DegradationReport, Vec<GuessCertificate>)> {
    let diag = validate_leakage_channel(chan, state)?;
    if !diag.valid {
        return Err(Error::LeakageValidation {
            clause: diag.failed_clause.clone().unwrap_or_default(),
            detail: format!("residual {:.3e}", diag.invariance_residual),
        });
    }
    let before = min_entropy(state)?;
    let after_state = apply_leakage(chan, state)?;
    let after = min_entropy(&after_state)?;
    let slack = after.bits - (before.bits - 2.0 * chan.lambda);
    let budget_cost = chan
        .gate_cost_t
        .map(|t| 2 * chan.lambda.ceil() as u64 + 5 + t);
    Ok((
        DegradationReport {
            h_before: before.bits,
            h_after: after.bits,
            lambda: chan.lambda,
            slack,
            diagnostics: diag,
            budget_cost,
        },
        vec![before.certificate, after.certificate],
    ))
}

/// End-to-end Lemma-8 attack at the cq level: from `H(A|E) = bits` (uniform
/// A, blank E) the CNOT copy drives the adversary's guessing to certainty.
pub fn copy_attack_output(bits: u32) -> Result<CqState> {
    let d = 1usize << bits;
    let entries: Result<Vec<_>> = (0..d as u64)
        .map(|x| {
            Ok((
                x,
                1.0 / d as f64,
                DensityOperator::pure_basis(vec![d], x as usize)?,
            ))
        })
        .collect();
    CqState::new(entries?, Some(bits))
}

/// Serialization wrapper: Kraus JSON plus declared λ and t.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeakageChannelJson {
    pub lambda: f64,
    pub gate_cost_t: Option<u64>,
    pub pre_process: Option<KrausChannelJson>,
    pub leak: LeakMapJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakMapJson {
    Uniform(KrausChannelJson),
    PerSymbol(BTreeMap<String, KrausChannelJson>),
}

impl From<&LeakageChannel> for LeakageChannelJson {
    fn from(chan: &LeakageChannel) -> Self {
        let leak = match &chan.leak {
            LeakMap::Uniform(c) => LeakMapJson::Uniform(c.into()),
            LeakMap::PerSymbol(map) => LeakMapJson::PerSymbol(
                map.iter()
                    .map(|(k, v)| (k.to_string(), v.into()))
                    .collect(),
            ),
        };
        Self {
            lambda: chan.lambda,
            gate_cost_t: chan.gate_cost_t,
            pre_process: chan.pre_process.as_ref().map(|c| c.into()),
            leak,
        }
    }
}

impl LeakageChannelJson {
    pub fn build(&self) -> Result<LeakageChannel> {
        let leak = match &self.leak {
            LeakMapJson::Uniform(c) => LeakMap::Uniform(c.build()?),
            LeakMapJson::PerSymbol(map) => {
                let mut out = BTreeMap::new();
                for (k, v) in map {
                    let label: u64 = k
                        .parse()
                        .map_err(|_| Error::Config(format!("bad symbol key {k}")))?;
                    out.insert(label, v.build()?);
                }
                LeakMap::PerSymbol(out)
            }
        };
        let pre = self.pre_process.as_ref().map(|c| c.build()).transpose()?;
        Ok(LeakageChannel::new(pre, leak, self.lambda, self.gate_cost_t))
    }
}
