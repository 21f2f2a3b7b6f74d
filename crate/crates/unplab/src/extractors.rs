//! Inner-product one-bit extractor, weak (t,r)-designs, the m-bit
//! Trevisan-style composition, and the distinguish↔predict and hybrid
//! reduction lemmas.
//!
//! Extractor tests average over the seed exhaustively (every y), so the
//! reported distances are exact; hard size caps keep that tractable. Strong
//! extraction is always tested jointly with the seed register. Bit 0 is the
//! least significant bit of a string; the hybrid lemma indexes bits 1..m
//! from the most significant end, matching string order.

use crate::error::{Error, Result};
use crate::metrics::family::AdversaryFamily;
use crate::metrics::{trace_distance_matrices, Budget, DistanceInterval};
use crate::qcore::linalg::CMatrix;
use crate::qcore::CqState;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Bit string of explicit length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bits {
    value: u64,
    len: u32,
}

impl Bits {
    pub fn new(value: u64, len: u32) -> Result<Self> {
        if len > 63 {
            return Err(Error::InvalidArgument("bit length above 63".into()));
        }
        if len < 64 && value >> len != 0 {
            return Err(Error::InvalidArgument(format!(
                "value {value} does not fit in {len} bits"
            )));
        }
        Ok(Self { value, len })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: u32) -> u8 {
        ((self.value >> i) & 1) as u8
    }

    /// Bits at the listed positions (ascending), packed from bit 0.
    pub fn restrict(&self, set: &[usize]) -> Result<Bits> {
        let mut out = 0u64;
        for (j, &pos) in set.iter().enumerate() {
            if pos as u32 >= self.len {
                return Err(Error::IndexOutOfRange {
                    index: pos,
                    count: self.len as usize,
                });
            }
            out |= ((self.value >> pos) & 1) << j;
        }
        Bits::new(out, set.len() as u32)
    }
}

/// Binary inner product `⊕ᵢ xᵢ·yᵢ`.
pub fn ip(x: Bits, y: Bits) -> Result<u8> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(format!(
            "ip on {} vs {} bits",
            x.len(),
            y.len()
        )));
    }
    Ok(((x.value() & y.value()).count_ones() & 1) as u8)
}

/// Family `S₁..S_m ⊂ [d]` of size-t sets with the verified overlap bound
/// `Σ_{j<i} 2^{|Sᵢ∩Sⱼ|} ≤ r·m`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeakDesign {
    pub t: usize,
    pub r: f64,
    pub d: usize,
    pub sets: Vec<Vec<usize>>,
}

impl WeakDesign {
    pub fn new(sets: Vec<Vec<usize>>, t: usize, r: f64, d: usize) -> Result<Self> {
        verify_weak_design(&sets, t, r, d)?;
        Ok(Self { t, r, d, sets })
    }

    pub fn m(&self) -> usize {
        self.sets.len()
    }
}

/// Independent total verifier for the design condition. Kept free of any
/// construction-side state so it certifies designs from any source.
pub fn verify_weak_design(sets: &[Vec<usize>], t: usize, r: f64, d: usize) -> Result<()> {
    let m = sets.len();
    if m == 0 {
        return Err(Error::DesignConstruction {
            index: 0,
            detail: "empty design".into(),
        });
    }
    for (i, s) in sets.iter().enumerate() {
        let unique: BTreeSet<usize> = s.iter().copied().collect();
        if unique.len() != t || s.len() != t {
            return Err(Error::DesignConstruction {
                index: i,
                detail: format!("set has {} distinct elements, want {t}", unique.len()),
            });
        }
        if let Some(&bad) = s.iter().find(|&&e| e >= d) {
            return Err(Error::DesignConstruction {
                index: i,
                detail: format!("element {bad} outside [0, {d})"),
            });
        }
    }
    for i in 0..m {
        let si: BTreeSet<usize> = sets[i].iter().copied().collect();
        let mut total = 0.0f64;
        for prior in sets.iter().take(i) {
            let overlap = prior.iter().filter(|e| si.contains(e)).count();
            total += (overlap as f64).exp2();
        }
        if total > r * m as f64 + 1e-9 {
            return Err(Error::DesignConstruction {
                index: i,
                detail: format!("Σ 2^|overlap| = {total} exceeds r·m = {}", r * m as f64),
            });
        }
    }
    Ok(())
}

fn ceil_log2(v: u64) -> u32 {
    if v <= 1 {
        0
    } else {
        64 - (v - 1).leading_zeros()
    }
}

/// Seed length prescribed for weak (t,1)-designs: `d = t⌈t/ln 2⌉⌈log(4m)⌉`.
pub fn raz_seed_length(t: usize, m: usize) -> usize {
    let blocks = (t as f64 / std::f64::consts::LN_2).ceil() as usize;
    t * blocks * ceil_log2(4 * m as u64) as usize
}

/// Construct a verified weak (t,1)-design over [d] with d given by
/// [`raz_seed_length`]. Greedy overlap-minimizing placement with
/// deterministic seeded restarts, plus a cyclic block fallback; each
/// candidate goes through the independent verifier and failure to verify is
/// an error, never silent.
pub fn build_weak_design(t: usize, m: usize) -> Result<WeakDesign> {
    if t == 0 || m == 0 {
        return Err(Error::InvalidArgument("t and m must be positive".into()));
    }
    let d = raz_seed_length(t, m);
    let r = 1.0;
    let mut last_err = None;
    for seed in 0..16u64 {
        let sets = greedy_sets(t, m, d, seed);
        match verify_weak_design(&sets, t, r, d) {
            Ok(()) => return WeakDesign::new(sets, t, r, d),
            Err(e) => last_err = Some(e),
        }
    }
    // Cyclic reuse of disjoint blocks, duplicates placed early where the
    // budget rm − (i−1) is loose.
    let sets = cyclic_block_sets(t, m, d);
    match verify_weak_design(&sets, t, r, d) {
        Ok(()) => WeakDesign::new(sets, t, r, d),
        Err(e) => Err(last_err.unwrap_or(e)),
    }
}

fn greedy_sets(t: usize, m: usize, d: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = crate::qcore::random::rng(seed);
    let mut sets: Vec<Vec<usize>> = Vec::with_capacity(m);
    for _ in 0..m {
        let mut current: BTreeSet<usize> = BTreeSet::new();
        // overlap count of the partial set with each prior set
        let mut overlaps = vec![0u32; sets.len()];
        for _ in 0..t {
            let mut order: Vec<usize> = (0..d).filter(|e| !current.contains(e)).collect();
            if seed > 0 {
                order.shuffle(&mut rng);
            }
            let mut best_u = order[0];
            let mut best_penalty = f64::INFINITY;
            for &u in &order {
                let penalty: f64 = sets
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.contains(&u))
                    .map(|(j, _)| (overlaps[j] as f64).exp2())
                    .sum();
                if penalty < best_penalty {
                    best_penalty = penalty;
                    best_u = u;
                }
            }
            for (j, s) in sets.iter().enumerate() {
                if s.contains(&best_u) {
                    overlaps[j] += 1;
                }
            }
            current.insert(best_u);
        }
        sets.push(current.into_iter().collect());
    }
    sets
}

fn cyclic_block_sets(t: usize, m: usize, d: usize) -> Vec<Vec<usize>> {
    let q = (d / t).max(1);
    let extra = m.saturating_sub(q);
    (0..m)
        .map(|i| {
            // Duplicate block uses must land at small i where the budget
            // r·m − (i−1) is loose: pair the reused blocks up front, then
            // spend the fresh blocks on the tail.
            let b = if m <= 2 * q && extra > 0 {
                if i < 2 * extra {
                    i / 2
                } else {
                    extra + (i - 2 * extra)
                }
            } else {
                i % q
            };
            (0..t).map(|k| b * t + k).collect()
        })
        .collect()
}

/// Extractor sizing and error parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractorSpec {
    pub n: u32,
    pub d: u32,
    pub m: u32,
    pub k_ext: f64,
    pub eps_ext: f64,
    pub design: Option<WeakDesign>,
}

/// `Ext(x, y) = (C(x, y_{S₁}), …, C(x, y_{S_m}))` for a one-bit extractor C.
pub fn ext_compose(
    x: Bits,
    y: Bits,
    design: &WeakDesign,
    one_bit: &dyn Fn(Bits, Bits) -> Result<u8>,
) -> Result<Bits> {
    if y.len() as usize != design.d {
        return Err(Error::LengthMismatch(format!(
            "seed has {} bits, design wants {}",
            y.len(),
            design.d
        )));
    }
    let mut out = 0u64;
    for (i, set) in design.sets.iter().enumerate() {
        let ys = y.restrict(set)?;
        let bit = one_bit(x, ys)?;
        out |= (bit as u64) << i;
    }
    Bits::new(out, design.m() as u32)
}

/// Composition with the binary inner product as the one-bit extractor
/// (requires t = n).
pub fn ip_compose(x: Bits, y: Bits, design: &WeakDesign) -> Result<Bits> {
    if design.t != x.len() as usize {
        return Err(Error::LengthMismatch(format!(
            "design t = {} but source has {} bits",
            design.t,
            x.len()
        )));
    }
    ext_compose(x, y, design, &ip)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Predictor {
    pub strategy: String,
    pub success: f64,
}

/// Lemma 5 machinery: distinguishing `ρ_XE` from `U₁⊗ρ_E` is the same as
/// distinguishing the weighted conditionals `p₀ρ⁰` vs `p₁ρ¹`, and any
/// distinguisher yields a predictor with success `1/2 + advantage`. Returns
/// the computational-distance interval of the weighted pair and the best
/// predictor in the family.
pub fn distinguish_equals_predict(
    state: &CqState,
    family: &AdversaryFamily,
) -> Result<(DistanceInterval, Predictor)> {
    if state.alphabet_bits() != 1 || state.len() > 2 {
        return Err(Error::InvalidArgument("binary alphabet required".into()));
    }
    let d = state.side_dim();
    let zero = CMatrix::zeros(d, d);
    let w = state.weighted_states();
    let (w0, w1) = match state.symbols() {
        [0, 1] => (w[0].clone(), w[1].clone()),
        [0] => (w[0].clone(), zero),
        [1] => (zero, w[0].clone()),
        _ => unreachable!("validated binary alphabet"),
    };
    let upper = trace_distance_matrices(&w0, &w1);
    let total = (w0.diagonal().sum() + w1.diagonal().sum()).re;
    if family.budget() == Budget::Unbounded {
        return Ok((
            DistanceInterval {
                lower: upper,
                upper,
                best_strategy: Some("helstrom".into()),
            },
            Predictor {
                strategy: "helstrom".into(),
                success: 0.5 * total + upper,
            },
        ));
    }
    let mut lower = 0.0;
    let mut best = String::from("constant");
    for strat in family.admitted() {
        let adv = strat.distinguish_advantage(&w0, &w1)?;
        if adv > lower {
            lower = adv;
            best = strat.name().to_string();
        }
    }
    let lower = lower.min(upper);
    Ok((
        DistanceInterval {
            lower,
            upper,
            best_strategy: Some(best.clone()),
        },
        Predictor {
            strategy: best,
            success: 0.5 * total + lower,
        },
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HybridWitness {
    /// 1-based bit index from the most significant end.
    pub index: u32,
    pub gap: f64,
    pub total_distance: f64,
}

/// Exact trace distance `d(ρ_ZB, U_m ⊗ ρ_B)` for an m-bit classical Z.
pub fn output_uniformity_distance(state: &CqState) -> Result<f64> {
    let m = state.alphabet_bits();
    if m > 16 {
        return Err(Error::SizeCap(format!("{m} output bits above cap 16")));
    }
    let count = 1u64 << m;
    let e = state.side_dim();
    let marginal = state.side_marginal()?;
    let uniform_block = marginal.matrix().scale(1.0 / count as f64);
    let mut total = 0.0;
    for z in 0..count {
        let block = state
            .iter()
            .find(|(s, _, _)| *s == z)
            .map(|(_, p, rho)| rho.matrix().scale(p))
            .unwrap_or_else(|| CMatrix::zeros(e, e));
        total += trace_distance_matrices(&block, &uniform_block);
    }
    Ok(total)
}

/// Prefix-hybrid gaps `d(σᵢ, σᵢ₋₁)` for i = 1..m, where σᵢ keeps the first
/// i bits of Z real and randomizes the rest.
pub fn hybrid_gaps(state: &CqState) -> Result<Vec<f64>> {
    let m = state.alphabet_bits();
    if m > 16 {
        return Err(Error::SizeCap(format!("{m} output bits above cap 16")));
    }
    let e = state.side_dim();
    let mut gaps = Vec::with_capacity(m as usize);
    for i in 1..=m {
        // Aggregate over i-bit prefixes w (most significant bits first):
        // block difference A_i(w) − (1/2)·A_{i−1}(parent(w)).
        let shift = m - i;
        let mut total = 0.0;
        for w in 0u64..(1 << i) {
            let mut a_i = CMatrix::zeros(e, e);
            let mut a_parent = CMatrix::zeros(e, e);
            for (z, p, rho) in state.iter() {
                if z >> shift == w {
                    a_i += rho.matrix().scale(p);
                }
                if z >> (shift + 1) == w >> 1 {
                    a_parent += rho.matrix().scale(p);
                }
            }
            total += trace_distance_matrices(&a_i, &a_parent.scale(0.5));
        }
        gaps.push(total);
    }
    Ok(gaps)
}

/// If `d(ρ_ZB, U_m ⊗ ρ_B) > eps`, return a bit whose prefix-hybrid gap
/// exceeds `eps/m` (the maximal one), computed with exact trace distances.
pub fn hybrid_locate_bit(state: &CqState, eps: f64) -> Result<Option<HybridWitness>> {
    let total = output_uniformity_distance(state)?;
    if total <= eps {
        return Ok(None);
    }
    let gaps = hybrid_gaps(state)?;
    let (idx, gap) = gaps
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |acc, (i, &g)| {
            if g > acc.1 {
                (i, g)
            } else {
                acc
            }
        });
    Ok(Some(HybridWitness {
        index: idx as u32 + 1,
        gap,
        total_distance: total,
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IpExtractorReport {
    pub n: u32,
    pub eps_ext: f64,
    /// Entropy threshold `1 − 2log₂ ε` of the extraction theorem.
    pub threshold: f64,
    pub min_entropy: f64,
    pub hypothesis_met: bool,
    /// Exact `d(ρ_{IP(X,Y)YE}, U₁ ⊗ ρ_YE)` over the full seeded joint state.
    pub distance: f64,
    pub bound_satisfied: Option<bool>,
}

/// Exhaustive-seed inner-product extractor test: builds the joint output
/// state over every seed and reports the exact trace distance against the
/// theorem threshold.
pub fn ip_extractor_test(state: &CqState, eps_ext: f64) -> Result<IpExtractorReport> {
    let n = state.alphabet_bits();
    if n > 12 {
        return Err(Error::SizeCap(format!(
            "n = {n} too large for exhaustive seed averaging"
        )));
    }
    let e = state.side_dim();
    let marginal = state.side_marginal()?;
    let seeds = 1u64 << n;
    let seed_weight = 1.0 / seeds as f64;
    let mut distance = 0.0;
    for y in 0..seeds {
        let yb = Bits::new(y, n)?;
        let mut blocks = [CMatrix::zeros(e, e), CMatrix::zeros(e, e)];
        for (x, p, rho) in state.iter() {
            let bit = ip(Bits::new(x, n)?, yb)?;
            blocks[bit as usize] += rho.matrix().scale(p * seed_weight);
        }
        let uniform = marginal.matrix().scale(0.5 * seed_weight);
        distance += trace_distance_matrices(&blocks[0], &uniform);
        distance += trace_distance_matrices(&blocks[1], &uniform);
    }
    let me = crate::entropy::min_entropy(state)?;
    let threshold = 1.0 - 2.0 * eps_ext.log2();
    let hypothesis_met = me.bits >= threshold;
    Ok(IpExtractorReport {
        n,
        eps_ext,
        threshold,
        min_entropy: me.bits,
        hypothesis_met,
        distance,
        bound_satisfied: hypothesis_met.then_some(distance <= eps_ext + 1e-9),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComposedExtractorReport {
    pub n: u32,
    pub m: u32,
    pub d: u32,
    pub eps_bit: f64,
    pub threshold: f64,
    pub min_entropy: f64,
    pub hypothesis_met: bool,
    pub distance: f64,
    /// Composition bound `2mε + 2ε′` (ε′ = 0 without smoothing).
    pub bound: f64,
    pub bound_satisfied: Option<bool>,
}

/// Exhaustive joint-state test of the design-composed IP extractor against
/// the m-bit composition bound.
pub fn composed_extractor_test(
    spec: &ExtractorSpec,
    state: &CqState,
) -> Result<ComposedExtractorReport> {
    let design = spec
        .design
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("composed test needs a design".into()))?;
    let n = state.alphabet_bits();
    let m = design.m() as u32;
    let d = design.d as u32;
    if n > 10 || m > 3 {
        return Err(Error::SizeCap(format!(
            "n = {n}, m = {m} beyond exhaustive caps (10, 3)"
        )));
    }
    if d > 20 {
        return Err(Error::SizeCap(format!("seed length {d} above cap 20")));
    }
    let e = state.side_dim();
    let marginal = state.side_marginal()?;
    let seeds = 1u64 << d;
    let outputs = 1u64 << m;
    let seed_weight = 1.0 / seeds as f64;
    let mut distance = 0.0;
    for y in 0..seeds {
        let yb = Bits::new(y, d)?;
        let mut blocks = vec![CMatrix::zeros(e, e); outputs as usize];
        for (x, p, rho) in state.iter() {
            let z = ip_compose(Bits::new(x, n)?, yb, design)?;
            blocks[z.value() as usize] += rho.matrix().scale(p * seed_weight);
        }
        let uniform = marginal.matrix().scale(seed_weight / outputs as f64);
        for block in &blocks {
            distance += trace_distance_matrices(block, &uniform);
        }
    }
    let me = crate::entropy::min_entropy(state)?;
    let eps_bit = spec.eps_ext;
    // One-bit IP threshold 1 − 2log₂ε plus the rm − log₂ε composition cost.
    let threshold = 1.0 - 3.0 * eps_bit.log2() + design.r * m as f64;
    let hypothesis_met = me.bits >= threshold;
    let bound = 2.0 * m as f64 * eps_bit;
    Ok(ComposedExtractorReport {
        n,
        m,
        d,
        eps_bit,
        threshold,
        min_entropy: me.bits,
        hypothesis_met,
        distance,
        bound,
        bound_satisfied: hypothesis_met.then_some(distance <= bound + 1e-9),
    })
}
