//! Bounded adversary strategies: distinguishers and guessing measurements.
//!
//! A strategy is a channel-then-measurement pair with a declared gate cost.
//! The gate model is the fixed universal set {H, T, CNOT} at unit cost each;
//! computational-basis measurement and classical post-processing are free.

use crate::error::{Error, Result};
use crate::qcore::linalg::{self, c, cr, inv_sqrt_psd_support, CMatrix};
use crate::qcore::{CqState, KrausChannel, Povm};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Gate budget admitted by a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Budget {
    Gates(u64),
    Unbounded,
}

impl Budget {
    pub fn admits(&self, cost: u64) -> bool {
        match self {
            Budget::Gates(s) => cost <= *s,
            Budget::Unbounded => true,
        }
    }
}

#[derive(Debug, Clone)]
pub enum StrategyKind {
    /// Explicit preprocessing channel followed by a labelled POVM.
    Measure {
        pre: Option<KrausChannel>,
        povm: Povm,
    },
    /// Output a fixed label regardless of the state.
    Constant { output: u64 },
    /// Computational-basis measurement with free classical post-processing.
    ComputationalBasis,
    /// Optimal binary measurement, materialized for the pair under test.
    Helstrom,
    /// Pretty-good measurement `Eₓ ∝ ρ^{-1/2} pₓρₓ ρ^{-1/2}`, materialized
    /// for the cq-state under test (guessing only).
    PrettyGood,
    /// Unitary circuit then computational-basis measurement.
    Circuit { unitary: CMatrix },
}

#[derive(Debug, Clone)]
pub struct Strategy {
    name: String,
    kind: StrategyKind,
    gate_cost: u64,
}

impl Strategy {
    pub fn new(name: impl Into<String>, kind: StrategyKind, gate_cost: u64) -> Self {
        Self {
            name: name.into(),
            kind,
            gate_cost,
        }
    }

    pub fn constant(output: u64) -> Self {
        Self::new(
            format!("constant-{output}"),
            StrategyKind::Constant { output },
            0,
        )
    }

    pub fn computational_basis(name: impl Into<String>, gate_cost: u64) -> Self {
        Self::new(name, StrategyKind::ComputationalBasis, gate_cost)
    }

    pub fn helstrom(gate_cost: u64) -> Self {
        Self::new("helstrom", StrategyKind::Helstrom, gate_cost)
    }

    pub fn pretty_good(gate_cost: u64) -> Self {
        Self::new("pretty-good", StrategyKind::PrettyGood, gate_cost)
    }

    pub fn measure(name: impl Into<String>, pre: Option<KrausChannel>, povm: Povm, cost: u64) -> Self {
        Self::new(name, StrategyKind::Measure { pre, povm }, cost)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn gate_cost(&self) -> u64 {
        self.gate_cost
    }

    pub fn kind(&self) -> &StrategyKind {
        &self.kind
    }

    fn outcome_distribution(povm: &Povm, m: &CMatrix) -> Vec<(u64, f64)> {
        povm.elements()
            .iter()
            .map(|(label, e)| (*label, (e * m).diagonal().sum().re))
            .collect()
    }

    /// Distinguishing advantage of this strategy, normalized so that the
    /// supremum over all measurements equals the trace distance: half the
    /// total variation `(1/2)Σⱼ|tr(Eⱼa) − tr(Eⱼb)|` of the outcome
    /// distributions (classical post-processing of outcomes is free).
    pub fn distinguish_advantage(&self, a: &CMatrix, b: &CMatrix) -> Result<f64> {
        match &self.kind {
            StrategyKind::Constant { .. } => {
                // The single outcome carries only the normalization.
                Ok(0.5 * (a.diagonal().sum().re - b.diagonal().sum().re).abs())
            }
            StrategyKind::ComputationalBasis => {
                let tv: f64 = (0..a.nrows())
                    .map(|i| (a[(i, i)].re - b[(i, i)].re).abs())
                    .sum();
                Ok(0.5 * tv)
            }
            StrategyKind::Helstrom => {
                // Exact optimum: half the trace norm of the difference.
                Ok(0.5 * linalg::trace_norm_hermitian(&(a - b)))
            }
            StrategyKind::PrettyGood => Err(Error::InvalidArgument(
                "pretty-good measurement is a guessing strategy".into(),
            )),
            StrategyKind::Circuit { unitary } => {
                if unitary.ncols() != a.nrows() {
                    return Err(Error::DimensionMismatch {
                        expected: unitary.ncols(),
                        got: a.nrows(),
                    });
                }
                let ua = unitary * a * unitary.adjoint();
                let ub = unitary * b * unitary.adjoint();
                let tv: f64 = (0..ua.nrows())
                    .map(|i| (ua[(i, i)].re - ub[(i, i)].re).abs())
                    .sum();
                Ok(0.5 * tv)
            }
            StrategyKind::Measure { pre, povm } => {
                let (ma, mb) = match pre {
                    Some(chan) => (chan.apply_matrix(a), chan.apply_matrix(b)),
                    None => (a.clone(), b.clone()),
                };
                let pa = Self::outcome_distribution(povm, &ma);
                let pb = Self::outcome_distribution(povm, &mb);
                let tv: f64 = pa
                    .iter()
                    .zip(pb.iter())
                    .map(|((_, x), (_, y))| (x - y).abs())
                    .sum();
                Ok(0.5 * tv)
            }
        }
    }

    /// Success weight `Σₓ pₓ tr(Eₓ ρₓ)` of this strategy guessing the cq
    /// symbol; subnormalized weights enter without renormalization.
    pub fn guess_probability(&self, state: &CqState) -> Result<f64> {
        match &self.kind {
            StrategyKind::Constant { output } => Ok(state
                .iter()
                .find(|(x, _, _)| x == output)
                .map(|(_, p, _)| p)
                .unwrap_or(0.0)),
            StrategyKind::ComputationalBasis => {
                let povm = Povm::computational_basis(state.side_dim())?;
                crate::qcore::povm_guess_probability(&povm, state)
            }
            StrategyKind::Helstrom => {
                if state.len() > 2 {
                    return Err(Error::InvalidArgument(
                        "helstrom strategy needs a binary alphabet".into(),
                    ));
                }
                let povm = helstrom_povm(state)?;
                crate::qcore::povm_guess_probability(&povm, state)
            }
            StrategyKind::PrettyGood => {
                let povm = pretty_good_povm(state)?;
                crate::qcore::povm_guess_probability(&povm, state)
            }
            StrategyKind::Circuit { unitary } => {
                let mut total = 0.0;
                for (x, p, rho) in state.iter() {
                    if (x as usize) < unitary.nrows() {
                        let m = unitary * rho.matrix() * unitary.adjoint();
                        total += p * m[(x as usize, x as usize)].re;
                    }
                }
                Ok(total)
            }
            StrategyKind::Measure { pre, povm } => {
                let state = match pre {
                    Some(chan) => state.apply_to_side(chan)?,
                    None => state.clone(),
                };
                crate::qcore::povm_guess_probability(povm, &state)
            }
        }
    }
}

/// Helstrom measurement for a binary-alphabet cq state: project onto the
/// positive part of `p₀ρ₀ − p₁ρ₁`.
pub fn helstrom_povm(state: &CqState) -> Result<Povm> {
    if state.len() > 2 {
        return Err(Error::InvalidArgument("binary alphabet required".into()));
    }
    let d = state.side_dim();
    if state.len() == 1 {
        return Povm::constant(d, state.symbols()[0]);
    }
    let w = state.weighted_states();
    let diff = &w[0] - &w[1];
    let proj = linalg::positive_projector(&diff);
    let complement = CMatrix::identity(d, d) - &proj;
    Povm::new(vec![
        (state.symbols()[0], proj),
        (state.symbols()[1], complement),
    ])
}

/// Pretty-good measurement `Eₓ = ρ^{-1/2} pₓρₓ ρ^{-1/2}` with the identity
/// completion on the kernel of ρ assigned to the first symbol.
pub fn pretty_good_povm(state: &CqState) -> Result<Povm> {
    let d = state.side_dim();
    let marginal = state.side_marginal()?;
    let isr = inv_sqrt_psd_support(marginal.matrix());
    let mut elements = Vec::new();
    let mut sum = CMatrix::zeros(d, d);
    for (x, p, rho) in state.iter() {
        let e = &isr * rho.matrix().scale(p) * &isr;
        sum += &e;
        elements.push((x, e));
    }
    // Complete on the kernel so the elements sum to the identity.
    let kernel = CMatrix::identity(d, d) - sum;
    if let Some(first) = elements.first_mut() {
        first.1 += kernel;
    }
    Povm::new(elements)
}

/// A set of admitted strategies with a shared gate budget. The two constant
/// distinguishers (always-0, always-1) are always present at cost 0.
#[derive(Debug, Clone)]
pub struct AdversaryFamily {
    dim: usize,
    budget: Budget,
    strategies: Vec<Strategy>,
}

impl AdversaryFamily {
    pub fn new(dim: usize, budget: Budget, strategies: Vec<Strategy>) -> Self {
        let mut all = vec![Strategy::constant(0), Strategy::constant(1)];
        all.extend(strategies);
        Self {
            dim,
            budget,
            strategies: all,
        }
    }

    /// Family containing every strategy (the s→∞ limit).
    pub fn unbounded(dim: usize) -> Self {
        Self::new(dim, Budget::Unbounded, vec![Strategy::helstrom(0)])
    }

    pub fn constants_only(dim: usize) -> Self {
        Self::new(dim, Budget::Gates(0), vec![])
    }

    /// Exhaustively enumerated {H, T, CNOT} circuits on `qubits` qubits with
    /// at most `max_gates` gates, deduplicated up to global phase.
    pub fn enumerate(qubits: usize, max_gates: u64) -> Result<Self> {
        if qubits > 3 || max_gates > 6 {
            return Err(Error::SizeCap(
                "enumeration supports at most 3 qubits and 6 gates".into(),
            ));
        }
        let dim = 1usize << qubits;
        let circuits = enumerate_circuits(qubits, max_gates);
        let strategies = circuits
            .into_iter()
            .enumerate()
            .map(|(i, (u, cost))| {
                Strategy::new(
                    format!("circuit-{i}-g{cost}"),
                    StrategyKind::Circuit { unitary: u },
                    cost,
                )
            })
            .collect();
        Ok(Self::new(dim, Budget::Gates(max_gates), strategies))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    pub fn push(&mut self, strategy: Strategy) {
        self.strategies.push(strategy);
    }

    /// Strategies within the gate budget.
    pub fn admitted(&self) -> impl Iterator<Item = &Strategy> {
        self.strategies
            .iter()
            .filter(move |s| self.budget.admits(s.gate_cost))
    }

    /// Best guessing success weight over the family on a cq state. Constant
    /// guesses for every symbol are always admitted, so the result is at
    /// least `maxₓ pₓ`.
    pub fn best_guess(&self, state: &CqState) -> Result<(f64, String)> {
        let mut best = 0.0;
        let mut name = String::from("none");
        for (x, p, _) in state.iter() {
            if p > best {
                best = p;
                name = format!("constant-{x}");
            }
        }
        for strat in self.admitted() {
            if matches!(strat.kind, StrategyKind::Helstrom) && state.len() > 2 {
                continue;
            }
            let p = strat.guess_probability(state)?;
            if p > best {
                best = p;
                name = strat.name.clone();
            }
        }
        Ok((best, name))
    }
}

/// Serializable family description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilySpec {
    Named {
        dim: usize,
        budget: Budget,
        strategies: Vec<NamedStrategy>,
    },
    Enumerate {
        qubits: usize,
        max_gates: u64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedStrategy {
    Constant { output: u64 },
    ComputationalBasis { cost: u64 },
    Helstrom { cost: u64 },
    PrettyGood { cost: u64 },
}

impl FamilySpec {
    pub fn build(&self) -> Result<AdversaryFamily> {
        match self {
            FamilySpec::Named {
                dim,
                budget,
                strategies,
            } => {
                let strats = strategies
                    .iter()
                    .map(|s| match s {
                        NamedStrategy::Constant { output } => Strategy::constant(*output),
                        NamedStrategy::ComputationalBasis { cost } => {
                            Strategy::computational_basis("computational-basis", *cost)
                        }
                        NamedStrategy::Helstrom { cost } => Strategy::helstrom(*cost),
                        NamedStrategy::PrettyGood { cost } => Strategy::pretty_good(*cost),
                    })
                    .collect();
                Ok(AdversaryFamily::new(*dim, *budget, strats))
            }
            FamilySpec::Enumerate { qubits, max_gates } => {
                AdversaryFamily::enumerate(*qubits, *max_gates)
            }
        }
    }
}

fn hadamard() -> CMatrix {
    let w = 1.0 / 2f64.sqrt();
    CMatrix::from_row_slice(2, 2, &[cr(w), cr(w), cr(w), cr(-w)])
}

fn t_gate() -> CMatrix {
    let phase = c(
        std::f64::consts::FRAC_1_SQRT_2,
        std::f64::consts::FRAC_1_SQRT_2,
    );
    CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), phase])
}

/// Lift a single-qubit gate to `n` qubits at position `q` (qubit 0 is the
/// most significant factor).
fn lift_single(gate: &CMatrix, n: usize, q: usize) -> CMatrix {
    let mut m = CMatrix::identity(1, 1);
    for i in 0..n {
        let factor = if i == q {
            gate.clone()
        } else {
            CMatrix::identity(2, 2)
        };
        m = m.kronecker(&factor);
    }
    m
}

fn lift_cnot(n: usize, control: usize, target: usize) -> CMatrix {
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let cbit = (i >> (n - 1 - control)) & 1;
        let j = if cbit == 1 {
            i ^ (1 << (n - 1 - target))
        } else {
            i
        };
        m[(j, i)] = cr(1.0);
    }
    m
}

/// Quantized global-phase-normalized key for deduplication.
fn phase_key(m: &CMatrix) -> Vec<(i64, i64)> {
    let mut phase = c(1.0, 0.0);
    for entry in m.iter() {
        if entry.norm() > 1e-8 {
            phase = entry / entry.norm();
            break;
        }
    }
    let inv = phase.conj();
    m.iter()
        .map(|z| {
            let w = z * inv;
            ((w.re * 1e8).round() as i64, (w.im * 1e8).round() as i64)
        })
        .collect()
}

/// BFS over gate words; returns unique unitaries (up to global phase) with
/// their minimal gate count.
pub fn enumerate_circuits(qubits: usize, max_gates: u64) -> Vec<(CMatrix, u64)> {
    let dim = 1usize << qubits;
    let mut generators: Vec<CMatrix> = Vec::new();
    for q in 0..qubits {
        generators.push(lift_single(&hadamard(), qubits, q));
        generators.push(lift_single(&t_gate(), qubits, q));
    }
    for control in 0..qubits {
        for target in 0..qubits {
            if control != target {
                generators.push(lift_cnot(qubits, control, target));
            }
        }
    }
    let mut seen: HashMap<Vec<(i64, i64)>, u64> = HashMap::new();
    let identity = CMatrix::identity(dim, dim);
    seen.insert(phase_key(&identity), 0);
    let mut frontier = vec![identity.clone()];
    let mut out = vec![(identity, 0u64)];
    for level in 1..=max_gates {
        let mut next = Vec::new();
        for u in &frontier {
            for g in &generators {
                let v = g * u;
                let key = phase_key(&v);
                if !seen.contains_key(&key) {
                    seen.insert(key, level);
                    out.push((v.clone(), level));
                    next.push(v);
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    out
}
