//! Statevector implementation of the reconstruction circuit that turns an
//! inner-product predictor into a whole-source guesser.
//!
//! The circuit runs six stages: prepare `|1⟩|0ⁿ⟩`, Hadamard the first n+1
//! qubits, call the predictor, CNOT its result onto the phase qubit, call
//! the inverse predictor, Hadamard again, then measure. With an exact
//! predictor the seed register interferes to `|x⟩` (the Bernstein–Vazirani
//! pattern); with a predictor of average bias `1/2 + ε` the (1, x) outcome
//! keeps probability at least `4ε²`.
//!
//! Qubit layout: `[phase | seed (n) | out | side (e)]`, qubit 0 most
//! significant. Statevector backend, capped at 22 total qubits.

use crate::error::{Error, Result};
use crate::qcore::linalg::{cr, CMatrix};
use crate::qcore::PureVector;
use num_complex::Complex64;
use serde::Serialize;

const MAX_QUBITS: u32 = 22;

/// Predictor acting on `(out, seed, side)`: flips or rotates the out qubit
/// toward `IP(x, y)` given a side register encoding x and a seed register y.
#[derive(Debug, Clone)]
pub enum OracleKind {
    /// Exact XOR of `IP(x, y)` into the out qubit (`β = 0` for all x, y).
    IdealIp,
    /// Ideal predictor followed by an out-qubit rotation so that the success
    /// amplitude is `cos γ` with `cos²γ = 1/2 + ε`, uniformly over (x, y).
    BiasedIp { epsilon: f64, gamma: f64 },
    /// Explicit unitary on the `(out, seed, side)` register block.
    Custom { matrix: CMatrix },
}

#[derive(Debug, Clone)]
pub struct PredictorOracle {
    kind: OracleKind,
    n: u32,
    side_qubits: u32,
    declared_gate_cost: u64,
}

impl PredictorOracle {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn side_qubits(&self) -> u32 {
        self.side_qubits
    }

    pub fn declared_gate_cost(&self) -> u64 {
        self.declared_gate_cost
    }

    pub fn kind(&self) -> &OracleKind {
        &self.kind
    }

    pub fn custom(matrix: CMatrix, n: u32, side_qubits: u32, cost: u64) -> Result<Self> {
        let dim = 1usize << (1 + n + side_qubits);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: matrix.nrows(),
            });
        }
        let unitarity = crate::qcore::linalg::max_abs_diff(
            &(&matrix * matrix.adjoint()),
            &CMatrix::identity(dim, dim),
        );
        if unitarity > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "oracle is not unitary: residual {unitarity:.3e}"
            )));
        }
        Ok(Self {
            kind: OracleKind::Custom { matrix },
            n,
            side_qubits,
            declared_gate_cost: cost,
        })
    }

    /// Dense matrix of the oracle on `(out, seed, side)`, for small sizes.
    pub fn matrix(&self) -> Result<CMatrix> {
        let qubits = 1 + self.n + self.side_qubits;
        if qubits > 12 {
            return Err(Error::SizeCap(format!(
                "{qubits} qubits too large for a dense oracle matrix"
            )));
        }
        if let OracleKind::Custom { matrix } = &self.kind {
            return Ok(matrix.clone());
        }
        let dim = 1usize << qubits;
        let mut m = CMatrix::zeros(dim, dim);
        let mut scratch = vec![Complex64::default(); dim];
        for col in 0..dim {
            scratch.iter_mut().for_each(|z| *z = Complex64::default());
            scratch[col] = cr(1.0);
            self.apply_block(&mut scratch, false);
            for (row, &z) in scratch.iter().enumerate() {
                m[(row, col)] = z;
            }
        }
        Ok(m)
    }

    /// Apply (or invert) the oracle on a bare `(out, seed, side)` block.
    fn apply_block(&self, amps: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let e = self.side_qubits;
        let qubits = 1 + n + e;
        let out_shift = n + e; // out is the top qubit of the block
        match &self.kind {
            OracleKind::IdealIp => ideal_ip_block(amps, n, e, out_shift),
            OracleKind::BiasedIp { gamma, .. } => {
                if inverse {
                    rotate_out(amps, out_shift, -*gamma);
                    ideal_ip_block(amps, n, e, out_shift);
                } else {
                    ideal_ip_block(amps, n, e, out_shift);
                    rotate_out(amps, out_shift, *gamma);
                }
            }
            OracleKind::Custom { matrix } => {
                let dim = 1usize << qubits;
                let mut out = vec![Complex64::default(); dim];
                for (row, item) in out.iter_mut().enumerate() {
                    let mut acc = Complex64::default();
                    for col in 0..dim {
                        let entry = if inverse {
                            matrix[(col, row)].conj()
                        } else {
                            matrix[(row, col)]
                        };
                        acc += entry * amps[col];
                    }
                    *item = acc;
                }
                amps.copy_from_slice(&out);
            }
        }
    }

    /// Average probability over uniform seeds that the measured out qubit
    /// equals `IP(x, y)`, for the basis-encoded side value x. Exhaustive.
    pub fn measured_bias(&self, x: u64) -> Result<f64> {
        let n = self.n;
        let e = self.side_qubits;
        let block = 1usize << (1 + n + e);
        let mut total = 0.0;
        for y in 0..(1u64 << n) {
            let mut amps = vec![Complex64::default(); block];
            // |0⟩_out |y⟩ |x⟩
            amps[((y as usize) << e) | x as usize] = cr(1.0);
            self.apply_block(&mut amps, false);
            let ip_bit = ((x & y).count_ones() & 1) as usize;
            let out_shift = n + e;
            let mut correct = 0.0;
            for (idx, amp) in amps.iter().enumerate() {
                if (idx >> out_shift) & 1 == ip_bit {
                    correct += amp.norm_sqr();
                }
            }
            total += correct;
        }
        Ok(total / (1u64 << n) as f64)
    }
}

fn ideal_ip_block(amps: &mut [Complex64], n: u32, e: u32, out_shift: u32) {
    let dim = amps.len();
    let out_mask = 1usize << out_shift;
    for idx in 0..dim {
        if idx & out_mask == 0 {
            let y = (idx >> e) as u64 & ((1u64 << n) - 1);
            let x = idx as u64 & ((1u64 << e) - 1);
            if (x & y).count_ones() & 1 == 1 {
                amps.swap(idx, idx | out_mask);
            }
        }
    }
}

/// Real rotation on the out qubit: |0⟩ → cosγ|0⟩ + sinγ|1⟩.
fn rotate_out(amps: &mut [Complex64], out_shift: u32, gamma: f64) {
    let (s, co) = gamma.sin_cos();
    let out_mask = 1usize << out_shift;
    for idx in 0..amps.len() {
        if idx & out_mask == 0 {
            let a0 = amps[idx];
            let a1 = amps[idx | out_mask];
            amps[idx] = a0.scale(co) - a1.scale(s);
            amps[idx | out_mask] = a0.scale(s) + a1.scale(co);
        }
    }
}

/// Exact predictor: XORs `IP(x, y)` into the out qubit for basis-encoded x.
pub fn make_ideal_ip_predictor(n: u32) -> Result<PredictorOracle> {
    if n > 10 {
        return Err(Error::SizeCap(format!("n = {n} above statevector cap")));
    }
    Ok(PredictorOracle {
        kind: OracleKind::IdealIp,
        n,
        side_qubits: n,
        declared_gate_cost: n as u64,
    })
}

/// Synthetic predictor whose average bias over uniform seeds is exactly
/// `1/2 + ε`: the ideal predictor followed by an out-qubit rotation with
/// `cos²γ = 1/2 + ε`.
pub fn make_biased_predictor(n: u32, epsilon: f64) -> Result<PredictorOracle> {
    if n > 10 {
        return Err(Error::SizeCap(format!("n = {n} above statevector cap")));
    }
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "bias ε = {epsilon} outside [0, 1/2]"
        )));
    }
    let gamma = (0.5 + epsilon).sqrt().acos();
    Ok(PredictorOracle {
        kind: OracleKind::BiasedIp { epsilon, gamma },
        n,
        side_qubits: n,
        declared_gate_cost: n as u64 + 1,
    })
}

/// The six-stage reconstructor built around a predictor oracle.
#[derive(Debug, Clone)]
pub struct ReconstructionCircuit {
    oracle: PredictorOracle,
    gate_count: u64,
    stages: Vec<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionOutcome {
    pub x: u64,
    pub success_probability: f64,
}

/// Assemble the appendix circuit; the gate count is reported from the built
/// stages: one NOT to prepare |1⟩, two Hadamard layers of n+1, the predictor
/// and its inverse, and the middle CNOT.
pub fn build_reconstructor(oracle: PredictorOracle) -> ReconstructionCircuit {
    let n = oracle.n() as u64;
    let s = oracle.declared_gate_cost();
    ReconstructionCircuit {
        oracle,
        gate_count: 2 * s + 2 * (n + 1) + 2,
        stages: vec![
            "prepare |1>|0^n>",
            "hadamard layer on n+1 qubits",
            "predictor",
            "cnot predictor result -> phase qubit",
            "inverse predictor",
            "hadamard layer on n+1 qubits",
            "measure first n+1 qubits",
        ],
    }
}

impl ReconstructionCircuit {
    pub fn gate_count(&self) -> u64 {
        self.gate_count
    }

    pub fn stages(&self) -> &[&'static str] {
        &self.stages
    }

    pub fn oracle(&self) -> &PredictorOracle {
        &self.oracle
    }

    /// Run on a hidden value x (the side register starts in
    /// `side_info_pure`) and return the exact probability of measuring
    /// `(1, x)` on the first n+1 qubits.
    pub fn run(&self, x: u64, side_info_pure: &PureVector) -> Result<f64> {
        let state = self.final_state(side_info_pure)?;
        let n = self.oracle.n();
        let e = self.oracle.side_qubits();
        let total = 1 + n + 1 + e;
        if x >= 1u64 << n {
            return Err(Error::InvalidArgument(format!(
                "x = {x} does not fit in {n} bits"
            )));
        }
        // phase qubit (top) must read 1 and the seed register must read x.
        let mut prob = 0.0;
        let phase_mask = 1usize << (total - 1);
        let seed_shift = total - 1 - n;
        for (idx, amp) in state.iter().enumerate() {
            if idx & phase_mask != 0
                && ((idx >> seed_shift) as u64 & ((1u64 << n) - 1)) == x
            {
                prob += amp.norm_sqr();
            }
        }
        Ok(prob)
    }

    /// Full pre-measurement statevector (testing hook for the interference
    /// pattern).
    pub fn final_state(&self, side_info_pure: &PureVector) -> Result<Vec<Complex64>> {
        let n = self.oracle.n();
        let e = self.oracle.side_qubits();
        let total = 1 + n + 1 + e;
        if total > MAX_QUBITS {
            return Err(Error::SizeCap(format!("{total} qubits above cap 22")));
        }
        let side_dim: usize = side_info_pure.dims().iter().product();
        if side_dim != 1usize << e {
            return Err(Error::DimensionMismatch {
                expected: 1usize << e,
                got: side_dim,
            });
        }
        let dim = 1usize << total;
        let mut amps = vec![Complex64::default(); dim];
        // |1⟩_phase |0ⁿ⟩_seed |0⟩_out ⊗ |ψ⟩_side
        let base = 1usize << (total - 1);
        for (s, &a) in side_info_pure.amplitudes().iter().enumerate() {
            amps[base | s] = a;
        }
        // The oracle block (out, seed, side) occupies the low 1+n+e qubits
        // but with (seed, out) ordered (out above seed): our global layout
        // is [phase | seed | out | side], so route through an index map.
        for q in 0..=n {
            hadamard_qubit(&mut amps, total, q);
        }
        self.apply_oracle(&mut amps, total, false);
        cnot(&mut amps, total, n + 1, 0);
        self.apply_oracle(&mut amps, total, true);
        for q in 0..=n {
            hadamard_qubit(&mut amps, total, q);
        }
        Ok(amps)
    }

    fn apply_oracle(&self, amps: &mut [Complex64], total: u32, inverse: bool) {
        let n = self.oracle.n();
        let e = self.oracle.side_qubits();
        let block_qubits = 1 + n + e;
        let block = 1usize << block_qubits;
        // Global index = phase·2^(total-1) | y·2^(e+1) | out·2^e | side.
        // Oracle block index = out·2^(n+e) | y·2^e | side.
        let mut scratch = vec![Complex64::default(); block];
        for phase in 0..2usize {
            let phase_bits = phase << (total - 1);
            for b in 0..block {
                let out = (b >> (n + e)) & 1;
                let y = (b >> e) & ((1usize << n) - 1);
                let side = b & ((1usize << e) - 1);
                let global = phase_bits | (y << (e + 1)) | (out << e) | side;
                scratch[b] = amps[global];
            }
            self.oracle.apply_block(&mut scratch, inverse);
            for b in 0..block {
                let out = (b >> (n + e)) & 1;
                let y = (b >> e) & ((1usize << n) - 1);
                let side = b & ((1usize << e) - 1);
                let global = phase_bits | (y << (e + 1)) | (out << e) | side;
                amps[global] = scratch[b];
            }
        }
    }
}

fn hadamard_qubit(amps: &mut [Complex64], total: u32, q: u32) {
    let mask = 1usize << (total - 1 - q);
    let w = 1.0 / 2f64.sqrt();
    for idx in 0..amps.len() {
        if idx & mask == 0 {
            let a0 = amps[idx];
            let a1 = amps[idx | mask];
            amps[idx] = (a0 + a1).scale(w);
            amps[idx | mask] = (a0 - a1).scale(w);
        }
    }
}

fn cnot(amps: &mut [Complex64], total: u32, control: u32, target: u32) {
    let cmask = 1usize << (total - 1 - control);
    let tmask = 1usize << (total - 1 - target);
    for idx in 0..amps.len() {
        if idx & cmask != 0 && idx & tmask == 0 {
            amps.swap(idx, idx | tmask);
        }
    }
}

/// Run the reconstructor for a basis-encoded hidden value.
pub fn run_reconstruction_basis(circuit: &ReconstructionCircuit, x: u64) -> Result<f64> {
    let e = circuit.oracle().side_qubits();
    let side = PureVector::basis(vec![2; e as usize], x as usize)?;
    circuit.run(x, &side)
}

/// Success table over all 2ⁿ hidden values with the `4ε²` reference column.
pub fn reconstruction_sweep(n: u32, epsilon: f64) -> Result<Vec<(u64, f64, f64)>> {
    let oracle = make_biased_predictor(n, epsilon)?;
    let circuit = build_reconstructor(oracle);
    let bound = 4.0 * epsilon * epsilon;
    (0..(1u64 << n))
        .map(|x| Ok((x, run_reconstruction_basis(&circuit, x)?, bound)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ideal_oracle_flips_on_ip() {
        // n=1, x=1, y=1 -> output qubit flips.
        let oracle = make_ideal_ip_predictor(1).unwrap();
        let mut amps = vec![Complex64::default(); 8];
        // block layout: out | y | x  (1+1+1 qubits); start |0,1,1⟩ = idx 0b011
        amps[0b011] = cr(1.0);
        oracle.apply_block(&mut amps, false);
        assert_abs_diff_eq!(amps[0b111].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ideal_oracle_x_zero_never_flips() {
        let oracle = make_ideal_ip_predictor(2).unwrap();
        for y in 0..4usize {
            let mut amps = vec![Complex64::default(); 32];
            amps[y << 2] = cr(1.0); // |0⟩_out |y⟩ |x=00⟩
            oracle.apply_block(&mut amps, false);
            assert_abs_diff_eq!(amps[y << 2].re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn oracle_matrices_are_unitary() {
        for oracle in [
            make_ideal_ip_predictor(2).unwrap(),
            make_biased_predictor(2, 0.3).unwrap(),
        ] {
            let m = oracle.matrix().unwrap();
            let residual = crate::qcore::linalg::max_abs_diff(
                &(&m * m.adjoint()),
                &CMatrix::identity(m.nrows(), m.ncols()),
            );
            assert!(residual < 1e-10, "residual {residual}");
        }
    }

    #[test]
    fn biased_predictor_extremes() {
        // ε = 1/2 reproduces the ideal predictor.
        let ideal = make_ideal_ip_predictor(2).unwrap().matrix().unwrap();
        let full = make_biased_predictor(2, 0.5).unwrap().matrix().unwrap();
        assert!(crate::qcore::linalg::max_abs_diff(&ideal, &full) < 1e-12);
        // ε = 0: measured bias 1/2 (output independent of IP).
        let flat = make_biased_predictor(3, 0.0).unwrap();
        for x in [0u64, 3, 7] {
            assert_abs_diff_eq!(flat.measured_bias(x).unwrap(), 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn biased_predictor_exhaustive_bias() {
        let oracle = make_biased_predictor(3, 0.25).unwrap();
        for x in 0..8u64 {
            assert_abs_diff_eq!(oracle.measured_bias(x).unwrap(), 0.75, epsilon = 1e-9);
        }
    }

    #[test]
    fn gate_count_reported_from_stages() {
        let oracle = make_ideal_ip_predictor(3).unwrap();
        let s = oracle.declared_gate_cost();
        let circuit = build_reconstructor(oracle);
        assert_eq!(circuit.gate_count(), 2 * s + 2 * 4 + 2);
        assert_eq!(circuit.stages().len(), 7);
        assert_eq!(circuit.stages()[3], "cnot predictor result -> phase qubit");
    }

    #[test]
    fn ideal_reconstruction_is_exact() {
        for n in 1..=4u32 {
            let circuit = build_reconstructor(make_ideal_ip_predictor(n).unwrap());
            for x in 0..(1u64 << n) {
                let p = run_reconstruction_basis(&circuit, x).unwrap();
                assert_abs_diff_eq!(p, 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn ideal_final_state_is_one_x() {
        let n = 3u32;
        let circuit = build_reconstructor(make_ideal_ip_predictor(n).unwrap());
        let x = 0b101u64;
        let side = PureVector::basis(vec![2; n as usize], x as usize).unwrap();
        let state = circuit.final_state(&side).unwrap();
        let total = 1 + n + 1 + n;
        // |1⟩|x⟩|0⟩_out|x⟩_side
        let expected = (1usize << (total - 1))
            | ((x as usize) << (n + 1))
            | (x as usize);
        assert_abs_diff_eq!(state[expected].norm(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn biased_reconstruction_meets_4eps2() {
        for (n, eps) in [(2u32, 0.1f64), (3, 0.3), (4, 0.45)] {
            let circuit = build_reconstructor(make_biased_predictor(n, eps).unwrap());
            for x in 0..(1u64 << n) {
                let p = run_reconstruction_basis(&circuit, x).unwrap();
                assert!(
                    p >= 4.0 * eps * eps - 1e-6,
                    "n={n} eps={eps} x={x}: p={p} < {}",
                    4.0 * eps * eps
                );
            }
        }
    }

    #[test]
    fn success_monotone_in_bias() {
        let n = 3u32;
        let mut prev = -1.0;
        for k in 0..=5 {
            let eps = 0.1 * k as f64;
            let circuit = build_reconstructor(make_biased_predictor(n, eps).unwrap());
            let p = run_reconstruction_basis(&circuit, 0b110).unwrap();
            assert!(p >= prev - 1e-9, "eps={eps}: {p} < {prev}");
            prev = p;
        }
    }

    #[test]
    fn black_box_respects_side_relabeling() {
        // Conjugating the oracle by a side-register permutation and feeding
        // the permuted encoding must reproduce the sweep outcomes.
        let n = 2u32;
        let base = make_ideal_ip_predictor(n).unwrap().matrix().unwrap();
        let dim = base.nrows();
        let e = n;
        // permutation on side labels: x -> x ^ 0b01
        let mut perm = CMatrix::zeros(dim, dim);
        for idx in 0..dim {
            let side = idx & ((1usize << e) - 1);
            let rest = idx & !((1usize << e) - 1);
            perm[(rest | (side ^ 0b01), idx)] = cr(1.0);
        }
        let conjugated = &perm * base * perm.adjoint();
        let oracle = PredictorOracle::custom(conjugated, n, e, n as u64).unwrap();
        let circuit = build_reconstructor(oracle);
        for x in 0..(1u64 << n) {
            let side =
                PureVector::basis(vec![2; e as usize], (x ^ 0b01) as usize).unwrap();
            let p = circuit.run(x, &side).unwrap();
            assert_abs_diff_eq!(p, 1.0, epsilon = 1e-9);
        }
    }
}
