//! Classical-quantum states `Σₓ pₓ |x⟩⟨x| ⊗ ρᴱˣ` and POVMs.

use super::channel::KrausChannel;
use super::linalg::{self, CMatrix, HERM_TOL, PSD_TOL};
use super::DensityOperator;
use crate::error::{Error, Result};

/// A classical distribution `{pₓ}` paired with per-symbol conditional states.
/// Conditionals are normalized; subnormalized cq-states carry their weight in
/// the probabilities, which may sum to less than one.
#[derive(Debug, Clone)]
pub struct CqState {
    symbols: Vec<u64>,
    probs: Vec<f64>,
    conditionals: Vec<DensityOperator>,
    alphabet_bits: u32,
}

impl CqState {
    /// Entries are (symbol label, probability weight, conditional state).
    /// `alphabet_bits` defaults to the smallest n with every label < 2ⁿ.
    pub fn new(
        entries: Vec<(u64, f64, DensityOperator)>,
        alphabet_bits: Option<u32>,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidState("empty alphabet".into()));
        }
        let mut entries = entries;
        entries.sort_by_key(|e| e.0);
        let mut total = 0.0;
        let dims = entries[0].2.dims().to_vec();
        let mut seen = std::collections::BTreeSet::new();
        for (label, p, rho) in &entries {
            if !seen.insert(*label) {
                return Err(Error::InvalidState(format!("duplicate symbol {label}")));
            }
            if *p < -PSD_TOL {
                return Err(Error::InvalidState(format!("negative probability {p}")));
            }
            if rho.dims() != dims.as_slice() {
                return Err(Error::InvalidState(
                    "conditionals must share identical dims".into(),
                ));
            }
            if !rho.is_normalized() {
                return Err(Error::InvalidState(
                    "conditional states must be normalized".into(),
                ));
            }
            total += p;
        }
        if total > 1.0 + PSD_TOL {
            return Err(Error::InvalidState(format!(
                "probabilities sum to {total:.12} > 1"
            )));
        }
        let max_label = entries.last().map(|e| e.0).unwrap_or(0);
        let needed = 64 - max_label.leading_zeros().min(63);
        let needed = needed.max(1);
        let bits = match alphabet_bits {
            Some(b) => {
                if b < needed && max_label > 0 {
                    return Err(Error::InvalidState(format!(
                        "alphabet_bits {b} too small for label {max_label}"
                    )));
                }
                b
            }
            None => needed,
        };
        let (symbols, rest): (Vec<u64>, Vec<(f64, DensityOperator)>) = entries
            .into_iter()
            .map(|(l, p, r)| (l, (p, r)))
            .unzip();
        let (probs, conditionals) = rest.into_iter().unzip();
        Ok(Self {
            symbols,
            probs,
            conditionals,
            alphabet_bits: bits,
        })
    }

    /// Classical distribution over `2ⁿ` labels with trivial side information.
    pub fn classical(probs: &[(u64, f64)], alphabet_bits: Option<u32>) -> Result<Self> {
        let trivial = DensityOperator::new(CMatrix::identity(1, 1), vec![1])?;
        Self::new(
            probs
                .iter()
                .map(|&(l, p)| (l, p, trivial.clone()))
                .collect(),
            alphabet_bits,
        )
    }

    /// Uniform distribution over all `2ⁿ` n-bit strings, trivial side info.
    pub fn uniform_bits(n: u32) -> Result<Self> {
        let count = 1u64 << n;
        let p = 1.0 / count as f64;
        Self::classical(
            &(0..count).map(|x| (x, p)).collect::<Vec<_>>(),
            Some(n),
        )
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[u64] {
        &self.symbols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn conditionals(&self) -> &[DensityOperator] {
        &self.conditionals
    }

    pub fn alphabet_bits(&self) -> u32 {
        self.alphabet_bits
    }

    pub fn side_dims(&self) -> &[usize] {
        self.conditionals[0].dims()
    }

    pub fn side_dim(&self) -> usize {
        self.conditionals[0].dim()
    }

    pub fn total_weight(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64, &DensityOperator)> {
        self.symbols
            .iter()
            .zip(self.probs.iter())
            .zip(self.conditionals.iter())
            .map(|((&s, &p), r)| (s, p, r))
    }

    /// Weighted conditional matrices `Wₓ = pₓ ρᴱˣ` used by discrimination
    /// solvers.
    pub fn weighted_states(&self) -> Vec<CMatrix> {
        self.iter().map(|(_, p, r)| r.matrix().scale(p)).collect()
    }

    /// Side-information marginal `ρᴱ = Σₓ pₓ ρᴱˣ` (subnormalized if the
    /// state is).
    pub fn side_marginal(&self) -> Result<DensityOperator> {
        let d = self.side_dim();
        let mut m = CMatrix::zeros(d, d);
        for (_, p, rho) in self.iter() {
            m += rho.matrix().scale(p);
        }
        DensityOperator::new(m, self.side_dims().to_vec())
    }

    /// The induced joint `Σₓ pₓ |x⟩⟨x| ⊗ ρᴱˣ` on a classical register of
    /// dimension `|support|` (labels in sorted order) tensored with E.
    pub fn joint(&self) -> Result<DensityOperator> {
        let k = self.len();
        let de = self.side_dim();
        let d = k * de;
        let cap = crate::max_dim();
        if d > cap {
            return Err(Error::DimensionCapExceeded { dim: d, cap });
        }
        let mut m = CMatrix::zeros(d, d);
        for (i, (_, p, rho)) in self.iter().enumerate() {
            for r in 0..de {
                for c in 0..de {
                    m[(i * de + r, i * de + c)] = rho.matrix()[(r, c)].scale(p);
                }
            }
        }
        let mut dims = vec![k];
        dims.extend_from_slice(self.side_dims());
        DensityOperator::new(m, dims)
    }

    /// Apply a channel to the side information of every conditional.
    pub fn apply_to_side(&self, phi: &KrausChannel) -> Result<Self> {
        let conditionals: Result<Vec<_>> =
            self.conditionals.iter().map(|r| phi.apply(r)).collect();
        let conditionals = conditionals?;
        Ok(Self {
            symbols: self.symbols.clone(),
            probs: self.probs.clone(),
            conditionals,
            alphabet_bits: self.alphabet_bits,
        })
    }

    /// Trace the side information down to the listed subsystems.
    pub fn side_partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let conditionals: Result<Vec<_>> = self
            .conditionals
            .iter()
            .map(|r| r.partial_trace(keep))
            .collect();
        Ok(Self {
            symbols: self.symbols.clone(),
            probs: self.probs.clone(),
            conditionals: conditionals?,
            alphabet_bits: self.alphabet_bits,
        })
    }

    /// Rescale selected symbol weights (used to build smoothing candidates).
    pub fn with_scaled_probs(&self, scale: impl Fn(u64, f64) -> f64) -> Result<Self> {
        let entries: Vec<(u64, f64, DensityOperator)> = self
            .iter()
            .map(|(s, p, r)| (s, scale(s, p), r.clone()))
            .collect();
        Self::new(entries, Some(self.alphabet_bits))
    }
}

/// Positive operator-valued measure: outcome-labelled PSD elements summing to
/// the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<(u64, CMatrix)>,
    dim: usize,
}

impl Povm {
    pub fn new(elements: Vec<(u64, CMatrix)>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        let dim = elements[0].1.nrows();
        let mut sum = CMatrix::zeros(dim, dim);
        let mut seen = std::collections::BTreeSet::new();
        for (label, e) in &elements {
            if !seen.insert(*label) {
                return Err(Error::InvalidPovm(format!("duplicate outcome {label}")));
            }
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::InvalidPovm("element shape mismatch".into()));
            }
            if !linalg::is_hermitian(e, HERM_TOL) {
                return Err(Error::InvalidPovm(format!(
                    "element {label} not Hermitian"
                )));
            }
            if linalg::min_eigenvalue(e) < -PSD_TOL {
                return Err(Error::InvalidPovm(format!("element {label} not PSD")));
            }
            sum += e;
        }
        if linalg::max_abs_diff(&sum, &CMatrix::identity(dim, dim)) > HERM_TOL {
            return Err(Error::InvalidPovm(
                "elements do not sum to identity within 1e-10".into(),
            ));
        }
        Ok(Self { elements, dim })
    }

    pub fn elements(&self) -> &[(u64, CMatrix)] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn element(&self, label: u64) -> Option<&CMatrix> {
        self.elements
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, e)| e)
    }

    /// POVM that outputs `label` with certainty.
    pub fn constant(dim: usize, label: u64) -> Result<Self> {
        Self::new(vec![(label, CMatrix::identity(dim, dim))])
    }

    /// Computational-basis measurement, outcome j labelled j.
    pub fn computational_basis(dim: usize) -> Result<Self> {
        let elements = (0..dim)
            .map(|i| {
                let mut m = CMatrix::zeros(dim, dim);
                m[(i, i)] = linalg::cr(1.0);
                (i as u64, m)
            })
            .collect();
        Self::new(elements)
    }
}

/// `Σₓ pₓ tr(Eₓ ρᴱˣ)`: success probability of guessing X with the given
/// POVM. Symbols without a matching outcome contribute zero (their element
/// is implicitly the zero operator).
pub fn povm_guess_probability(povm: &Povm, state: &CqState) -> Result<f64> {
    if povm.dim() != state.side_dim() {
        return Err(Error::DimensionMismatch {
            expected: state.side_dim(),
            got: povm.dim(),
        });
    }
    let mut total = 0.0;
    for (x, p, rho) in state.iter() {
        if let Some(e) = povm.element(x) {
            total += (e * rho.matrix()).diagonal().sum().re * p;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{maximally_mixed, DensityOperator, PureVector};
    use approx::assert_abs_diff_eq;

    pub(crate) fn plus_state() -> DensityOperator {
        let w = 1.0 / 2f64.sqrt();
        PureVector::new(
            nalgebra::DVector::from_vec(vec![linalg::cr(w), linalg::cr(w)]),
            vec![2],
        )
        .unwrap()
        .to_density()
        .unwrap()
    }

    #[test]
    fn constant_povm_returns_symbol_probability() {
        let zero = DensityOperator::pure_basis(vec![2], 0).unwrap();
        let plus = plus_state();
        let state = CqState::new(vec![(0, 0.3, zero), (1, 0.7, plus)], Some(1)).unwrap();
        let povm = Povm::constant(2, 0).unwrap();
        let p = povm_guess_probability(&povm, &state).unwrap();
        assert_abs_diff_eq!(p, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn classical_copy_guessed_perfectly() {
        // Uniform 2-bit X with a perfect classical copy in E.
        let entries: Vec<_> = (0u64..4)
            .map(|x| {
                (
                    x,
                    0.25,
                    DensityOperator::pure_basis(vec![4], x as usize).unwrap(),
                )
            })
            .collect();
        let state = CqState::new(entries, Some(2)).unwrap();
        let povm = Povm::computational_basis(4).unwrap();
        let p = povm_guess_probability(&povm, &state).unwrap();
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn helstrom_value_for_zero_plus_pair() {
        // Optimal POVM for equiprobable {|0>, |+>}: projectors onto the
        // positive/negative eigenspaces of (ρ0 - ρ+)/2.
        let zero = DensityOperator::pure_basis(vec![2], 0).unwrap();
        let plus = plus_state();
        let diff = (zero.matrix() - plus.matrix()).scale(0.5);
        let proj_pos = linalg::positive_projector(&diff);
        let proj_neg = CMatrix::identity(2, 2) - &proj_pos;
        let povm = Povm::new(vec![(0, proj_pos), (1, proj_neg)]).unwrap();
        let state = CqState::new(vec![(0, 0.5, zero), (1, 0.5, plus)], Some(1)).unwrap();
        let p = povm_guess_probability(&povm, &state).unwrap();
        assert_abs_diff_eq!(p, (2.0 + 2f64.sqrt()) / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn joint_is_valid_density_operator() {
        let zero = DensityOperator::pure_basis(vec![2], 0).unwrap();
        let state = CqState::new(
            vec![(0, 0.5, zero), (1, 0.5, maximally_mixed(2).unwrap())],
            Some(1),
        )
        .unwrap();
        let joint = state.joint().unwrap();
        assert_eq!(joint.dims(), &[2, 2]);
        assert_abs_diff_eq!(joint.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn povm_validation_rejects_bad_sum() {
        let half = CMatrix::identity(2, 2).scale(0.4);
        assert!(Povm::new(vec![(0, half.clone()), (1, half)]).is_err());
    }

    #[test]
    fn cq_validation() {
        let zero = DensityOperator::pure_basis(vec![2], 0).unwrap();
        // duplicate symbol
        assert!(CqState::new(
            vec![(0, 0.5, zero.clone()), (0, 0.5, zero.clone())],
            None
        )
        .is_err());
        // over-normalized
        assert!(CqState::new(vec![(0, 1.2, zero.clone())], None).is_err());
        // subnormalized conditional rejected
        let sub = maximally_mixed(2).unwrap().scaled(0.5).unwrap();
        assert!(CqState::new(vec![(0, 1.0, sub)], None).is_err());
        // subnormalized weight accepted
        assert!(CqState::new(vec![(0, 0.25, zero)], None).is_ok());
    }
}
