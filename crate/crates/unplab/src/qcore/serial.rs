//! JSON schemas for states and channels.
//!
//! Density operators serialize as `{"dims":[...], "re":[[...]], "im":[[...]]}`
//! and cq-states as `{"probs":{...}, "conditionals":{...}}` keyed by decimal
//! symbol labels. Round-trips are bit-faithful for doubles.

use super::linalg::{c, CMatrix};
use super::{CqState, DensityOperator, KrausChannel};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityOperatorJson {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&DensityOperator> for DensityOperatorJson {
    fn from(rho: &DensityOperator) -> Self {
        let d = rho.dim();
        let m = rho.matrix();
        let re = (0..d)
            .map(|r| (0..d).map(|col| m[(r, col)].re).collect())
            .collect();
        let im = (0..d)
            .map(|r| (0..d).map(|col| m[(r, col)].im).collect())
            .collect();
        Self {
            dims: rho.dims().to_vec(),
            re,
            im,
        }
    }
}

impl DensityOperatorJson {
    pub fn build(&self) -> Result<DensityOperator> {
        let d: usize = self.dims.iter().product();
        if self.re.len() != d || self.im.len() != d {
            return Err(Error::Config("matrix row count mismatch".into()));
        }
        let mut m = CMatrix::zeros(d, d);
        for r in 0..d {
            if self.re[r].len() != d || self.im[r].len() != d {
                return Err(Error::Config("matrix column count mismatch".into()));
            }
            for col in 0..d {
                m[(r, col)] = c(self.re[r][col], self.im[r][col]);
            }
        }
        DensityOperator::new(m, self.dims.clone())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CqStateJson {
    pub probs: BTreeMap<String, f64>,
    pub conditionals: BTreeMap<String, DensityOperatorJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphabet_bits: Option<u32>,
}

impl From<&CqState> for CqStateJson {
    fn from(state: &CqState) -> Self {
        let mut probs = BTreeMap::new();
        let mut conditionals = BTreeMap::new();
        for (x, p, rho) in state.iter() {
            probs.insert(x.to_string(), p);
            conditionals.insert(x.to_string(), DensityOperatorJson::from(rho));
        }
        Self {
            probs,
            conditionals,
            alphabet_bits: Some(state.alphabet_bits()),
        }
    }
}

impl CqStateJson {
    pub fn build(&self) -> Result<CqState> {
        let mut entries = Vec::new();
        for (key, &p) in &self.probs {
            let label: u64 = key
                .parse()
                .map_err(|_| Error::Config(format!("bad symbol key {key}")))?;
            let rho = self
                .conditionals
                .get(key)
                .ok_or_else(|| Error::Config(format!("missing conditional for {key}")))?
                .build()?;
            entries.push((label, p, rho));
        }
        CqState::new(entries, self.alphabet_bits)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KrausChannelJson {
    pub in_dims: Vec<usize>,
    pub out_dims: Vec<usize>,
    pub kraus: Vec<MatrixJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let re = (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|col| m[(r, col)].re).collect())
            .collect();
        let im = (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|col| m[(r, col)].im).collect())
            .collect();
        Self { re, im }
    }

    pub fn build(&self) -> Result<CMatrix> {
        let rows = self.re.len();
        if rows == 0 {
            return Err(Error::Config("empty matrix".into()));
        }
        let cols = self.re[0].len();
        let mut m = CMatrix::zeros(rows, cols);
        for r in 0..rows {
            if self.re[r].len() != cols || self.im.get(r).map(|v| v.len()) != Some(cols) {
                return Err(Error::Config("ragged matrix".into()));
            }
            for col in 0..cols {
                m[(r, col)] = c(self.re[r][col], self.im[r][col]);
            }
        }
        Ok(m)
    }
}

impl From<&KrausChannel> for KrausChannelJson {
    fn from(chan: &KrausChannel) -> Self {
        Self {
            in_dims: chan.in_dims().to_vec(),
            out_dims: chan.out_dims().to_vec(),
            kraus: chan.kraus().iter().map(MatrixJson::from_matrix).collect(),
        }
    }
}

impl KrausChannelJson {
    pub fn build(&self) -> Result<KrausChannel> {
        let ops: Result<Vec<_>> = self.kraus.iter().map(|m| m.build()).collect();
        KrausChannel::new(ops?, self.in_dims.clone(), self.out_dims.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{maximally_mixed, random};

    #[test]
    fn density_round_trip_is_bit_faithful() {
        let mut rng = random::rng(21);
        let rho = random::random_density(&mut rng, &[2, 2], 3).unwrap();
        let json = serde_json::to_string(&DensityOperatorJson::from(&rho)).unwrap();
        let back: DensityOperatorJson = serde_json::from_str(&json).unwrap();
        let rho2 = back.build().unwrap();
        for (a, b) in rho.matrix().iter().zip(rho2.matrix().iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn cq_round_trip() {
        let omega = maximally_mixed(2).unwrap();
        let state = CqState::new(
            vec![(0, 0.5, omega.clone()), (3, 0.25, omega)],
            Some(2),
        )
        .unwrap();
        let json = serde_json::to_string(&CqStateJson::from(&state)).unwrap();
        let back: CqStateJson = serde_json::from_str(&json).unwrap();
        let state2 = back.build().unwrap();
        assert_eq!(state.symbols(), state2.symbols());
        assert_eq!(state.probs(), state2.probs());
        assert_eq!(state.alphabet_bits(), state2.alphabet_bits());
    }
}
