//! Desk-scale laboratory for guessing entropy, randomness extraction, and
//! bounded quantum leakage.
//!
//! The crate simulates finite-dimensional quantum states exactly (dense
//! matrices, double precision) and verifies entropy inequalities on small
//! instances: conditional min-entropy via primal/dual certificates, leakage
//! chain rules, inner-product extractors stretched through weak designs,
//! predictor-to-reconstructor circuits, and alternating extraction under
//! λ-bounded leakage channels.
//!
//! Every module exposes pure functions over immutable values; parameter
//! sweeps may run concurrently without synchronization. See the `examples/`
//! directory for one runnable walkthrough per capability, and the `unplab`
//! binary for batch experiments.

pub mod cli;
pub mod entropy;
pub mod error;
pub mod extractors;
pub mod leakage;
pub mod metrics;
pub mod protocols;
pub mod qcore;
pub mod reconstruct;

pub use error::{Error, Result};

/// Default cap on the total Hilbert-space dimension of any dense operator.
pub const DEFAULT_MAX_DIM: usize = 256;

/// Current dimension cap: `UNPLAB_MAX_DIM` env var if set, otherwise
/// [`DEFAULT_MAX_DIM`].
pub fn max_dim() -> usize {
    std::env::var("UNPLAB_MAX_DIM")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_DIM)
}
