//! Detector error models, their graphlike decomposition and minimum-weight
//! perfect matching decoding.

mod brute;
mod decoder;
mod dem;
mod diag;
mod graph;

use thiserror::Error;

pub use brute::{brute_force_min_weight, BruteForceOracle, BRUTE_MAX_MECHANISMS};
pub use decoder::{count_failures, decode_batch, Decoded, Decoder, EXACT_DP_MAX_DEFECTS};
pub use diag::{ambiguous_mass, misdecoded_mass};
pub use dem::{build_dem, DetectorErrorModel, Mechanism, DEM_FLOOR};
pub use graph::{decompose_graphlike, Edge, Hyperedge, MatchingGraph};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("mechanism probability {0} outside (0, 1/2)")]
    Unphysical(f64),
    #[error("too large: {0}")]
    TooLarge(String),
    #[error("detector {0} cannot be matched")]
    Unmatchable(usize),
    #[error("batch does not fit graph: {0}")]
    Mismatch(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("matching failed: {0}")]
    Matching(String),
    #[error(transparent)]
    Sim(#[from] crate::frame_sim::SimError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `ln((1 - p) / p)`.
pub fn edge_weight(p: f64) -> Result<f64, DecodeError> {
    if !(p > 0.0 && p < 0.5) {
        return Err(DecodeError::Unphysical(p));
    }
    Ok(((1.0 - p) / p).ln())
}

/// Probability that exactly one of two independent events happens.
pub fn xor_merge(p1: f64, p2: f64) -> f64 {
    p1 * (1.0 - p2) + p2 * (1.0 - p1)
}
