//! Unrotated surface-code layouts, readout orderings and memory circuits.

mod build;
mod circuit;
mod layout;
mod ordering;

use thiserror::Error;

use crate::twirl::VariantId;

pub use build::{build_memory_circuit, noiseless_channels, ChannelSet, MemoryBasis, MemorySpec};
pub use circuit::{Circuit, Instruction};
pub use layout::{CodeLayout, Slot, Stabilizer, StabilizerType};
pub use ordering::{
    aligns_with_logical, analyze_ordering, BoundaryMode, FaultRecord, FtReport, GateOrdering,
    Pairing, Scheme,
};

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("distance must be odd and between 3 and 15, got {0}")]
    InvalidDistance(usize),
    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("operators {0} and {1} anticommute")]
    NonCommuting(usize, usize),
    #[error("no channel table for {0}")]
    MissingChannel(VariantId),
    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
