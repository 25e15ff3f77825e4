//! Pauli-frame Monte Carlo over memory circuits, plus an exact enumeration
//! oracle for small circuits.

mod batch;
mod exact;
mod frame;
mod sampler;

use thiserror::Error;

pub use batch::SampleBatch;
pub use exact::{exact_distribution, OutcomeDistribution, EXACT_MAX_BITS, EXACT_MAX_QUBITS};
pub use frame::{noise_sensitivities, NoiseSensitivity, Signature};
pub use sampler::{sample_circuit, sample_circuit_with, SamplerOptions};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("too large for exact enumeration: {0}")]
    TooLarge(String),
    #[error("bad batch file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
