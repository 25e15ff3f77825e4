//! Pauli-twirled noise of stabilizer readout.
//!
//! A readout variant plays its gate windows on a measurement atom and up to
//! four data atoms under Rydberg decay. Leftover Rydberg population is
//! removed, single-qubit phases are undone and the ideal readout unitary is
//! taken off, which leaves an error map on the qubit subspace. Twirling
//! keeps the diagonal of its Pauli process matrix: the weights `lambda_Q`.

mod cache;
mod extract;
mod table;
mod variant;

use thiserror::Error;

use crate::lindblad::LindbladError;
use crate::pulse::GateKind;

pub use cache::ChannelCache;
pub use extract::{apply_error_channel, extract_pauli_channel, pauli_weights, ExtractOptions};
pub use table::{validate_channel, ChannelReport, PauliChannelTable};
pub use variant::{PulseSet, ReadoutVariant, VariantId};

#[derive(Debug, Error)]
pub enum TwirlError {
    #[error("unknown variant {0:?}")]
    UnknownVariant(String),
    #[error("no {0} pulse supplied")]
    MissingPulse(GateKind),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("weights sum to {total}, not 1")]
    Normalization { total: f64 },
    #[error("weight of {pauli} is {value:e}")]
    Negative { pauli: String, value: f64 },
    #[error(transparent)]
    Lindblad(#[from] LindbladError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("channel file: {0}")]
    Format(#[from] serde_json::Error),
}
