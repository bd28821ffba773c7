//! State and channel algebra. Everything here is generic over the real scalar type.

mod channel;
mod fidelity;
mod noise;
pub mod random;
mod state;
mod twirl;

use thiserror::Error;

pub use channel::QuantumChannel;
pub use fidelity::{average_fidelity, depolarizing_fidelity, entanglement_fidelity, singlet_fraction};
pub use noise::{
    amplitude_damping, bit_flip, bright_state_resource, decoherence_channel, depolarizing_channel,
    depolarizing_lower_bound, diagonal_state, pauli_channel, phase_damping, plus_state, teleportation_channel,
};
pub use state::{DensityMatrix, Effect};
pub use twirl::{twirl, twirl_over};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("depolarizing fidelity {f} outside [{min}, {max}]")]
    FidelityOutOfRange { f: f64, min: f64, max: f64 },
    #[error("channel is not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),
    #[error("channel is not completely positive (Choi eigenvalue {0:e})")]
    NotCompletelyPositive(f64),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("invalid effect: {0}")]
    InvalidEffect(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid decoherence parameters: {0}")]
    InvalidDecoherence(String),
    #[error("dimension {0} is not a perfect square")]
    NotBipartite(usize),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
}
