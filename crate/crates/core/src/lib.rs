//! Simulation and estimation toolkit for benchmarking the links of a noisy quantum network.
//!
//! The state and channel algebra in [`channels`] is generic over the real scalar type; the
//! network model, protocol runners and estimators work in `f64` through the aliases below.

pub mod channels;
pub mod cliffords;
pub mod estimate;
pub mod linalg;
pub mod network;
pub mod protocol;
pub mod scalar;
pub mod seed;

pub use channels::QuantumChannel;
pub use cliffords::{CliffordElement, CliffordGroup};
pub use scalar::Real;

/// Double-precision state.
pub type DensityMatrix = channels::DensityMatrix<f64>;
/// Double-precision channel.
pub type Channel = channels::QuantumChannel<f64>;
/// Double-precision POVM effect.
pub type Effect = channels::Effect<f64>;

pub type DensityMatrix32 = channels::DensityMatrix<f32>;
pub type Channel32 = channels::QuantumChannel<f32>;
pub type Effect32 = channels::Effect<f32>;
