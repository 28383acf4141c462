//! Dense feed-forward networks in `f64` with hand-written reverse mode and
//! the Adam update rule.

mod adam;
pub mod checkpoint;
mod network;

pub use adam::{Adam, AdamParams};
pub use network::{DenseLayer, DenseNetwork, ForwardTrace, Gradients, OutputActivation};

/// Leaky-ReLU negative slope used by both actor and critic.
pub const DEFAULT_LEAKY_SLOPE: f64 = 0.01;
