//! Single-step deep reinforcement learning optimizer: each episode draws a
//! condition and a weight, acts once, and learns from the scalarized
//! outcome under many reweightings.

mod buffer;
mod config;
mod engine;
mod sample;
mod update;

pub use buffer::{Batch, ReplayBuffer};
pub use config::{exploration_sigma, PlateauRule, TrainingConfig};
pub use engine::{train, Engine, EpisodeOutcome, Trainer, TrainingRun};
pub use sample::{ActionVector, SampleOrigin, StateVector, TrainingSample};
pub use update::{actor_update, critic_update, select_action, ActionValue};
