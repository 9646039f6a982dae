//! The recurrent Q-learning agent: Q-values over an embedded window, TD
//! targets from a lagged target network, offline training over logged
//! sessions, and top-K inference.

mod checkpoint;
mod config;
mod drqn;

pub use crate::data::Transition;
pub use checkpoint::AgentSidecar;
pub use config::AgentConfig;
pub use drqn::{DrqnAgent, EpochSummary};
