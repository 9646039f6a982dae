use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    /// Number of previous attributes forming the state.
    pub k: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    /// Target network is refreshed every `target_sync` updates; 1 means the
    /// bootstrap always uses the parameters from before the current step.
    pub target_sync: u64,
    pub purchase_reward: f64,
    pub no_purchase_reward: f64,
    pub epochs: usize,
    /// LSTM state size; both dense layers use the same width.
    pub hidden: usize,
    /// Global gradient-norm clip; 0 disables clipping.
    pub grad_clip: f64,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            k: 4,
            gamma: 1.0,
            learning_rate: 1e-3,
            target_sync: 100,
            purchase_reward: 10.0,
            no_purchase_reward: 0.0,
            epochs: 5,
            hidden: 64,
            grad_clip: 5.0,
            seed: 0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma must be in [0, 1], got {}", self.gamma)));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be a finite value >= 0".into()));
        }
        if self.target_sync == 0 {
            return Err(Error::Config("target_sync must be >= 1".into()));
        }
        if self.hidden == 0 {
            return Err(Error::Config("hidden must be >= 1".into()));
        }
        if !(self.grad_clip >= 0.0) {
            return Err(Error::Config("grad_clip must be >= 0".into()));
        }
        if !(self.purchase_reward.is_finite() && self.no_purchase_reward.is_finite()) {
            return Err(Error::Config("terminal rewards must be finite".into()));
        }
        Ok(())
    }

    pub(crate) fn clip(&self) -> Option<f64> {
        (self.grad_clip > 0.0).then_some(self.grad_clip)
    }
}
