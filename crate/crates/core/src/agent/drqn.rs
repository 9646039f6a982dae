use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::AgentConfig;
use crate::data::{sessions_to_transitions, AttrId, NormalizationStats, SessionLog, Transition};
use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::nnet::{sgd_step, GradientBundle, QNetDims, QNetworkParams};
use crate::ranking::top_k_indices;

const SHUFFLE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochSummary {
    pub epoch: usize,
    pub mean_loss: f64,
    pub transitions: usize,
}

/// Online and target Q-networks over a frozen embedding table.
#[derive(Debug, Clone)]
pub struct DrqnAgent {
    params: QNetworkParams,
    target_params: QNetworkParams,
    embeddings: Arc<EmbeddingTable>,
    config: AgentConfig,
    updates_done: u64,
    epochs_done: usize,
    grads: GradientBundle,
}

impl DrqnAgent {
    /// Fresh agent with parameters drawn from `config.seed`.
    pub fn new(config: AgentConfig, embeddings: Arc<EmbeddingTable>) -> Result<Self> {
        config.validate()?;
        let dims = QNetDims {
            input_dim: embeddings.dim(),
            hidden: config.hidden,
            vocab_size: embeddings.vocab_size(),
        };
        let params = QNetworkParams::init(dims, &mut ChaCha8Rng::seed_from_u64(config.seed));
        Self::with_params(config, embeddings, params)
    }

    /// Agent over explicit parameters; the target network starts as a copy.
    pub fn with_params(
        config: AgentConfig,
        embeddings: Arc<EmbeddingTable>,
        params: QNetworkParams,
    ) -> Result<Self> {
        config.validate()?;
        let dims = params.dims();
        if dims.input_dim != embeddings.dim() || dims.vocab_size != embeddings.vocab_size() {
            return Err(Error::Shape(format!(
                "network {dims:?} does not fit embeddings of {} x {}",
                embeddings.vocab_size(),
                embeddings.dim()
            )));
        }
        if dims.hidden != config.hidden {
            return Err(Error::Shape(format!(
                "network hidden size {} differs from config {}",
                dims.hidden, config.hidden
            )));
        }
        Ok(Self {
            target_params: params.clone(),
            grads: QNetworkParams::zeros(dims),
            params,
            embeddings,
            config,
            updates_done: 0,
            epochs_done: 0,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn params(&self) -> &QNetworkParams {
        &self.params
    }

    /// Mutable online parameters. The target network is not touched.
    pub fn params_mut(&mut self) -> &mut QNetworkParams {
        &mut self.params
    }

    pub fn target_params(&self) -> &QNetworkParams {
        &self.target_params
    }

    pub fn embeddings(&self) -> &Arc<EmbeddingTable> {
        &self.embeddings
    }

    pub fn vocab_size(&self) -> usize {
        self.embeddings.vocab_size()
    }

    pub fn updates_done(&self) -> u64 {
        self.updates_done
    }

    pub fn epochs_done(&self) -> usize {
        self.epochs_done
    }

    pub(crate) fn restore_counters(&mut self, updates_done: u64, epochs_done: usize) {
        self.updates_done = updates_done;
        self.epochs_done = epochs_done;
    }

    /// Copies the online parameters into the target network.
    pub fn sync_target(&mut self) {
        self.target_params.clone_from(&self.params);
    }

    fn embed(&self, window: &[AttrId]) -> Result<Vec<&[f64]>> {
        if window.len() != self.config.k {
            return Err(Error::Argument(format!(
                "window has {} attributes, expected k = {}",
                window.len(),
                self.config.k
            )));
        }
        window.iter().map(|&id| self.embeddings.lookup(id)).collect()
    }

    /// Q-values for every attribute after `window`, from the online or the
    /// target parameters.
    pub fn q_forward(&self, window: &[AttrId], use_target: bool) -> Result<Vec<f64>> {
        let inputs = self.embed(window)?;
        let net = if use_target { &self.target_params } else { &self.params };
        net.q_values(&inputs)
    }

    /// Regression target: the fixed terminal reward at session end,
    /// otherwise `r + gamma * max_b Q_target(next, b)`.
    pub fn td_target(&self, t: &Transition) -> Result<f64> {
        if t.terminal {
            return Ok(if t.purchased {
                self.config.purchase_reward
            } else {
                self.config.no_purchase_reward
            });
        }
        if self.config.gamma == 0.0 {
            return Ok(t.reward);
        }
        let q_next = self.q_forward(&t.next, true)?;
        let best = q_next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(t.reward + self.config.gamma * best)
    }

    /// One SGD step on `(y - Q(s, a))^2`. Only the taken action's output
    /// receives gradient; the target network is held fixed.
    pub fn train_step(&mut self, t: &Transition) -> Result<f64> {
        let n = self.vocab_size();
        if t.action >= n {
            return Err(Error::OutOfBounds { id: t.action, size: n });
        }
        let y = self.td_target(t)?;
        let inputs = self.embed(&t.state)?;
        let (q, cache) = self.params.forward(&inputs)?;
        let diff = y - q[t.action];
        let loss = diff * diff;
        if !loss.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite loss after {} updates (target {y}, q {})",
                self.updates_done, q[t.action]
            )));
        }
        let mut grad_q = vec![0.0; n];
        grad_q[t.action] = -2.0 * diff;
        self.grads.fill(0.0);
        self.params.backward_into(&cache, &grad_q, &mut self.grads)?;
        sgd_step(&mut self.params, &self.grads, self.config.learning_rate, self.config.clip())?;
        self.updates_done += 1;
        if self.updates_done % self.config.target_sync == 0 {
            self.sync_target();
        }
        Ok(loss)
    }

    /// One pass over `sessions` in a shuffled order fixed by the seed and
    /// the epoch index; transitions within a session stay in time order.
    pub fn train_epoch(
        &mut self,
        sessions: &[SessionLog],
        stats: &NormalizationStats,
    ) -> Result<EpochSummary> {
        let k = self.config.k;
        let mut order: Vec<usize> = (0..sessions.len()).filter(|&i| sessions[i].is_usable(k)).collect();
        if order.is_empty() {
            return Err(Error::Data(format!(
                "no session has at least k + 1 = {} events",
                k + 1
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ SHUFFLE_SALT);
        rng.set_stream(self.epochs_done as u64);
        order.shuffle(&mut rng);

        let mut total = 0.0;
        let mut count = 0usize;
        for i in order {
            for t in sessions_to_transitions(&sessions[i], k, stats) {
                total += self.train_step(&t)?;
                count += 1;
            }
        }
        let summary = EpochSummary {
            epoch: self.epochs_done,
            mean_loss: total / count as f64,
            transitions: count,
        };
        self.epochs_done += 1;
        Ok(summary)
    }

    /// Runs `config.epochs` epochs.
    pub fn fit(&mut self, sessions: &[SessionLog], stats: &NormalizationStats) -> Result<Vec<EpochSummary>> {
        (0..self.config.epochs)
            .map(|_| self.train_epoch(sessions, stats))
            .collect()
    }

    /// The `top_k` attributes with the highest online Q-values, ties by id.
    pub fn recommend_top_k(&self, window: &[AttrId], top_k: usize) -> Result<Vec<AttrId>> {
        let q = self.q_forward(window, false)?;
        top_k_indices(&q, top_k)
    }
}
