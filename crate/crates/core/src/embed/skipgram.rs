use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EmbeddingTable;
use crate::data::{AttributeVocab, SessionLog};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        Self {
            dim: 32,
            window: 2,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            seed: 0,
        }
    }
}

impl SkipGramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.negatives == 0 {
            return Err(Error::Config("skip-gram dim, window and negatives must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("skip-gram learning rate must be positive".into()));
        }
        Ok(())
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Skip-gram with negative sampling over attribute sequences.
///
/// Every (center, context) pair within `window` positions gets one SGD step
/// on `-log s(u_ctx . v_c) - sum log s(-u_neg . v_c)`, with negatives drawn
/// from the unigram distribution raised to 0.75. The learning rate decays
/// linearly to 1e-4 of its initial value over all epochs. Sessions are
/// visited in a seeded shuffled order each epoch.
pub fn train_embeddings(
    sessions: &[SessionLog],
    vocab: &AttributeVocab,
    cfg: &SkipGramConfig,
) -> Result<EmbeddingTable> {
    cfg.validate()?;
    let v = vocab.len();
    if v < 2 {
        return Err(Error::Data("skip-gram needs at least 2 attributes".into()));
    }
    let mut counts = vec![0u64; v];
    let mut pairs_per_epoch = 0usize;
    for s in sessions {
        for (i, e) in s.events.iter().enumerate() {
            if e.attribute >= v {
                return Err(Error::OutOfBounds { id: e.attribute, size: v });
            }
            counts[e.attribute] += 1;
            let lo = i.saturating_sub(cfg.window);
            let hi = (i + cfg.window).min(s.events.len() - 1);
            pairs_per_epoch += hi - lo;
        }
    }
    if pairs_per_epoch == 0 {
        return Err(Error::Data("skip-gram corpus has no co-occurring pairs".into()));
    }
    let noise = WeightedIndex::new(counts.iter().map(|&c| (c as f64).powf(0.75)))
        .map_err(|e| Error::Data(format!("negative-sampling table: {e}")))?;

    let d = cfg.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let half = 0.5 / d as f64;
    let mut input: Vec<f64> = (0..v * d).map(|_| rng.random_range(-half..half)).collect();
    let mut output = vec![0.0; v * d];
    let mut grad_center = vec![0.0; d];

    let total = (pairs_per_epoch * cfg.epochs).max(1) as f64;
    let mut seen = 0usize;
    let mut order: Vec<usize> = (0..sessions.len()).collect();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &si in &order {
            let attrs: Vec<usize> = sessions[si].attributes().collect();
            for (i, &center) in attrs.iter().enumerate() {
                let lo = i.saturating_sub(cfg.window);
                let hi = (i + cfg.window).min(attrs.len() - 1);
                for j in (lo..=hi).filter(|&j| j != i) {
                    let lr = cfg.learning_rate * (1.0 - seen as f64 / total).max(1e-4);
                    seen += 1;
                    grad_center.fill(0.0);
                    let vc = center * d;
                    for n in 0..=cfg.negatives {
                        let (target, label) = if n == 0 {
                            (attrs[j], 1.0)
                        } else {
                            let neg = noise.sample(&mut rng);
                            if neg == attrs[j] {
                                continue;
                            }
                            (neg, 0.0)
                        };
                        let ut = target * d;
                        let dot: f64 = (0..d).map(|x| input[vc + x] * output[ut + x]).sum();
                        let g = lr * (label - sigmoid(dot));
                        for x in 0..d {
                            grad_center[x] += g * output[ut + x];
                            output[ut + x] += g * input[vc + x];
                        }
                    }
                    for x in 0..d {
                        input[vc + x] += grad_center[x];
                    }
                }
            }
        }
        if input.iter().chain(&output).any(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!(
                "skip-gram produced non-finite values in epoch {epoch}"
            )));
        }
    }
    Ok(EmbeddingTable::from_training(d, input, output))
}
