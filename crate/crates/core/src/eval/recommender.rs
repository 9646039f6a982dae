use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::DrqnAgent;
use crate::data::AttrId;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommenderInfo {
    pub name: String,
    /// Baselines are the reference rows when reports are compared.
    pub is_baseline: bool,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    pub items: Vec<AttrId>,
    /// The recommender could not form a meaningful score (e.g. a zero state).
    pub degenerate: bool,
}

/// Anything that ranks next attributes from a window of previous ones.
/// Implementations must be pure: the same window always gives the same list.
pub trait Recommender: Sync {
    fn info(&self) -> RecommenderInfo;
    fn recommend(&self, window: &[AttrId], top_k: usize) -> Result<Recommendation>;
}

impl Recommender for DrqnAgent {
    fn info(&self) -> RecommenderInfo {
        RecommenderInfo {
            name: "drqn".into(),
            is_baseline: false,
            seed: Some(self.config().seed),
            config: serde_json::to_value(self.config()).unwrap_or_default(),
        }
    }

    fn recommend(&self, window: &[AttrId], top_k: usize) -> Result<Recommendation> {
        Ok(Recommendation {
            items: self.recommend_top_k(window, top_k)?,
            degenerate: false,
        })
    }
}

/// Uniformly random top-K lists, reproducible from the seed and the window.
/// Lists for the same window are nested: the top-K list is a prefix of the
/// top-(K+1) list.
#[derive(Debug, Clone)]
pub struct RandomRanker {
    vocab_size: usize,
    seed: u64,
}

impl RandomRanker {
    pub fn new(vocab_size: usize, seed: u64) -> Self {
        Self { vocab_size, seed }
    }

    fn stream(&self, window: &[AttrId]) -> u64 {
        // FNV-1a over the window ids.
        window.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &id| {
            (h ^ id as u64).wrapping_mul(0x0100_0000_01b3)
        })
    }
}

impl Recommender for RandomRanker {
    fn info(&self) -> RecommenderInfo {
        RecommenderInfo {
            name: "random".into(),
            is_baseline: true,
            seed: Some(self.seed),
            config: serde_json::json!({ "vocab_size": self.vocab_size }),
        }
    }

    fn recommend(&self, window: &[AttrId], top_k: usize) -> Result<Recommendation> {
        if top_k == 0 || top_k > self.vocab_size {
            return Err(Error::Argument(format!(
                "top-K must be in 1..={}, got {top_k}",
                self.vocab_size
            )));
        }
        if let Some(&bad) = window.iter().find(|&&id| id >= self.vocab_size) {
            return Err(Error::OutOfBounds { id: bad, size: self.vocab_size });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream(window));
        // Forward Fisher-Yates: draw `i` depends only on `i` and `V`.
        let mut ids: Vec<AttrId> = (0..self.vocab_size).collect();
        for i in 0..top_k {
            let j = rng.random_range(i..self.vocab_size);
            ids.swap(i, j);
        }
        ids.truncate(top_k);
        Ok(Recommendation {
            items: ids,
            degenerate: false,
        })
    }
}
