//! "Similar attributes": rank every attribute by cosine similarity to a
//! recency-weighted average of the window's embeddings. No training, no
//! state carried between queries.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::data::AttrId;
use crate::embed::{cosine_similarity, norm, EmbeddingTable};
use crate::error::{Error, Result};
use crate::eval::{Recommendation, Recommender, RecommenderInfo};
use crate::ranking::top_k_indices;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum WeightScheme {
    /// `w_j` proportional to `j`, `j = 1..k`, most recent last.
    Linear,
    /// `w_j` proportional to `lambda^(k - j)`.
    Exponential { lambda: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub k: usize,
    pub weights: WeightScheme,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            k: 4,
            weights: WeightScheme::Linear,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("baseline k must be >= 1".into()));
        }
        if let WeightScheme::Exponential { lambda } = self.weights {
            // lambda = 1 would weight every position equally.
            if !(lambda > 0.0 && lambda < 1.0) {
                return Err(Error::Config(format!(
                    "exponential decay must be in (0, 1), got {lambda}"
                )));
            }
        }
        Ok(())
    }

    /// Normalized position weights, oldest first.
    pub fn weights(&self) -> Vec<f64> {
        let k = self.k;
        let raw: Vec<f64> = match self.weights {
            WeightScheme::Linear => (1..=k).map(|j| j as f64).collect(),
            WeightScheme::Exponential { lambda } => {
                (1..=k).map(|j| lambda.powi((k - j) as i32)).collect()
            }
        };
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }
}

/// Recency-weighted average of the window's embeddings.
pub fn weighted_state(table: &EmbeddingTable, window: &[AttrId], cfg: &BaselineConfig) -> Result<Vec<f64>> {
    if window.len() != cfg.k {
        return Err(Error::Argument(format!(
            "window has {} attributes, expected k = {}",
            window.len(),
            cfg.k
        )));
    }
    let mut state = vec![0.0; table.dim()];
    for (&id, w) in window.iter().zip(cfg.weights()) {
        for (s, x) in state.iter_mut().zip(table.lookup(id)?) {
            *s += w * x;
        }
    }
    Ok(state)
}

/// All attributes ranked by cosine similarity to the weighted state; a zero
/// state scores every attribute 0, which leaves plain id order.
pub fn recommend_top_k_baseline(
    table: &EmbeddingTable,
    window: &[AttrId],
    top_k: usize,
    cfg: &BaselineConfig,
) -> Result<Vec<AttrId>> {
    let state = weighted_state(table, window, cfg)?;
    let scores = (0..table.vocab_size())
        .map(|id| Ok(cosine_similarity(&state, table.lookup(id)?)))
        .collect::<Result<Vec<_>>>()?;
    top_k_indices(&scores, top_k)
}

/// [`Recommender`] wrapper that flags zero-norm states.
#[derive(Debug, Clone)]
pub struct SimilarAttributes {
    table: Arc<EmbeddingTable>,
    cfg: BaselineConfig,
}

impl SimilarAttributes {
    pub fn new(table: Arc<EmbeddingTable>, cfg: BaselineConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { table, cfg })
    }

    pub fn config(&self) -> &BaselineConfig {
        &self.cfg
    }
}

impl Recommender for SimilarAttributes {
    fn info(&self) -> RecommenderInfo {
        RecommenderInfo {
            name: "similar_attributes".into(),
            is_baseline: true,
            seed: None,
            config: serde_json::to_value(&self.cfg).unwrap_or_default(),
        }
    }

    fn recommend(&self, window: &[AttrId], top_k: usize) -> Result<Recommendation> {
        let state = weighted_state(&self.table, window, &self.cfg)?;
        let degenerate = norm(&state) == 0.0;
        let items = recommend_top_k_baseline(&self.table, window, top_k, &self.cfg)?;
        Ok(Recommendation { items, degenerate })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(rows: &[&[f64]]) -> EmbeddingTable {
        EmbeddingTable::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identical_rows_average_to_themselves() {
        let t = table(&[&[0.3, -0.7], &[1.0, 1.0]]);
        for weights in [WeightScheme::Linear, WeightScheme::Exponential { lambda: 0.5 }] {
            let cfg = BaselineConfig { k: 3, weights };
            let s = weighted_state(&t, &[0, 0, 0], &cfg).unwrap();
            assert!((s[0] - 0.3).abs() < 1e-15 && (s[1] + 0.7).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_two_step_by_hand() {
        let t = table(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let cfg = BaselineConfig { k: 2, weights: WeightScheme::Linear };
        let s = weighted_state(&t, &[0, 1], &cfg).unwrap();
        assert!((s[0] - 1.0 / 3.0).abs() < 1e-15 && (s[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_step_is_the_embedding() {
        let t = table(&[&[1.0, 2.0], &[0.5, -4.0]]);
        let cfg = BaselineConfig { k: 1, ..Default::default() };
        assert_eq!(weighted_state(&t, &[1], &cfg).unwrap(), vec![0.5, -4.0]);
    }

    #[test]
    fn self_similarity_wins_and_full_k_is_permutation() {
        let t = table(&[&[1.0, 0.2, 0.0], &[0.0, 1.0, 0.3], &[0.4, 0.0, 1.0], &[-1.0, 0.5, 0.5]]);
        let cfg = BaselineConfig::default();
        for x in 0..4 {
            assert_eq!(recommend_top_k_baseline(&t, &[x; 4], 1, &cfg).unwrap(), vec![x]);
        }
        let mut all = recommend_top_k_baseline(&t, &[0, 1, 2, 3], 4, &cfg).unwrap();
        all.sort();
        assert_eq!(all, vec![0, 1, 2, 3]);
        assert!(recommend_top_k_baseline(&t, &[0, 1, 2, 3], 5, &cfg).is_err());
    }

    /// State (1, 0); rows at 0, 60 and 135 degrees give cosines 1, 0.5, -0.707.
    #[test]
    fn ranking_from_known_angles() {
        let r3 = 3f64.sqrt();
        let t = table(&[&[-1.0, 1.0], &[0.5, r3 / 2.0], &[2.0, 0.0]]);
        let cfg = BaselineConfig { k: 1, ..Default::default() };
        assert_eq!(recommend_top_k_baseline(&t, &[2], 3, &cfg).unwrap(), vec![2, 1, 0]);
    }

    #[test]
    fn zero_state_is_flagged_and_falls_back_to_id_order() {
        let t = table(&[&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0]]);
        let cfg = BaselineConfig { k: 2, weights: WeightScheme::Linear };
        let rec = SimilarAttributes::new(Arc::new(t), cfg).unwrap();
        assert!(!rec.recommend(&[0, 2], 2).unwrap().degenerate);
        let zero = table(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let rec = SimilarAttributes::new(Arc::new(zero), BaselineConfig { k: 1, ..Default::default() }).unwrap();
        let out = rec.recommend(&[0], 3).unwrap();
        assert!(out.degenerate);
        assert_eq!(out.items, vec![0, 1, 2]);
    }

    #[test]
    fn exponential_decay_of_one_is_rejected() {
        let cfg = BaselineConfig { k: 3, weights: WeightScheme::Exponential { lambda: 1.0 } };
        assert!(cfg.validate().is_err());
    }

    proptest! {
        #[test]
        fn weights_normalized_and_increasing(k in 1usize..12, lambda in 0.01f64..0.99) {
            for weights in [WeightScheme::Linear, WeightScheme::Exponential { lambda }] {
                let w = BaselineConfig { k, weights }.weights();
                prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!(w.windows(2).all(|p| p[0] < p[1]));
            }
        }

        #[test]
        fn ranking_ignores_uniform_rescaling(
            rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 4..8),
            scale in 0.1f64..10.0,
            window in prop::collection::vec(0usize..4, 2),
        ) {
            let cfg = BaselineConfig { k: 2, ..Default::default() };
            let t = EmbeddingTable::from_rows(&rows).unwrap();
            let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x * scale).collect()).collect();
            let scaled = EmbeddingTable::from_rows(&scaled).unwrap();
            prop_assert_eq!(
                recommend_top_k_baseline(&scaled, &window, rows.len(), &cfg).unwrap(),
                recommend_top_k_baseline(&t, &window, rows.len(), &cfg).unwrap()
            );
        }
    }
}
