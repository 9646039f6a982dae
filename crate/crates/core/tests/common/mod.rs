//! Fixtures shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use attrec::data::{AttributeVocab, NormalizationStats, SessionLog};
use attrec::experiment::ExperimentConfig;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Desk-scale run: V = 200, 20k train / 2k test sessions, ten epochs.
pub fn desk_scale_config(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig { seed, ..Default::default() };
    cfg.data.num_sessions = 22_000;
    cfg.data.train_ratio = 20.0 / 22.0;
    cfg.agent.gamma = 0.5;
    cfg.agent.learning_rate = 1e-2;
    cfg.agent.epochs = 10;
    cfg.resolve().expect("desk-scale config is valid")
}

/// A three-attribute episodic MDP with deterministic outcomes. Moving to a
/// higher id continues the session; moving to the same or a lower id ends
/// it, with a purchase exactly when the attribute repeats.
pub struct TabularMdp {
    pub sessions: Vec<SessionLog>,
    pub stats: NormalizationStats,
    pub gamma: f64,
    pub purchase_reward: f64,
}

pub const TABULAR_V: usize = 3;

impl TabularMdp {
    pub fn new(gamma: f64) -> Self {
        let prefixes: [&[usize]; 7] = [&[0], &[1], &[2], &[0, 1], &[0, 2], &[1, 2], &[0, 1, 2]];
        let mut sessions = Vec::new();
        for prefix in prefixes {
            let last = *prefix.last().unwrap();
            for end in 0..=last {
                let mut attrs = prefix.to_vec();
                attrs.push(end);
                let mut pairs = vec![(attrs[0], 1_000.0)];
                for w in attrs.windows(2) {
                    pairs.push((w[1], Self::dwell(w[0], w[1])));
                }
                let id = format!("t{}", sessions.len());
                sessions.push(SessionLog::from_pairs(id, &pairs, end == last).unwrap());
            }
        }
        Self {
            sessions,
            stats: NormalizationStats { cap: 10_000.0, percentile: 95.0 },
            gamma,
            purchase_reward: 10.0,
        }
    }

    fn dwell(from: usize, to: usize) -> f64 {
        1_000.0 * (1 + from + 3 * to) as f64
    }

    fn terminal(s: usize, a: usize) -> bool {
        a <= s
    }

    /// Brute-force value iteration over all nine state-action pairs.
    pub fn value_iteration(&self) -> [[f64; TABULAR_V]; TABULAR_V] {
        let mut q = [[0.0; TABULAR_V]; TABULAR_V];
        loop {
            let mut next = q;
            for s in 0..TABULAR_V {
                for a in 0..TABULAR_V {
                    next[s][a] = if Self::terminal(s, a) {
                        if a == s { self.purchase_reward } else { 0.0 }
                    } else {
                        let best = q[a].iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        self.stats.normalize(Self::dwell(s, a)) + self.gamma * best
                    };
                }
            }
            if next == q {
                return q;
            }
            q = next;
        }
    }
}

/// Sessions where {0, 1, 3, 4} and {2, 5, 6, 7} never meet.
pub fn cooccurrence_corpus(seed: u64) -> (Vec<SessionLog>, AttributeVocab) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: [&[usize]; 2] = [&[0, 1, 3, 4], &[2, 5, 6, 7]];
    let mut sessions = Vec::new();
    for i in 0..400 {
        let group = groups[i % 2];
        let mut attrs = group.to_vec();
        for _ in 0..4 {
            attrs.push(group[rng.random_range(0..group.len())]);
        }
        attrs.shuffle(&mut rng);
        let pairs: Vec<_> = attrs.iter().map(|&a| (a, 1.0)).collect();
        sessions.push(SessionLog::from_pairs(format!("s{i}"), &pairs, false).unwrap());
    }
    (sessions, AttributeVocab::synthetic(8).unwrap())
}

/// Recommends `last + 1, last + 2, ...` (mod V): hits exactly when a
/// session steps to the next id.
pub struct Successor {
    pub vocab_size: usize,
}

impl attrec::eval::Recommender for Successor {
    fn info(&self) -> attrec::eval::RecommenderInfo {
        attrec::eval::RecommenderInfo {
            name: "successor".into(),
            is_baseline: true,
            seed: None,
            config: serde_json::Value::Null,
        }
    }

    fn recommend(&self, window: &[usize], top_k: usize) -> attrec::Result<attrec::eval::Recommendation> {
        let last = *window.last().unwrap();
        let items = (1..=top_k).map(|i| (last + i) % self.vocab_size).collect();
        Ok(attrec::eval::Recommendation { items, degenerate: false })
    }
}

/// k = 1: steps 0->1 (hit), 1->3 (miss), 4->5 (hit); the third session is too short.
pub fn three_step_fixture() -> Vec<SessionLog> {
    let session = |id: &str, attrs: &[usize]| {
        let pairs: Vec<_> = attrs.iter().map(|&a| (a, 1.0)).collect();
        SessionLog::from_pairs(id, &pairs, false).unwrap()
    };
    vec![session("a", &[0, 1, 3]), session("b", &[4, 5]), session("c", &[2])]
}
