use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;
use serde::{Deserialize, Serialize};

use super::{SessionEvent, SessionLog};
use crate::error::{Error, Result};

/// Parameters of a first-order Markov chain over attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub vocab_size: usize,
    /// Row-stochastic `V x V` matrix; row `i` is the next-attribute distribution after `i`.
    pub transition_matrix: Vec<Vec<f64>>,
    /// Per-attribute purchase propensity in `[0, 1]`.
    pub purchase_affinity: Vec<f64>,
    /// Inclusive bounds on the number of events per session.
    pub session_length_range: (usize, usize),
    /// Mean dwell in milliseconds per attribute.
    pub dwell_means: Vec<f64>,
    /// Exponent on the relative likelihood of a step that scales its dwell
    /// mean; 0 makes dwell independent of the previous attribute.
    pub dwell_sharpness: f64,
    pub seed: u64,
    pub num_sessions: usize,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let v = self.vocab_size;
        if v < 2 {
            return Err(Error::Config(format!("vocab_size must be >= 2, got {v}")));
        }
        if self.transition_matrix.len() != v {
            return Err(Error::Config(format!(
                "transition matrix has {} rows, expected {v}",
                self.transition_matrix.len()
            )));
        }
        for (i, row) in self.transition_matrix.iter().enumerate() {
            if row.len() != v {
                return Err(Error::Config(format!("row {i} has {} columns", row.len())));
            }
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::Config(format!("row {i} has a negative or non-finite entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!("row {i} sums to {sum}, not 1")));
            }
        }
        if self.purchase_affinity.len() != v
            || self.purchase_affinity.iter().any(|p| !(0.0..=1.0).contains(p))
        {
            return Err(Error::Config("purchase_affinity must hold V values in [0, 1]".into()));
        }
        if self.dwell_means.len() != v || self.dwell_means.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::Config("dwell_means must hold V positive values".into()));
        }
        if !(self.dwell_sharpness >= 0.0 && self.dwell_sharpness.is_finite()) {
            return Err(Error::Config("dwell_sharpness must be finite and >= 0".into()));
        }
        let (lo, hi) = self.session_length_range;
        if lo < 1 || lo > hi {
            return Err(Error::Config(format!("bad session length range ({lo}, {hi})")));
        }
        Ok(())
    }
}

/// Recipe for a random sparse chain: each attribute gets a handful of
/// preferred successors plus a uniform noise floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedChain {
    pub vocab_size: usize,
    /// Number of preferred successors per attribute.
    pub branching: usize,
    /// Probability mass spread uniformly over all attributes.
    pub noise: f64,
    /// Fraction of attributes that carry `high_affinity`.
    pub high_affinity_fraction: f64,
    pub high_affinity: f64,
    pub low_affinity: f64,
    pub dwell_mean_range: (f64, f64),
    pub dwell_sharpness: f64,
    pub session_length_range: (usize, usize),
}

impl Default for PlantedChain {
    fn default() -> Self {
        Self {
            vocab_size: 200,
            branching: 6,
            noise: 0.2,
            high_affinity_fraction: 0.1,
            high_affinity: 0.3,
            low_affinity: 0.05,
            dwell_mean_range: (8_000.0, 16_000.0),
            dwell_sharpness: 0.5,
            session_length_range: (8, 14),
        }
    }
}

impl PlantedChain {
    /// Draws the chain itself from `seed`, then records `seed` for session sampling.
    pub fn build(&self, num_sessions: usize, seed: u64) -> Result<GeneratorConfig> {
        let v = self.vocab_size;
        if v < 2 || self.branching == 0 || self.branching > v {
            return Err(Error::Config(format!(
                "branching {} must be in 1..={v} with vocab_size >= 2",
                self.branching
            )));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::Config("noise must be in [0, 1]".into()));
        }
        let (dlo, dhi) = self.dwell_mean_range;
        if !(dlo > 0.0 && dhi >= dlo) {
            return Err(Error::Config("bad dwell_mean_range".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c4a1_0000_0001);
        let unit = Exp::new(1.0).expect("rate 1 is valid");

        let mut matrix = Vec::with_capacity(v);
        for _ in 0..v {
            let mut row = vec![self.noise / v as f64; v];
            let successors = index::sample(&mut rng, v, self.branching);
            let weights: Vec<f64> = (0..self.branching).map(|_| unit.sample(&mut rng) + 0.1).collect();
            let total: f64 = weights.iter().sum();
            for (succ, w) in successors.iter().zip(&weights) {
                row[succ] += (1.0 - self.noise) * w / total;
            }
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= sum);
            matrix.push(row);
        }

        let high = ((self.high_affinity_fraction * v as f64).round() as usize).min(v);
        let mut affinity = vec![self.low_affinity; v];
        for i in index::sample(&mut rng, v, high) {
            affinity[i] = self.high_affinity;
        }
        let dwell_means = (0..v).map(|_| rng.random_range(dlo..=dhi)).collect();

        let cfg = GeneratorConfig {
            vocab_size: v,
            transition_matrix: matrix,
            purchase_affinity: affinity,
            session_length_range: self.session_length_range,
            dwell_means,
            dwell_sharpness: self.dwell_sharpness,
            seed,
            num_sessions,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Samples `num_sessions` sessions from the chain. The first attribute is
/// uniform. Dwell is exponential, rounded to whole milliseconds, with mean
/// `dwell_means[a] * (P(prev, a) / max_j P(prev, j))^dwell_sharpness` (the
/// first event uses the plain mean). The purchase probability is the mean
/// affinity of the browsed attributes.
pub fn generate_sessions(cfg: &GeneratorConfig) -> Result<Vec<SessionLog>> {
    cfg.validate()?;
    let rows = cfg
        .transition_matrix
        .iter()
        .map(|row| WeightedIndex::new(row).map_err(|e| Error::Config(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let row_max: Vec<f64> = cfg
        .transition_matrix
        .iter()
        .map(|row| row.iter().copied().fold(0.0, f64::max))
        .collect();
    let unit = Exp::new(1.0).expect("rate 1 is valid");

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (lo, hi) = cfg.session_length_range;
    let width = cfg.num_sessions.saturating_sub(1).to_string().len().max(6);
    let mut sessions = Vec::with_capacity(cfg.num_sessions);
    for i in 0..cfg.num_sessions {
        let len = rng.random_range(lo..=hi);
        let mut events = Vec::with_capacity(len);
        let mut attr = rng.random_range(0..cfg.vocab_size);
        for step in 0..len {
            let mut mean = cfg.dwell_means[attr];
            if step > 0 {
                let prev = attr;
                attr = rows[prev].sample(&mut rng);
                mean = cfg.dwell_means[attr];
                if cfg.dwell_sharpness > 0.0 {
                    let rel = cfg.transition_matrix[prev][attr] / row_max[prev];
                    mean *= rel.powf(cfg.dwell_sharpness);
                }
            }
            let ms = (mean * unit.sample(&mut rng)).round();
            events.push(SessionEvent { attribute: attr, dwell: ms });
        }
        let p = events
            .iter()
            .map(|e| cfg.purchase_affinity[e.attribute])
            .sum::<f64>()
            / len as f64;
        let purchased = rng.random::<f64>() < p;
        sessions.push(SessionLog::new(format!("s{i:0width$}"), events, purchased)?);
    }
    Ok(sessions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_state(num_sessions: usize, seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            vocab_size: 3,
            transition_matrix: vec![
                vec![0.1, 0.6, 0.3],
                vec![0.5, 0.25, 0.25],
                vec![0.2, 0.2, 0.6],
            ],
            purchase_affinity: vec![0.1, 0.5, 0.9],
            session_length_range: (2, 6),
            dwell_means: vec![1000.0, 5000.0, 20000.0],
            dwell_sharpness: 0.0,
            seed,
            num_sessions,
        }
    }

    #[test]
    fn zero_sessions() {
        assert!(generate_sessions(&three_state(0, 1)).unwrap().is_empty());
    }

    #[test]
    fn seed_determines_output() {
        let a = generate_sessions(&three_state(200, 9)).unwrap();
        let b = generate_sessions(&three_state(200, 9)).unwrap();
        let c = generate_sessions(&three_state(200, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_rows() {
        let mut cfg = three_state(1, 1);
        cfg.transition_matrix[1][0] += 1e-6;
        assert!(matches!(generate_sessions(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn bigram_frequencies_match_planted_matrix() {
        let cfg = three_state(100_000, 42);
        let sessions = generate_sessions(&cfg).unwrap();
        let mut counts = [[0usize; 3]; 3];
        for s in &sessions {
            for pair in s.events.windows(2) {
                counts[pair[0].attribute][pair[1].attribute] += 1;
            }
        }
        for (i, row) in counts.iter().enumerate() {
            let total: usize = row.iter().sum();
            for (j, &c) in row.iter().enumerate() {
                let freq = c as f64 / total as f64;
                let planted = cfg.transition_matrix[i][j];
                assert!((freq - planted).abs() < 0.01, "cell ({i},{j}): {freq} vs {planted}");
            }
        }
    }

    #[test]
    fn lengths_and_dwell_are_in_range() {
        let cfg = three_state(2_000, 3);
        for s in generate_sessions(&cfg).unwrap() {
            assert!((2..=6).contains(&s.events.len()));
            assert!(s.events.iter().all(|e| e.dwell >= 0.0 && e.dwell.fract() == 0.0));
        }
    }

    #[test]
    fn planted_chain_is_valid_and_seeded() {
        let recipe = PlantedChain { vocab_size: 50, ..Default::default() };
        let a = recipe.build(10, 5).unwrap();
        let b = recipe.build(10, 5).unwrap();
        assert_eq!(a, b);
        for row in &a.transition_matrix {
            let strong = row.iter().filter(|&&p| p > recipe.noise / 50.0 + 1e-12).count();
            assert!(strong <= recipe.branching);
        }
        assert_eq!(a.purchase_affinity.iter().filter(|&&p| p == recipe.high_affinity).count(), 5);
    }
}
