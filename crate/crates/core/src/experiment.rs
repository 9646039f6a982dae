//! Experiment configuration and the in-memory generate -> embed -> train ->
//! evaluate pipeline shared by the CLI, examples, and acceptance tests.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::{AgentConfig, DrqnAgent, EpochSummary};
use crate::baseline::{BaselineConfig, SimilarAttributes, WeightScheme};
use crate::data::{
    fit_normalizer, generate_sessions, AttributeVocab, NormalizationStats, PlantedChain, SessionLog,
};
use crate::embed::{train_embeddings, EmbeddingTable, SkipGramConfig};
use crate::error::{Error, Result};
use crate::eval::{hit_rate_at_k, EvalReport, RandomRanker};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    #[serde(flatten)]
    pub chain: PlantedChain,
    pub num_sessions: usize,
    /// Fraction of sessions assigned to training.
    pub train_ratio: f64,
    pub dwell_percentile: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        // 33924 train / 2809 test sessions.
        Self {
            chain: PlantedChain::default(),
            num_sessions: 36_733,
            train_ratio: 33_924.0 / 36_733.0,
            dwell_percentile: 95.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub top_k: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { top_k: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineSection {
    #[serde(flatten)]
    pub weights: WeightScheme,
}

impl Default for BaselineSection {
    fn default() -> Self {
        Self {
            weights: WeightScheme::Linear,
        }
    }
}

/// Everything a run needs. Stage seeds are derived from `seed` by
/// [`ExperimentConfig::resolve`], which overwrites any seeds set per stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub data: DataConfig,
    pub embed: SkipGramConfig,
    pub agent: AgentConfig,
    pub baseline: BaselineSection,
    pub eval: EvalConfig,
}

/// SplitMix64 finalizer over `seed ^ tag`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = (seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15)).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const TAG_GENERATOR: u64 = 1;
const TAG_EMBED: u64 = 2;
const TAG_AGENT: u64 = 3;
const TAG_RANDOM: u64 = 4;

impl ExperimentConfig {
    /// Derives stage seeds and checks every sub-config.
    pub fn resolve(mut self) -> Result<Self> {
        self.embed.seed = derive_seed(self.seed, TAG_EMBED);
        self.agent.seed = derive_seed(self.seed, TAG_AGENT);
        self.validate()?;
        Ok(self)
    }

    pub fn generator_seed(&self) -> u64 {
        derive_seed(self.seed, TAG_GENERATOR)
    }

    pub fn random_ranker_seed(&self) -> u64 {
        derive_seed(self.seed, TAG_RANDOM)
    }

    pub fn baseline_config(&self) -> BaselineConfig {
        BaselineConfig {
            k: self.agent.k,
            weights: self.baseline.weights,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.embed.validate()?;
        self.agent.validate()?;
        self.baseline_config().validate()?;
        let (lo, _) = self.data.chain.session_length_range;
        if lo < self.agent.k + 1 {
            return Err(Error::Config(format!(
                "minimum session length {lo} must be at least k + 1 = {}",
                self.agent.k + 1
            )));
        }
        if !(0.0..=1.0).contains(&self.data.train_ratio) {
            return Err(Error::Config("train_ratio must be in [0, 1]".into()));
        }
        if self.eval.top_k == 0 || self.eval.top_k > self.data.chain.vocab_size {
            return Err(Error::Config(format!(
                "top_k must be in 1..={}",
                self.data.chain.vocab_size
            )));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the TOML serialization.
    pub fn digest(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }
}

/// Deterministic train/test split: sessions are ordered by the SHA-256 of
/// their id and the first `round(ratio * n)` go to training. Each side keeps
/// the original session order.
pub fn split_by_id_hash(sessions: Vec<SessionLog>, train_ratio: f64) -> (Vec<SessionLog>, Vec<SessionLog>) {
    let n = sessions.len();
    let n_train = ((train_ratio * n as f64).round() as usize).min(n);
    let mut keyed: Vec<(Vec<u8>, usize)> = sessions
        .iter()
        .enumerate()
        .map(|(i, s)| (Sha256::digest(s.id.as_bytes()).to_vec(), i))
        .collect();
    keyed.sort();
    let mut is_train = vec![false; n];
    for (_, i) in &keyed[..n_train] {
        is_train[*i] = true;
    }
    let (mut train, mut test) = (Vec::with_capacity(n_train), Vec::with_capacity(n - n_train));
    for (s, t) in sessions.into_iter().zip(is_train) {
        if t {
            train.push(s);
        } else {
            test.push(s);
        }
    }
    (train, test)
}

pub struct GeneratedData {
    pub vocab: AttributeVocab,
    pub train: Vec<SessionLog>,
    pub test: Vec<SessionLog>,
}

pub fn generate_data(cfg: &ExperimentConfig) -> Result<GeneratedData> {
    let gen = cfg
        .data
        .chain
        .build(cfg.data.num_sessions, cfg.generator_seed())?;
    let sessions = generate_sessions(&gen)?;
    let (train, test) = split_by_id_hash(sessions, cfg.data.train_ratio);
    Ok(GeneratedData {
        vocab: AttributeVocab::synthetic(cfg.data.chain.vocab_size)?,
        train,
        test,
    })
}

pub struct PipelineOutcome {
    pub stats: NormalizationStats,
    pub embeddings: Arc<EmbeddingTable>,
    pub agent: DrqnAgent,
    pub epochs: Vec<EpochSummary>,
    /// DRQN, similar attributes, random, in that order.
    pub reports: Vec<EvalReport>,
}

/// Full run on already generated data; `on_epoch` sees each epoch summary.
pub fn run_on_data(
    cfg: &ExperimentConfig,
    data: &GeneratedData,
    mut on_epoch: impl FnMut(&EpochSummary),
) -> Result<PipelineOutcome> {
    let stats = fit_normalizer(&data.train, cfg.data.dwell_percentile)?;
    let embeddings = Arc::new(train_embeddings(&data.train, &data.vocab, &cfg.embed)?);
    let mut agent = DrqnAgent::new(cfg.agent.clone(), embeddings.clone())?;
    let mut epochs = Vec::with_capacity(cfg.agent.epochs);
    for _ in 0..cfg.agent.epochs {
        let summary = agent.train_epoch(&data.train, &stats)?;
        on_epoch(&summary);
        epochs.push(summary);
    }
    let (k, top_k) = (cfg.agent.k, cfg.eval.top_k);
    let similar = SimilarAttributes::new(embeddings.clone(), cfg.baseline_config())?;
    let random = RandomRanker::new(data.vocab.len(), cfg.random_ranker_seed());
    let reports = vec![
        hit_rate_at_k(&agent, &data.test, k, top_k)?,
        hit_rate_at_k(&similar, &data.test, k, top_k)?,
        hit_rate_at_k(&random, &data.test, k, top_k)?,
    ];
    Ok(PipelineOutcome {
        stats,
        embeddings,
        agent,
        epochs,
        reports,
    })
}

/// Generate, embed, train, and evaluate in one call.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<PipelineOutcome> {
    let data = generate_data(cfg)?;
    run_on_data(cfg, &data, |_| {})
}
