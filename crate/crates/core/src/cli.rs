//! Command-line front end. Every stage reads and writes one run directory
//! (`--out`); each artifact carries a JSON sidecar with the digests of its
//! inputs so later stages can refuse mismatched files.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::agent::DrqnAgent;
use crate::baseline::SimilarAttributes;
use crate::data::{
    fit_normalizer, load_sessions, sessions_digest, write_sessions, AttributeVocab, SessionLog,
};
use crate::embed::{train_embeddings, EmbeddingTable};
use crate::error::{Error, Result};
use crate::eval::{compare, hit_rate_at_k, EvalReport, RandomRanker, Recommender};
use crate::experiment::{generate_data, ExperimentConfig};

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "attrec", version, about = "Offline DRQN next-attribute recommender toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML experiment config; defaults to `<out>/config.resolved.toml` when present.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Global seed; stage seeds are derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Run directory shared by all stages.
    #[arg(long, global = true, default_value = "run")]
    pub out: PathBuf,
    /// Window length k.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Discount factor in [0, 1].
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Length K of recommendation lists [default: 10].
    #[arg(long, global = true)]
    pub top_k: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample synthetic sessions and split them into train and test files.
    Generate {
        #[arg(long)]
        num_sessions: Option<usize>,
        #[arg(long)]
        train_ratio: Option<f64>,
    },
    /// Fit skip-gram attribute embeddings on the training sessions.
    TrainEmbeddings {
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Train the DRQN agent on the training sessions.
    TrainAgent {
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
    },
    /// Compute Hit-Rate@K on the test sessions.
    Evaluate {
        #[arg(long, value_enum, default_value_t = Algorithm::Drqn)]
        algorithm: Algorithm,
        /// Report path [default: `<out>/reports/<algorithm>.json`].
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Tabulate evaluation reports against the best baseline.
    Compare {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Drqn,
    Similar,
    Random,
}

/// Written by `generate` as `data.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataManifest {
    pub format_version: u32,
    pub seed: u64,
    pub config_digest: String,
    pub vocab_digest: String,
    pub train_digest: String,
    pub test_digest: String,
    pub train_sessions: usize,
    pub test_sessions: usize,
}

/// Written by `train-embeddings` as `embeddings.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingManifest {
    pub format_version: u32,
    pub seed: u64,
    pub config_digest: String,
    pub vocab_digest: String,
    pub train_digest: String,
    pub embedding_digest: String,
}

pub mod files {
    pub const CONFIG: &str = "config.resolved.toml";
    pub const VOCAB: &str = "vocab.txt";
    pub const TRAIN: &str = "train.jsonl";
    pub const TEST: &str = "test.jsonl";
    pub const DATA_MANIFEST: &str = "data.json";
    pub const EMBEDDINGS: &str = "embeddings.bin";
    pub const EMBEDDINGS_TEXT: &str = "embeddings.txt";
    pub const EMBEDDING_MANIFEST: &str = "embeddings.json";
    pub const AGENT: &str = "agent.bin";
    pub const LOSS_LOG: &str = "loss_log.csv";
    pub const REPORTS: &str = "reports";
}

/// Parses `std::env::args`, runs, and returns the process exit code.
pub fn main_with_exit_code() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    match &cli.command {
        Command::Generate {
            num_sessions,
            train_ratio,
        } => {
            let mut cfg = base_config(common, true)?;
            if let Some(n) = num_sessions {
                cfg.data.num_sessions = *n;
            }
            if let Some(r) = train_ratio {
                cfg.data.train_ratio = *r;
            }
            cmd_generate(&finish(cfg, common)?, &common.out)
        }
        Command::TrainEmbeddings { epochs } => {
            let mut cfg = base_config(common, false)?;
            if let Some(e) = epochs {
                cfg.embed.epochs = *e;
            }
            cmd_train_embeddings(&finish(cfg, common)?, &common.out)
        }
        Command::TrainAgent {
            epochs,
            learning_rate,
        } => {
            let mut cfg = base_config(common, false)?;
            if let Some(e) = epochs {
                cfg.agent.epochs = *e;
            }
            if let Some(lr) = learning_rate {
                cfg.agent.learning_rate = *lr;
            }
            cmd_train_agent(&finish(cfg, common)?, &common.out)
        }
        Command::Evaluate { algorithm, report } => {
            let cfg = finish(base_config(common, false)?, common)?;
            let path = report.clone().unwrap_or_else(|| {
                common
                    .out
                    .join(files::REPORTS)
                    .join(format!("{}.json", algorithm_slug(*algorithm)))
            });
            let report = cmd_evaluate(&cfg, &common.out, *algorithm)?;
            write_json(&path, &report)?;
            println!(
                "{}: hit rate @{} = {:.4} ({} / {} steps) -> {}",
                report.algorithm,
                report.top_k,
                report.hit_rate,
                report.hits,
                report.steps,
                path.display()
            );
            Ok(())
        }
        Command::Compare { reports, csv } => {
            let loaded = reports
                .iter()
                .map(|p| read_json::<EvalReport>(p))
                .collect::<Result<Vec<_>>>()?;
            let table = compare(&loaded)?;
            print!("{}", table.to_text());
            if let Some(path) = csv {
                write_text(path, &table.to_csv()?)?;
            }
            Ok(())
        }
    }
}

fn algorithm_slug(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Drqn => "drqn",
        Algorithm::Similar => "similar_attributes",
        Algorithm::Random => "random",
    }
}

/// `--config` if given, else the run directory's resolved config (unless
/// `fresh`), else defaults.
fn base_config(common: &CommonArgs, fresh: bool) -> Result<ExperimentConfig> {
    let stored = common.out.join(files::CONFIG);
    let path = match &common.config {
        Some(p) => Some(p.clone()),
        None if !fresh && stored.exists() => Some(stored),
        None => None,
    };
    match path {
        Some(p) => ExperimentConfig::from_toml(&read_text(&p)?),
        None => Ok(ExperimentConfig::default()),
    }
}

fn finish(mut cfg: ExperimentConfig, common: &CommonArgs) -> Result<ExperimentConfig> {
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(k) = common.k {
        cfg.agent.k = k;
    }
    if let Some(g) = common.gamma {
        cfg.agent.gamma = g;
    }
    if let Some(top_k) = common.top_k {
        cfg.eval.top_k = top_k;
    }
    cfg.resolve()
}

pub fn cmd_generate(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    create_dir(out)?;
    let data = generate_data(cfg)?;
    if data.test.is_empty() {
        eprintln!("warning: train_ratio {} leaves the test split empty", cfg.data.train_ratio);
    }
    data.vocab.save(out.join(files::VOCAB))?;
    write_sessions(out.join(files::TRAIN), &data.train, &data.vocab)?;
    write_sessions(out.join(files::TEST), &data.test, &data.vocab)?;
    write_text(&out.join(files::CONFIG), &cfg.to_toml()?)?;
    let manifest = DataManifest {
        format_version: FORMAT_VERSION,
        seed: cfg.seed,
        config_digest: cfg.digest()?,
        vocab_digest: data.vocab.digest(),
        train_digest: sessions_digest(&data.train),
        test_digest: sessions_digest(&data.test),
        train_sessions: data.train.len(),
        test_sessions: data.test.len(),
    };
    write_json(&out.join(files::DATA_MANIFEST), &manifest)?;
    println!(
        "generated {} train / {} test sessions over {} attributes in {}",
        data.train.len(),
        data.test.len(),
        data.vocab.len(),
        out.display()
    );
    Ok(())
}

struct RunData {
    vocab: AttributeVocab,
    manifest: DataManifest,
}

fn load_run_data(out: &Path) -> Result<RunData> {
    let manifest: DataManifest = read_json(&out.join(files::DATA_MANIFEST))?;
    check_version("data manifest", manifest.format_version)?;
    let vocab = AttributeVocab::load(out.join(files::VOCAB))?;
    if vocab.digest() != manifest.vocab_digest {
        return Err(Error::Mismatch(format!(
            "{} does not match the generated vocabulary",
            files::VOCAB
        )));
    }
    Ok(RunData { vocab, manifest })
}

fn load_split(out: &Path, file: &str, vocab: &AttributeVocab, digest: &str) -> Result<Vec<SessionLog>> {
    let sessions = load_sessions(out.join(file), vocab)?;
    if sessions_digest(&sessions) != digest {
        return Err(Error::Mismatch(format!("{file} does not match the generated split")));
    }
    Ok(sessions)
}

pub fn cmd_train_embeddings(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let run = load_run_data(out)?;
    let train = load_split(out, files::TRAIN, &run.vocab, &run.manifest.train_digest)?;
    let table = train_embeddings(&train, &run.vocab, &cfg.embed)?;
    table.save(out.join(files::EMBEDDINGS))?;
    write_text(&out.join(files::EMBEDDINGS_TEXT), &table.to_text())?;
    let manifest = EmbeddingManifest {
        format_version: FORMAT_VERSION,
        seed: cfg.embed.seed,
        config_digest: cfg.digest()?,
        vocab_digest: run.vocab.digest(),
        train_digest: run.manifest.train_digest.clone(),
        embedding_digest: table.digest(),
    };
    write_json(&out.join(files::EMBEDDING_MANIFEST), &manifest)?;
    println!(
        "trained {}-dimensional embeddings for {} attributes",
        table.dim(),
        table.vocab_size()
    );
    Ok(())
}

fn load_embeddings(out: &Path, vocab: &AttributeVocab) -> Result<Arc<EmbeddingTable>> {
    let manifest: EmbeddingManifest = read_json(&out.join(files::EMBEDDING_MANIFEST))?;
    check_version("embedding manifest", manifest.format_version)?;
    if manifest.vocab_digest != vocab.digest() {
        return Err(Error::Mismatch(
            "embeddings were trained with a different vocabulary".into(),
        ));
    }
    let table = EmbeddingTable::load(out.join(files::EMBEDDINGS))?;
    if table.digest() != manifest.embedding_digest {
        return Err(Error::Mismatch(format!(
            "{} does not match its manifest",
            files::EMBEDDINGS
        )));
    }
    Ok(Arc::new(table))
}

pub fn cmd_train_agent(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let run = load_run_data(out)?;
    let train = load_split(out, files::TRAIN, &run.vocab, &run.manifest.train_digest)?;
    let embeddings = load_embeddings(out, &run.vocab)?;
    let stats = fit_normalizer(&train, cfg.data.dwell_percentile)?;
    let mut agent = DrqnAgent::new(cfg.agent.clone(), embeddings)?;
    let mut log = csv::Writer::from_writer(Vec::new());
    log.write_record(["epoch", "mean_loss", "transitions", "updates"])
        .map_err(csv_error)?;
    for _ in 0..cfg.agent.epochs {
        let e = agent.train_epoch(&train, &stats)?;
        println!(
            "epoch {:>3}  mean loss {:.6}  transitions {}",
            e.epoch, e.mean_loss, e.transitions
        );
        log.write_record([
            e.epoch.to_string(),
            e.mean_loss.to_string(),
            e.transitions.to_string(),
            agent.updates_done().to_string(),
        ])
        .map_err(csv_error)?;
    }
    let bytes = log.into_inner().map_err(|e| Error::Data(e.to_string()))?;
    write_text(
        &out.join(files::LOSS_LOG),
        &String::from_utf8(bytes).map_err(|e| Error::Data(e.to_string()))?,
    )?;
    agent.save_checkpoint(
        out.join(files::AGENT),
        &run.vocab,
        Some(stats),
        Some(cfg.digest()?),
    )?;
    println!("saved agent after {} updates", agent.updates_done());
    Ok(())
}

pub fn cmd_evaluate(cfg: &ExperimentConfig, out: &Path, algorithm: Algorithm) -> Result<EvalReport> {
    let run = load_run_data(out)?;
    let test = load_split(out, files::TEST, &run.vocab, &run.manifest.test_digest)?;
    let (k, top_k) = (cfg.agent.k, cfg.eval.top_k);
    let rec: Box<dyn Recommender> = match algorithm {
        Algorithm::Drqn => {
            let embeddings = load_embeddings(out, &run.vocab)?;
            let (agent, _) = DrqnAgent::load_checkpoint(out.join(files::AGENT), &run.vocab, embeddings)?;
            if agent.config().k != k {
                return Err(Error::Mismatch(format!(
                    "agent was trained with k = {}, evaluation asks for k = {k}",
                    agent.config().k
                )));
            }
            Box::new(agent)
        }
        Algorithm::Similar => {
            let embeddings = load_embeddings(out, &run.vocab)?;
            Box::new(SimilarAttributes::new(embeddings, cfg.baseline_config())?)
        }
        Algorithm::Random => Box::new(RandomRanker::new(run.vocab.len(), cfg.random_ranker_seed())),
    };
    let mut report = hit_rate_at_k(rec.as_ref(), &test, k, top_k)?;
    report.config = json!({
        "recommender": report.config,
        "experiment_digest": cfg.digest()?,
        "experiment_seed": cfg.seed,
    });
    Ok(report)
}

fn check_version(what: &str, version: u32) -> Result<()> {
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "{what} has format version {version}, expected {FORMAT_VERSION}"
        )));
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Data(e.to_string())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}
