//! Generate a small corpus, train embeddings and the agent, and compare
//! DRQN with the similar-attributes and random baselines.
//!
//!     cargo run --release --example quickstart

use attrec::eval::compare;
use attrec::experiment::{generate_data, run_on_data, ExperimentConfig};

fn main() -> attrec::Result<()> {
    let mut cfg = ExperimentConfig { seed: 1, ..Default::default() };
    cfg.data.chain.vocab_size = 60;
    cfg.data.num_sessions = 3_000;
    cfg.data.train_ratio = 0.9;
    cfg.agent.gamma = 0.5;
    cfg.agent.learning_rate = 1e-2;
    cfg.agent.epochs = 4;
    let cfg = cfg.resolve()?;

    let data = generate_data(&cfg)?;
    println!("{} train / {} test sessions", data.train.len(), data.test.len());
    let out = run_on_data(&cfg, &data, |e| {
        println!("epoch {}: mean loss {:.4} over {} transitions", e.epoch, e.mean_loss, e.transitions)
    })?;
    print!("{}", compare(&out.reports)?.to_text());
    Ok(())
}
