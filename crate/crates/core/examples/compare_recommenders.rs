//! Evaluate Hit-Rate@K for several list lengths and print the comparison
//! table plus its CSV form.
//!
//!     cargo run --release --example compare_recommenders

use attrec::baseline::{SimilarAttributes, WeightScheme};
use attrec::eval::{compare, hit_rate_at_k, RandomRanker};
use attrec::experiment::{generate_data, run_on_data, ExperimentConfig};

fn main() -> attrec::Result<()> {
    let mut cfg = ExperimentConfig { seed: 2, ..Default::default() };
    cfg.data.chain.vocab_size = 50;
    cfg.data.num_sessions = 3_000;
    cfg.data.train_ratio = 0.9;
    cfg.agent.gamma = 0.5;
    cfg.agent.learning_rate = 1e-2;
    cfg.agent.epochs = 3;
    let cfg = cfg.resolve()?;
    let data = generate_data(&cfg)?;
    let out = run_on_data(&cfg, &data, |_| {})?;

    let k = cfg.agent.k;
    let mut exp = cfg.baseline_config();
    exp.weights = WeightScheme::Exponential { lambda: 0.5 };
    let similar_exp = SimilarAttributes::new(out.embeddings.clone(), exp)?;
    let random = RandomRanker::new(data.vocab.len(), cfg.random_ranker_seed());
    println!("K     drqn    similar(exp)  random");
    for top_k in [1, 5, 10, 20] {
        println!(
            "{top_k:<5} {:.4}  {:.4}        {:.4}",
            hit_rate_at_k(&out.agent, &data.test, k, top_k)?.hit_rate,
            hit_rate_at_k(&similar_exp, &data.test, k, top_k)?.hit_rate,
            hit_rate_at_k(&random, &data.test, k, top_k)?.hit_rate,
        );
    }

    let table = compare(&out.reports)?;
    print!("\n{}", table.to_text());
    print!("\n{}", table.to_csv()?);
    Ok(())
}
