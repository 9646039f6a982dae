//! Train the DRQN agent, save a checkpoint, reload it, and ask for
//! recommendations.
//!
//!     cargo run --release --example train_agent

use std::sync::Arc;

use attrec::agent::{AgentConfig, DrqnAgent};
use attrec::data::{fit_normalizer, generate_sessions, AttributeVocab, PlantedChain};
use attrec::embed::{train_embeddings, SkipGramConfig};

fn main() -> attrec::Result<()> {
    let chain = PlantedChain { vocab_size: 40, ..Default::default() };
    let sessions = generate_sessions(&chain.build(2_000, 5)?)?;
    let vocab = AttributeVocab::synthetic(chain.vocab_size)?;
    let stats = fit_normalizer(&sessions, 95.0)?;
    let emb = Arc::new(train_embeddings(&sessions, &vocab, &SkipGramConfig { dim: 16, ..Default::default() })?);

    let config = AgentConfig { hidden: 32, gamma: 0.5, learning_rate: 1e-2, epochs: 3, ..Default::default() };
    let mut agent = DrqnAgent::new(config, emb.clone())?;
    for e in agent.fit(&sessions, &stats)? {
        println!("epoch {}: mean loss {:.4} ({} transitions)", e.epoch, e.mean_loss, e.transitions);
    }

    let dir = std::env::temp_dir().join("attrec-train-agent");
    std::fs::create_dir_all(&dir).map_err(|e| attrec::Error::Data(e.to_string()))?;
    let path = dir.join("agent.bin");
    agent.save_checkpoint(&path, &vocab, Some(stats), None)?;
    let (restored, sidecar) = DrqnAgent::load_checkpoint(&path, &vocab, emb)?;
    println!("checkpoint at {} after {} updates", path.display(), sidecar.updates_done);

    let window: Vec<usize> = sessions[0].attributes().take(4).collect();
    let top = restored.recommend_top_k(&window, 5)?;
    let q = restored.q_forward(&window, false)?;
    for id in top {
        println!("  {:<9} Q = {:+.4}", vocab.name(id)?, q[id]);
    }
    Ok(())
}
