//! Train skip-gram attribute embeddings and list the nearest neighbours of
//! an attribute next to its planted successors.
//!
//!     cargo run --release --example train_embeddings

use attrec::data::{generate_sessions, AttributeVocab, PlantedChain};
use attrec::embed::{cosine_similarity, train_embeddings, SkipGramConfig};
use attrec::ranking::top_k_indices;

fn main() -> attrec::Result<()> {
    let chain = PlantedChain { vocab_size: 40, ..Default::default() };
    let gen = chain.build(4_000, 7)?;
    let sessions = generate_sessions(&gen)?;
    let vocab = AttributeVocab::synthetic(chain.vocab_size)?;
    let table = train_embeddings(&sessions, &vocab, &SkipGramConfig { dim: 16, seed: 3, ..Default::default() })?;

    let probe = 0;
    let sims: Vec<f64> = (0..vocab.len())
        .map(|j| {
            if j == probe {
                f64::NEG_INFINITY
            } else {
                cosine_similarity(table.lookup(probe).unwrap(), table.lookup(j).unwrap())
            }
        })
        .collect();
    let row = &gen.transition_matrix[probe];
    let planted: Vec<usize> = top_k_indices(row, chain.branching)?;
    println!("planted successors of {}: {:?}", vocab.name(probe)?, planted);
    for j in top_k_indices(&sims, 8)? {
        println!("  {:<9} cos {:+.3}  P(next) {:.3}", vocab.name(j)?, sims[j], row[j]);
    }
    Ok(())
}
