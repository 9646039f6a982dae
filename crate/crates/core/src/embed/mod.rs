//! Attribute embeddings: skip-gram training with negative sampling, the
//! lookup table `E(.)`, and cosine similarity.

mod similarity;
mod skipgram;
mod table;

pub use similarity::{cosine_similarity, norm};
pub use skipgram::{train_embeddings, SkipGramConfig};
pub use table::EmbeddingTable;
