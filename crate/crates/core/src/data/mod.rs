//! Session logs: the vocabulary, on-disk formats, dwell normalization,
//! transition windows, and a synthetic Markov-chain session generator.

mod generator;
mod normalize;
mod session;
mod transition;
mod vocab;

pub use generator::{generate_sessions, GeneratorConfig, PlantedChain};
pub use normalize::{fit_normalizer, normalize_dwell, NormalizationStats};
pub use session::{
    load_sessions, parse_sessions, sessions_digest, write_sessions, SessionEvent, SessionLog,
};
pub use transition::{sessions_to_transitions, Transition};
pub use vocab::AttributeVocab;

/// Dense attribute index in `[0, V)`.
pub type AttrId = usize;
