use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{AgentConfig, DrqnAgent};
use crate::data::{AttributeVocab, NormalizationStats};
use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::nnet::{QNetDims, QNetworkParams};

const SIDECAR_VERSION: u32 = 1;

/// JSON written next to the network checkpoint. Loading refuses a
/// vocabulary or embedding table whose digest differs from the recorded one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSidecar {
    pub format_version: u32,
    pub config: AgentConfig,
    pub vocab_digest: String,
    pub embedding_digest: String,
    pub updates_done: u64,
    pub epochs_done: usize,
    pub normalization: Option<NormalizationStats>,
    pub config_digest: Option<String>,
}

impl AgentSidecar {
    pub fn path_for(network: &Path) -> PathBuf {
        network.with_extension("json")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading agent sidecar {}", path.display()), e))?;
        let sidecar: Self = serde_json::from_str(&text)?;
        if sidecar.format_version != SIDECAR_VERSION {
            return Err(Error::Checkpoint(format!(
                "agent sidecar version {}, expected {SIDECAR_VERSION}",
                sidecar.format_version
            )));
        }
        Ok(sidecar)
    }
}

impl DrqnAgent {
    /// Writes the online network to `path` and the sidecar to `path.json`.
    pub fn save_checkpoint(
        &self,
        path: impl AsRef<Path>,
        vocab: &AttributeVocab,
        normalization: Option<NormalizationStats>,
        config_digest: Option<String>,
    ) -> Result<()> {
        let path = path.as_ref();
        if vocab.len() != self.vocab_size() {
            return Err(Error::Mismatch(format!(
                "vocabulary has {} attributes, agent has {}",
                vocab.len(),
                self.vocab_size()
            )));
        }
        self.params().save(path, self.config().k)?;
        let sidecar = AgentSidecar {
            format_version: SIDECAR_VERSION,
            config: self.config().clone(),
            vocab_digest: vocab.digest(),
            embedding_digest: self.embeddings().digest(),
            updates_done: self.updates_done(),
            epochs_done: self.epochs_done(),
            normalization,
            config_digest,
        };
        let side_path = AgentSidecar::path_for(path);
        fs::write(&side_path, serde_json::to_string_pretty(&sidecar)? + "\n")
            .map_err(|e| Error::io(format!("writing agent sidecar {}", side_path.display()), e))
    }

    /// Restores an agent; the target network starts equal to the online one.
    pub fn load_checkpoint(
        path: impl AsRef<Path>,
        vocab: &AttributeVocab,
        embeddings: Arc<EmbeddingTable>,
    ) -> Result<(Self, AgentSidecar)> {
        let path = path.as_ref();
        let sidecar = AgentSidecar::load(AgentSidecar::path_for(path))?;
        if sidecar.vocab_digest != vocab.digest() {
            return Err(Error::Mismatch(
                "vocabulary differs from the one the agent was trained with".into(),
            ));
        }
        if sidecar.embedding_digest != embeddings.digest() {
            return Err(Error::Mismatch(
                "embedding table differs from the one the agent was trained with".into(),
            ));
        }
        let dims = QNetDims {
            input_dim: embeddings.dim(),
            hidden: sidecar.config.hidden,
            vocab_size: embeddings.vocab_size(),
        };
        let params = QNetworkParams::load_expecting(path, dims, sidecar.config.k)?;
        let mut agent = DrqnAgent::with_params(sidecar.config.clone(), embeddings, params)?;
        agent.restore_counters(sidecar.updates_done, sidecar.epochs_done);
        Ok((agent, sidecar))
    }
}
