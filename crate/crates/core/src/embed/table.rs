use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::data::AttrId;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"AEMB";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8;

/// `E(.)`: one input vector per attribute. Context vectors exist only while
/// training and are not persisted.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: Vec<f64>,
    context: Vec<f64>,
}

impl EmbeddingTable {
    /// Builds a table from row vectors, all of the same nonzero length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("embedding rows must be nonempty and equal length".into()));
        }
        let vectors: Vec<f64> = rows.iter().flatten().copied().collect();
        if vectors.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("embedding contains non-finite values".into()));
        }
        Ok(Self {
            dim,
            vectors,
            context: Vec::new(),
        })
    }

    /// One-hot rows: `E(i) = e_i`, with `dim = vocab_size`.
    pub fn one_hot(vocab_size: usize) -> Self {
        let mut vectors = vec![0.0; vocab_size * vocab_size];
        for i in 0..vocab_size {
            vectors[i * vocab_size + i] = 1.0;
        }
        Self {
            dim: vocab_size,
            vectors,
            context: Vec::new(),
        }
    }

    pub(crate) fn from_training(dim: usize, vectors: Vec<f64>, context: Vec<f64>) -> Self {
        debug_assert_eq!(vectors.len(), context.len());
        Self { dim, vectors, context }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab_size(&self) -> usize {
        self.vectors.len() / self.dim
    }

    /// Input vector for `id`.
    pub fn lookup(&self, id: AttrId) -> Result<&[f64]> {
        if id >= self.vocab_size() {
            return Err(Error::OutOfBounds {
                id,
                size: self.vocab_size(),
            });
        }
        Ok(&self.vectors[id * self.dim..(id + 1) * self.dim])
    }

    pub fn row_mut(&mut self, id: AttrId) -> Result<&mut [f64]> {
        let size = self.vocab_size();
        if id >= size {
            return Err(Error::OutOfBounds { id, size });
        }
        Ok(&mut self.vectors[id * self.dim..(id + 1) * self.dim])
    }

    /// Context (output-side) vectors from training; empty after a reload.
    pub fn context_vectors(&self) -> &[f64] {
        &self.context
    }

    pub fn is_finite(&self) -> bool {
        self.vectors.iter().chain(&self.context).all(|x| x.is_finite())
    }

    /// Binary checkpoint: magic, u32 version, u64 V, u64 d, then `V*d`
    /// little-endian f64 values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.vectors.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.vocab_size() as u64).to_le_bytes());
        out.extend_from_slice(&(self.dim as u64).to_le_bytes());
        for x in &self.vectors {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
            return Err(Error::Checkpoint("not an embedding checkpoint".into()));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Checkpoint(format!(
                "embedding checkpoint version {version}, expected {VERSION}"
            )));
        }
        let v = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let d = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
        let body = &bytes[HEADER_LEN..];
        if v == 0 || d == 0 || v.checked_mul(d).and_then(|n| n.checked_mul(8)) != Some(body.len()) {
            return Err(Error::Checkpoint(format!(
                "embedding checkpoint declares {v}x{d} but holds {} bytes",
                body.len()
            )));
        }
        let vectors: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if vectors.iter().any(|x| !x.is_finite()) {
            return Err(Error::Checkpoint("embedding checkpoint has non-finite values".into()));
        }
        Ok(Self {
            dim: d,
            vectors,
            context: Vec::new(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes())
            .map_err(|e| Error::io(format!("writing embeddings {}", path.display()), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path)
            .map_err(|e| Error::io(format!("reading embeddings {}", path.display()), e))?;
        Self::from_bytes(&bytes)
    }

    /// Space-separated rows, one attribute per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in self.vectors.chunks_exact(self.dim) {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    /// SHA-256 of the binary checkpoint, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EmbeddingTable {
        EmbeddingTable::from_rows(&[
            vec![1.0, -2.5],
            vec![0.125, 3.0],
            vec![1e-300, -0.0],
            vec![7.0, 8.0],
        ])
        .unwrap()
    }

    #[test]
    fn lookup_and_bounds() {
        let mut t = sample();
        t.row_mut(3).unwrap().fill(0.0);
        assert_eq!(t.lookup(3).unwrap(), &[0.0, 0.0]);
        assert!(matches!(t.lookup(4), Err(Error::OutOfBounds { id: 4, size: 4 })));
    }

    #[test]
    fn checkpoint_round_trip() {
        let t = sample();
        let bytes = t.to_bytes();
        assert_eq!(&bytes[..4], b"AEMB");
        assert_eq!(bytes.len(), 24 + 4 * 2 * 8);
        let back = EmbeddingTable::from_bytes(&bytes).unwrap();
        for i in 0..4 {
            assert_eq!(back.lookup(i).unwrap(), t.lookup(i).unwrap());
        }
        assert_eq!(back.to_bytes(), bytes);
        assert_eq!(back.digest(), t.digest());
    }

    #[test]
    fn checkpoint_rejects_corruption() {
        let mut bytes = sample().to_bytes();
        bytes[4] = 2;
        assert!(EmbeddingTable::from_bytes(&bytes).is_err());
        let bytes = sample().to_bytes();
        assert!(EmbeddingTable::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(EmbeddingTable::from_bytes(b"nope").is_err());
    }

    #[test]
    fn text_export_parses_back() {
        let t = sample();
        let text = t.to_text();
        let rows: Vec<Vec<f64>> = text
            .lines()
            .map(|l| l.split(' ').map(|c| c.parse().unwrap()).collect())
            .collect();
        assert_eq!(EmbeddingTable::from_rows(&rows).unwrap().to_bytes(), t.to_bytes());
    }
}
