use std::collections::HashMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::AttrId;
use crate::error::{Error, Result};

/// Ordered attribute names. The position of a name is its id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeVocab {
    entries: Vec<String>,
    index: HashMap<String, AttrId>,
}

impl AttributeVocab {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let entries: Vec<String> = names.into_iter().map(Into::into).collect();
        if entries.len() < 2 {
            return Err(Error::Data(format!(
                "vocabulary needs at least 2 attributes, got {}",
                entries.len()
            )));
        }
        let mut index = HashMap::with_capacity(entries.len());
        for (id, name) in entries.iter().enumerate() {
            if name.is_empty() || name.contains('\n') || name.contains('\r') {
                return Err(Error::Data(format!("invalid attribute name {name:?}")));
            }
            if index.insert(name.clone(), id).is_some() {
                return Err(Error::Data(format!("duplicate attribute {name:?}")));
            }
        }
        Ok(Self { entries, index })
    }

    /// Names `attr_000 .. attr_{V-1}`, zero-padded to a common width.
    pub fn synthetic(size: usize) -> Result<Self> {
        let width = size.saturating_sub(1).to_string().len().max(3);
        Self::new((0..size).map(|i| format!("attr_{i:0width$}")))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id(&self, name: &str) -> Result<AttrId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn name(&self, id: AttrId) -> Result<&str> {
        self.entries
            .get(id)
            .map(String::as_str)
            .ok_or(Error::OutOfBounds {
                id,
                size: self.len(),
            })
    }

    pub fn names(&self) -> &[String] {
        &self.entries
    }

    /// One name per line, each terminated by `\n`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for name in &self.entries {
            out.push_str(name);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::new(text.lines())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading vocabulary {}", path.display()), e))?;
        Self::from_text(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text())
            .map_err(|e| Error::io(format!("writing vocabulary {}", path.display()), e))
    }

    /// SHA-256 of the text serialization, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_follow_line_order() {
        let vocab = AttributeVocab::from_text("red\ngreen\nblue\n").unwrap();
        assert_eq!(vocab.len(), 3);
        assert_eq!(vocab.id("blue").unwrap(), 2);
        assert_eq!(vocab.name(1).unwrap(), "green");
        assert!(matches!(vocab.name(3), Err(Error::OutOfBounds { id: 3, size: 3 })));
    }

    #[test]
    fn text_round_trip_is_exact() {
        let vocab = AttributeVocab::synthetic(12).unwrap();
        let text = vocab.to_text();
        let back = AttributeVocab::from_text(&text).unwrap();
        assert_eq!(back, vocab);
        assert_eq!(back.to_text(), text);
        assert_eq!(back.digest(), vocab.digest());
    }

    #[test]
    fn rejects_degenerate_vocabularies() {
        assert!(AttributeVocab::new(["only"]).is_err());
        assert!(AttributeVocab::new(["a", "a"]).is_err());
        assert!(AttributeVocab::new(["a", ""]).is_err());
    }

    #[test]
    fn unknown_name_is_reported() {
        let vocab = AttributeVocab::new(["red", "blue"]).unwrap();
        match vocab.id("plaid") {
            Err(Error::UnknownAttribute(name)) => assert_eq!(name, "plaid"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
