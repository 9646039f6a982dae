use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use crate::data::{AttrId, AttributeVocab};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Product {
    pub id: String,
    /// Attribute type (e.g. "color") to attribute id in that type's vocabulary.
    pub attributes: BTreeMap<String, AttrId>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProductCatalog {
    products: Vec<Product>,
}

#[derive(Deserialize)]
struct ProductRecord {
    product_id: String,
    attributes: BTreeMap<String, String>,
}

impl ProductCatalog {
    pub fn new(products: Vec<Product>) -> Result<Self> {
        let mut seen = HashSet::new();
        for p in &products {
            if !seen.insert(p.id.as_str()) {
                return Err(Error::Data(format!("duplicate product id {:?}", p.id)));
            }
        }
        Ok(Self { products })
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }

    /// Reads `{"product_id": .., "attributes": {"<type>": "<name>"}}` lines.
    /// Attribute types without a vocabulary in `vocabs` are dropped; names
    /// missing from a known vocabulary are an error.
    pub fn load(path: impl AsRef<Path>, vocabs: &HashMap<String, AttributeVocab>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path)
            .map_err(|e| Error::io(format!("opening catalog {}", path.display()), e))?;
        let mut products = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: ProductRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
            let mut attributes = BTreeMap::new();
            for (kind, name) in record.attributes {
                if let Some(vocab) = vocabs.get(&kind) {
                    attributes.insert(kind, vocab.id(&name)?);
                }
            }
            products.push(Product { id: record.product_id, attributes });
        }
        Self::new(products)
    }
}

/// Scores for one attribute type.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeScores {
    pub attribute_type: String,
    pub scores: HashMap<AttrId, f64>,
}

impl AttributeScores {
    pub fn from_dense(attribute_type: impl Into<String>, scores: &[f64]) -> Self {
        Self {
            attribute_type: attribute_type.into(),
            scores: scores.iter().copied().enumerate().collect(),
        }
    }
}

/// Ranks products by the sum of their attributes' scores (a missing
/// attribute or score adds 0) and returns the best `m`, ties by product id.
pub fn assemble_products(
    catalog: &ProductCatalog,
    scores: &[AttributeScores],
    m: usize,
) -> Result<Vec<String>> {
    if catalog.is_empty() {
        return Err(Error::Data("product catalog is empty".into()));
    }
    if m == 0 {
        return Err(Error::Argument("number of products must be >= 1".into()));
    }
    if scores.iter().flat_map(|s| s.scores.values()).any(|v| !v.is_finite()) {
        return Err(Error::Argument("attribute scores must be finite".into()));
    }
    let mut totals: Vec<(f64, &str)> = catalog
        .products
        .iter()
        .map(|p| {
            let total = scores
                .iter()
                .filter_map(|s| {
                    let id = p.attributes.get(&s.attribute_type)?;
                    s.scores.get(id)
                })
                .sum();
            (total, p.id.as_str())
        })
        .collect();
    totals.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    Ok(totals.into_iter().take(m).map(|(_, id)| id.to_string()).collect())
}
