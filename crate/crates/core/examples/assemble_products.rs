//! Combine per-attribute-type scores into product recommendations.
//!
//!     cargo run --release --example assemble_products

use std::collections::{BTreeMap, HashMap};

use attrec::data::AttributeVocab;
use attrec::eval::{assemble_products, AttributeScores, Product, ProductCatalog};

fn main() -> attrec::Result<()> {
    let colour = AttributeVocab::new(["red", "blue", "green"])?;
    let fabric = AttributeVocab::new(["cotton", "linen"])?;
    let vocabs: HashMap<String, AttributeVocab> =
        [("colour".to_string(), colour.clone()), ("fabric".to_string(), fabric.clone())].into();

    let products = [("p1", "red", "linen"), ("p2", "blue", "cotton"), ("p3", "green", "linen"), ("p4", "blue", "linen")]
        .into_iter()
        .map(|(id, c, f)| {
            let attributes = BTreeMap::from([
                ("colour".to_string(), colour.id(c).unwrap()),
                ("fabric".to_string(), fabric.id(f).unwrap()),
            ]);
            Product { id: id.into(), attributes }
        })
        .collect();
    let catalog = ProductCatalog::new(products)?;

    // Scores as they would come from one recommender per attribute type.
    let scores = [
        AttributeScores::from_dense("colour", &[0.2, 0.9, 0.1]),
        AttributeScores::from_dense("fabric", &[0.3, 0.6]),
    ];
    let ranked = assemble_products(&catalog, &scores, 3)?;
    println!("top products: {ranked:?} (catalog of {}, {} attribute types)", catalog.len(), vocabs.len());
    Ok(())
}
