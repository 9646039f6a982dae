//! Hit-Rate@K over held-out sessions, report comparison, and assembly of
//! attribute scores into product recommendations.

mod catalog;
mod compare;
mod hit_rate;
mod recommender;

pub use catalog::{assemble_products, AttributeScores, Product, ProductCatalog};
pub use compare::{compare, Comparison, ComparisonRow};
pub use hit_rate::{hit_rate_at_k, EvalReport};
pub use recommender::{RandomRanker, Recommendation, Recommender, RecommenderInfo};
