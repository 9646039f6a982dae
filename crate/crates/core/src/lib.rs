pub mod agent;
pub mod baseline;
pub mod cli;
pub mod data;
pub mod embed;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod nnet;
pub mod ranking;

pub use error::{Error, Result};
