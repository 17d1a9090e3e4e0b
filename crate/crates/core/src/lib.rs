//! Source-hiding rumor spreading: protocols, source estimators, exact
//! oracles and Monte Carlo experiments.

pub mod error;
pub mod graph;
pub mod oracle;
pub mod rng;
pub mod estimate;
pub mod spread;
pub mod experiment;
pub mod cli;

pub use error::{Error, Result};
