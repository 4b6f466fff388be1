pub mod casebase;
pub mod cli;
pub mod data;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod models;
pub mod neuralnet;
pub mod rng;
pub mod simulation;

pub use error::{Error, Result};
