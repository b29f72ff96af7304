//! Online continual learning with local, neuromodulated plasticity.
pub mod cli;
pub mod config;
pub mod dataio;
pub mod encoder;
pub mod engine;
pub mod error;
pub mod hpo;
pub mod plasticity;
pub mod rng;
pub mod transfer;

pub use error::{NnaError, Result};
