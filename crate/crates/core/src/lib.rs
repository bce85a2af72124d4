pub mod data;
pub mod models;
pub mod engines;
pub mod scoring;
pub mod uncertainty;
pub mod bench;
pub mod report;
pub mod cli;
pub mod error;
pub mod rng;

pub use error::{Error, Result};
