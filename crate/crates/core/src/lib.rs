pub mod cli;
pub mod dataset;
pub mod error;
pub mod fuse;
pub mod ingest;
pub mod neural;
pub mod runner;
pub mod sentiment;

pub use error::{Error, Result};
