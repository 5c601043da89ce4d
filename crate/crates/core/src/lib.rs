pub mod bench;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod eval;
pub mod io;
pub mod metrics;

pub use error::{Error, Result};
