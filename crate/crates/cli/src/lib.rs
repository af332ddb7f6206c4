//! File formats, configuration, and the command-line surface of the
//! draft reading engine. The binary lives in `main.rs`; this library
//! exposes the pieces so integration tests and benchmarks can drive them
//! directly.

pub mod commands;
pub mod config_file;
pub mod error;
pub mod formats;
pub mod records;

pub use error::{CliError, CliResult};
