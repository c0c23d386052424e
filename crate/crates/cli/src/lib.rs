//! Command-line front end: ingestion, instance configuration, diagram and
//! verification reports, worked examples and SVG rendering.

pub mod app;
pub mod document;
pub mod error;
pub mod ingest;
pub mod render;

pub use app::{run, Cli};
pub use error::CliError;
