//! Benchmarking harness for `simsearch-core`: data files, exact answers and their cache,
//! effectiveness and efficiency metrics, reports, and a small embedding facade.

pub mod aggregate;
pub mod error;
pub mod experiment;
pub mod gold;
pub mod io;
pub mod metrics;
pub mod report;
pub mod session;

pub use error::{Error, Result};
pub use experiment::{run, run_on, ExperimentConfig, RunOutput};
pub use session::IndexSession;
