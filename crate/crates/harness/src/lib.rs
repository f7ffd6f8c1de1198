//! Configuration-driven runs of the AMF-W convergence studies: TOML
//! experiment files, a registry of table presets, CSV output and checks
//! against published values.

pub mod config;
pub mod csv;
pub mod error;
pub mod presets;
pub mod run;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use run::{run_experiment, RunOptions};
