//! Command-line front end: presets reproducing the photon-number figures,
//! free-form runs and sweeps, and the validation suite.

pub mod checks;
pub mod config;
pub mod error;
pub mod run;
pub mod sweep;

pub use config::{Method, Preset, RunConfig, Settings};
pub use error::CliError;
pub use run::{execute, run, RunResult};
