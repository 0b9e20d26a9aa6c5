//! Command-line front end for `dephtomo`: scenario files, the full
//! simulate-and-reconstruct pipeline, and the qubit dephasing walkthrough.

pub mod commands;
pub mod error;
pub mod scenario;

pub use commands::{decompose, demo_dephasing, run, validate, Outcome};
pub use error::CliError;
pub use scenario::Scenario;
