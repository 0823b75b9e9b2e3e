//! Batch runner for the `gsfem` toolkit: JSON-configured spectrum and
//! convergence runs, reference spectra for variable diffusion, and
//! cell-by-cell reproduction of published tables.

pub mod checks;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod runner;
pub mod tables;

pub use config::{ExperimentConfig, MethodSpec, OutputFormat, Overrides, ParamValue, ProblemKind};
pub use error::{ExperimentError, Result};
pub use tables::{reproduce_table, Cell, TableId, TableOptions, TableReport, Tolerance};
