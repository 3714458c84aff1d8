//! Experiment harness for `rankpursuit`: configuration, synthetic data,
//! holdout grid search, the per-user experiment protocol, result tables,
//! paired significance tests and model files.

pub mod compare;
pub mod config;
mod error;
pub mod experiment;
pub mod grid;
pub mod methods;
pub mod model_io;
pub mod points;
pub mod seed;
pub mod synthetic;
pub mod table;

pub use config::{ExperimentConfig, Method, Setting};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, run_experiment_on, ExperimentOutput, UserRecord};
pub use methods::{Model, Params};
pub use table::{ResultTable, TableFormat};
