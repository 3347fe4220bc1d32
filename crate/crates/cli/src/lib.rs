//! Command-line driver for the flycheck model checker: loading models and
//! property files, running either engine, and reporting results.

pub mod generate;
pub mod output;
pub mod run;

pub use generate::{generate_herman, generate_philosophers, GenerateError};
pub use run::{
    load_model, parse_constants, run, EngineKind, Outcome, PropertyReport, PropertySource,
    RunConfig, RunError, RunReport,
};
