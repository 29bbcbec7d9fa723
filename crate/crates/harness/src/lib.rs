//! Experiment harness for `gentau`: TOML experiment configs, convergence
//! sweeps against self-convergence, manufactured or exact-spectrum
//! references, a finite-difference cross-check and CSV/SVG output.

pub mod checks;
pub mod config;
pub mod experiment;
pub mod expr;
pub mod fd;
pub mod report;

pub use config::{ExperimentConfig, Overrides};
pub use experiment::{run_experiment, ConvergenceReport, ConvergenceRow, ExperimentOutput};
pub use expr::Expr;
