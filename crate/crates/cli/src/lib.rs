//! Configuration-driven runs: TOML config, per-(method, γ) workers, CSV and
//! JSON outputs.

pub mod config;
pub mod presets;
pub mod quantity;
pub mod run;
pub mod summary;

pub use config::{load, parse_str, resolve, validate, Diagnostic, Method, Plan, Scenario};
pub use run::{execute, ExecOptions, RunError, RunOutput};
