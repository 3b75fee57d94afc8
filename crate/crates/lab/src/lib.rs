//! Command-line laboratory on top of `nudd-core`: configuration, parallel
//! sweeps, order fits, table emission and run manifests.

pub mod cli;
pub mod config;
pub mod fit;
pub mod manifest;
pub mod sweep;
pub mod tables;
pub mod verify;

pub use config::{ConfigError, RawConfig, SweepConfig};
pub use fit::{fit_orders, OrderReport};
pub use sweep::{run_sweep, run_sweep_with_models, SweepResults};
