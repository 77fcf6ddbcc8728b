//! Scenario configuration, replication protocol and output files.

pub mod batch;
pub mod config;
pub mod cv;
pub mod export;
pub mod plot;
pub mod sweep;
pub mod validate;

pub use batch::{run_batch, BatchOptions, RunResult};
pub use config::ScenarioConfig;
pub use cv::cv_stabilization;
pub use export::export_results;
pub use plot::{plot_shares, PlotSpec};
pub use sweep::{export_sweep, run_sweep};
pub use validate::run_validation;
