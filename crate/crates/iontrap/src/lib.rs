//! Batch front-end of `iontrap-core`: run configurations, named experiments
//! and machine-readable result tables.

pub mod app;
pub mod config;
pub mod error;
pub mod experiments;
pub mod table;

pub use iontrap_core as core;

pub use config::{Params, RunConfig, EXPERIMENTS};
pub use error::RunError;
pub use table::ResultTable;
