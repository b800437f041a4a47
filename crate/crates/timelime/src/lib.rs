//! Files, configuration and experiment orchestration around
//! [`timelime_core`].
//!
//! Releases are read from CSV ([`dataset`]), experiments are described by a
//! flat TOML file ([`config`]) and [`experiment::run_experiment`] writes the
//! summary, per-planner reports, per-unit records and a run log.

pub mod config;
pub mod dataset;
pub mod experiment;
pub mod persist;
pub mod report;
pub mod roster;

pub use timelime_core as core;

pub use crate::config::{parse_config, validate_config, ConfigError, ExperimentConfig, ProjectSpec};
pub use crate::dataset::{load_release_csv, write_release_csv, LoadError};
pub use crate::experiment::{run_experiment, ExperimentError, ExperimentOutcome, Overrides};
