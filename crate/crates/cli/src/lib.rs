//! Experiment runner for the `qwalk` simulator: config files, per-step
//! simulation bundles (CSV + SVG), period scans, depth reports and circuit
//! dumps.

pub mod config;
pub mod run;
pub mod svg;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{ConfigError, Dd, ExperimentConfig};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("overlay: {0}")]
    Overlay(String),
    #[error(transparent)]
    Walk(#[from] qwalk::WalkError),
    #[error(transparent)]
    Circuit(#[from] qwalk::CircuitError),
    #[error(transparent)]
    Sim(#[from] qwalk::SimError),
    #[error(transparent)]
    Transpile(#[from] qwalk::TranspileError),
    #[error(transparent)]
    Metrics(#[from] qwalk::MetricsError),
}

impl ExperimentError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        ExperimentError::Io { path: path.to_path_buf(), source }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, ExperimentError::Config(_))
    }
}
