//! The JSON run configuration. One file may hold several blocks; each
//! subcommand reads only its own.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use zentropy_core::anomaly::DetectorConfig;
use zentropy_core::bayes::{ObservationModel, Outcome, QueryCandidate};
use zentropy_core::mdp::{Action, Cell, GridSpec};
use zentropy_core::potential::DEFAULT_NEUTRAL_TOLERANCE;
use zentropy_core::rl::{ShapingConfig, TrainConfig};
use zentropy_core::EstimatorConfig;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; `--seed` takes precedence.
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub output_formats: Vec<OutputFormat>,
    /// Half-width of the neutral band used to classify events.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// `Z` back-end; its `seed` field is replaced by the master seed.
    #[serde(default)]
    pub estimator: EstimatorConfig,
    pub gridworld: Option<GridworldBlock>,
    pub train: Option<TrainBlock>,
    pub bayes: Option<BayesBlock>,
    pub anomaly: Option<DetectorConfig>,
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

fn default_tolerance() -> f64 {
    DEFAULT_NEUTRAL_TOLERANCE
}

/// Policy that drives the agent after the scored action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Follow {
    #[default]
    Uniform,
    Up,
    Down,
    Left,
    Right,
}

impl Follow {
    pub fn action(self) -> Option<Action> {
        match self {
            Follow::Uniform => None,
            Follow::Up => Some(Action::Up),
            Follow::Down => Some(Action::Down),
            Follow::Left => Some(Action::Left),
            Follow::Right => Some(Action::Right),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridworldBlock {
    pub grid: GridSpec,
    /// Steps between the scored action and the evaluation time.
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default)]
    pub follow: Follow,
    /// Actions compared at each cell; all four when absent.
    pub actions: Option<Vec<Action>>,
    /// Cells to score; every open non-goal cell when absent.
    pub cells: Option<Vec<Cell>>,
}

fn default_horizon() -> u64 {
    2
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainBlock {
    pub grid: GridSpec,
    #[serde(default)]
    pub shaping: ShapingConfig,
    #[serde(default = "defaults::episodes")]
    pub episodes: usize,
    #[serde(default = "defaults::max_steps")]
    pub max_steps: usize,
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    #[serde(default = "defaults::gamma")]
    pub gamma: f64,
}

mod defaults {
    use super::TrainConfig;

    pub fn episodes() -> usize {
        TrainConfig::default().episodes
    }
    pub fn max_steps() -> usize {
        TrainConfig::default().max_steps
    }
    pub fn epsilon() -> f64 {
        TrainConfig::default().epsilon
    }
    pub fn alpha() -> f64 {
        TrainConfig::default().alpha
    }
    pub fn gamma() -> f64 {
        TrainConfig::default().gamma
    }
}

impl TrainBlock {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            episodes: self.episodes,
            max_steps: self.max_steps,
            epsilon: self.epsilon,
            alpha: self.alpha,
            gamma: self.gamma,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Prior {
    /// Only `"uniform"` is accepted.
    Named(String),
    Weights(Vec<f64>),
}

impl Default for Prior {
    fn default() -> Self {
        Prior::Named("uniform".into())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BayesBlock {
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub prior: Prior,
    pub queries: Vec<QueryCandidate>,
    /// Observed outcomes, applied in order.
    #[serde(default)]
    pub data: Vec<Outcome>,
    /// How the observed data were produced.
    #[serde(default = "default_data_model")]
    pub data_model: ObservationModel,
}

fn default_grid_points() -> usize {
    101
}

fn default_data_model() -> ObservationModel {
    ObservationModel::Coin
}

/// A parsed config together with what identifies the run.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub seed: u64,
    /// Hex SHA-256 of the config file bytes followed by the effective seed.
    pub hash: String,
}

impl LoadedConfig {
    pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|source| CliError::ReadConfig {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes, path, seed_override)
    }

    pub fn from_bytes(bytes: &[u8], path: &Path, seed_override: Option<u64>) -> Result<Self> {
        let config: RunConfig =
            serde_json::from_slice(bytes).map_err(|source| CliError::ParseConfig {
                path: path.to_path_buf(),
                source,
            })?;
        if !(config.tolerance.is_finite() && config.tolerance >= 0.0) {
            return Err(CliError::invalid(
                "tolerance",
                format!("{} is not a finite value >= 0", config.tolerance),
            ));
        }
        let seed = seed_override.or(config.seed).ok_or(CliError::MissingSeed)?;
        Ok(Self {
            hash: config_hash(bytes, seed),
            config,
            seed,
        })
    }

    pub fn wants(&self, format: OutputFormat) -> bool {
        self.config.output_formats.contains(&format)
    }

    pub fn estimator(&self) -> EstimatorConfig {
        EstimatorConfig {
            seed: self.seed,
            ..self.config.estimator
        }
    }
}

pub fn config_hash(bytes: &[u8], seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.update(b"\0seed=");
    h.update(seed.to_le_bytes());
    format!("{:x}", h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, seed: Option<u64>) -> Result<LoadedConfig> {
        LoadedConfig::from_bytes(text.as_bytes(), Path::new("test.json"), seed)
    }

    #[test]
    fn seed_flag_wins_and_changes_hash() {
        let a = parse(r#"{"seed": 3}"#, None).unwrap();
        let b = parse(r#"{"seed": 3}"#, Some(4)).unwrap();
        assert_eq!(a.seed, 3);
        assert_eq!(b.seed, 4);
        assert_ne!(a.hash, b.hash);
        assert_eq!(a.hash, parse(r#"{"seed": 3}"#, None).unwrap().hash);
        assert_eq!(a.hash.len(), 64);
    }

    #[test]
    fn rejects_missing_seed_and_unknown_keys() {
        assert!(matches!(parse("{}", None), Err(CliError::MissingSeed)));
        assert!(matches!(
            parse(r#"{"seed": 1, "sede": 2}"#, None),
            Err(CliError::ParseConfig { .. })
        ));
        assert!(matches!(
            parse("{", None),
            Err(CliError::ParseConfig { .. })
        ));
    }

    #[test]
    fn blocks_parse_with_defaults() {
        let cfg = parse(
            r#"{"seed": 1,
                "gridworld": {"grid": {"width": 5, "height": 1, "goal": [4, 0], "start": [0, 0], "slip": 0.2},
                              "follow": "right", "actions": ["left", "right"], "cells": [[3, 0]]},
                "bayes": {"grid_points": 11, "queries": [{"id": "flip", "model": {"kind": "coin"}}], "data": ["heads"]},
                "train": {"grid": {"width": 5, "height": 1, "goal": [4, 0], "start": [0, 0], "slip": 0.2},
                          "shaping": {"beta": 0.5}},
                "anomaly": {"window": 32}}"#,
            None,
        )
        .unwrap()
        .config;
        let g = cfg.gridworld.unwrap();
        assert_eq!(g.horizon, 2);
        assert_eq!(g.follow, Follow::Right);
        assert_eq!(g.cells.unwrap(), vec![Cell::new(3, 0)]);
        let b = cfg.bayes.unwrap();
        assert_eq!(b.prior, Prior::default());
        assert_eq!(b.data, vec![Outcome::Heads]);
        let t = cfg.train.unwrap();
        assert_eq!(t.shaping.beta, 0.5);
        assert_eq!(t.episodes, TrainConfig::default().episodes);
        assert_eq!(cfg.anomaly.unwrap().window, 32);
        assert_eq!(
            cfg.output_formats,
            vec![OutputFormat::Csv, OutputFormat::Json]
        );
    }
}
