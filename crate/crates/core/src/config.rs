//! Pipeline configuration with the reference defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::fixed::BlockSamplingParams;
use crate::learn::TrainParams;
use crate::theme::ThemeParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub sampling: BlockSamplingParams,
    pub theme: ThemeParams,
    pub train: TrainParams,
    /// Snapshots fetched per page.
    pub snapshots: usize,
    pub top_n: usize,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            sampling: BlockSamplingParams::default(),
            theme: ThemeParams::default(),
            train: TrainParams::default(),
            snapshots: 5,
            top_n: 5,
            seed: 0,
        }
    }
}

/// One published default and the value in effect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefaultCheck {
    pub name: &'static str,
    pub expected: f64,
    pub actual: f64,
}

impl DefaultCheck {
    pub fn ok(&self) -> bool {
        self.expected == self.actual
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    /// Compares the stated reference defaults with this configuration.
    pub fn default_checks(&self) -> Vec<DefaultCheck> {
        let c = |name, expected, actual| DefaultCheck {
            name,
            expected,
            actual,
        };
        vec![
            c("grid.n1", 40.0, self.sampling.n1 as f64),
            c("grid.n2", 40.0, self.sampling.n2 as f64),
            c("clustering.k", 5.0, self.theme.kmeans_params().k as f64),
            c("clustering.lambda", 70.0, self.theme.lambda),
            c("kmm.b", 1000.0, self.train.kmm.b),
            c("kmm.epsilon", 1.0, self.train.kmm.epsilon),
            c("ensemble.members", 50.0, self.train.members as f64),
        ]
    }
}
