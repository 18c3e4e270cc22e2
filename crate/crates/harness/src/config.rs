//! Experiment configuration (TOML file, flags override).

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use bandit_mdp::learners::Algorithm;
use serde::{Deserialize, Serialize};

use crate::{HarnessError, InstanceRef};

pub const DEFAULT_SEEDS: u64 = 5;

/// `max(1, T / 10⁴)`.
pub fn default_stride(episodes: u64) -> u64 {
    (episodes / 10_000).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instances: Vec<InstanceRef>,
    pub algorithms: Vec<Algorithm>,
    pub episodes: u64,
    #[serde(default = "default_seed_list")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Report regret in units of the normalized instance (prophet regret divided by `k`).
    #[serde(default)]
    pub normalize_by_k: bool,
    #[serde(default)]
    pub stride: Option<u64>,
    /// Run cells on the rayon pool. Timing comparisons want this off.
    #[serde(default = "yes")]
    pub parallel: bool,
}

fn default_seed_list() -> Vec<u64> {
    (0..DEFAULT_SEEDS).collect()
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

fn yes() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn stride(&self) -> u64 {
        self.stride.unwrap_or_else(|| default_stride(self.episodes))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.episodes < 2 {
            return Err(HarnessError::Config("T must be at least 2".into()));
        }
        if self.stride == Some(0) {
            return Err(HarnessError::Config("stride must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("no seeds".into()));
        }
        let distinct: HashSet<_> = self.seeds.iter().collect();
        if distinct.len() != self.seeds.len() {
            return Err(HarnessError::Config("seeds must be distinct".into()));
        }
        if self.instances.is_empty() || self.algorithms.is_empty() {
            return Err(HarnessError::Config("need at least one instance and one algorithm".into()));
        }
        Ok(())
    }
}
