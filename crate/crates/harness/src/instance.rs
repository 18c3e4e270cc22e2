//! Instance references as they appear in config files and on the command line.

use std::path::{Path, PathBuf};

use bandit_mdp::instances::{
    compile_knapsack, compile_posted_pricing, compile_prophet, prophet_random, prophet_uniform,
    KnapsackSpec, ProphetSpec,
};
use bandit_mdp::LayeredMdp;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// Application-level spec file; compiles to a [`LayeredMdp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "application", rename_all = "kebab-case")]
pub enum ApplicationSpec {
    Prophet(ProphetSpec),
    Pricing(ProphetSpec),
    Knapsack(KnapsackSpec),
}

impl ApplicationSpec {
    pub fn compile(&self) -> Result<LayeredMdp, HarnessError> {
        Ok(match self {
            ApplicationSpec::Prophet(s) => compile_prophet(s)?,
            ApplicationSpec::Pricing(s) => compile_posted_pricing(s)?,
            ApplicationSpec::Knapsack(s) => compile_knapsack(s)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InstanceRef {
    /// Every value uniform on `{0, 1/(A-1), ..., 1}`.
    ProphetUniform {
        horizon: usize,
        capacity: usize,
        num_values: usize,
        #[serde(default)]
        pricing: bool,
    },
    /// Random supports and simplex-uniform probabilities drawn from `seed`.
    ProphetRandom {
        horizon: usize,
        capacity: usize,
        num_values: usize,
        seed: u64,
        #[serde(default)]
        pricing: bool,
    },
    /// Either an MDP document or an application spec.
    File { path: PathBuf },
}

impl InstanceRef {
    pub fn label(&self) -> String {
        match self {
            InstanceRef::ProphetUniform {
                horizon,
                capacity,
                num_values,
                pricing,
            } => format!("{}-i1-H{horizon}-k{capacity}-A{num_values}", kind(*pricing)),
            InstanceRef::ProphetRandom {
                horizon,
                capacity,
                num_values,
                seed,
                pricing,
            } => format!("{}-i2-H{horizon}-k{capacity}-A{num_values}-s{seed}", kind(*pricing)),
            InstanceRef::File { path } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "instance".into()),
        }
    }

    pub fn spec(&self) -> Result<Option<ApplicationSpec>, HarnessError> {
        let wrap = |spec: ProphetSpec, pricing: bool| {
            if pricing {
                ApplicationSpec::Pricing(spec)
            } else {
                ApplicationSpec::Prophet(spec)
            }
        };
        Ok(match *self {
            InstanceRef::ProphetUniform {
                horizon,
                capacity,
                num_values,
                pricing,
            } => Some(wrap(prophet_uniform(horizon, capacity, num_values)?, pricing)),
            InstanceRef::ProphetRandom {
                horizon,
                capacity,
                num_values,
                seed,
                pricing,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Some(wrap(prophet_random(horizon, capacity, num_values, &mut rng)?, pricing))
            }
            InstanceRef::File { .. } => None,
        })
    }

    pub fn build(&self) -> Result<LayeredMdp, HarnessError> {
        match self {
            InstanceRef::File { path } => load_instance(path),
            _ => self.spec()?.expect("generated instances have a spec").compile(),
        }
    }
}

fn kind(pricing: bool) -> &'static str {
    if pricing {
        "pricing"
    } else {
        "prophet"
    }
}

/// Loads an MDP document, or compiles an application spec if the file holds one.
pub fn load_instance(path: &Path) -> Result<LayeredMdp, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| HarnessError::Mdp(e.into()))?;
    if value.get("application").is_some() {
        let spec: ApplicationSpec = serde_json::from_value(value).map_err(|e| HarnessError::Mdp(e.into()))?;
        spec.compile()
    } else {
        Ok(LayeredMdp::from_json(&text)?)
    }
}
