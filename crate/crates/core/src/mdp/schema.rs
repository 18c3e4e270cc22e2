//! Versioned JSON instance format.
//!
//! ```text
//! {
//!   "format": "layered-mdp", "version": 1,
//!   "meta": {"name": "...", "value_scale": 0.5},
//!   "horizon": H, "width": k, "num_actions": A, "start_level": l0,
//!   "kernel":  [stage < H-1][level][action][next level] marginal probabilities,
//!   "rewards": [stage][level][action] {"support": [...], "probs": [...]},
//!   "coupling": optional [stage < H-1][level][action] null | rows per reward point,
//!   "ordering": optional [stage][level] action permutation, ascending in stay probability
//! }
//! ```
//!
//! All indices are zero-based. Floats are written in shortest round-trip form,
//! so write → read → write is byte-identical.

use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDistribution;
use crate::error::MdpError;

use super::{LayeredMdp, MdpMeta, StateAction};

pub const SCHEMA_FORMAT: &str = "layered-mdp";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardDoc {
    pub support: Vec<f64>,
    pub probs: Vec<f64>,
}

type Coupling = Vec<Vec<Vec<Option<Vec<Vec<f64>>>>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpDocument {
    pub format: String,
    pub version: u32,
    #[serde(default)]
    pub meta: MdpMeta,
    pub horizon: usize,
    pub width: usize,
    pub num_actions: usize,
    pub start_level: usize,
    pub kernel: Vec<Vec<Vec<Vec<f64>>>>,
    pub rewards: Vec<Vec<Vec<RewardDoc>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Coupling>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<Vec<Vec<Vec<usize>>>>,
}

impl From<&LayeredMdp> for MdpDocument {
    fn from(mdp: &LayeredMdp) -> Self {
        let (h, w, n) = (mdp.horizon(), mdp.width(), mdp.num_actions());
        let kernel = (0..h.saturating_sub(1))
            .map(|i| {
                (0..w)
                    .map(|l| (0..n).map(|a| mdp.kernel_row(i, l, a).to_vec()).collect())
                    .collect()
            })
            .collect();
        let rewards = (0..h)
            .map(|i| {
                (0..w)
                    .map(|l| {
                        (0..n)
                            .map(|a| {
                                let d = mdp.reward_distribution(i, l, a);
                                RewardDoc {
                                    support: d.support().to_vec(),
                                    probs: d.probs().to_vec(),
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let any_coupled = (0..h.saturating_sub(1))
            .any(|i| (0..w).any(|l| (0..n).any(|a| mdp.state_action(i, l, a).is_coupled())));
        let coupling = any_coupled.then(|| {
            (0..h - 1)
                .map(|i| {
                    (0..w)
                        .map(|l| {
                            (0..n)
                                .map(|a| {
                                    let sa = mdp.state_action(i, l, a);
                                    sa.is_coupled().then(|| sa.next.clone())
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        });
        let ordering = mdp.ordering().map(|ord| {
            (0..h)
                .map(|i| (0..w).map(|l| ord[i * w + l].clone()).collect())
                .collect()
        });
        MdpDocument {
            format: SCHEMA_FORMAT.to_string(),
            version: SCHEMA_VERSION,
            meta: mdp.meta.clone(),
            horizon: h,
            width: w,
            num_actions: n,
            start_level: mdp.start_level(),
            kernel,
            rewards,
            coupling,
            ordering,
        }
    }
}

fn dims<T>(v: &[T], expected: usize, what: &str) -> Result<(), MdpError> {
    if v.len() != expected {
        return Err(MdpError::Schema(format!(
            "{what}: expected {expected} entries, found {}",
            v.len()
        )));
    }
    Ok(())
}

impl TryFrom<MdpDocument> for LayeredMdp {
    type Error = MdpError;

    fn try_from(doc: MdpDocument) -> Result<Self, MdpError> {
        if doc.format != SCHEMA_FORMAT {
            return Err(MdpError::Schema(format!("unknown format {:?}", doc.format)));
        }
        if doc.version != SCHEMA_VERSION {
            return Err(MdpError::Schema(format!("unsupported version {}", doc.version)));
        }
        let (h, w, n) = (doc.horizon, doc.width, doc.num_actions);
        if h == 0 {
            return Err(MdpError::Schema("horizon must be positive".into()));
        }
        dims(&doc.kernel, h - 1, "kernel stages")?;
        dims(&doc.rewards, h, "reward stages")?;
        if let Some(c) = &doc.coupling {
            dims(c, h - 1, "coupling stages")?;
        }
        let mut sas = Vec::with_capacity(h * w * n);
        for i in 0..h {
            dims(&doc.rewards[i], w, "reward levels")?;
            if i + 1 < h {
                dims(&doc.kernel[i], w, "kernel levels")?;
            }
            for l in 0..w {
                dims(&doc.rewards[i][l], n, "reward actions")?;
                if i + 1 < h {
                    dims(&doc.kernel[i][l], n, "kernel actions")?;
                }
                for a in 0..n {
                    let rd = &doc.rewards[i][l][a];
                    let reward = DiscreteDistribution::new(rd.support.clone(), rd.probs.clone())?;
                    if i + 1 == h {
                        sas.push(StateAction::terminal(reward));
                        continue;
                    }
                    let coupled = doc
                        .coupling
                        .as_ref()
                        .and_then(|c| c[i].get(l))
                        .and_then(|row| row.get(a))
                        .cloned()
                        .flatten();
                    let next = match coupled {
                        Some(rows) => rows,
                        None => vec![doc.kernel[i][l][a].clone()],
                    };
                    sas.push(StateAction { reward, next });
                }
            }
        }
        let ordering = match doc.ordering {
            Some(ord) => {
                dims(&ord, h, "ordering stages")?;
                let mut flat = Vec::with_capacity(h * w);
                for stage in ord {
                    dims(&stage, w, "ordering levels")?;
                    flat.extend(stage);
                }
                Some(flat)
            }
            None => None,
        };
        let mdp = LayeredMdp::from_parts(h, w, n, doc.start_level, sas, ordering)?.with_meta(doc.meta);
        // The stored marginal must agree with the coupled rows.
        for i in 0..h - 1 {
            for l in 0..w {
                for a in 0..n {
                    let stored = &doc.kernel[i][l][a];
                    let derived = mdp.kernel_row(i, l, a);
                    dims(stored, w, "kernel row")?;
                    if stored.iter().zip(derived).any(|(x, y)| (x - y).abs() > 1e-12) {
                        return Err(MdpError::Schema(format!(
                            "kernel row (stage {i}, level {l}, action {a}) disagrees with its coupling rows"
                        )));
                    }
                }
            }
        }
        Ok(mdp)
    }
}

impl LayeredMdp {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MdpDocument::from(self)).expect("MDP documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, MdpError> {
        let doc: MdpDocument = serde_json::from_str(text)?;
        LayeredMdp::try_from(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_version() {
        let text = r#"{"format":"layered-mdp","version":9,"horizon":1,"width":1,"num_actions":1,
            "start_level":0,"kernel":[],"rewards":[[[{"support":[0.0],"probs":[1.0]}]]]}"#;
        assert!(matches!(LayeredMdp::from_json(text), Err(MdpError::Schema(_))));
    }

    #[test]
    fn minimal_document_loads() {
        let text = r#"{"format":"layered-mdp","version":1,"horizon":1,"width":1,"num_actions":2,
            "start_level":0,"kernel":[],"rewards":[[[{"support":[0.0],"probs":[1.0]},
            {"support":[0.25,1.0],"probs":[0.5,0.5]}]]]}"#;
        let mdp = LayeredMdp::from_json(text).unwrap();
        assert_eq!(mdp.mean_reward(0, 0, 1), 0.625);
        assert_eq!(mdp.meta.value_scale, 1.0);
    }

    #[test]
    fn bad_dimensions() {
        let text = r#"{"format":"layered-mdp","version":1,"horizon":2,"width":1,"num_actions":1,
            "start_level":0,"kernel":[],"rewards":[]}"#;
        assert!(LayeredMdp::from_json(text).is_err());
    }
}
