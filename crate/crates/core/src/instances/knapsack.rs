//! Stochastic knapsack with items considered in a fixed order.
//!
//! Level `b + 1` holds remaining budget `b` (`0 <= b <= k`); level 0 is the
//! absorbing "overflowed" level reached when an accepted item's cost exceeds
//! the remaining budget. An overflowing item pays nothing. Action 0 accepts,
//! action 1 rejects; reject is the maximal action everywhere.

use serde::{Deserialize, Serialize};

use crate::error::InstanceError;
use crate::mdp::{validate, LayeredMdp, MdpMeta};

use super::joint_state_action;

pub const ACCEPT: usize = 0;
pub const REJECT: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnapsackOutcome {
    pub reward: f64,
    /// Must be a non-negative integer.
    pub cost: f64,
    pub prob: f64,
}

/// Joint finite distribution of one item's `(reward, cost)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnapsackItem {
    pub outcomes: Vec<KnapsackOutcome>,
}

impl KnapsackItem {
    pub fn deterministic(reward: f64, cost: f64) -> Self {
        Self {
            outcomes: vec![KnapsackOutcome {
                reward,
                cost,
                prob: 1.0,
            }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnapsackSpec {
    pub items: Vec<KnapsackItem>,
    pub budget: usize,
    pub value_scale: f64,
}

pub fn compile_knapsack(spec: &KnapsackSpec) -> Result<LayeredMdp, InstanceError> {
    let h = spec.items.len();
    if h == 0 {
        return Err(InstanceError::InvalidSpec("knapsack needs at least one item".into()));
    }
    if !(spec.value_scale.is_finite() && spec.value_scale > 0.0) {
        return Err(InstanceError::InvalidSpec("value_scale must be positive".into()));
    }
    for (i, item) in spec.items.iter().enumerate() {
        let total: f64 = item.outcomes.iter().map(|o| o.prob).sum();
        if item.outcomes.is_empty() || (total - 1.0).abs() > 1e-12 {
            return Err(InstanceError::InvalidSpec(format!(
                "item {i}: outcome probabilities sum to {total}"
            )));
        }
        for o in &item.outcomes {
            if !(o.cost >= 0.0 && o.cost.fract() == 0.0 && o.cost.is_finite()) {
                return Err(InstanceError::InvalidSpec(format!(
                    "item {i}: cost {} is not a non-negative integer",
                    o.cost
                )));
            }
            if !(o.reward >= 0.0 && o.reward.is_finite()) || !(0.0..=1.0).contains(&o.prob) {
                return Err(InstanceError::InvalidSpec(format!(
                    "item {i}: reward must be non-negative and probability in [0, 1]"
                )));
            }
        }
    }

    let width = spec.budget + 2;
    let mut sas = Vec::with_capacity(h * width * 2);
    for (stage, item) in spec.items.iter().enumerate() {
        let terminal = stage + 1 == h;
        for level in 0..width {
            for action in [ACCEPT, REJECT] {
                let outcomes: Vec<(f64, usize, f64)> = if level == 0 {
                    vec![(0.0, 0, 1.0)]
                } else if action == REJECT {
                    vec![(0.0, level, 1.0)]
                } else {
                    let budget = (level - 1) as f64;
                    item.outcomes
                        .iter()
                        .map(|o| {
                            if o.cost <= budget {
                                (o.reward * spec.value_scale, level - o.cost as usize, o.prob)
                            } else {
                                (0.0, 0, o.prob)
                            }
                        })
                        .collect()
                };
                sas.push(joint_state_action(&outcomes, width, terminal)?);
            }
        }
    }
    let ordering = vec![vec![ACCEPT, REJECT]; h * width];
    let mdp = LayeredMdp::from_parts(h, width, 2, spec.budget + 1, sas, Some(ordering))?.with_meta(
        MdpMeta {
            name: format!("knapsack H={h} budget={}", spec.budget),
            value_scale: spec.value_scale,
        },
    );
    let report = validate(&mdp);
    if !report.is_ok() {
        return Err(InstanceError::InvalidSpec(format!(
            "compiled knapsack fails validation: {report}"
        )));
    }
    Ok(mdp)
}
