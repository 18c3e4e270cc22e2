//! Lower-bound families.
//!
//! The general family `M^θ` has two levels and hides one good action per
//! stage on the bottom row; every other action drops to a dead row. The
//! ordered family `M_{τ,a}` hides a monotone path with `k` down steps from the
//! top level `k + 1` to the good terminal state at level 1. In both families
//! only terminal rewards are non-zero: `Bern(1/2 + ε)` at the good state and
//! `Bern(1/2)` everywhere else.
//!
//! Ordered specs use 1-based stage numbers for the down steps and actions
//! `1..=A`; action 0 is the maximal action. Internally the MDP has `A + 1`
//! actions and `k + 2` levels.

use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDistribution;
use crate::error::InstanceError;
use crate::mdp::{validate, LayeredMdp, MdpMeta, StateAction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardInstanceGeneralSpec {
    /// Secret action per stage.
    pub theta: Vec<usize>,
    pub num_actions: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HardInstanceOrderedSpec {
    /// Stages `0 < i_1 < ... < i_k < H` (1-based) where the path goes down.
    pub down_stages: Vec<usize>,
    /// Action taken at each down state, each in `1..=A`.
    pub actions: Vec<usize>,
}

/// `ε = min(√(L/T), 1) / 8` for a family of `L` instances.
pub fn lower_bound_epsilon(family_size: f64, episodes: f64) -> f64 {
    (family_size / episodes).sqrt().min(1.0) / 8.0
}

fn check_epsilon(epsilon: f64) -> Result<(), InstanceError> {
    if epsilon > 0.0 && epsilon < 0.25 {
        Ok(())
    } else {
        Err(InstanceError::InvalidSpec(format!("epsilon {epsilon} outside (0, 1/4)")))
    }
}

fn terminal_reward(good: bool, epsilon: f64) -> DiscreteDistribution {
    DiscreteDistribution::bernoulli(if good { 0.5 + epsilon } else { 0.5 })
}

pub fn hard_instance_general(spec: &HardInstanceGeneralSpec) -> Result<LayeredMdp, InstanceError> {
    check_epsilon(spec.epsilon)?;
    let h = spec.theta.len();
    let n = spec.num_actions;
    if h == 0 || n == 0 {
        return Err(InstanceError::InvalidSpec("theta and the action set must be non-empty".into()));
    }
    if let Some(bad) = spec.theta.iter().find(|&&t| t >= n) {
        return Err(InstanceError::InvalidSpec(format!("theta entry {bad} >= {n}")));
    }
    let width = 2;
    let zero = DiscreteDistribution::point(0.0);
    let mut sas = Vec::with_capacity(h * width * n);
    for (stage, &secret) in spec.theta.iter().enumerate() {
        for level in 0..width {
            for action in 0..n {
                let on_track = level == 0 && action == secret;
                sas.push(if stage + 1 == h {
                    StateAction::terminal(terminal_reward(on_track, spec.epsilon))
                } else {
                    StateAction::deterministic(zero.clone(), width, if on_track { 0 } else { 1 })
                });
            }
        }
    }
    let mdp = LayeredMdp::from_parts(h, width, n, 0, sas, None)?.with_meta(MdpMeta {
        name: format!("hard-general H={h} A={n}"),
        value_scale: 1.0,
    });
    Ok(mdp)
}

impl HardInstanceOrderedSpec {
    pub fn check(&self, horizon: usize, num_actions: usize) -> Result<(), InstanceError> {
        let k = self.down_stages.len();
        if k == 0 || self.actions.len() != k {
            return Err(InstanceError::InvalidSpec(
                "need one action per down stage and at least one down stage".into(),
            ));
        }
        let increasing = self.down_stages.windows(2).all(|w| w[0] < w[1]);
        if !increasing || self.down_stages[0] == 0 || self.down_stages[k - 1] >= horizon {
            return Err(InstanceError::InvalidSpec(format!(
                "down stages {:?} must satisfy 0 < i_1 < ... < i_k < {horizon}",
                self.down_stages
            )));
        }
        if let Some(a) = self.actions.iter().find(|&&a| a == 0 || a > num_actions) {
            return Err(InstanceError::InvalidSpec(format!(
                "down action {a} outside 1..={num_actions}"
            )));
        }
        Ok(())
    }

    /// Path level at 0-based `stage`.
    pub fn path_level(&self, stage: usize) -> usize {
        let k = self.down_stages.len();
        let passed = self.down_stages.iter().filter(|&&d| d < stage + 1).count();
        k + 1 - passed
    }

    /// The down action at 0-based `stage`, if the path goes down there.
    pub fn down_action(&self, stage: usize) -> Option<usize> {
        self.down_stages
            .iter()
            .position(|&d| d == stage + 1)
            .map(|p| self.actions[p])
    }

    /// Whether `policy` follows the hidden path: the down action at every down
    /// state and action 0 at every other path state before the last stage.
    pub fn is_optimal_policy(&self, policy: &crate::mdp::Policy) -> bool {
        (0..policy.horizon() - 1).all(|stage| {
            let level = self.path_level(stage);
            policy.action(level, stage) == self.down_action(stage).unwrap_or(0)
        })
    }
}

pub fn hard_instance_ordered(
    spec: &HardInstanceOrderedSpec,
    horizon: usize,
    num_actions: usize,
    epsilon: f64,
) -> Result<LayeredMdp, InstanceError> {
    check_epsilon(epsilon)?;
    spec.check(horizon, num_actions)?;
    let k = spec.down_stages.len();
    let width = k + 2;
    let n = num_actions + 1;
    let zero = DiscreteDistribution::point(0.0);
    let mut sas = Vec::with_capacity(horizon * width * n);
    for stage in 0..horizon {
        let path = spec.path_level(stage);
        let down = spec.down_action(stage);
        for level in 0..width {
            for action in 0..n {
                if stage + 1 == horizon {
                    sas.push(StateAction::terminal(terminal_reward(level == 1, epsilon)));
                    continue;
                }
                let next = if level > path {
                    level
                } else if level < path {
                    0
                } else {
                    match down {
                        Some(ap) if action < ap => level,
                        Some(ap) if action == ap => level - 1,
                        Some(_) => 0,
                        None if action == 0 => level,
                        None => 0,
                    }
                };
                sas.push(StateAction::deterministic(zero.clone(), width, next));
            }
        }
    }
    let ascending: Vec<usize> = (0..n).rev().collect();
    let ordering = vec![ascending; horizon * width];
    let mdp = LayeredMdp::from_parts(horizon, width, n, k + 1, sas, Some(ordering))?.with_meta(MdpMeta {
        name: format!("hard-ordered H={horizon} k={k} A={num_actions}"),
        value_scale: 1.0,
    });
    let report = validate(&mdp);
    if !report.is_ok() {
        return Err(InstanceError::InvalidSpec(format!(
            "ordered hard instance fails validation: {report}"
        )));
    }
    Ok(mdp)
}

/// Every `(τ, a)` pair: `C(H-1, k) · A^k` specs.
pub fn all_ordered_specs(horizon: usize, k: usize, num_actions: usize) -> Vec<HardInstanceOrderedSpec> {
    let mut paths = Vec::new();
    let mut current = Vec::with_capacity(k);
    choose(1, horizon, k, &mut current, &mut paths);
    let mut out = Vec::new();
    for path in paths {
        let mut acts = vec![1; k];
        loop {
            out.push(HardInstanceOrderedSpec {
                down_stages: path.clone(),
                actions: acts.clone(),
            });
            // odometer over 1..=A
            let mut p = 0;
            while p < k && acts[p] == num_actions {
                acts[p] = 1;
                p += 1;
            }
            if p == k {
                break;
            }
            acts[p] += 1;
        }
    }
    out
}

fn choose(from: usize, horizon: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for s in from..horizon {
        current.push(s);
        choose(s + 1, horizon, k, current, out);
        current.pop();
    }
}
