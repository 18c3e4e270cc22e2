//! Layered episodic MDPs.
//!
//! States are `(level, stage)` pairs with `level in 0..width` and
//! `stage in 0..horizon`; transitions only go from stage `i` to stage `i + 1`.
//! All indices are zero-based.
//!
//! Each state-action pair carries a finite reward distribution and, for every
//! stage but the last, a transition law over next-stage levels. The transition
//! law is either independent of the realized reward (one row) or conditioned on
//! it (one row per reward support point). The conditioned form lets capacity
//! problems couple "accept" rewards with the level drop while the marginal
//! kernel `p_i(s | l, a)` stays available to the dynamic-programming oracles.

mod dp;
mod schema;
mod simulate;
mod validate;

pub use dp::{
    conditional_value, optimal_policy, optimal_values, policy_value, profile_value,
    state_values, visitation_probabilities, OptimalSolution,
};
pub use schema::{MdpDocument, SCHEMA_FORMAT, SCHEMA_VERSION};
pub use simulate::{simulate_episode, simulate_from};
pub use validate::{validate, ValidationReport, Violation};

use serde::{Deserialize, Serialize};

use crate::dist::{DiscreteDistribution, PROB_TOL};
use crate::error::MdpError;

/// What an episode reveals to the learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeedbackMode {
    /// Aggregate reward only.
    Bandit,
    /// Aggregate reward plus the visited states.
    Trajectory,
    /// Visited states plus every per-step reward.
    SemiBandit,
}

/// Result of one simulated episode, filtered by [`FeedbackMode`].
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutcome {
    pub aggregate_reward: f64,
    /// `(level, stage)` pairs, one per stage.
    pub trajectory: Option<Vec<(usize, usize)>>,
    pub step_rewards: Option<Vec<f64>>,
}

/// Reward law and transition law of one state-action pair.
#[derive(Debug, Clone, PartialEq)]
pub struct StateAction {
    pub reward: DiscreteDistribution,
    /// Empty at the final stage. Otherwise either a single dense row over the
    /// next-stage levels, or one row per reward support point.
    pub next: Vec<Vec<f64>>,
}

impl StateAction {
    /// Deterministic move to `next_level` with a reward independent of it.
    pub fn deterministic(reward: DiscreteDistribution, width: usize, next_level: usize) -> Self {
        let mut row = vec![0.0; width];
        row[next_level] = 1.0;
        Self {
            reward,
            next: vec![row],
        }
    }

    pub fn terminal(reward: DiscreteDistribution) -> Self {
        Self {
            reward,
            next: Vec::new(),
        }
    }

    pub fn is_coupled(&self) -> bool {
        self.next.len() > 1
    }

    /// Transition row used after the reward support point `reward_index` was drawn.
    pub fn row_for(&self, reward_index: usize) -> &[f64] {
        if self.next.len() == 1 {
            &self.next[0]
        } else {
            &self.next[reward_index]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Cell {
    model: StateAction,
    mean: f64,
    marginal: Vec<f64>,
    /// Cumulative sparse rows (next level, cumulative probability), aligned with `model.next`.
    cumulative: Vec<Vec<(usize, f64)>>,
    /// (cumulative probability, support value) per reward point, and the last
    /// point with positive mass.
    reward_cum: Vec<(f64, f64)>,
    reward_last: usize,
}

impl Cell {
    fn new(model: StateAction, width: usize) -> Self {
        let mean = model.reward.mean();
        let marginal = if model.next.is_empty() {
            Vec::new()
        } else if model.next.len() == 1 {
            model.next[0].clone()
        } else {
            let mut m = vec![0.0; width];
            for (p, row) in model.reward.probs().iter().zip(&model.next) {
                for (s, q) in row.iter().enumerate() {
                    m[s] += p * q;
                }
            }
            m
        };
        let cumulative = model
            .next
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                row.iter()
                    .enumerate()
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(s, p)| {
                        acc += p;
                        (s, acc)
                    })
                    .collect()
            })
            .collect();
        let mut acc = 0.0;
        let reward_cum = model
            .reward
            .probs()
            .iter()
            .zip(model.reward.support())
            .map(|(p, v)| {
                acc += p;
                (acc, *v)
            })
            .collect();
        let reward_last = model.reward.probs().iter().rposition(|p| *p > 0.0).unwrap_or(0);
        Self {
            model,
            mean,
            marginal,
            cumulative,
            reward_cum,
            reward_last,
        }
    }
}

/// Free-form labels carried alongside an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpMeta {
    #[serde(default)]
    pub name: String,
    /// Factor already applied to every reward so that episode totals stay in `[0, 1]`.
    #[serde(default = "one")]
    pub value_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for MdpMeta {
    fn default() -> Self {
        Self {
            name: String::new(),
            value_scale: 1.0,
        }
    }
}

/// A finite-horizon MDP with `horizon` stages of `width` levels each.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredMdp {
    horizon: usize,
    width: usize,
    num_actions: usize,
    start_level: usize,
    cells: Vec<Cell>,
    ordering: Option<Vec<Vec<usize>>>,
    pub meta: MdpMeta,
}

impl LayeredMdp {
    /// Builds an MDP from per-state-action models laid out as
    /// `[(stage * width + level) * num_actions + action]`.
    ///
    /// Only shapes are checked here; probabilistic invariants are reported by
    /// [`validate`].
    pub fn from_parts(
        horizon: usize,
        width: usize,
        num_actions: usize,
        start_level: usize,
        state_actions: Vec<StateAction>,
        ordering: Option<Vec<Vec<usize>>>,
    ) -> Result<Self, MdpError> {
        if horizon == 0 || width == 0 || num_actions == 0 {
            return Err(MdpError::Shape(
                "horizon, width and action count must be positive".into(),
            ));
        }
        if start_level >= width {
            return Err(MdpError::Shape(format!(
                "start level {start_level} outside 0..{width}"
            )));
        }
        let expected = horizon * width * num_actions;
        if state_actions.len() != expected {
            return Err(MdpError::Shape(format!(
                "expected {expected} state-action models, got {}",
                state_actions.len()
            )));
        }
        for (idx, sa) in state_actions.iter().enumerate() {
            let stage = idx / (width * num_actions);
            let final_stage = stage + 1 == horizon;
            if final_stage {
                if !sa.next.is_empty() {
                    return Err(MdpError::Shape(format!(
                        "final-stage state-action {idx} must not carry transitions"
                    )));
                }
                continue;
            }
            if sa.next.len() != 1 && sa.next.len() != sa.reward.len() {
                return Err(MdpError::Shape(format!(
                    "state-action {idx}: {} transition rows for {} reward points",
                    sa.next.len(),
                    sa.reward.len()
                )));
            }
            if sa.next.iter().any(|row| row.len() != width) {
                return Err(MdpError::Shape(format!(
                    "state-action {idx}: transition row length differs from width {width}"
                )));
            }
            if sa.next.iter().flatten().any(|p| !p.is_finite()) {
                return Err(MdpError::Shape(format!(
                    "state-action {idx}: non-finite transition probability"
                )));
            }
        }
        if let Some(ord) = &ordering {
            if ord.len() != horizon * width {
                return Err(MdpError::Shape(format!(
                    "ordering lists {} states, expected {}",
                    ord.len(),
                    horizon * width
                )));
            }
        }
        let cells = state_actions
            .into_iter()
            .map(|sa| Cell::new(sa, width))
            .collect();
        Ok(Self {
            horizon,
            width,
            num_actions,
            start_level,
            cells,
            ordering,
            meta: MdpMeta::default(),
        })
    }

    pub fn with_meta(mut self, meta: MdpMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn start_level(&self) -> usize {
        self.start_level
    }

    pub fn is_ordered(&self) -> bool {
        self.ordering.is_some()
    }

    /// Per-state action orderings, ascending in stay probability.
    pub fn ordering(&self) -> Option<&[Vec<usize>]> {
        self.ordering.as_deref()
    }

    #[inline]
    fn cell_index(&self, stage: usize, level: usize, action: usize) -> usize {
        (stage * self.width + level) * self.num_actions + action
    }

    #[inline]
    fn cell(&self, stage: usize, level: usize, action: usize) -> &Cell {
        &self.cells[self.cell_index(stage, level, action)]
    }

    pub fn state_action(&self, stage: usize, level: usize, action: usize) -> &StateAction {
        &self.cell(stage, level, action).model
    }

    pub fn reward_distribution(&self, stage: usize, level: usize, action: usize) -> &DiscreteDistribution {
        &self.cell(stage, level, action).model.reward
    }

    /// Expected reward `r_{l,i}(a)`.
    pub fn mean_reward(&self, stage: usize, level: usize, action: usize) -> f64 {
        self.cell(stage, level, action).mean
    }

    /// Marginal transition row `p_i(. | l, a)`; empty at the final stage.
    pub fn kernel_row(&self, stage: usize, level: usize, action: usize) -> &[f64] {
        &self.cell(stage, level, action).marginal
    }

    pub fn transition_prob(&self, stage: usize, level: usize, action: usize, next: usize) -> f64 {
        self.kernel_row(stage, level, action)
            .get(next)
            .copied()
            .unwrap_or(0.0)
    }

    /// Inverse-CDF pick of the reward support point for uniform `u`: `(index, value)`.
    #[inline]
    pub(crate) fn reward_draw(&self, stage: usize, level: usize, action: usize, u: f64) -> (usize, f64) {
        let cell = self.cell(stage, level, action);
        let mut j = cell.reward_cum.iter().filter(|(c, _)| u >= *c).count();
        if j >= cell.reward_cum.len() {
            j = cell.reward_last;
        }
        (j, cell.reward_cum[j].1)
    }

    pub(crate) fn cumulative_row(
        &self,
        stage: usize,
        level: usize,
        action: usize,
        reward_index: usize,
    ) -> &[(usize, f64)] {
        let cell = self.cell(stage, level, action);
        if cell.cumulative.len() == 1 {
            &cell.cumulative[0]
        } else {
            &cell.cumulative[reward_index]
        }
    }

    /// The `≺`-maximal action of `actions` at `(level, stage)`, if an ordering is known.
    pub fn maximal_action(&self, stage: usize, level: usize, actions: &[usize]) -> Option<usize> {
        let ord = self.ordering.as_ref()?;
        maximal_in_order(&ord[stage * self.width + level], actions)
    }

    pub fn check_policy(&self, policy: &Policy) -> Result<(), MdpError> {
        if policy.horizon() != self.horizon || policy.width() != self.width {
            return Err(MdpError::Shape(format!(
                "policy is {}x{}, MDP is {}x{}",
                policy.width(),
                policy.horizon(),
                self.width,
                self.horizon
            )));
        }
        for stage in 0..self.horizon {
            for level in 0..self.width {
                let action = policy.action(level, stage);
                if action >= self.num_actions {
                    return Err(MdpError::PolicyAction {
                        level,
                        stage,
                        action,
                        num_actions: self.num_actions,
                    });
                }
            }
        }
        Ok(())
    }

    /// Number of deterministic policies, saturating at `u128::MAX`.
    pub fn policy_count(&self) -> u128 {
        let mut n: u128 = 1;
        for _ in 0..self.horizon * self.width {
            n = n.saturating_mul(self.num_actions as u128);
        }
        n
    }

    pub(crate) fn rows_sum_ok(row: &[f64]) -> bool {
        (row.iter().sum::<f64>() - 1.0).abs() <= PROB_TOL
    }
}

/// Returns the element of `actions` ranked highest by `order` (ascending list).
pub fn maximal_in_order(order: &[usize], actions: &[usize]) -> Option<usize> {
    order.iter().rev().find(|a| actions.contains(a)).copied()
}

/// Deterministic policy: one action per `(level, stage)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Policy {
    horizon: usize,
    width: usize,
    /// Row-major by stage: `actions[stage * width + level]`.
    actions: Vec<usize>,
}

impl Policy {
    pub fn constant(horizon: usize, width: usize, action: usize) -> Self {
        Self {
            horizon,
            width,
            actions: vec![action; horizon * width],
        }
    }

    /// `actions[stage * width + level]`.
    pub fn from_stage_major(horizon: usize, width: usize, actions: Vec<usize>) -> Result<Self, MdpError> {
        if actions.len() != horizon * width {
            return Err(MdpError::Shape(format!(
                "policy needs {} entries, got {}",
                horizon * width,
                actions.len()
            )));
        }
        Ok(Self {
            horizon,
            width,
            actions,
        })
    }

    /// Builds from a `width x horizon` matrix, `rows[level][stage]`.
    pub fn from_matrix(rows: &[Vec<usize>]) -> Result<Self, MdpError> {
        let width = rows.len();
        let horizon = rows.first().map_or(0, Vec::len);
        if width == 0 || horizon == 0 || rows.iter().any(|r| r.len() != horizon) {
            return Err(MdpError::Shape("policy matrix must be a non-empty rectangle".into()));
        }
        let mut p = Self::constant(horizon, width, 0);
        for (level, row) in rows.iter().enumerate() {
            for (stage, a) in row.iter().enumerate() {
                p.set(level, stage, *a);
            }
        }
        Ok(p)
    }

    pub fn to_matrix(&self) -> Vec<Vec<usize>> {
        (0..self.width)
            .map(|l| (0..self.horizon).map(|i| self.action(l, i)).collect())
            .collect()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn action(&self, level: usize, stage: usize) -> usize {
        self.actions[stage * self.width + level]
    }

    #[inline]
    pub fn set(&mut self, level: usize, stage: usize, action: usize) {
        self.actions[stage * self.width + level] = action;
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.actions
    }
}

/// Per-state action distributions, used to represent randomized exploration
/// policies exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedStageProfile {
    horizon: usize,
    width: usize,
    num_actions: usize,
    probs: Vec<f64>,
}

impl RandomizedStageProfile {
    /// Every state plays action 0 with probability one.
    pub fn new(horizon: usize, width: usize, num_actions: usize) -> Self {
        let mut probs = vec![0.0; horizon * width * num_actions];
        for chunk in probs.chunks_mut(num_actions) {
            chunk[0] = 1.0;
        }
        Self {
            horizon,
            width,
            num_actions,
            probs,
        }
    }

    pub fn from_policy(policy: &Policy, num_actions: usize) -> Self {
        let mut p = Self::new(policy.horizon(), policy.width(), num_actions);
        for stage in 0..policy.horizon() {
            for level in 0..policy.width() {
                p.set_deterministic(level, stage, policy.action(level, stage));
            }
        }
        p
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn distribution(&self, level: usize, stage: usize) -> &[f64] {
        let start = (stage * self.width + level) * self.num_actions;
        &self.probs[start..start + self.num_actions]
    }

    pub fn set_distribution(&mut self, level: usize, stage: usize, dist: &[f64]) -> Result<(), MdpError> {
        if dist.len() != self.num_actions {
            return Err(MdpError::Shape(format!(
                "distribution has {} entries, expected {}",
                dist.len(),
                self.num_actions
            )));
        }
        if dist.iter().any(|p| !(0.0..=1.0).contains(p))
            || (dist.iter().sum::<f64>() - 1.0).abs() > PROB_TOL
        {
            return Err(MdpError::InvalidDistribution(format!(
                "action distribution at (level {level}, stage {stage}) is not on the simplex"
            )));
        }
        let start = (stage * self.width + level) * self.num_actions;
        self.probs[start..start + self.num_actions].copy_from_slice(dist);
        Ok(())
    }

    pub fn set_deterministic(&mut self, level: usize, stage: usize, action: usize) {
        let start = (stage * self.width + level) * self.num_actions;
        let slot = &mut self.probs[start..start + self.num_actions];
        slot.iter_mut().for_each(|p| *p = 0.0);
        slot[action] = 1.0;
    }

    pub fn is_valid(&self) -> bool {
        self.probs
            .chunks(self.num_actions)
            .all(|c| c.iter().all(|p| (0.0..=1.0).contains(p)) && LayeredMdp::rows_sum_ok(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_matrix_round_trip() {
        let rows = vec![vec![0, 1, 2], vec![2, 1, 0]];
        let p = Policy::from_matrix(&rows).unwrap();
        assert_eq!(p.width(), 2);
        assert_eq!(p.horizon(), 3);
        assert_eq!(p.action(1, 0), 2);
        assert_eq!(p.to_matrix(), rows);
    }

    #[test]
    fn shape_errors() {
        let sa = StateAction::terminal(DiscreteDistribution::point(0.0));
        assert!(LayeredMdp::from_parts(1, 1, 1, 1, vec![sa.clone()], None).is_err());
        assert!(LayeredMdp::from_parts(1, 1, 2, 0, vec![sa.clone()], None).is_err());
        // final stage may not have transitions
        let bad = StateAction::deterministic(DiscreteDistribution::point(0.0), 1, 0);
        assert!(LayeredMdp::from_parts(1, 1, 1, 0, vec![bad], None).is_err());
        assert!(LayeredMdp::from_parts(1, 1, 1, 0, vec![sa], None).is_ok());
    }

    #[test]
    fn coupled_marginal() {
        let reward = DiscreteDistribution::new(vec![0.0, 1.0], vec![0.25, 0.75]).unwrap();
        let sa = StateAction {
            reward,
            next: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        };
        let term = StateAction::terminal(DiscreteDistribution::point(0.0));
        let mdp = LayeredMdp::from_parts(
            2,
            2,
            1,
            1,
            vec![sa.clone(), sa, term.clone(), term],
            None,
        )
        .unwrap();
        assert_eq!(mdp.kernel_row(0, 1, 0), &[0.75, 0.25]);
        assert_eq!(mdp.mean_reward(0, 1, 0), 0.75);
    }

    #[test]
    fn maximal_action_respects_order() {
        assert_eq!(maximal_in_order(&[2, 0, 1], &[0, 2]), Some(0));
        assert_eq!(maximal_in_order(&[2, 0, 1], &[2]), Some(2));
        assert_eq!(maximal_in_order(&[2, 0, 1], &[]), None);
    }
}
