//! Optimistic value iteration on the empirical model (semi-bandit baseline).

use crate::error::LearnerError;
use crate::mdp::{EpisodeOutcome, FeedbackMode, Policy};

use super::{Environment, LearnerRun};

/// Counts, empirical model and the greedy optimistic policy.
///
/// Each episode plans by backward induction with
/// `Q = r̂ + √(2 ln(HkAT/δ) / max(1, N)) + p̂·V'` and `V = min(1, max_a Q)`.
/// Unvisited pairs have `Q = +∞`. The greedy action is the argmax of the
/// unclipped `Q`, lowest index on ties.
#[derive(Debug, Clone)]
pub struct UcbVi {
    horizon: usize,
    width: usize,
    num_actions: usize,
    log_term: f64,
    counts: Vec<f64>,
    reward_sums: Vec<f64>,
    transitions: Vec<f64>,
    q: Vec<f64>,
    values: Vec<f64>,
    policy: Policy,
}

impl UcbVi {
    pub fn new(horizon: usize, width: usize, num_actions: usize, total_episodes: u64, delta: f64) -> Result<Self, LearnerError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(LearnerError::InvalidParameter(format!("delta {delta} outside (0, 1)")));
        }
        if horizon == 0 || width == 0 || num_actions == 0 || total_episodes == 0 {
            return Err(LearnerError::InvalidParameter("H, k, A and T must be positive".into()));
        }
        let pairs = horizon * width * num_actions;
        let log_term = 2.0 * ((pairs as f64 * total_episodes as f64) / delta).ln();
        let mut agent = Self {
            horizon,
            width,
            num_actions,
            log_term,
            counts: vec![0.0; pairs],
            reward_sums: vec![0.0; pairs],
            transitions: vec![0.0; pairs * width],
            q: vec![0.0; pairs],
            values: vec![0.0; horizon * width],
            policy: Policy::constant(horizon, width, 0),
        };
        agent.plan();
        Ok(agent)
    }

    #[inline]
    fn idx(&self, stage: usize, level: usize, action: usize) -> usize {
        (stage * self.width + level) * self.num_actions + action
    }

    pub fn bonus(&self, visits: f64) -> f64 {
        (self.log_term / visits.max(1.0)).sqrt()
    }

    /// Recomputes optimistic values and the greedy policy.
    pub fn plan(&mut self) -> &Policy {
        let (h, w, n) = (self.horizon, self.width, self.num_actions);
        for stage in (0..h).rev() {
            for level in 0..w {
                let mut best = 0;
                let mut best_q = f64::NEG_INFINITY;
                for a in 0..n {
                    let k = self.idx(stage, level, a);
                    let visits = self.counts[k];
                    let q = if visits == 0.0 {
                        f64::INFINITY
                    } else {
                        let mut q = self.reward_sums[k] / visits + self.bonus(visits);
                        if stage + 1 < h {
                            let row = &self.transitions[k * w..(k + 1) * w];
                            let next = &self.values[(stage + 1) * w..(stage + 2) * w];
                            q += row.iter().zip(next).map(|(c, v)| c * v).sum::<f64>() / visits;
                        }
                        q
                    };
                    self.q[k] = q;
                    if q > best_q {
                        best_q = q;
                        best = a;
                    }
                }
                self.policy.set(level, stage, best);
                self.values[stage * w + level] = best_q.min(1.0);
            }
        }
        &self.policy
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    /// Unclipped optimistic `Q` from the last plan.
    pub fn q_value(&self, level: usize, stage: usize, action: usize) -> f64 {
        self.q[self.idx(stage, level, action)]
    }

    /// Clipped optimistic `V` from the last plan.
    pub fn value(&self, level: usize, stage: usize) -> f64 {
        self.values[stage * self.width + level]
    }

    pub fn visits(&self, level: usize, stage: usize, action: usize) -> f64 {
        self.counts[self.idx(stage, level, action)]
    }

    /// Folds one semi-bandit observation of `policy` into the counts.
    pub fn observe(&mut self, policy: &Policy, outcome: &EpisodeOutcome) {
        let traj = outcome
            .trajectory
            .as_ref()
            .expect("semi-bandit outcomes carry the trajectory");
        let rewards = outcome
            .step_rewards
            .as_ref()
            .expect("semi-bandit outcomes carry step rewards");
        for (stage, &(level, _)) in traj.iter().enumerate() {
            let k = self.idx(stage, level, policy.action(level, stage));
            self.counts[k] += 1.0;
            self.reward_sums[k] += rewards[stage];
            if let Some(&(next, _)) = traj.get(stage + 1) {
                self.transitions[k * self.width + next] += 1.0;
            }
        }
    }
}

/// Runs UCB-VI for `total_episodes` episodes. Needs semi-bandit feedback.
pub fn ucb_vi<E: Environment>(env: &mut E, total_episodes: u64, delta: f64) -> Result<LearnerRun, LearnerError> {
    if env.feedback_mode() != FeedbackMode::SemiBandit {
        return Err(LearnerError::FeedbackMismatch {
            required: FeedbackMode::SemiBandit,
            available: env.feedback_mode(),
        });
    }
    let mut agent = UcbVi::new(env.horizon(), env.width(), env.num_actions(), total_episodes, delta)?;
    let mut run = LearnerRun::new();
    for _ in 0..total_episodes {
        let policy = agent.policy().clone();
        let outcome = env.run_episode(&policy);
        run.record(&policy, 1);
        agent.observe(&policy, &outcome);
        agent.plan();
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::SimulatedEnv;
    use crate::mdp::{LayeredMdp, StateAction};
    use crate::DiscreteDistribution;

    fn chain() -> LayeredMdp {
        let sa = |r: f64| StateAction::deterministic(DiscreteDistribution::point(r), 1, 0);
        LayeredMdp::from_parts(
            2,
            1,
            1,
            0,
            vec![sa(0.25), StateAction::terminal(DiscreteDistribution::point(0.5))],
            None,
        )
        .unwrap()
    }

    #[test]
    fn unvisited_values_clip_to_one() {
        let agent = UcbVi::new(3, 2, 2, 100, 0.1).unwrap();
        assert_eq!(agent.value(0, 0), 1.0);
        assert_eq!(agent.q_value(1, 2, 1), f64::INFINITY);
    }

    #[test]
    fn rejects_bandit_env() {
        let mdp = chain();
        let mut env = SimulatedEnv::new(&mdp, FeedbackMode::Bandit, 0);
        assert!(matches!(ucb_vi(&mut env, 5, 0.1), Err(LearnerError::FeedbackMismatch { .. })));
    }

    #[test]
    fn model_exact_after_one_episode() {
        let mdp = chain();
        let mut env = SimulatedEnv::new(&mdp, FeedbackMode::SemiBandit, 0);
        let mut agent = UcbVi::new(2, 1, 1, 10, 0.1).unwrap();
        let p = agent.policy().clone();
        let out = env.run_episode(&p);
        agent.observe(&p, &out);
        agent.plan();
        let b = agent.bonus(1.0);
        assert!((agent.q_value(0, 1, 0) - (0.5 + b)).abs() < 1e-12);
        assert_eq!(agent.visits(0, 0, 0), 1.0);
    }
}
