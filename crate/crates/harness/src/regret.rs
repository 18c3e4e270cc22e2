//! Expected regret of a played policy sequence, from the exact DP oracle.

use bandit_mdp::learners::LearnerRun;
use bandit_mdp::mdp::policy_value;
use bandit_mdp::LayeredMdp;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub episode: u64,
    /// `Opt - V(π_t)`.
    pub instant_regret: f64,
    /// Sum of instantaneous regret over episodes `1..=episode`.
    pub cum_regret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub algorithm: String,
    pub seed: u64,
    /// Learner wall-clock time, regret accounting excluded.
    pub wall_s: f64,
    pub total_episodes: u64,
    pub points: Vec<TracePoint>,
}

/// `V(π)` for each distinct policy of `run`, aligned with `run.policies()`.
pub fn policy_values(mdp: &LayeredMdp, run: &LearnerRun) -> Vec<f64> {
    run.policies().iter().map(|p| policy_value(mdp, p)).collect()
}

impl RegretTrace {
    /// Records episodes that are multiples of `stride`, plus the last one.
    /// Regrets are multiplied by `scale`.
    ///
    /// Cumulative regret at episode `t` is the exact sum over whole earlier
    /// segments plus `(t - start + 1) · gap` inside the current one, so the
    /// recorded values do not depend on `stride`.
    pub fn from_run(
        mdp: &LayeredMdp,
        run: &LearnerRun,
        opt: f64,
        stride: u64,
        scale: f64,
        algorithm: &str,
        seed: u64,
        wall_s: f64,
    ) -> Self {
        let stride = stride.max(1);
        let values = policy_values(mdp, run);
        let total = run.total_episodes();
        let mut points = Vec::with_capacity((total / stride) as usize + 1);
        let mut prefix = 0.0;
        for seg in run.segments() {
            let gap = (opt - values[seg.policy]) * scale;
            let end = seg.start + seg.len - 1;
            let mut t = seg.start.div_ceil(stride) * stride;
            while t <= end {
                points.push(TracePoint {
                    episode: t,
                    instant_regret: gap,
                    cum_regret: prefix + (t - seg.start + 1) as f64 * gap,
                });
                t += stride;
            }
            if end == total && end % stride != 0 {
                points.push(TracePoint {
                    episode: end,
                    instant_regret: gap,
                    cum_regret: prefix + seg.len as f64 * gap,
                });
            }
            prefix += seg.len as f64 * gap;
        }
        RegretTrace {
            algorithm: algorithm.to_string(),
            seed,
            wall_s,
            total_episodes: total,
            points,
        }
    }

    pub fn final_regret(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.cum_regret)
    }

    /// Cumulative regret at the last recorded episode `<= t`.
    pub fn regret_at(&self, t: u64) -> Option<f64> {
        let pos = self.points.partition_point(|p| p.episode <= t);
        pos.checked_sub(1).map(|i| self.points[i].cum_regret)
    }

    pub fn wall_per_episode(&self) -> f64 {
        self.wall_s / self.total_episodes.max(1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bandit_mdp::instances::{compile_prophet, prophet_uniform};
    use bandit_mdp::mdp::optimal_policy;
    use bandit_mdp::Policy;

    #[test]
    fn stride_invariant_and_exact() {
        let mdp = compile_prophet(&prophet_uniform(3, 1, 3).unwrap()).unwrap();
        let (opt_p, opt) = optimal_policy(&mdp);
        let other = Policy::constant(3, 2, 0);
        let mut run = LearnerRun::new();
        run.record(&other, 7);
        run.record(&opt_p, 5);
        run.record(&other, 11);
        let fine = RegretTrace::from_run(&mdp, &run, opt, 1, 1.0, "x", 0, 0.0);
        let coarse = RegretTrace::from_run(&mdp, &run, opt, 4, 1.0, "x", 0, 0.0);
        assert_eq!(fine.points.len(), 23);
        assert_eq!(coarse.points.last().unwrap().episode, 23);
        for p in &coarse.points {
            assert_eq!(fine.points[p.episode as usize - 1], *p);
        }
        let gap = opt - policy_value(&mdp, &other);
        assert!((fine.final_regret() - 18.0 * gap).abs() < 1e-12);
        assert_eq!(fine.points[8].instant_regret, 0.0);
    }
}
