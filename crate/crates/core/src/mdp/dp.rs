//! Exact dynamic-programming oracles.
//!
//! Tables are indexed `[stage][level]`.

use super::{LayeredMdp, Policy, RandomizedStageProfile};

#[inline]
fn q_value(mdp: &LayeredMdp, stage: usize, level: usize, action: usize, next_values: Option<&[f64]>) -> f64 {
    let mut q = mdp.mean_reward(stage, level, action);
    if let Some(v) = next_values {
        for (s, p) in mdp.kernel_row(stage, level, action).iter().enumerate() {
            if *p != 0.0 {
                q += p * v[s];
            }
        }
    }
    q
}

/// `V_{l,i}` of `policy` for every state, by backward induction over stages
/// `from_stage..horizon`. Rows before `from_stage` are left at zero.
fn tail_values(mdp: &LayeredMdp, policy: &Policy, from_stage: usize) -> Vec<Vec<f64>> {
    let (h, w) = (mdp.horizon(), mdp.width());
    let mut values = vec![vec![0.0; w]; h];
    for stage in (from_stage..h).rev() {
        let (head, tail) = values.split_at_mut(stage + 1);
        let next = tail.first().map(Vec::as_slice);
        for level in 0..w {
            head[stage][level] = q_value(mdp, stage, level, policy.action(level, stage), next);
        }
    }
    values
}

/// `V_{l,i}(policy)` for every state.
pub fn state_values(mdp: &LayeredMdp, policy: &Policy) -> Vec<Vec<f64>> {
    tail_values(mdp, policy, 0)
}

/// Expected total reward from `(level, stage)` onward under the tail of
/// `tail_policy`; entries of `tail_policy` before `stage` are ignored.
pub fn conditional_value(mdp: &LayeredMdp, tail_policy: &Policy, level: usize, stage: usize) -> f64 {
    tail_values(mdp, tail_policy, stage)[stage][level]
}

/// Expected total reward `V(π)` from the start state.
pub fn policy_value(mdp: &LayeredMdp, policy: &Policy) -> f64 {
    conditional_value(mdp, policy, mdp.start_level(), 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalSolution {
    pub policy: Policy,
    pub value: f64,
    /// `Opt_{l,i}` for every state.
    pub values: Vec<Vec<f64>>,
}

/// Backward induction with lowest-index tie-breaking.
pub fn optimal_values(mdp: &LayeredMdp) -> OptimalSolution {
    let (h, w, n) = (mdp.horizon(), mdp.width(), mdp.num_actions());
    let mut values = vec![vec![0.0; w]; h];
    let mut policy = Policy::constant(h, w, 0);
    for stage in (0..h).rev() {
        let (head, tail) = values.split_at_mut(stage + 1);
        let next = tail.first().map(Vec::as_slice);
        for level in 0..w {
            let mut best_a = 0;
            let mut best_q = q_value(mdp, stage, level, 0, next);
            for a in 1..n {
                let q = q_value(mdp, stage, level, a, next);
                if q > best_q {
                    best_q = q;
                    best_a = a;
                }
            }
            head[stage][level] = best_q;
            policy.set(level, stage, best_a);
        }
    }
    let value = values[0][mdp.start_level()];
    OptimalSolution {
        policy,
        value,
        values,
    }
}

/// Optimal deterministic policy and `Opt`.
pub fn optimal_policy(mdp: &LayeredMdp) -> (Policy, f64) {
    let sol = optimal_values(mdp);
    (sol.policy, sol.value)
}

/// Exact state-visitation probabilities `Q_{l,i}` of a randomized profile,
/// marginalizing over both action sampling and transitions.
pub fn visitation_probabilities(mdp: &LayeredMdp, profile: &RandomizedStageProfile) -> Vec<Vec<f64>> {
    let (h, w, n) = (mdp.horizon(), mdp.width(), mdp.num_actions());
    let mut q = vec![vec![0.0; w]; h];
    q[0][mdp.start_level()] = 1.0;
    for stage in 0..h.saturating_sub(1) {
        for level in 0..w {
            let mass = q[stage][level];
            if mass == 0.0 {
                continue;
            }
            let dist = profile.distribution(level, stage);
            for (a, pa) in dist.iter().enumerate().take(n) {
                if *pa == 0.0 {
                    continue;
                }
                for (s, p) in mdp.kernel_row(stage, level, a).iter().enumerate() {
                    q[stage + 1][s] += mass * pa * p;
                }
            }
        }
    }
    q
}

/// Expected total reward of a randomized profile.
pub fn profile_value(mdp: &LayeredMdp, profile: &RandomizedStageProfile) -> f64 {
    let (h, w) = (mdp.horizon(), mdp.width());
    let mut next: Option<Vec<f64>> = None;
    for stage in (0..h).rev() {
        let mut cur = vec![0.0; w];
        for (level, slot) in cur.iter_mut().enumerate() {
            *slot = profile
                .distribution(level, stage)
                .iter()
                .enumerate()
                .filter(|(_, p)| **p != 0.0)
                .map(|(a, p)| p * q_value(mdp, stage, level, a, next.as_deref()))
                .sum();
        }
        next = Some(cur);
    }
    next.map_or(0.0, |v| v[mdp.start_level()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDistribution;
    use crate::mdp::StateAction;

    /// Width 1, two stages, accept-or-skip on X uniform over {0, 1}.
    fn tiny() -> LayeredMdp {
        let r = DiscreteDistribution::bernoulli(0.5);
        let z = DiscreteDistribution::point(0.0);
        let sas = vec![
            StateAction::deterministic(r.clone(), 1, 0),
            StateAction::deterministic(z.clone(), 1, 0),
            StateAction::terminal(r),
            StateAction::terminal(z),
        ];
        LayeredMdp::from_parts(2, 1, 2, 0, sas, None).unwrap()
    }

    #[test]
    fn single_stage_optimum_is_best_mean() {
        let sas = vec![
            StateAction::terminal(DiscreteDistribution::point(0.2)),
            StateAction::terminal(DiscreteDistribution::point(0.7)),
            StateAction::terminal(DiscreteDistribution::point(0.7)),
        ];
        let mdp = LayeredMdp::from_parts(1, 1, 3, 0, sas, None).unwrap();
        let (p, v) = optimal_policy(&mdp);
        assert_eq!(p.action(0, 0), 1);
        assert_eq!(v, 0.7);
    }

    #[test]
    fn values_and_tail() {
        let mdp = tiny();
        let p = Policy::from_matrix(&[vec![0, 1]]).unwrap();
        assert_eq!(policy_value(&mdp, &p), 0.5);
        assert_eq!(conditional_value(&mdp, &p, 0, 1), 0.0);
        let q = Policy::constant(2, 1, 0);
        assert_eq!(conditional_value(&mdp, &q, 0, 1), 0.5);
        assert_eq!(policy_value(&mdp, &q), 1.0);
    }

    #[test]
    fn profile_and_visitation() {
        let mdp = tiny();
        let mut prof = RandomizedStageProfile::new(2, 1, 2);
        prof.set_distribution(0, 0, &[0.5, 0.5]).unwrap();
        prof.set_distribution(0, 1, &[0.25, 0.75]).unwrap();
        let q = visitation_probabilities(&mdp, &prof);
        assert_eq!(q, vec![vec![1.0], vec![1.0]]);
        assert!((profile_value(&mdp, &prof) - (0.25 + 0.125)).abs() < 1e-15);
    }
}
