use std::fmt;

use crate::dist::PROB_TOL;

use super::LayeredMdp;

/// Slack allowed on the episode-total reward bound.
pub const TOTAL_REWARD_TOL: f64 = 1e-12;

/// One violated model invariant, with zero-based coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// A transition row does not sum to one. `row` is the reward support index
    /// for reward-conditioned rows.
    KernelRowSum {
        stage: usize,
        level: usize,
        action: usize,
        row: Option<usize>,
        sum: f64,
    },
    KernelEntry {
        stage: usize,
        level: usize,
        action: usize,
        next: usize,
        value: f64,
    },
    /// Some realizable trajectory collects more than one unit of reward.
    TotalReward { max_total: f64 },
    /// Ordered instance moves up a level.
    UpwardTransition {
        stage: usize,
        level: usize,
        action: usize,
        next: usize,
        prob: f64,
    },
    /// Ordered instance whose declared action order does not rank stay probabilities.
    StayOrder {
        stage: usize,
        level: usize,
        lower: usize,
        upper: usize,
        lower_stay: f64,
        upper_stay: f64,
    },
    /// Declared ordering is not a permutation of the actions.
    Ordering { stage: usize, level: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::KernelRowSum {
                stage,
                level,
                action,
                row,
                sum,
            } => {
                write!(
                    f,
                    "kernel row (stage {stage}, level {level}, action {action}) sums to {sum}"
                )?;
                if let Some(j) = row {
                    write!(f, " given reward point {j}")?;
                }
                Ok(())
            }
            Violation::KernelEntry {
                stage,
                level,
                action,
                next,
                value,
            } => write!(
                f,
                "kernel entry p(next {next} | stage {stage}, level {level}, action {action}) = {value} outside [0, 1]"
            ),
            Violation::TotalReward { max_total } => {
                write!(f, "a realizable trajectory collects total reward {max_total} > 1")
            }
            Violation::UpwardTransition {
                stage,
                level,
                action,
                next,
                prob,
            } => write!(
                f,
                "ordered instance moves up: p(next {next} | stage {stage}, level {level}, action {action}) = {prob}"
            ),
            Violation::StayOrder {
                stage,
                level,
                lower,
                upper,
                lower_stay,
                upper_stay,
            } => write!(
                f,
                "stay probability at (stage {stage}, level {level}) decreases along the order: \
                 action {lower} stays w.p. {lower_stay} but higher-ranked action {upper} stays w.p. {upper_stay}"
            ),
            Violation::Ordering { stage, level } => write!(
                f,
                "ordering at (stage {stage}, level {level}) is not a permutation of the actions"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "pass");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks kernel stochasticity, the unit total-reward bound and, when the
/// instance declares an ordering, downward-only transitions and stay-probability
/// monotonicity along the ordering.
pub fn validate(mdp: &LayeredMdp) -> ValidationReport {
    let mut violations = Vec::new();
    let (h, w, n) = (mdp.horizon, mdp.width, mdp.num_actions);

    for stage in 0..h.saturating_sub(1) {
        for level in 0..w {
            for action in 0..n {
                let sa = mdp.state_action(stage, level, action);
                let coupled = sa.is_coupled();
                for (j, row) in sa.next.iter().enumerate() {
                    for (next, p) in row.iter().enumerate() {
                        if !(0.0..=1.0).contains(p) {
                            violations.push(Violation::KernelEntry {
                                stage,
                                level,
                                action,
                                next,
                                value: *p,
                            });
                        }
                    }
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > PROB_TOL {
                        violations.push(Violation::KernelRowSum {
                            stage,
                            level,
                            action,
                            row: coupled.then_some(j),
                            sum,
                        });
                    }
                }
            }
        }
    }

    let max_total = max_realizable_total(mdp);
    if max_total > 1.0 + TOTAL_REWARD_TOL {
        violations.push(Violation::TotalReward { max_total });
    }

    if let Some(ordering) = mdp.ordering() {
        for stage in 0..h {
            for level in 0..w {
                let order = &ordering[stage * w + level];
                let mut seen = vec![false; n];
                let is_perm = order.len() == n
                    && order.iter().all(|&a| a < n && !std::mem::replace(&mut seen[a], true));
                if !is_perm {
                    violations.push(Violation::Ordering { stage, level });
                    continue;
                }
                if stage + 1 == h {
                    continue;
                }
                for action in 0..n {
                    for (next, p) in mdp.kernel_row(stage, level, action).iter().enumerate() {
                        if next > level && *p > 0.0 {
                            violations.push(Violation::UpwardTransition {
                                stage,
                                level,
                                action,
                                next,
                                prob: *p,
                            });
                        }
                    }
                }
                for pair in order.windows(2) {
                    let (lower, upper) = (pair[0], pair[1]);
                    let lower_stay = mdp.transition_prob(stage, level, lower, level);
                    let upper_stay = mdp.transition_prob(stage, level, upper, level);
                    if lower_stay > upper_stay + PROB_TOL {
                        violations.push(Violation::StayOrder {
                            stage,
                            level,
                            lower,
                            upper,
                            lower_stay,
                            upper_stay,
                        });
                    }
                }
            }
        }
    }

    ValidationReport { violations }
}

/// Largest total reward any deterministic policy can realize on any
/// positive-probability trajectory from the start state. Reward-conditioned
/// transitions are followed jointly with the reward point that triggers them.
pub fn max_realizable_total(mdp: &LayeredMdp) -> f64 {
    let (h, w, n) = (mdp.horizon, mdp.width, mdp.num_actions);
    let mut best_next = vec![0.0_f64; w];
    for stage in (0..h).rev() {
        let mut best = vec![0.0_f64; w];
        for (level, slot) in best.iter_mut().enumerate() {
            let mut state_best = 0.0_f64;
            for action in 0..n {
                let sa = mdp.state_action(stage, level, action);
                let support = sa.reward.support();
                for (j, p) in sa.reward.probs().iter().enumerate() {
                    if *p <= 0.0 {
                        continue;
                    }
                    let future = if stage + 1 == h {
                        0.0
                    } else {
                        sa.row_for(j)
                            .iter()
                            .enumerate()
                            .filter(|(_, q)| **q > 0.0)
                            .map(|(s, _)| best_next[s])
                            .fold(0.0, f64::max)
                    };
                    state_best = state_best.max(support[j] + future);
                }
            }
            *slot = state_best;
        }
        best_next = best;
    }
    best_next[mdp.start_level]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDistribution;
    use crate::mdp::StateAction;

    fn two_stage(row: Vec<f64>, reward: f64, ordering: Option<Vec<Vec<usize>>>) -> LayeredMdp {
        // width 3, one action, start at level 1
        let r = DiscreteDistribution::point(reward);
        let mut sas = Vec::new();
        for _ in 0..3 {
            sas.push(StateAction {
                reward: r.clone(),
                next: vec![row.clone()],
            });
        }
        for _ in 0..3 {
            sas.push(StateAction::terminal(r.clone()));
        }
        LayeredMdp::from_parts(2, 3, 1, 1, sas, ordering).unwrap()
    }

    #[test]
    fn short_row_is_named() {
        let mdp = two_stage(vec![0.5, 0.48, 0.0], 0.1, None);
        let report = validate(&mdp);
        assert!(!report.is_ok());
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::KernelRowSum { stage: 0, level: 0, action: 0, row: None, sum } if (sum - 0.98).abs() < 1e-12
        )));
        assert!(report.to_string().contains("sums to 0.98"));
    }

    #[test]
    fn upward_move_flagged_when_ordered() {
        let ord = Some(vec![vec![0]; 6]);
        let mdp = two_stage(vec![0.4, 0.5, 0.1], 0.1, ord);
        let report = validate(&mdp);
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::UpwardTransition { level: 1, next: 2, .. }
        )));
        // level 0 also moves up to 1 and 2
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::UpwardTransition { level: 0, next: 1, .. }
        )));
        let plain = two_stage(vec![0.4, 0.5, 0.1], 0.1, None);
        assert!(validate(&plain).is_ok());
    }

    #[test]
    fn total_reward_bound() {
        let ok = two_stage(vec![0.0, 1.0, 0.0], 0.5, None);
        assert!(validate(&ok).is_ok());
        let bad = two_stage(vec![0.0, 1.0, 0.0], 0.6, None);
        assert!(matches!(
            validate(&bad).violations.as_slice(),
            [Violation::TotalReward { .. }]
        ));
    }

    #[test]
    fn coupled_rows_limit_the_bound() {
        // Reward 0.8 only ever comes with a move to the absorbing zero level.
        let reward = DiscreteDistribution::new(vec![0.0, 0.8], vec![0.5, 0.5]).unwrap();
        let sa = StateAction {
            reward: reward.clone(),
            next: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        };
        let zero = StateAction::deterministic(DiscreteDistribution::point(0.0), 2, 0);
        let t_zero = StateAction::terminal(DiscreteDistribution::point(0.0));
        let t_pay = StateAction::terminal(reward);
        let mdp = LayeredMdp::from_parts(
            2,
            2,
            1,
            1,
            vec![zero, sa.clone(), t_zero, t_pay.clone()],
            None,
        )
        .unwrap();
        assert!((max_realizable_total(&mdp) - 0.8).abs() < 1e-15);
        assert!(validate(&mdp).is_ok());
    }

    #[test]
    fn stay_order_checked() {
        let r = DiscreteDistribution::point(0.0);
        let mk = |stay: f64| StateAction {
            reward: r.clone(),
            next: vec![vec![1.0 - stay, stay]],
        };
        let t = StateAction::terminal(r.clone());
        let sas = vec![mk(1.0), mk(1.0), mk(0.2), mk(0.7), t.clone(), t.clone(), t.clone(), t];
        let good = LayeredMdp::from_parts(2, 2, 2, 1, sas.clone(), Some(vec![vec![0, 1]; 4]));
        // level 0 moves "up" to level 1 which is illegal, so use a check on level 1 only
        let report = validate(&good.unwrap());
        assert!(!report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::StayOrder { level: 1, .. })));
        let bad = LayeredMdp::from_parts(2, 2, 2, 1, sas, Some(vec![vec![1, 0]; 4])).unwrap();
        assert!(validate(&bad)
            .violations
            .iter()
            .any(|v| matches!(v, Violation::StayOrder { level: 1, lower: 1, upper: 0, .. })));
    }

    #[test]
    fn non_permutation_ordering() {
        let mdp = two_stage(vec![0.0, 1.0, 0.0], 0.1, Some(vec![vec![0, 0]; 6]));
        assert!(validate(&mdp)
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Ordering { .. })));
    }
}
