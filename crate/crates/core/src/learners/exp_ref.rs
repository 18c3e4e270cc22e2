//! Explore-then-refine phases and the doubling schedule.

use rand::Rng;

use crate::error::LearnerError;
use crate::mdp::Policy;

use super::explore::{sample_exploration_general, sample_exploration_ordered, Exploration};
use super::{ActionSetTable, Environment, LearnerRun, ThresholdTable, Variant};

/// What to do when a phase does not fit in the remaining budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetMode {
    /// Refuse to start the phase.
    Strict,
    /// Play as many scheduled episodes as fit, then stop.
    Truncate,
}

/// `⌈12 ln T / ε²⌉`.
pub fn episodes_per_action(total_episodes: u64, epsilon: f64) -> u64 {
    (12.0 * (total_episodes as f64).ln() / (epsilon * epsilon)).ceil() as u64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub action: usize,
    pub sum: f64,
    pub count: u64,
}

impl Estimate {
    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }
}

#[derive(Debug, Clone)]
pub struct PhaseReport {
    pub epsilon: f64,
    pub episodes_per_action: u64,
    pub exploration: Exploration,
    /// Refined sets `N_{l,i}`; states the phase never finished keep their input set.
    pub refined: ActionSetTable,
    /// Empirical best policy `α̂`.
    pub best: Policy,
    /// Episodes actually played.
    pub episodes: u64,
    pub truncated: bool,
    width: usize,
    estimates: Vec<Vec<Estimate>>,
}

impl PhaseReport {
    /// Finished estimates at `(level, stage)`, one per active action.
    pub fn estimates(&self, level: usize, stage: usize) -> &[Estimate] {
        &self.estimates[stage * self.width + level]
    }

    /// `Φ̂_{l,i}(a)` if the block for `a` completed.
    pub fn phi_hat(&self, level: usize, stage: usize, action: usize) -> Option<f64> {
        self.estimates(level, stage)
            .iter()
            .find(|e| e.action == action)
            .map(Estimate::mean)
    }

    pub fn completed(&self, level: usize, stage: usize) -> bool {
        !self.estimates(level, stage).is_empty()
    }
}

/// Inputs for one explore-then-refine phase.
#[derive(Debug, Clone, Copy)]
pub struct PhaseParams<'a> {
    pub active: &'a ActionSetTable,
    pub epsilon: f64,
    /// `T`, which sets the per-action episode count.
    pub total_episodes: u64,
    pub thresholds: &'a ThresholdTable,
    /// Episodes the caller can still spend.
    pub budget: u64,
    pub budget_mode: BudgetMode,
    /// `α̂` carried over from the previous phase, used at states this phase does not finish.
    pub prior_best: Option<&'a Policy>,
}

/// One phase of ExpRef (general thresholds) or OrderedExpRef (ordered thresholds).
///
/// Learning runs backward over stages and, within a stage, from the top level
/// down. Every active action at a state gets a block of
/// [`episodes_per_action`] episodes of the composite policy: exploration
/// actions before the stage, `a` at the state, exploration actions at the
/// other states of the stage and this phase's `α̂` afterwards. Only aggregate
/// rewards are read.
pub fn exp_ref<E: Environment, R: Rng + ?Sized>(
    env: &mut E,
    params: PhaseParams<'_>,
    rng: &mut R,
    run: &mut LearnerRun,
) -> Result<PhaseReport, LearnerError> {
    let PhaseParams {
        active,
        epsilon,
        total_episodes,
        thresholds,
        budget,
        budget_mode,
        prior_best,
    } = params;
    let (h, w, n) = (env.horizon(), env.width(), env.num_actions());
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(LearnerError::InvalidParameter(format!("epsilon {epsilon} outside (0, 1]")));
    }
    if total_episodes < 2 {
        return Err(LearnerError::InvalidParameter("T must be at least 2".into()));
    }
    if active.horizon() != h || active.width() != w || thresholds.horizon() != h || thresholds.width() != w {
        return Err(LearnerError::InvalidParameter(
            "action sets or thresholds do not match the environment's shape".into(),
        ));
    }
    if !active.all_nonempty() {
        return Err(LearnerError::InvalidParameter("every active set must be non-empty".into()));
    }
    let n_ep = episodes_per_action(total_episodes, epsilon);
    let needed = n_ep * active.total_size();
    if budget_mode == BudgetMode::Strict && needed > budget {
        return Err(LearnerError::BudgetExceeded { needed, remaining: budget });
    }

    let exploration = match thresholds.variant {
        Variant::General => sample_exploration_general(active, n, rng),
        Variant::Ordered => {
            let ordering = env.ordering().ok_or(LearnerError::MissingOrdering)?;
            sample_exploration_ordered(active, ordering, n, rng)
        }
    };

    let mut alpha: Vec<Option<usize>> = vec![None; h * w];
    let mut estimates: Vec<Vec<Estimate>> = vec![Vec::new(); h * w];
    let mut refined = active.clone();
    let mut policy = exploration.actions.clone();
    let mut remaining = budget;
    let mut played = 0u64;
    let mut truncated = false;

    'stages: for stage in (0..h).rev() {
        debug_assert!(
            (stage + 1..h).all(|s| (0..w).all(|l| alpha[s * w + l].is_some())),
            "tail stages must carry this phase's empirical best actions"
        );
        for level in (0..w).rev() {
            let mut block: Vec<Estimate> = Vec::with_capacity(active.get(level, stage).len());
            for &a in active.get(level, stage) {
                policy.set(level, stage, a);
                let count = n_ep.min(remaining);
                let mut sum = 0.0;
                for _ in 0..count {
                    sum += env.run_episode(&policy).aggregate_reward;
                }
                run.record(&policy, count);
                remaining -= count;
                played += count;
                if count < n_ep {
                    truncated = true;
                    break 'stages;
                }
                block.push(Estimate { action: a, sum, count });
            }
            policy.set(level, stage, exploration.actions.action(level, stage));

            let mut best = block[0];
            for e in &block[1..] {
                if e.mean() > best.mean() {
                    best = *e;
                }
            }
            let cut = best.mean() - thresholds.get(level, stage) * epsilon;
            let keep: Vec<usize> = block.iter().filter(|e| e.mean() >= cut).map(|e| e.action).collect();
            refined.set(level, stage, keep)?;
            alpha[stage * w + level] = Some(best.action);
            estimates[stage * w + level] = block;
        }
        for level in 0..w {
            policy.set(level, stage, alpha[stage * w + level].expect("stage finished"));
        }
    }

    let mut best = Policy::constant(h, w, 0);
    for stage in 0..h {
        for level in 0..w {
            let a = alpha[stage * w + level]
                .or_else(|| prior_best.map(|p| p.action(level, stage)))
                .unwrap_or(active.get(level, stage)[0]);
            best.set(level, stage, a);
        }
    }
    Ok(PhaseReport {
        epsilon,
        episodes_per_action: n_ep,
        exploration,
        refined,
        best,
        episodes: played,
        truncated,
        width: w,
        estimates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduledPhase {
    pub epsilon: f64,
    pub episodes_per_action: u64,
}

/// Phases the doubling loop schedules: `ε = 1, 1/2, ...` while
/// `ε > √(H k A ln T / T)`.
pub fn phase_schedule(horizon: usize, width: usize, num_actions: usize, total_episodes: u64) -> Vec<ScheduledPhase> {
    let t = total_episodes as f64;
    let floor = ((horizon * width * num_actions) as f64 * t.ln() / t).sqrt();
    let mut out = Vec::new();
    let mut eps = 1.0;
    while eps > floor {
        out.push(ScheduledPhase {
            epsilon: eps,
            episodes_per_action: episodes_per_action(total_episodes, eps),
        });
        eps /= 2.0;
    }
    out
}

#[derive(Debug, Clone)]
pub struct DoublingOutcome {
    pub run: LearnerRun,
    pub phases: Vec<PhaseReport>,
    /// Policy exploited after the last phase.
    pub final_policy: Policy,
}

/// Runs phases on the [`phase_schedule`], feeding each phase's refined sets to
/// the next, and plays the last `α̂` for whatever budget is left. A phase that
/// would overrun `T` is truncated; exactly `T` episodes are played.
pub fn doubling<E: Environment, R: Rng + ?Sized>(
    env: &mut E,
    total_episodes: u64,
    variant: Variant,
    rng: &mut R,
) -> Result<DoublingOutcome, LearnerError> {
    if total_episodes < 2 {
        return Err(LearnerError::InvalidParameter("T must be at least 2".into()));
    }
    let (h, w, n) = (env.horizon(), env.width(), env.num_actions());
    if variant == Variant::Ordered && env.ordering().is_none() {
        return Err(LearnerError::MissingOrdering);
    }
    let thresholds = ThresholdTable::for_variant(variant, h, w, n)?;
    let mut active = ActionSetTable::full(h, w, n);
    let mut best = Policy::constant(h, w, 0);
    let mut run = LearnerRun::new();
    let mut phases = Vec::new();
    let mut remaining = total_episodes;
    for scheduled in phase_schedule(h, w, n, total_episodes) {
        if remaining == 0 {
            break;
        }
        let report = exp_ref(
            env,
            PhaseParams {
                active: &active,
                epsilon: scheduled.epsilon,
                total_episodes,
                thresholds: &thresholds,
                budget: remaining,
                budget_mode: BudgetMode::Truncate,
                prior_best: Some(&best),
            },
            rng,
            &mut run,
        )?;
        remaining -= report.episodes;
        best = report.best.clone();
        active = report.refined.clone();
        let stop = report.truncated;
        phases.push(report);
        if stop {
            break;
        }
    }
    for _ in 0..remaining {
        env.run_episode(&best);
    }
    run.record(&best, remaining);
    Ok(DoublingOutcome {
        run,
        phases,
        final_policy: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::random_generic;
    use crate::learners::{learner_rng, thresholds_general, SimulatedEnv};
    use crate::mdp::FeedbackMode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn count_formula() {
        assert_eq!(episodes_per_action(100, 1.0), 56);
        assert_eq!(episodes_per_action(100, 0.5), 222);
    }

    #[test]
    fn single_action_phase() {
        let mdp = random_generic(3, 2, 1, &mut ChaCha8Rng::seed_from_u64(2), false).unwrap();
        let mut env = SimulatedEnv::new(&mdp, FeedbackMode::Bandit, 1);
        let active = ActionSetTable::full(3, 2, 1);
        let th = thresholds_general(3, 2, 1).unwrap();
        let mut run = LearnerRun::new();
        let r = exp_ref(
            &mut env,
            PhaseParams {
                active: &active,
                epsilon: 1.0,
                total_episodes: 100,
                thresholds: &th,
                budget: u64::MAX,
                budget_mode: BudgetMode::Strict,
                prior_best: None,
            },
            &mut learner_rng(1),
            &mut run,
        )
        .unwrap();
        assert_eq!(r.refined, active);
        assert_eq!(r.episodes, 6 * 56);
        assert_eq!(run.total_episodes(), 6 * 56);
        assert_eq!(r.best, Policy::constant(3, 2, 0));
    }

    #[test]
    fn strict_budget_refuses() {
        let mdp = random_generic(2, 1, 2, &mut ChaCha8Rng::seed_from_u64(2), false).unwrap();
        let mut env = SimulatedEnv::new(&mdp, FeedbackMode::Bandit, 1);
        let active = ActionSetTable::full(2, 1, 2);
        let th = thresholds_general(2, 1, 2).unwrap();
        let err = exp_ref(
            &mut env,
            PhaseParams {
                active: &active,
                epsilon: 1.0,
                total_episodes: 100,
                thresholds: &th,
                budget: 10,
                budget_mode: BudgetMode::Strict,
                prior_best: None,
            },
            &mut learner_rng(1),
            &mut LearnerRun::new(),
        );
        assert!(matches!(err, Err(LearnerError::BudgetExceeded { needed: 224, remaining: 10 })));
    }

    #[test]
    fn doubling_plays_exactly_t() {
        let mdp = random_generic(2, 2, 2, &mut ChaCha8Rng::seed_from_u64(5), false).unwrap();
        for t in [2u64, 50, 500, 5_000] {
            let mut env = SimulatedEnv::new(&mdp, FeedbackMode::Bandit, 3);
            let out = doubling(&mut env, t, Variant::General, &mut learner_rng(3)).unwrap();
            assert_eq!(out.run.total_episodes(), t);
        }
    }
}
