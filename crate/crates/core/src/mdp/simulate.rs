use rand::Rng;

use super::{EpisodeOutcome, FeedbackMode, LayeredMdp, Policy};

/// Runs one episode from the start state.
///
/// Random-number consumption is fixed: at every stage one `f64` uniform picks
/// the reward support point, then (except at the final stage) one more uniform
/// picks the next level from the transition row attached to that reward point.
pub fn simulate_episode<R: Rng + ?Sized>(
    mdp: &LayeredMdp,
    policy: &Policy,
    mode: FeedbackMode,
    rng: &mut R,
) -> EpisodeOutcome {
    simulate_from(mdp, policy, mdp.start_level(), 0, mode, rng)
}

/// Runs the remainder of an episode forced to start at `(level, stage)`.
pub fn simulate_from<R: Rng + ?Sized>(
    mdp: &LayeredMdp,
    policy: &Policy,
    level: usize,
    stage: usize,
    mode: FeedbackMode,
    rng: &mut R,
) -> EpisodeOutcome {
    let horizon = mdp.horizon();
    let steps = horizon.saturating_sub(stage);
    let mut trajectory = (mode >= FeedbackMode::Trajectory).then(|| Vec::with_capacity(steps));
    let mut step_rewards = (mode == FeedbackMode::SemiBandit).then(|| Vec::with_capacity(steps));

    let mut total = 0.0;
    let mut l = level;
    for i in stage..horizon {
        let a = policy.action(l, i);
        let (j, r) = mdp.reward_draw(i, l, a, rng.gen::<f64>());
        total += r;
        if let Some(t) = trajectory.as_mut() {
            t.push((l, i));
        }
        if let Some(s) = step_rewards.as_mut() {
            s.push(r);
        }
        if i + 1 < horizon {
            let u = rng.gen::<f64>();
            let row = mdp.cumulative_row(i, l, a, j);
            // branch-free inverse CDF: first entry with u < cum, else the last
            let n = row.iter().filter(|(_, cum)| u >= *cum).count();
            l = row[n.min(row.len() - 1)].0;
        }
    }

    EpisodeOutcome {
        aggregate_reward: total,
        trajectory,
        step_rewards,
    }
}
