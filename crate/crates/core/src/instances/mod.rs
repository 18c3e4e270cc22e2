//! Instance generators: stochastic-selection reductions, lower-bound
//! families and random fixtures.

mod hard;
mod knapsack;
mod prophet;
mod random;

pub use hard::{
    all_ordered_specs, hard_instance_general, hard_instance_ordered, lower_bound_epsilon,
    HardInstanceGeneralSpec, HardInstanceOrderedSpec,
};
pub use knapsack::{compile_knapsack, KnapsackItem, KnapsackOutcome, KnapsackSpec};
pub use prophet::{
    compile_posted_pricing, compile_prophet, prophet_random, prophet_uniform, ProphetSpec,
};
pub use random::random_generic;

use crate::dist::DiscreteDistribution;
use crate::error::InstanceError;
use crate::mdp::StateAction;

/// Builds a state-action model from joint `(reward, next level, probability)`
/// outcomes. The reward marginal groups equal rewards; if every reward point
/// leads to the same next-level law the transition is stored as independent.
pub(crate) fn joint_state_action(
    outcomes: &[(f64, usize, f64)],
    width: usize,
    terminal: bool,
) -> Result<StateAction, InstanceError> {
    let positive: Vec<_> = outcomes.iter().copied().filter(|o| o.2 > 0.0).collect();
    let reward = DiscreteDistribution::from_pairs(positive.iter().map(|o| (o.0, o.2)).collect())?;
    if terminal {
        return Ok(StateAction::terminal(reward));
    }
    let rows: Vec<Vec<f64>> = reward
        .support()
        .iter()
        .zip(reward.probs())
        .map(|(v, mass)| {
            let mut row = vec![0.0; width];
            for o in positive.iter().filter(|o| o.0 == *v) {
                row[o.1] += o.2 / mass;
            }
            row
        })
        .collect();
    let next = if rows.windows(2).all(|w| w[0] == w[1]) {
        vec![rows[0].clone()]
    } else {
        rows
    };
    Ok(StateAction { reward, next })
}
