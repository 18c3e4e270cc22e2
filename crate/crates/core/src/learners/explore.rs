//! Per-phase exploration actions `e_{l,i}`.
//!
//! States are visited stage-major with levels ascending. The general rule
//! consumes one `gen_range` per state; the ordered rule consumes one uniform
//! coin per state plus a `gen_range` when the coin lands on "uniform".

use rand::Rng;

use crate::mdp::{maximal_in_order, Policy, RandomizedStageProfile};

use super::ActionSetTable;

/// Sampled exploration actions and the exact law they were drawn from.
#[derive(Debug, Clone)]
pub struct Exploration {
    pub actions: Policy,
    pub profile: RandomizedStageProfile,
}

pub fn sample_exploration_general<R: Rng + ?Sized>(
    active: &ActionSetTable,
    num_actions: usize,
    rng: &mut R,
) -> Exploration {
    let (h, w) = (active.horizon(), active.width());
    let mut actions = Policy::constant(h, w, 0);
    let mut profile = RandomizedStageProfile::new(h, w, num_actions);
    let mut dist = vec![0.0; num_actions];
    for stage in 0..h {
        for level in 0..w {
            let set = active.get(level, stage);
            actions.set(level, stage, set[rng.gen_range(0..set.len())]);
            dist.iter_mut().for_each(|p| *p = 0.0);
            let mass = 1.0 / set.len() as f64;
            for &a in set {
                dist[a] = mass;
            }
            fix_sum(&mut dist, set[0]);
            profile
                .set_distribution(level, stage, &dist)
                .expect("uniform law over a non-empty set");
        }
    }
    Exploration { actions, profile }
}

/// With probability `k / (2H)` a uniform draw from the active set, otherwise
/// the active action ranked highest by the known ordering.
pub fn sample_exploration_ordered<R: Rng + ?Sized>(
    active: &ActionSetTable,
    ordering: &[Vec<usize>],
    num_actions: usize,
    rng: &mut R,
) -> Exploration {
    let (h, w) = (active.horizon(), active.width());
    let q = w as f64 / (2.0 * h as f64);
    let mut actions = Policy::constant(h, w, 0);
    let mut profile = RandomizedStageProfile::new(h, w, num_actions);
    let mut dist = vec![0.0; num_actions];
    for stage in 0..h {
        for level in 0..w {
            let set = active.get(level, stage);
            let top = maximal_in_order(&ordering[stage * w + level], set)
                .expect("ordering is a permutation of all actions");
            let coin: f64 = rng.gen();
            let e = if coin < q { set[rng.gen_range(0..set.len())] } else { top };
            actions.set(level, stage, e);
            dist.iter_mut().for_each(|p| *p = 0.0);
            let mass = q / set.len() as f64;
            for &a in set {
                dist[a] = mass;
            }
            dist[top] += 1.0 - q;
            fix_sum(&mut dist, top);
            profile
                .set_distribution(level, stage, &dist)
                .expect("mixture of two laws on the simplex");
        }
    }
    Exploration { actions, profile }
}

fn fix_sum(dist: &mut [f64], anchor: usize) {
    let total: f64 = dist.iter().sum();
    dist[anchor] += 1.0 - total;
}
