//! k-item prophet inequality and sequential posted pricing as ordered MDPs.
//!
//! Both compile to `width = k + 1` levels: level `l >= 1` means `l` slots are
//! still free and level 0 is the absorbing "capacity exhausted" level. The
//! start state is level `k` at stage 0. Action `a` at stage `i` is the `a`-th
//! support point of `X_i`, used as an acceptance threshold (prophet) or a
//! posted price (pricing); accept iff `X_i >= support[a]`. Action index
//! `num_values` (and any index past a shorter support) rejects everything.
//! Actions are ordered by index, which is also the order of stay probabilities.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDistribution;
use crate::error::InstanceError;
use crate::mdp::{validate, LayeredMdp, MdpMeta};

use super::joint_state_action;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProphetSpec {
    pub horizon: usize,
    /// Number of items that may be selected (`k`).
    pub capacity: usize,
    /// Maximum support size of any `X_i` (`A`).
    pub num_values: usize,
    pub stages: Vec<DiscreteDistribution>,
    /// Multiplier applied to every value so that episode totals stay within one.
    pub value_scale: f64,
}

impl ProphetSpec {
    pub fn check(&self) -> Result<(), InstanceError> {
        if self.horizon == 0 || self.capacity == 0 || self.num_values == 0 {
            return Err(InstanceError::InvalidSpec(
                "horizon, capacity and support size must be positive".into(),
            ));
        }
        if self.capacity > self.horizon {
            return Err(InstanceError::InvalidSpec(format!(
                "capacity {} exceeds horizon {}",
                self.capacity, self.horizon
            )));
        }
        if self.stages.len() != self.horizon {
            return Err(InstanceError::InvalidSpec(format!(
                "{} stage distributions for horizon {}",
                self.stages.len(),
                self.horizon
            )));
        }
        if let Some(i) = self.stages.iter().position(|d| d.len() > self.num_values) {
            return Err(InstanceError::InvalidSpec(format!(
                "stage {i} has {} support points, more than {}",
                self.stages[i].len(),
                self.num_values
            )));
        }
        if !(self.value_scale.is_finite() && self.value_scale > 0.0) {
            return Err(InstanceError::InvalidSpec("value_scale must be positive".into()));
        }
        let max_value = self.stages.iter().map(|d| d.max_value()).fold(0.0, f64::max);
        let bound = self.capacity as f64 * max_value * self.value_scale;
        if bound > 1.0 + 1e-12 {
            return Err(InstanceError::InvalidSpec(format!(
                "scaled rewards can total {bound} > 1"
            )));
        }
        Ok(())
    }

    /// Number of MDP actions: one per support point plus the reject-all action.
    pub fn num_actions(&self) -> usize {
        self.num_values + 1
    }

    /// Threshold (or price) behind `action` at `stage`; `None` rejects everything.
    pub fn threshold(&self, stage: usize, action: usize) -> Option<f64> {
        self.stages[stage].support().get(action).copied()
    }
}

/// Every stage uniform on `{0, 1/(A-1), ..., 1}`, values scaled by `1/k`.
pub fn prophet_uniform(horizon: usize, capacity: usize, num_values: usize) -> Result<ProphetSpec, InstanceError> {
    if num_values < 2 {
        return Err(InstanceError::InvalidSpec("uniform grid needs at least two values".into()));
    }
    let step = (num_values - 1) as f64;
    let support: Vec<f64> = (0..num_values).map(|j| j as f64 / step).collect();
    let probs = vec![1.0 / num_values as f64; num_values];
    let probs = renormalize(probs);
    let dist = DiscreteDistribution::new(support, probs)?;
    let spec = ProphetSpec {
        horizon,
        capacity,
        num_values,
        stages: vec![dist; horizon],
        value_scale: 1.0 / capacity as f64,
    };
    spec.check()?;
    Ok(spec)
}

/// Per stage: `A` support points i.i.d. uniform on `[0, 1]` (sorted) with a
/// probability vector drawn uniformly from the simplex via sorted uniform
/// spacings. Values are scaled by `1/k`.
pub fn prophet_random<R: Rng + ?Sized>(
    horizon: usize,
    capacity: usize,
    num_values: usize,
    rng: &mut R,
) -> Result<ProphetSpec, InstanceError> {
    if num_values == 0 {
        return Err(InstanceError::InvalidSpec("support size must be positive".into()));
    }
    let mut stages = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let mut support: Vec<f64> = (0..num_values).map(|_| rng.gen::<f64>()).collect();
        support.sort_by(f64::total_cmp);
        let probs = simplex_uniform(num_values, rng);
        stages.push(DiscreteDistribution::from_pairs(
            support.into_iter().zip(probs).collect(),
        )?);
    }
    let spec = ProphetSpec {
        horizon,
        capacity,
        num_values,
        stages,
        value_scale: 1.0 / capacity as f64,
    };
    spec.check()?;
    Ok(spec)
}

/// Uniform draw from the `(n-1)`-simplex (symmetric Dirichlet with unit weights).
pub(crate) fn simplex_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut cuts: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.gen::<f64>()).collect();
    cuts.sort_by(f64::total_cmp);
    let mut probs = Vec::with_capacity(n);
    let mut prev = 0.0;
    for c in cuts {
        probs.push(c - prev);
        prev = c;
    }
    probs.push(1.0 - prev);
    renormalize(probs)
}

/// Absorbs the rounding residue into the largest entry so the sum is within `1e-15` of one.
fn renormalize(mut probs: Vec<f64>) -> Vec<f64> {
    let total: f64 = probs.iter().sum();
    if let Some(max_idx) = (0..probs.len()).max_by(|&a, &b| probs[a].total_cmp(&probs[b])) {
        probs[max_idx] += 1.0 - total;
    }
    probs
}

#[derive(Clone, Copy)]
enum Payout {
    /// Reward is the realized value.
    Value,
    /// Reward is the posted price.
    Price,
}

fn compile(spec: &ProphetSpec, payout: Payout, label: &str) -> Result<LayeredMdp, InstanceError> {
    spec.check()?;
    let (h, k) = (spec.horizon, spec.capacity);
    let width = k + 1;
    let n = spec.num_actions();
    let scale = spec.value_scale;
    let mut sas = Vec::with_capacity(h * width * n);
    for stage in 0..h {
        let terminal = stage + 1 == h;
        let dist = &spec.stages[stage];
        for level in 0..width {
            for action in 0..n {
                let mut outcomes = Vec::with_capacity(dist.len());
                match (level, spec.threshold(stage, action)) {
                    (0, _) => outcomes.push((0.0, 0, 1.0)),
                    (_, None) => outcomes.push((0.0, level, 1.0)),
                    (_, Some(tau)) => {
                        for (v, p) in dist.support().iter().zip(dist.probs()) {
                            if *v >= tau {
                                let paid = match payout {
                                    Payout::Value => *v,
                                    Payout::Price => tau,
                                };
                                outcomes.push((paid * scale, level - 1, *p));
                            } else {
                                outcomes.push((0.0, level, *p));
                            }
                        }
                    }
                }
                sas.push(joint_state_action(&outcomes, width, terminal)?);
            }
        }
    }
    let identity: Vec<usize> = (0..n).collect();
    let ordering = vec![identity; h * width];
    let mdp = LayeredMdp::from_parts(h, width, n, k, sas, Some(ordering))?.with_meta(MdpMeta {
        name: format!("{label} H={h} k={k} A={}", spec.num_values),
        value_scale: scale,
    });
    let report = validate(&mdp);
    if !report.is_ok() {
        return Err(InstanceError::InvalidSpec(format!(
            "compiled {label} instance fails validation: {report}"
        )));
    }
    Ok(mdp)
}

/// Threshold policies for the k-item prophet inequality.
pub fn compile_prophet(spec: &ProphetSpec) -> Result<LayeredMdp, InstanceError> {
    compile(spec, Payout::Value, "prophet")
}

/// Sequential posted pricing with `k` units: an accepting customer pays the price.
pub fn compile_posted_pricing(spec: &ProphetSpec) -> Result<LayeredMdp, InstanceError> {
    compile(spec, Payout::Price, "pricing")
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::mdp::{optimal_policy, policy_value, Policy};

    #[test]
    fn uniform_grid() {
        let spec = prophet_uniform(3, 1, 5).unwrap();
        assert_eq!(spec.stages[0].support(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(spec.stages[0].probs().iter().all(|p| (p - 0.2).abs() < 1e-15));
        let two = prophet_uniform(3, 1, 2).unwrap();
        assert_eq!(two.stages[1].support(), &[0.0, 1.0]);
        assert_eq!(two.stages[1].probs(), &[0.5, 0.5]);
        assert!(prophet_uniform(2, 3, 2).is_err());
    }

    #[test]
    fn boundary_thresholds() {
        let spec = prophet_uniform(2, 1, 3).unwrap();
        let mdp = compile_prophet(&spec).unwrap();
        // threshold at the lowest support point always accepts
        assert_eq!(mdp.transition_prob(0, 1, 0, 1), 0.0);
        assert_eq!(mdp.transition_prob(0, 1, 0, 0), 1.0);
        // reject-all sentinel always stays and pays nothing
        assert_eq!(mdp.transition_prob(0, 1, 3, 1), 1.0);
        assert_eq!(mdp.mean_reward(0, 1, 3), 0.0);
        assert_eq!(mdp.num_actions(), 4);
    }

    #[test]
    fn two_stage_value_by_hand() {
        // X uniform on {0, 1}, accept iff value > 0 at both stages -> 0.75
        let spec = prophet_uniform(2, 1, 2).unwrap();
        let mdp = compile_prophet(&spec).unwrap();
        let policy = Policy::constant(2, 2, 1);
        assert!((policy_value(&mdp, &policy) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn three_stage_optimum() {
        let spec = prophet_uniform(3, 1, 2).unwrap();
        let mdp = compile_prophet(&spec).unwrap();
        let (_, v) = optimal_policy(&mdp);
        assert!((v - 0.875).abs() < 1e-15);
    }

    #[test]
    fn pricing_tie_goes_to_lower_price() {
        let dist = DiscreteDistribution::new(vec![0.0, 0.5, 1.0], vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
        let spec = ProphetSpec {
            horizon: 1,
            capacity: 1,
            num_values: 3,
            stages: vec![dist],
            value_scale: 1.0,
        };
        let mdp = compile_posted_pricing(&spec).unwrap();
        let (p, v) = optimal_policy(&mdp);
        assert_eq!(p.action(1, 0), 1);
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(mdp.mean_reward(0, 1, 0), 0.0);
    }

    #[test]
    fn random_spec_reproducible() {
        let a = prophet_random(4, 2, 3, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = prophet_random(4, 2, 3, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
        for d in &a.stages {
            assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(compile_prophet(&a).is_ok());
    }

    #[test]
    fn rejects_unscaled_rewards() {
        let mut spec = prophet_uniform(3, 2, 3).unwrap();
        spec.value_scale = 1.0;
        assert!(compile_prophet(&spec).is_err());
    }
}
