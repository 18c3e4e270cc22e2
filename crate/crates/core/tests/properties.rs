use bandit_mdp::instances::random_generic;
use bandit_mdp::learners::{
    doubling, exp_ref, sample_exploration_general, thresholds_general, ActionSetTable, Algorithm, BudgetMode,
    PhaseParams, SimulatedEnv, Variant,
};
use bandit_mdp::mdp::{optimal_policy, policy_value, simulate_episode, validate, visitation_probabilities};
use bandit_mdp::{FeedbackMode, LayeredMdp, Policy};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn shape() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (1usize..=5, 1usize..=3, 1usize..=3, any::<u64>())
}

fn policy_for(mdp: &LayeredMdp, seed: u64) -> Policy {
    let mut r = rng(seed);
    let full = ActionSetTable::full(mdp.horizon(), mdp.width(), mdp.num_actions());
    sample_exploration_general(&full, mdp.num_actions(), &mut r).actions
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_instances_validate((h, w, a, seed) in shape(), ordered in any::<bool>()) {
        if ordered && w > h {
            prop_assert!(random_generic(h, w, a, &mut rng(seed), true).is_err());
            return Ok(());
        }
        let mdp = random_generic(h, w, a, &mut rng(seed), ordered).unwrap();
        prop_assert!(validate(&mdp).is_ok());
        prop_assert_eq!(mdp.is_ordered(), ordered);
    }

    #[test]
    fn visitation_sums_to_one((h, w, a, seed) in shape()) {
        let mdp = random_generic(h, w, a, &mut rng(seed), false).unwrap();
        let full = ActionSetTable::full(h, w, a);
        let ex = sample_exploration_general(&full, a, &mut rng(seed ^ 1));
        let q = visitation_probabilities(&mdp, &ex.profile);
        for row in q {
            let s: f64 = row.iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().all(|p| *p >= 0.0));
        }
    }

    #[test]
    fn optimum_dominates((h, w, a, seed) in shape(), pseed in any::<u64>()) {
        let mdp = random_generic(h, w, a, &mut rng(seed), false).unwrap();
        let (_, opt) = optimal_policy(&mdp);
        let v = policy_value(&mdp, &policy_for(&mdp, pseed));
        prop_assert!(v <= opt + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&opt));
    }

    #[test]
    fn json_round_trip_is_exact((h, w, a, seed) in shape(), ordered in any::<bool>()) {
        let mdp = random_generic(h, w, a, &mut rng(seed), ordered && w <= h).unwrap();
        let back = LayeredMdp::from_json(&mdp.to_json()).unwrap();
        prop_assert_eq!(&back, &mdp);
        prop_assert_eq!(back.to_json(), mdp.to_json());
    }

    #[test]
    fn step_rewards_sum_to_aggregate((h, w, a, seed) in shape()) {
        let mdp = random_generic(h, w, a, &mut rng(seed), false).unwrap();
        let p = policy_for(&mdp, seed);
        let mut r = rng(seed ^ 7);
        for _ in 0..20 {
            let out = simulate_episode(&mdp, &p, FeedbackMode::SemiBandit, &mut r);
            let steps = out.step_rewards.unwrap();
            prop_assert_eq!(steps.len(), h);
            prop_assert_eq!(steps.iter().sum::<f64>(), out.aggregate_reward);
        }
    }

    #[test]
    fn refined_sets_shrink((h, w, a, seed) in (1usize..=3, 1usize..=2, 1usize..=3, any::<u64>()), eps_ix in 0u32..4) {
        let mdp = random_generic(h, w, a, &mut rng(seed), false).unwrap();
        let mut env = SimulatedEnv::new(&mdp, FeedbackMode::Bandit, seed);
        let active = ActionSetTable::full(h, w, a);
        let thresholds = thresholds_general(h, w, a).unwrap();
        let mut run = Default::default();
        let report = exp_ref(
            &mut env,
            PhaseParams {
                active: &active,
                epsilon: 0.5f64.powi(eps_ix as i32),
                total_episodes: 1000,
                thresholds: &thresholds,
                budget: u64::MAX,
                budget_mode: BudgetMode::Truncate,
                prior_best: None,
            },
            &mut rng(seed ^ 3),
            &mut run,
        )
        .unwrap();
        prop_assert!(report.refined.is_subset_of(&active));
        prop_assert!(report.refined.all_nonempty());
        for stage in 0..h {
            for level in 0..w {
                prop_assert!(report.refined.contains(level, stage, report.best.action(level, stage)));
            }
        }
    }

    #[test]
    fn doubling_plays_exactly_t((h, w, a, seed) in (1usize..=3, 1usize..=2, 1usize..=3, any::<u64>()), t in 2u64..3000) {
        let mdp = random_generic(h, w, a, &mut rng(seed), w <= h).unwrap();
        for variant in [Variant::General, Variant::Ordered] {
            if variant == Variant::Ordered && w > h {
                continue;
            }
            let mut env = SimulatedEnv::new(&mdp, FeedbackMode::Bandit, seed);
            let out = doubling(&mut env, t, variant, &mut rng(seed)).unwrap();
            prop_assert_eq!(out.run.total_episodes(), t);
        }
    }

    #[test]
    fn runs_are_deterministic((h, w, a, seed) in (1usize..=3, 1usize..=2, 1usize..=3, any::<u64>())) {
        let mdp = random_generic(h, w, a, &mut rng(seed), false).unwrap();
        for alg in [Algorithm::ExpRef, Algorithm::parse("ucbvi").unwrap()] {
            let x = alg.run(&mdp, 400, seed).unwrap();
            let y = alg.run(&mdp, 400, seed).unwrap();
            prop_assert_eq!(x, y);
        }
    }
}
