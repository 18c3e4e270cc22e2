//! Learners that only see what the environment's feedback mode grants.
//!
//! ExpRef and OrderedExpRef read the aggregate episode reward and nothing
//! else; the doubling wrapper drives them through shrinking accuracy levels.
//! UCB-VI is the semi-bandit baseline.

mod exp_ref;
mod explore;
mod tables;
mod ucb_vi;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::LearnerError;
use crate::mdp::{simulate_episode, EpisodeOutcome, FeedbackMode, LayeredMdp, Policy};

pub use exp_ref::{
    doubling, episodes_per_action, exp_ref, phase_schedule, BudgetMode, DoublingOutcome, Estimate,
    PhaseParams, PhaseReport, ScheduledPhase,
};
pub use explore::{sample_exploration_general, sample_exploration_ordered, Exploration};
pub use tables::{thresholds_general, thresholds_ordered, ActionSetTable, ThresholdTable};
pub use ucb_vi::{ucb_vi, UcbVi};

/// Which exploration rule and threshold formula a phase uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    General,
    Ordered,
}

/// What a learner may observe and do. Implementations decide how much of each
/// episode is revealed through [`Environment::feedback_mode`].
pub trait Environment {
    fn feedback_mode(&self) -> FeedbackMode;
    fn horizon(&self) -> usize;
    fn width(&self) -> usize;
    fn num_actions(&self) -> usize;
    /// Known per-state action order (ascending), if the instance is ordered.
    fn ordering(&self) -> Option<&[Vec<usize>]>;
    fn run_episode(&mut self, policy: &Policy) -> EpisodeOutcome;
}

/// Simulator-backed environment with its own random stream.
pub struct SimulatedEnv<'a> {
    mdp: &'a LayeredMdp,
    mode: FeedbackMode,
    rng: ChaCha8Rng,
}

impl<'a> SimulatedEnv<'a> {
    pub fn new(mdp: &'a LayeredMdp, mode: FeedbackMode, seed: u64) -> Self {
        Self {
            mdp,
            mode,
            rng: env_rng(seed),
        }
    }
}

impl Environment for SimulatedEnv<'_> {
    fn feedback_mode(&self) -> FeedbackMode {
        self.mode
    }

    fn horizon(&self) -> usize {
        self.mdp.horizon()
    }

    fn width(&self) -> usize {
        self.mdp.width()
    }

    fn num_actions(&self) -> usize {
        self.mdp.num_actions()
    }

    fn ordering(&self) -> Option<&[Vec<usize>]> {
        self.mdp.ordering()
    }

    fn run_episode(&mut self, policy: &Policy) -> EpisodeOutcome {
        simulate_episode(self.mdp, policy, self.mode, &mut self.rng)
    }
}

/// Environment stream for `seed` (ChaCha8, stream 0).
pub fn env_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

/// Learner stream for `seed` (ChaCha8, stream 1), independent of the environment's.
pub fn learner_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// A maximal run of consecutive episodes that played the same policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    /// 1-based index of the first episode.
    pub start: u64,
    pub len: u64,
    /// Index into [`LearnerRun::policies`].
    pub policy: usize,
}

/// The sequence of policies a learner played, stored as runs over interned policies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LearnerRun {
    policies: Vec<Policy>,
    index: HashMap<Policy, usize>,
    segments: Vec<Segment>,
    total: u64,
}

impl LearnerRun {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `count` episodes of `policy`.
    pub fn record(&mut self, policy: &Policy, count: u64) {
        if count == 0 {
            return;
        }
        let id = match self.index.get(policy) {
            Some(&id) => id,
            None => {
                self.policies.push(policy.clone());
                self.index.insert(policy.clone(), self.policies.len() - 1);
                self.policies.len() - 1
            }
        };
        match self.segments.last_mut() {
            Some(last) if last.policy == id => last.len += count,
            _ => self.segments.push(Segment {
                start: self.total + 1,
                len: count,
                policy: id,
            }),
        }
        self.total += count;
    }

    pub fn total_episodes(&self) -> u64 {
        self.total
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Distinct policies in order of first use.
    pub fn policies(&self) -> &[Policy] {
        &self.policies
    }

    /// Policy played in 1-based episode `t`.
    pub fn policy_at(&self, t: u64) -> Option<&Policy> {
        if t == 0 || t > self.total {
            return None;
        }
        let pos = self.segments.partition_point(|s| s.start + s.len <= t);
        self.segments.get(pos).map(|s| &self.policies[s.policy])
    }

    /// `(episode, policy)` for every episode.
    pub fn iter_episodes(&self) -> impl Iterator<Item = (u64, &Policy)> + '_ {
        self.segments
            .iter()
            .flat_map(move |s| (s.start..s.start + s.len).map(move |t| (t, &self.policies[s.policy])))
    }
}

/// Algorithm selector used by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Algorithm {
    #[serde(rename = "expref")]
    ExpRef,
    Ordered,
    #[serde(rename = "ucbvi")]
    UcbVi {
        #[serde(default = "default_delta")]
        delta: f64,
    },
}

pub const DEFAULT_DELTA: f64 = 0.1;

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

impl Algorithm {
    pub fn tag(&self) -> &'static str {
        match self {
            Algorithm::ExpRef => "expref",
            Algorithm::Ordered => "ordered",
            Algorithm::UcbVi { .. } => "ucbvi",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "expref" => Some(Algorithm::ExpRef),
            "ordered" => Some(Algorithm::Ordered),
            "ucbvi" => Some(Algorithm::UcbVi { delta: DEFAULT_DELTA }),
            _ => None,
        }
    }

    pub fn feedback_mode(&self) -> FeedbackMode {
        match self {
            Algorithm::UcbVi { .. } => FeedbackMode::SemiBandit,
            _ => FeedbackMode::Bandit,
        }
    }

    /// Runs `episodes` episodes against a fresh simulator seeded with `seed`.
    pub fn run(&self, mdp: &LayeredMdp, episodes: u64, seed: u64) -> Result<LearnerRun, LearnerError> {
        let mut env = SimulatedEnv::new(mdp, self.feedback_mode(), seed);
        let mut rng = learner_rng(seed);
        self.run_in(&mut env, episodes, &mut rng)
    }

    pub fn run_in<E: Environment, R: Rng + ?Sized>(
        &self,
        env: &mut E,
        episodes: u64,
        rng: &mut R,
    ) -> Result<LearnerRun, LearnerError> {
        match *self {
            Algorithm::ExpRef => doubling(env, episodes, Variant::General, rng).map(|o| o.run),
            Algorithm::Ordered => doubling(env, episodes, Variant::Ordered, rng).map(|o| o.run),
            Algorithm::UcbVi { delta } => ucb_vi(env, episodes, delta),
        }
    }
}
