//! Episodic layered MDPs under fully-bandit feedback.
//!
//! * [`mdp`]: the model, episode simulation and exact DP oracles.
//! * [`learners`]: successive-elimination learners and a semi-bandit UCB-VI baseline.
//! * [`instances`]: prophet, pricing and knapsack reductions, hard families, fixtures.

pub mod dist;
pub mod error;
pub mod instances;
pub mod learners;
pub mod mdp;

pub use dist::DiscreteDistribution;
pub use error::{InstanceError, LearnerError, MdpError};
pub use mdp::{
    EpisodeOutcome, FeedbackMode, LayeredMdp, Policy, RandomizedStageProfile, StateAction,
};
