use thiserror::Error;

use crate::mdp::FeedbackMode;

#[derive(Debug, Error)]
pub enum MdpError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("policy action {action} at (level {level}, stage {stage}) is outside 0..{num_actions}")]
    PolicyAction {
        level: usize,
        stage: usize,
        action: usize,
        num_actions: usize,
    },
    #[error("instance schema: {0}")]
    Schema(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("phase needs {needed} episodes but only {remaining} remain in the budget")]
    BudgetExceeded { needed: u64, remaining: u64 },
    #[error("learner requires {required:?} feedback but the environment grants {available:?}")]
    FeedbackMismatch {
        required: FeedbackMode,
        available: FeedbackMode,
    },
    #[error("ordered variant requires an environment that publishes an action ordering")]
    MissingOrdering,
    #[error("threshold constant overflows f64 at (level {level}, stage {stage})")]
    ThresholdOverflow { level: usize, stage: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("invalid instance spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Mdp(#[from] MdpError),
}
