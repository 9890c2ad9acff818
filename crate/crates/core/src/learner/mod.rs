//! Training machinery over the delay-aware environment: a bounded replay
//! buffer, a pluggable policy interface with scripted baselines, a tabular
//! Q-learner that jointly selects motion and wait time, and the
//! per-epoch training/evaluation loops.

mod policy;
mod qtable;
mod replay;
mod train;

pub use policy::{
    make_baseline_agent, restore_policy, AgentPolicy, AgentSpec, MotionScript, PolicySnapshot,
    QDiscreteAgent, QDiscreteParams, SNAPSHOT_MAGIC,
};
pub use qtable::QTable;
pub use replay::{ReplayBuffer, Transition};
pub use train::{evaluate, train, EpochMetrics, MeanStd, MetricSummary, TrainOutcome, TrainParams};

use crate::env::EnvError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("cannot sample from an empty replay buffer")]
    EmptyBuffer,
    #[error("invalid learner config: {0}")]
    InvalidConfig(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("bad policy snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Env(#[from] EnvError),
}
