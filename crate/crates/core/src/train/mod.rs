//! Training, evaluation metrics and heuristic baselines.

mod baselines;
mod eval;
mod metrics;
mod optim;
mod trainer;

pub use baselines::{baseline_kmeans, baseline_supersites, kmeans, KMeansResult};
pub use eval::{evaluate, EvalCase, EvalReport, EvalRow};
pub use metrics::{adjusted_rand_index, pairwise_accuracy};
pub use optim::{Adam, Optimizer, OptimizerKind, Sgd};
pub use trainer::{train, train_with_progress, TrainConfig, TrainOutcome};
