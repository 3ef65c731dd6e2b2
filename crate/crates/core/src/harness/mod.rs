//! End-to-end workflows: configuration, training, evaluation, learning
//! curves and a brute-force oracle for tiny games.

mod config;
mod eval;
mod experiment;
mod oracle;
mod pipeline;

pub use config::ExperimentConfig;
pub use eval::{evaluate, mean_std, EvalResult, EvalSettings, GameResult, SeedResult};
pub use experiment::{learning_curve, run_experiment, CurveRow, Experiment};
pub use oracle::{micro_games, optimal_return, MICRO_HORIZON};
pub use pipeline::{train_seed, ModelSummary, RoundSummary, TrainLog, TrainOutcome, Workbench};
