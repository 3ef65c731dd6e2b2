//! Rule induction from reward: buffering play, then fitting one weighted
//! conjunction per action predicate and reading off crisp rules.

mod buffer;
mod model;
mod train;

pub use buffer::{
    collect, compute_returns, extract_templates, symbolic_state, Buffer, EpisodeRecord,
    Perception, Transition,
};
pub use model::{candidate_literals, Example, ModelStatus, RuleModel};
pub use train::{
    extract_crisp_rule, train_rule, train_with_outlier_rejection, OutlierConfig, TrainConfig,
};
