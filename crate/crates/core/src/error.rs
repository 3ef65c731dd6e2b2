use std::path::PathBuf;

use thiserror::Error;

use crate::world::Difficulty;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vocabulary too small for {difficulty} games: {shortfall}")]
    VocabularyTooSmall {
        difficulty: Difficulty,
        shortfall: String,
    },

    #[error("invalid game spec: {0}")]
    InvalidSpec(String),

    #[error("the game is already finished")]
    GameFinished,

    #[error("`{verb}` takes {expected} argument(s), got {got}")]
    ActionArity {
        verb: String,
        expected: String,
        got: usize,
    },

    #[error("unknown verb `{0}`")]
    UnknownVerb(String),

    #[error("sentence outside the observation grammar: \"{0}\"")]
    UnmatchedSentence(String),

    #[error("{}:{line}: malformed triple: {reason}", path.display())]
    MalformedTriple {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("no atlocation triple for object `{0}`")]
    MissingCommonsense(String),

    #[error("conjunction has {expected} inputs, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid neuron parameter: {0}")]
    InvalidNeuron(String),

    #[error("discount factor {0} is outside [0, 1]")]
    InvalidDiscount(f64),

    #[error("transition buffer is empty")]
    EmptyBuffer,

    #[error("no episodes to evaluate")]
    NoEpisodes,

    #[error("phrase is empty")]
    EmptyPhrase,

    #[error("variable `{0}` is not bound by the assignment")]
    UnboundVariable(String),

    #[error("rule head `{rule}` has arity {rule_arity}, action has {action_arity} argument(s)")]
    HeadArity {
        rule: String,
        rule_arity: usize,
        action_arity: usize,
    },

    #[error("line {line}, column {column}: {message}")]
    RuleSyntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}: duplicate rule for `{head}`")]
    DuplicateHead { line: usize, head: String },

    #[error("line {line}: unsafe variable `{variable}` does not occur in the head of `{head}`")]
    UnsafeVariable {
        line: usize,
        variable: String,
        head: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
