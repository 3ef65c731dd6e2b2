//! Cleanup-game simulator: specs, generation, and the game engine.

mod action;
mod engine;
mod generate;
mod spec;
pub(crate) mod text;
mod vocab;

pub use action::{ActionCommand, ActionPredicate, Verb};
pub use engine::{replay, Game, Observation, StateKey};
pub use generate::{configuration_split, configurations, generate_games, plan_witness};
pub use spec::{
    Difficulty, Direction, EntityKind, EntitySpec, GameSpec, Location, RoomSpec, Split,
    DEFAULT_MAX_STEPS,
};
pub use vocab::{EntityVocabulary, HolderEntry, ObjectEntry};
