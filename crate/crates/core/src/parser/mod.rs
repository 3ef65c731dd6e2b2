//! Template parser from simulator text to symbolic facts, plus noise
//! injection that emulates a lossy semantic parser.

mod action;
mod fact;
mod noise;
mod observation;

pub use action::parse_action;
pub use fact::{FactSet, Predicate, SymbolicFact};
pub use noise::{apply_noise, NoiseConfig, NoiseInjector};
pub use observation::parse_observation;
