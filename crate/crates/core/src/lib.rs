//! Learn first-order action rules for text cleanup games.
//!
//! The pipeline: a deterministic game simulator ([`world`]) emits templated
//! observations; [`parser`] turns them into symbolic facts, joined with
//! commonsense `atlocation` facts from [`knowledge`]; [`learner`] fits one
//! weighted Łukasiewicz conjunction ([`lnn`]) per action predicate from
//! discounted returns; [`pruner`] drops action predicates that never affect
//! reward; [`policy`] executes the resulting horn rules; [`rules_io`] reads
//! and writes them so a person can correct them; [`harness`] wires it all
//! into train/eval/curve workflows.
//!
//! ```
//! use neurorule::rules_io::parse_rules;
//! use neurorule::policy::{score_action, Scoring};
//! use neurorule::parser::{Predicate, SymbolicFact};
//!
//! let rules = parse_rules("put(x,y) :- carry(x) ∧ atlocation(x,y).").unwrap();
//! let facts = [
//!     SymbolicFact::unary(Predicate::Carry, "blue moccasin"),
//!     SymbolicFact::binary(Predicate::AtLocation, "moccasin", "shoe cabinet"),
//! ]
//! .into_iter()
//! .collect();
//! let action = "put blue moccasin on shoe cabinet".parse().unwrap();
//! let score = score_action(&rules, &action, &facts, Scoring::Crisp).unwrap();
//! assert_eq!(score.likelihood, 1.0);
//! ```

pub mod error;
pub mod harness;
pub mod knowledge;
pub mod learner;
pub mod lnn;
pub mod parser;
pub mod policy;
pub mod pruner;
pub mod rules_io;
pub mod world;

pub use error::{Error, Result};

/// Runs the guide's code blocks as doc-tests so the book cannot drift from
/// the API.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $file:literal) => {
            #[doc = include_str!(concat!("../../../book/src/", $file))]
            struct $name;
        };
    }
    chapter!(Introduction, "introduction.md");
    chapter!(Games, "games.md");
    chapter!(Facts, "facts.md");
    chapter!(Neuron, "neuron.md");
    chapter!(Learning, "learning.md");
    chapter!(Pruning, "pruning.md");
    chapter!(Rules, "rules.md");
    chapter!(Cli, "cli.md");
    chapter!(Reproducibility, "reproducibility.md");
}
