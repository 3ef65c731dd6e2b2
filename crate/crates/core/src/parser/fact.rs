use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The closed inventory of state predicates.
///
/// | predicate       | arity | source                                   |
/// |-----------------|-------|------------------------------------------|
/// | `be-located-at` | 1     | entities visible in the current room     |
/// | `carry`         | 1     | the inventory                            |
/// | `direction`     | 1     | exits of the current room                |
/// | `open`          | 1     | containers described as open             |
/// | `atlocation`    | 2     | commonsense graph                        |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Predicate {
    BeLocatedAt,
    Carry,
    Direction,
    Open,
    AtLocation,
}

impl Predicate {
    pub const ALL: [Predicate; 5] = [
        Predicate::BeLocatedAt,
        Predicate::Carry,
        Predicate::Direction,
        Predicate::Open,
        Predicate::AtLocation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::BeLocatedAt => "be-located-at",
            Predicate::Carry => "carry",
            Predicate::Direction => "direction",
            Predicate::Open => "open",
            Predicate::AtLocation => "atlocation",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Predicate::AtLocation => 2,
            _ => 1,
        }
    }

    pub fn from_name(name: &str) -> Option<Predicate> {
        Predicate::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Predicate::from_name(s).ok_or_else(|| Error::Config(format!("unknown predicate `{s}`")))
    }
}

impl From<Predicate> for String {
    fn from(p: Predicate) -> String {
        p.name().to_string()
    }
}

impl TryFrom<String> for Predicate {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// A grounded predicate over entity phrases.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolicFact {
    pub predicate: Predicate,
    pub args: Vec<String>,
    #[serde(default = "full_confidence")]
    pub confidence: f64,
}

fn full_confidence() -> f64 {
    1.0
}

/// Facts describing one state. Ordered, so iteration is deterministic.
pub type FactSet = BTreeSet<SymbolicFact>;

impl SymbolicFact {
    pub fn new<S: Into<String>>(
        predicate: Predicate,
        args: impl IntoIterator<Item = S>,
    ) -> Result<SymbolicFact> {
        let args: Vec<String> = args.into_iter().map(Into::into).collect();
        if args.len() != predicate.arity() {
            return Err(Error::Config(format!(
                "`{predicate}` takes {} argument(s), got {}",
                predicate.arity(),
                args.len()
            )));
        }
        if args.iter().any(|a| a.trim().is_empty()) {
            return Err(Error::EmptyPhrase);
        }
        Ok(SymbolicFact {
            predicate,
            args,
            confidence: 1.0,
        })
    }

    /// # Panics
    /// If `predicate` is not unary.
    pub fn unary(predicate: Predicate, arg: &str) -> SymbolicFact {
        assert_eq!(predicate.arity(), 1, "{predicate} is not unary");
        SymbolicFact {
            predicate,
            args: vec![arg.to_string()],
            confidence: 1.0,
        }
    }

    /// # Panics
    /// If `predicate` is not binary.
    pub fn binary(predicate: Predicate, first: &str, second: &str) -> SymbolicFact {
        assert_eq!(predicate.arity(), 2, "{predicate} is not binary");
        SymbolicFact {
            predicate,
            args: vec![first.to_string(), second.to_string()],
            confidence: 1.0,
        }
    }
}

impl PartialEq for SymbolicFact {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SymbolicFact {}

impl PartialOrd for SymbolicFact {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SymbolicFact {
    fn cmp(&self, other: &Self) -> Ordering {
        self.predicate
            .cmp(&other.predicate)
            .then_with(|| self.args.cmp(&other.args))
            .then_with(|| self.confidence.total_cmp(&other.confidence))
    }
}

impl fmt::Display for SymbolicFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.predicate, self.args.join(", "))
    }
}
