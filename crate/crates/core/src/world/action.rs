use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Command verbs understood by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verb {
    Go,
    Take,
    Put,
    Insert,
    Open,
    Examine,
    Look,
    Inventory,
}

impl Verb {
    pub const ALL: [Verb; 8] = [
        Verb::Go,
        Verb::Take,
        Verb::Put,
        Verb::Insert,
        Verb::Open,
        Verb::Examine,
        Verb::Look,
        Verb::Inventory,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Verb::Go => "go",
            Verb::Take => "take",
            Verb::Put => "put",
            Verb::Insert => "insert",
            Verb::Open => "open",
            Verb::Examine => "examine",
            Verb::Look => "look",
            Verb::Inventory => "inventory",
        }
    }

    pub fn from_name(name: &str) -> Option<Verb> {
        Verb::ALL.into_iter().find(|v| v.name() == name)
    }

    /// Arities accepted by the verb signature.
    pub fn arities(self) -> &'static [usize] {
        match self {
            Verb::Look | Verb::Inventory => &[0],
            Verb::Go | Verb::Open | Verb::Examine => &[1],
            Verb::Take => &[1, 2],
            Verb::Put | Verb::Insert => &[2],
        }
    }

    pub fn accepts_arity(self, arity: usize) -> bool {
        self.arities().contains(&arity)
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An action predicate is a verb at a fixed arity, e.g. `take/1` and `take/2`
/// are different predicates with separate rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ActionPredicate {
    pub verb: Verb,
    pub arity: usize,
}

impl ActionPredicate {
    pub fn new(verb: Verb, arity: usize) -> Result<Self> {
        if !verb.accepts_arity(arity) {
            return Err(Error::ActionArity {
                verb: verb.name().to_string(),
                expected: arity_list(verb),
                got: arity,
            });
        }
        Ok(ActionPredicate { verb, arity })
    }
}

impl fmt::Display for ActionPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.verb, self.arity)
    }
}

impl From<ActionPredicate> for String {
    fn from(p: ActionPredicate) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for ActionPredicate {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for ActionPredicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arity) = s
            .split_once('/')
            .ok_or_else(|| Error::UnknownVerb(s.to_string()))?;
        let verb = Verb::from_name(name).ok_or_else(|| Error::UnknownVerb(name.to_string()))?;
        let arity = arity
            .parse()
            .map_err(|_| Error::UnknownVerb(s.to_string()))?;
        ActionPredicate::new(verb, arity)
    }
}

fn arity_list(verb: Verb) -> String {
    verb.arities()
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(" or ")
}

/// A grounded command: a verb plus entity phrases or a direction.
///
/// Serialized as its rendered text (`"put blue moccasin on shoe cabinet"`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ActionCommand {
    verb: Verb,
    args: Vec<String>,
}

impl ActionCommand {
    pub fn new<S: Into<String>>(verb: Verb, args: impl IntoIterator<Item = S>) -> Result<Self> {
        let args: Vec<String> = args.into_iter().map(Into::into).collect();
        if !verb.accepts_arity(args.len()) {
            return Err(Error::ActionArity {
                verb: verb.name().to_string(),
                expected: arity_list(verb),
                got: args.len(),
            });
        }
        if args.iter().any(|a| a.trim().is_empty()) {
            return Err(Error::EmptyPhrase);
        }
        Ok(ActionCommand { verb, args })
    }

    pub fn verb(&self) -> Verb {
        self.verb
    }

    pub fn args(&self) -> &[String] {
        &self.args
    }

    pub fn predicate(&self) -> ActionPredicate {
        ActionPredicate {
            verb: self.verb,
            arity: self.args.len(),
        }
    }

    /// Renders the command the way the simulator lists it as admissible.
    pub fn render(&self) -> String {
        let a = &self.args;
        match (self.verb, a.len()) {
            (Verb::Take, 2) => format!("take {} from {}", a[0], a[1]),
            (Verb::Put, _) => format!("put {} on {}", a[0], a[1]),
            (Verb::Insert, _) => format!("insert {} into {}", a[0], a[1]),
            (verb, 0) => verb.name().to_string(),
            (verb, _) => format!("{} {}", verb.name(), a[0]),
        }
    }
}

impl fmt::Display for ActionCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl FromStr for ActionCommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        crate::parser::parse_action(s)
    }
}

impl From<ActionCommand> for String {
    fn from(a: ActionCommand) -> String {
        a.render()
    }
}

impl TryFrom<String> for ActionCommand {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}
