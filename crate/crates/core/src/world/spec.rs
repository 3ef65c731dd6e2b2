use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::action::ActionCommand;
use crate::error::{Error, Result};
use crate::policy::root_noun;

pub const DEFAULT_MAX_STEPS: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        })
    }
}

impl FromStr for Difficulty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            _ => Err(Error::Config(format!("unknown difficulty `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    InDist,
    OutDist,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::InDist => "in_dist",
            Split::OutDist => "out_dist",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "in_dist" | "in-dist" => Ok(Split::InDist),
            "out_dist" | "out-dist" => Ok(Split::OutDist),
            _ => Err(Error::Config(format!("unknown split `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    North,
    South,
    East,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::South,
        Direction::East,
        Direction::West,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Direction::North => "north",
            Direction::South => "south",
            Direction::East => "east",
            Direction::West => "west",
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::North => Direction::South,
            Direction::South => Direction::North,
            Direction::East => Direction::West,
            Direction::West => Direction::East,
        }
    }

    pub fn from_name(s: &str) -> Option<Direction> {
        Direction::ALL.into_iter().find(|d| d.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoomSpec {
    pub name: String,
    #[serde(default)]
    pub exits: BTreeMap<Direction, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Object,
    Container,
    Supporter,
}

impl EntityKind {
    pub fn is_holder(self) -> bool {
        !matches!(self, EntityKind::Object)
    }
}

/// Where an entity starts: holders always stand in a room, objects lie on a
/// room's floor or sit on/in a holder.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Room(String),
    Holder(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpec {
    pub phrase: String,
    pub kind: EntityKind,
    pub location: Location,
    /// Containers only: starts closed and must be opened before use.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub closed: bool,
}

/// Deterministic description of one cleanup game.
///
/// The player starts in `rooms[0]`. `witness` is an optimal solving sequence
/// recorded by the generator (empty for hand-written specs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub difficulty: Difficulty,
    pub rooms: Vec<RoomSpec>,
    pub entities: Vec<EntitySpec>,
    pub goal_map: BTreeMap<String, String>,
    pub seed: u64,
    #[serde(default = "default_max_steps")]
    pub max_steps: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<ActionCommand>,
}

fn default_max_steps() -> u32 {
    DEFAULT_MAX_STEPS
}

impl GameSpec {
    pub fn entity(&self, phrase: &str) -> Option<&EntitySpec> {
        self.entities.iter().find(|e| e.phrase == phrase)
    }

    pub fn objects(&self) -> impl Iterator<Item = &EntitySpec> {
        self.entities.iter().filter(|e| e.kind == EntityKind::Object)
    }

    pub fn holders(&self) -> impl Iterator<Item = &EntitySpec> {
        self.entities.iter().filter(|e| e.kind.is_holder())
    }

    /// Room a holder stands in, or the room whose floor an object lies on.
    pub fn room_of(&self, phrase: &str) -> Option<&str> {
        match &self.entity(phrase)?.location {
            Location::Room(r) => Some(r.as_str()),
            Location::Holder(h) => self.room_of(h),
        }
    }

    pub fn optimal_steps(&self) -> Option<usize> {
        (!self.witness.is_empty()).then_some(self.witness.len())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<GameSpec> {
        let spec: GameSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Checks structural invariants: unique phrases and root nouns, resolvable
    /// locations and exits, goal holders present, a nonzero step budget.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.rooms.is_empty() {
            return bad("a game needs at least one room".into());
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        let room_names: BTreeSet<&str> = self.rooms.iter().map(|r| r.name.as_str()).collect();
        if room_names.len() != self.rooms.len() {
            return bad("duplicate room name".into());
        }
        for room in &self.rooms {
            for target in room.exits.values() {
                if !room_names.contains(target.as_str()) {
                    return bad(format!("exit from `{}` leads to unknown room `{target}`", room.name));
                }
            }
        }
        let mut roots = BTreeSet::new();
        for name in room_names.iter() {
            roots.insert(root_noun(name)?);
        }
        let mut phrases = BTreeSet::new();
        for e in &self.entities {
            if !phrases.insert(e.phrase.as_str()) {
                return bad(format!("duplicate entity `{}`", e.phrase));
            }
            if !roots.insert(root_noun(&e.phrase)?) {
                return bad(format!("root noun of `{}` is ambiguous", e.phrase));
            }
            if e.closed && e.kind != EntityKind::Container {
                return bad(format!("`{}` is not a container and cannot be closed", e.phrase));
            }
        }
        for e in &self.entities {
            match (&e.location, e.kind) {
                (Location::Room(r), _) if !room_names.contains(r.as_str()) => {
                    return bad(format!("`{}` is in unknown room `{r}`", e.phrase));
                }
                (Location::Holder(_), k) if k.is_holder() => {
                    return bad(format!("holder `{}` must stand in a room", e.phrase));
                }
                (Location::Holder(h), _) => match self.entity(h) {
                    Some(holder) if holder.kind.is_holder() => {}
                    _ => return bad(format!("`{}` is on unknown holder `{h}`", e.phrase)),
                },
                _ => {}
            }
        }
        for (object, holder) in &self.goal_map {
            match self.entity(object) {
                Some(e) if e.kind == EntityKind::Object => {}
                _ => return bad(format!("goal for unknown object `{object}`")),
            }
            match self.entity(holder) {
                Some(e) if e.kind.is_holder() => {}
                _ => return bad(format!("goal holder `{holder}` is not present")),
            }
        }
        Ok(())
    }
}
