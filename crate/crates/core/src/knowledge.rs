//! Commonsense `atlocation` triples and per-game subgraphs.
//!
//! Triple files are plain text, one triple per line:
//!
//! ```text
//! golf shoe<TAB>atlocation<TAB>shoe cabinet
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Duplicate triples
//! collapse to one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parser::{FactSet, Predicate, SymbolicFact};
use crate::policy::root_noun;
use crate::world::{EntityVocabulary, GameSpec};

pub const RELATION: &str = "atlocation";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    subject: String,
    object: String,
}

impl Triple {
    pub fn new(subject: impl Into<String>, object: impl Into<String>) -> Triple {
        Triple {
            subject: subject.into(),
            object: object.into(),
        }
    }

    pub fn subject(&self) -> &str {
        &self.subject
    }

    pub fn relation(&self) -> &str {
        RELATION
    }

    pub fn object(&self) -> &str {
        &self.object
    }

    pub fn to_fact(&self) -> SymbolicFact {
        SymbolicFact::binary(Predicate::AtLocation, &self.subject, &self.object)
    }
}

/// An immutable set of `atlocation` triples.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommonsenseGraph {
    triples: BTreeSet<Triple>,
}

impl FromIterator<Triple> for CommonsenseGraph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        CommonsenseGraph {
            triples: iter.into_iter().collect(),
        }
    }
}

impl CommonsenseGraph {
    /// Object-to-holder triples for every vocabulary object, plus
    /// holder-to-room triples for every holder.
    pub fn from_vocabulary(vocab: &EntityVocabulary) -> CommonsenseGraph {
        vocab
            .objects
            .iter()
            .map(|o| Triple::new(&o.concept, &o.holder))
            .chain(vocab.holders.iter().map(|h| Triple::new(&h.phrase, &h.room)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for t in &self.triples {
            let _ = writeln!(out, "{}\t{RELATION}\t{}", t.subject, t.object);
        }
        out
    }

    /// The game's slice of the graph as `atlocation` facts.
    ///
    /// Triples are aligned to game entities by root noun, so the graph's
    /// `golf shoe` covers the game's `brown golf shoe`. Every object-to-holder
    /// triple whose subject is a game object and whose object is a game holder
    /// is included; with `distractors`, holder-to-room triples for the game's
    /// holders and rooms are added as well.
    pub fn subgraph_for(&self, spec: &GameSpec, distractors: bool) -> Result<FactSet> {
        let mut by_root: BTreeMap<String, Vec<&Triple>> = BTreeMap::new();
        for t in &self.triples {
            by_root.entry(root_noun(&t.subject)?).or_default().push(t);
        }
        let holder_roots: BTreeMap<String, &str> = spec
            .holders()
            .map(|h| Ok((root_noun(&h.phrase)?, h.phrase.as_str())))
            .collect::<Result<_>>()?;
        let room_roots: BTreeSet<String> = spec
            .rooms
            .iter()
            .map(|r| root_noun(&r.name))
            .collect::<Result<_>>()?;

        let mut facts = FactSet::new();
        for (object, goal) in &spec.goal_map {
            let goal_root = root_noun(goal)?;
            let mut covered = false;
            for t in by_root.get(&root_noun(object)?).into_iter().flatten() {
                let holder_root = root_noun(&t.object)?;
                if holder_roots.contains_key(&holder_root) {
                    covered |= holder_root == goal_root;
                    facts.insert(t.to_fact());
                }
            }
            if !covered {
                return Err(Error::MissingCommonsense(object.clone()));
            }
        }
        if distractors {
            for root in holder_roots.keys() {
                for t in by_root.get(root).into_iter().flatten() {
                    if room_roots.contains(&root_noun(&t.object)?) {
                        facts.insert(t.to_fact());
                    }
                }
            }
        }
        Ok(facts)
    }
}

/// Parses triple-file text. `origin` only labels errors.
pub fn parse_triples(text: &str, origin: &Path) -> Result<CommonsenseGraph> {
    let mut triples = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let bad = |reason: String| Error::MalformedTriple {
            path: PathBuf::from(origin),
            line: i + 1,
            reason,
        };
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [subject, relation, object] = fields[..] else {
            return Err(bad(format!("expected 3 tab-separated fields, found {}", fields.len())));
        };
        if relation != RELATION {
            return Err(bad(format!("unsupported relation `{relation}`")));
        }
        if subject.is_empty() || object.is_empty() {
            return Err(bad("empty entity".into()));
        }
        triples.insert(Triple::new(subject, object));
    }
    Ok(CommonsenseGraph { triples })
}

pub fn load_triples(path: impl AsRef<Path>) -> Result<CommonsenseGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_triples(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{generate_games, Difficulty, Split};

    #[test]
    fn parses_and_dedups() {
        let text = "fork\tatlocation\tcutlery drawer\nsock\tatlocation\tlaundry basket\n\
                    fork\tatlocation\tcutlery drawer\n\n# note\nhat\tatlocation\tcoat rack\n";
        let g = parse_triples(text, Path::new("t.tsv")).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(parse_triples(&g.to_tsv(), Path::new("t.tsv")).unwrap(), g);
    }

    #[test]
    fn malformed_line_reports_number() {
        let text = "fork\tatlocation\tcutlery drawer\nsock\tlaundry basket\n";
        match parse_triples(text, Path::new("bad.tsv")) {
            Err(Error::MalformedTriple { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let text = "fork\tisa\tutensil\n";
        assert!(matches!(
            parse_triples(text, Path::new("bad.tsv")),
            Err(Error::MalformedTriple { line: 1, .. })
        ));
    }

    #[test]
    fn subgraph_covers_goals_without_distractors() {
        let vocab = EntityVocabulary::builtin();
        let graph = CommonsenseGraph::from_vocabulary(&vocab);
        for spec in generate_games(Difficulty::Medium, &vocab, 10, Split::Train, 4).unwrap() {
            let facts = graph.subgraph_for(&spec, false).unwrap();
            assert_eq!(facts.len(), spec.goal_map.len());
            for (object, holder) in &spec.goal_map {
                assert!(facts.iter().any(|f| {
                    root_noun(&f.args[0]).unwrap() == root_noun(object).unwrap()
                        && f.args[1] == *holder
                }));
            }
        }
    }

    #[test]
    fn missing_triple_is_an_error() {
        let vocab = EntityVocabulary::builtin();
        let spec = &generate_games(Difficulty::Easy, &vocab, 1, Split::Train, 1).unwrap()[0];
        let empty = CommonsenseGraph::default();
        assert!(matches!(
            empty.subgraph_for(spec, true),
            Err(Error::MissingCommonsense(_))
        ));
    }
}
