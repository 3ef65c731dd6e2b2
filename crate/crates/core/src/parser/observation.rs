use super::fact::{FactSet, Predicate, SymbolicFact};
use crate::error::{Error, Result};

/// Extracts symbolic facts from simulator text.
///
/// Coordinated noun phrases become one fact each, and location sentences
/// keep only the located entity: `There is a X and a Y on the Z.` yields
/// `be-located-at(X)` and `be-located-at(Y)`. Sentences that carry no state
/// (action feedback, score and game-over notices) yield nothing.
///
/// ```
/// use neurorule::parser::{parse_observation, Predicate, SymbolicFact};
///
/// let facts = parse_observation(
///     "There is a brown golf shoe and a blue moccasin on the cabinet.",
/// )
/// .unwrap();
/// assert!(facts.contains(&SymbolicFact::unary(Predicate::BeLocatedAt, "brown golf shoe")));
/// assert!(facts.contains(&SymbolicFact::unary(Predicate::BeLocatedAt, "blue moccasin")));
/// assert_eq!(facts.len(), 2);
/// ```
pub fn parse_observation(text: &str) -> Result<FactSet> {
    let mut facts = FactSet::new();
    for sentence in text.split('.').map(str::trim).filter(|s| !s.is_empty()) {
        parse_sentence(sentence, &mut facts)?;
    }
    Ok(facts)
}

const FEEDBACK_PREFIXES: &[&str] = &[
    "You take the ",
    "You put the ",
    "You insert the ",
    "You open the ",
    "You go ",
    "You see nothing special about the ",
];

const FIXED: &[&str] = &[
    "The room is empty",
    "You are carrying nothing",
    "You look around",
    "You check your inventory",
    "Nothing happens",
    "Your score has just gone up by one point",
    "The game is over",
];

fn parse_sentence(sentence: &str, facts: &mut FactSet) -> Result<()> {
    let unmatched = || Error::UnmatchedSentence(format!("{sentence}."));
    if FIXED.contains(&sentence) {
        return Ok(());
    }
    if let Some(rest) = sentence.strip_prefix("There is ") {
        let (items, _place) = rest
            .rsplit_once(" on the ")
            .or_else(|| rest.rsplit_once(" in the "))
            .ok_or_else(unmatched)?;
        for item in split_list(items) {
            let phrase = strip_article(item).ok_or_else(unmatched)?;
            facts.insert(SymbolicFact::unary(Predicate::BeLocatedAt, phrase));
        }
        return Ok(());
    }
    if let Some(rest) = sentence.strip_prefix("You are carrying: ") {
        for item in split_list(rest) {
            let phrase = strip_article(item).ok_or_else(unmatched)?;
            facts.insert(SymbolicFact::unary(Predicate::Carry, phrase));
        }
        return Ok(());
    }
    if let Some(rest) = sentence.strip_prefix("You can go ") {
        for dir in split_list(rest) {
            if dir.is_empty() || dir.contains(' ') {
                return Err(unmatched());
            }
            facts.insert(SymbolicFact::unary(Predicate::Direction, dir));
        }
        return Ok(());
    }
    if let Some(rest) = sentence.strip_prefix("You are in the ") {
        return if rest.is_empty() { Err(unmatched()) } else { Ok(()) };
    }
    if let Some(rest) = sentence.strip_prefix("The ") {
        if let Some(container) = rest.strip_suffix(" is open") {
            facts.insert(SymbolicFact::unary(Predicate::Open, container));
            return Ok(());
        }
        if rest.ends_with(" is closed") {
            return Ok(());
        }
    }
    if FEEDBACK_PREFIXES
        .iter()
        .any(|p| sentence.strip_prefix(p).is_some_and(|r| !r.is_empty()))
    {
        return Ok(());
    }
    Err(unmatched())
}

fn split_list(list: &str) -> impl Iterator<Item = &str> {
    list.split(", ").flat_map(|s| s.split(" and ")).map(str::trim)
}

fn strip_article(item: &str) -> Option<&str> {
    item.strip_prefix("a ")
        .or_else(|| item.strip_prefix("an "))
        .filter(|p| !p.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unary(p: Predicate, a: &str) -> SymbolicFact {
        SymbolicFact::unary(p, a)
    }

    #[test]
    fn carry_sentence() {
        let facts = parse_observation("You are carrying: a blue moccasin.").unwrap();
        assert_eq!(facts.into_iter().collect::<Vec<_>>(), vec![unary(Predicate::Carry, "blue moccasin")]);
    }

    #[test]
    fn empty_text_is_empty_set() {
        assert!(parse_observation("").unwrap().is_empty());
        assert!(parse_observation("  ").unwrap().is_empty());
    }

    #[test]
    fn full_observation() {
        let text = "You put the red sock on the bed. Your score has just gone up by one point. \
                    You are in the bedroom. There is a bed and a wardrobe in the bedroom. \
                    There is a red sock on the bed. There is an orange mug, a fork and a yo-yo \
                    on the floor. The wardrobe is open. You can go east and north. \
                    You are carrying: a scarf and an apple.";
        let facts = parse_observation(text).unwrap();
        let expected: FactSet = [
            unary(Predicate::BeLocatedAt, "bed"),
            unary(Predicate::BeLocatedAt, "wardrobe"),
            unary(Predicate::BeLocatedAt, "red sock"),
            unary(Predicate::BeLocatedAt, "orange mug"),
            unary(Predicate::BeLocatedAt, "fork"),
            unary(Predicate::BeLocatedAt, "yo-yo"),
            unary(Predicate::Open, "wardrobe"),
            unary(Predicate::Direction, "east"),
            unary(Predicate::Direction, "north"),
            unary(Predicate::Carry, "scarf"),
            unary(Predicate::Carry, "apple"),
        ]
        .into_iter()
        .collect();
        assert_eq!(facts, expected);
    }

    #[test]
    fn state_free_sentences() {
        let text = "Nothing happens. The game is over. You are in the study. The room is empty. \
                    The toy box is closed. You are carrying nothing. You look around.";
        assert!(parse_observation(text).unwrap().is_empty());
    }

    #[test]
    fn rejects_foreign_sentences() {
        let err = parse_observation("You are in the hall. A troll blocks the way.").unwrap_err();
        assert!(matches!(err, Error::UnmatchedSentence(s) if s == "A troll blocks the way."));
        assert!(parse_observation("There is a fork.").is_err());
        assert!(parse_observation("There is fork on the table.").is_err());
    }
}
