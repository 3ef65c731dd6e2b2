use crate::error::{Error, Result};
use crate::world::{ActionCommand, Verb};

/// Parses a rendered command back into its predicate form.
///
/// ```
/// use neurorule::parser::parse_action;
///
/// let put = parse_action("put blue moccasin on shoe cabinet").unwrap();
/// assert_eq!(put.predicate().to_string(), "put/2");
/// assert_eq!(put.args(), ["blue moccasin", "shoe cabinet"]);
/// assert_eq!(parse_action("take fork from cutlery drawer").unwrap().args().len(), 2);
/// assert!(parse_action("dance wildly").is_err());
/// ```
pub fn parse_action(text: &str) -> Result<ActionCommand> {
    let text = text.trim();
    let (word, rest) = match text.split_once(' ') {
        Some((w, r)) => (w, r.trim()),
        None => (text, ""),
    };
    let verb = Verb::from_name(word).ok_or_else(|| Error::UnknownVerb(word.to_string()))?;
    let args: Vec<&str> = match verb {
        Verb::Take => match rest.split_once(" from ") {
            Some((x, y)) => vec![x, y],
            None => vec![rest],
        },
        Verb::Put => two(rest, " on ", verb)?,
        Verb::Insert => two(rest, " into ", verb)?,
        _ if rest.is_empty() => vec![],
        _ => vec![rest],
    };
    let args: Vec<&str> = args.into_iter().filter(|a| !a.is_empty()).collect();
    ActionCommand::new(verb, args.into_iter().map(str::trim))
}

fn two<'t>(rest: &'t str, sep: &str, verb: Verb) -> Result<Vec<&'t str>> {
    match rest.split_once(sep) {
        Some((x, y)) => Ok(vec![x, y]),
        None => Err(Error::ActionArity {
            verb: verb.name().to_string(),
            expected: "2".into(),
            got: usize::from(!rest.is_empty()),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_unary() {
        assert_eq!(parse_action("look").unwrap().predicate().to_string(), "look/0");
        let go = parse_action("go east").unwrap();
        assert_eq!(go.verb(), Verb::Go);
        assert_eq!(go.args(), ["east"]);
        assert_eq!(parse_action("take red sock").unwrap().args(), ["red sock"]);
    }

    #[test]
    fn arity_errors() {
        assert!(matches!(parse_action("put sock"), Err(Error::ActionArity { .. })));
        assert!(matches!(parse_action("go"), Err(Error::ActionArity { .. })));
        assert!(matches!(parse_action(""), Err(Error::UnknownVerb(_))));
    }

    #[test]
    fn render_round_trip() {
        for text in [
            "take fork from cutlery drawer",
            "insert fork into cutlery drawer",
            "put scarf on coat rack",
            "examine toy box",
            "inventory",
            "open wardrobe",
        ] {
            assert_eq!(parse_action(text).unwrap().render(), text);
        }
    }
}
