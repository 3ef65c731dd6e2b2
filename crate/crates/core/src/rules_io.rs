//! Rule files: one horn rule per line.
//!
//! ```text
//! # comment
//! go(x) :- direction(x).
//! put(x,y) :- carry(x) ∧ atlocation(x,y).
//! [human] take(x,y) :- ¬atlocation(x,y).
//! insert(x,y) :- carry(x) @w=0.97 ∧ atlocation(x,y) @w=1.2.
//! look.
//! ```
//!
//! * A head is an action verb with its variables in parentheses; zero-arity
//!   heads are bare (`look`). The verb's arity selects the predicate, so
//!   `take(x)` and `take(x,y)` are separate rules.
//! * Bodies are literals joined by `∧` (or `&`). A literal is a state
//!   predicate from the inventory applied to head variables, optionally
//!   negated with `¬` or `not`, optionally followed by `@w=<real>`.
//! * A rule without `:-` has an empty, always-true body.
//! * `[human]` marks a rule written or corrected by a person.
//! * Lines starting with `#` are comments and are kept in place.
//!
//! Every body variable must occur in the head, and each action predicate
//! may have at most one rule.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parser::Predicate;
use crate::policy::{HornRule, Literal, RuleSource};
use crate::world::{ActionPredicate, Verb};

/// First line of every serialized rule file. Skipped when parsing.
pub const HEADER: &str = "# neurorule rules v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RuleItem {
    Comment(String),
    Rule(HornRule),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RuleFile {
    pub items: Vec<RuleItem>,
}

impl RuleFile {
    pub fn new() -> RuleFile {
        RuleFile::default()
    }

    pub fn from_rules(rules: impl IntoIterator<Item = HornRule>) -> Result<RuleFile> {
        let file = RuleFile {
            items: rules.into_iter().map(RuleItem::Rule).collect(),
        };
        validate(&file)?;
        Ok(file)
    }

    pub fn rules(&self) -> impl Iterator<Item = &HornRule> {
        self.items.iter().filter_map(|i| match i {
            RuleItem::Rule(r) => Some(r),
            RuleItem::Comment(_) => None,
        })
    }

    pub fn rule_for(&self, head: ActionPredicate) -> Option<&HornRule> {
        self.rules().find(|r| r.head == head)
    }

    pub fn push_comment(&mut self, text: impl Into<String>) {
        self.items.push(RuleItem::Comment(text.into()));
    }

    /// Replaces the rule with the same head in place, or appends.
    pub fn upsert(&mut self, rule: HornRule) {
        for item in &mut self.items {
            if let RuleItem::Rule(r) = item {
                if r.head == rule.head {
                    *r = rule;
                    return;
                }
            }
        }
        self.items.push(RuleItem::Rule(rule));
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Checks head uniqueness, safety and literal arity. Line numbers count
/// items from 1.
pub fn validate(file: &RuleFile) -> Result<()> {
    let mut seen = Vec::new();
    for (i, item) in file.items.iter().enumerate() {
        let RuleItem::Rule(rule) = item else { continue };
        check_rule(rule, i + 1, &mut seen)?;
    }
    Ok(())
}

fn check_rule(rule: &HornRule, line: usize, seen: &mut Vec<ActionPredicate>) -> Result<()> {
    if let Some(message) = rule.problem() {
        return Err(Error::RuleSyntax {
            line,
            column: 1,
            message,
        });
    }
    if let Some(v) = rule.unsafe_variable() {
        return Err(Error::UnsafeVariable {
            line,
            variable: v.to_string(),
            head: rule.head.to_string(),
        });
    }
    if seen.contains(&rule.head) {
        return Err(Error::DuplicateHead {
            line,
            head: rule.head.to_string(),
        });
    }
    seen.push(rule.head);
    Ok(())
}

/// Parses and validates rule-file text.
///
/// ```
/// use neurorule::rules_io::parse_rules;
///
/// let file = parse_rules("take(x,y) :- not atlocation(x,y).").unwrap();
/// let rule = file.rules().next().unwrap();
/// assert!(rule.body[0].negated);
/// assert!(parse_rules("put(x,y) :- carry(z).").is_err());
/// ```
pub fn parse_rules(text: &str) -> Result<RuleFile> {
    let mut file = RuleFile::new();
    let mut seen = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed == HEADER {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            file.push_comment(comment.strip_prefix(' ').unwrap_or(comment));
            continue;
        }
        let rule = LineParser::new(raw, line_no).rule()?;
        check_rule(&rule, line_no, &mut seen)?;
        file.items.push(RuleItem::Rule(rule));
    }
    Ok(file)
}

/// Canonical text: the header comment, then each item on its own line.
pub fn serialize_rules(file: &RuleFile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    for item in &file.items {
        let _ = match item {
            RuleItem::Comment(c) if c.is_empty() => writeln!(out, "#"),
            RuleItem::Comment(c) => writeln!(out, "# {c}"),
            RuleItem::Rule(r) => writeln!(out, "{r}"),
        };
    }
    out
}

/// Overlays `edits` on `learned`: a rule in `edits` replaces the learned rule
/// with the same head in place, and rules with new heads are appended.
/// Comments in `edits` are not carried over.
pub fn apply_edit(learned: &RuleFile, edits: &RuleFile) -> Result<RuleFile> {
    validate(learned)?;
    validate(edits)?;
    let mut merged = learned.clone();
    for rule in edits.rules() {
        merged.upsert(rule.clone());
    }
    validate(&merged)?;
    Ok(merged)
}

struct LineParser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl LineParser {
    fn new(src: &str, line: usize) -> Self {
        LineParser {
            chars: src.chars().collect(),
            pos: 0,
            line,
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::RuleSyntax {
            line: self.line,
            column: self.pos + 1,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        let n = s.chars().count();
        if self.chars[self.pos..].iter().take(n).copied().eq(s.chars()) {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            let ok = if self.pos == start {
                c.is_ascii_lowercase()
            } else {
                c.is_ascii_alphanumeric() || c == '_' || c == '-'
            };
            if !ok {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected an identifier");
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn var_list(&mut self) -> Result<Vec<String>> {
        self.expect("(")?;
        let mut vars = vec![self.ident()?];
        while self.eat(",") {
            vars.push(self.ident()?);
        }
        self.expect(")")?;
        Ok(vars)
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            let more = c.is_ascii_digit()
                || matches!(c, 'e' | 'E' | '+' | '-')
                || (c == '.'
                    && self
                        .chars
                        .get(self.pos + 1)
                        .is_some_and(|d| d.is_ascii_digit()));
            if !more {
                break;
            }
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
            _ => {
                self.pos = start;
                self.err(format!("`{text}` is not a nonnegative weight"))
            }
        }
    }

    fn rule(&mut self) -> Result<HornRule> {
        let source = if self.eat("[human]") {
            RuleSource::Human
        } else {
            RuleSource::Learned
        };
        self.skip_ws();
        let head_col = self.pos;
        let name = self.ident()?;
        let Some(verb) = Verb::from_name(&name) else {
            self.pos = head_col;
            return self.err(format!("unknown action `{name}`"));
        };
        self.skip_ws();
        let vars = if self.peek() == Some('(') {
            self.var_list()?
        } else {
            Vec::new()
        };
        let head = match ActionPredicate::new(verb, vars.len()) {
            Ok(h) => h,
            Err(e) => {
                self.pos = head_col;
                return self.err(e.to_string());
            }
        };
        let mut body = Vec::new();
        if self.eat(":-") {
            body.push(self.literal()?);
            while self.eat("∧") || self.eat("&") {
                body.push(self.literal()?);
            }
        }
        self.expect(".")?;
        self.skip_ws();
        if self.pos < self.chars.len() {
            return self.err("unexpected text after `.`");
        }
        Ok(HornRule {
            head,
            vars,
            body,
            source,
        })
    }

    fn literal(&mut self) -> Result<Literal> {
        let mut negated = self.eat("¬");
        if !negated {
            self.skip_ws();
            let save = self.pos;
            if self.eat("not") && self.peek().is_some_and(char::is_whitespace) {
                negated = true;
            } else {
                self.pos = save;
            }
        }
        self.skip_ws();
        let col = self.pos;
        let name = self.ident()?;
        let Some(predicate) = Predicate::from_name(&name) else {
            self.pos = col;
            return self.err(format!("unknown predicate `{name}`"));
        };
        let args = self.var_list()?;
        if args.len() != predicate.arity() {
            self.pos = col;
            return self.err(format!(
                "`{name}` takes {} argument(s), got {}",
                predicate.arity(),
                args.len()
            ));
        }
        let weight = if self.eat("@w=") {
            Some(self.number()?)
        } else {
            None
        };
        Ok(Literal {
            predicate,
            args,
            negated,
            weight,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_table_rules() {
        let text = "go(x) :- direction(x).\n\
                    take(x) :- be-located-at(x).\n\
                    take(x,y) :- be-located-at(y).\n\
                    put(x,y) :- carry(x) ∧ atlocation(x,y).\n\
                    insert(x,y) :- carry(x) & atlocation(x,y).\n";
        let f = parse_rules(text).unwrap();
        assert_eq!(f.rules().count(), 5);
        let insert = f.rule_for("insert/2".parse().unwrap()).unwrap();
        assert_eq!(insert.body.len(), 2);
        assert!(f.rule_for("take/1".parse().unwrap()).is_some());
        assert!(f.rule_for("take/2".parse().unwrap()).is_some());
    }

    #[test]
    fn errors_carry_positions() {
        match parse_rules("go(x) :- direction(x).\nput(x,y) :- carry(z).") {
            Err(Error::UnsafeVariable { line, variable, .. }) => {
                assert_eq!((line, variable.as_str()), (2, "z"));
            }
            other => panic!("{other:?}"),
        }
        match parse_rules("go(x) :- direction(x)\n") {
            Err(Error::RuleSyntax { line, column, .. }) => assert_eq!((line, column), (1, 22)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_rules("go(x).\ngo(y) :- direction(y)."),
            Err(Error::DuplicateHead { line: 2, .. })
        ));
        assert!(matches!(
            parse_rules("fly(x)."),
            Err(Error::RuleSyntax { column: 1, .. })
        ));
        assert!(matches!(
            parse_rules("go(x) :- carry(x,x)."),
            Err(Error::RuleSyntax { column: 10, .. })
        ));
        assert!(parse_rules("put(x) :- carry(x).").is_err());
        assert!(parse_rules("take(x,x).").is_err());
    }

    #[test]
    fn serializer_round_trip() {
        let text = "# learned on hard games\n\
                    go(x) :- direction(x).\n\
                    [human] take(x,y) :- not atlocation(x,y).\n\
                    put(x,y) :- carry(x) @w=0.9731 ∧ atlocation(x,y) @w=1.25.\n\
                    look.\n";
        let f = parse_rules(text).unwrap();
        let out = serialize_rules(&f);
        assert!(out.starts_with(HEADER));
        assert!(out.contains("[human] take(x,y) :- ¬atlocation(x,y)."));
        assert!(out.contains("@w=0.9731"));
        let again = parse_rules(&out).unwrap();
        assert_eq!(again, f);
        assert_eq!(serialize_rules(&again), out);
    }

    #[test]
    fn empty_file() {
        let out = serialize_rules(&RuleFile::new());
        assert_eq!(out, format!("{HEADER}\n"));
        assert!(parse_rules(&out).unwrap().is_empty());
    }

    #[test]
    fn edits_override_and_append() {
        let learned = parse_rules("take(x,y) :- be-located-at(y).\ngo(x) :- direction(x).").unwrap();
        let edits = parse_rules("[human] take(x,y) :- ¬atlocation(x,y).\nopen(x).").unwrap();
        let merged = apply_edit(&learned, &edits).unwrap();
        let heads: Vec<String> = merged.rules().map(|r| r.head.to_string()).collect();
        assert_eq!(heads, ["take/2", "go/1", "open/1"]);
        let take = merged.rule_for("take/2".parse().unwrap()).unwrap();
        assert!(take.body[0].negated);
        assert_eq!(apply_edit(&learned, &RuleFile::new()).unwrap(), learned);
    }

    fn arb_literal() -> impl Strategy<Value = Literal> {
        (
            prop::sample::select(Predicate::ALL.to_vec()),
            any::<bool>(),
            any::<bool>(),
            prop::option::of(0.0f64..5.0),
        )
            .prop_map(|(p, neg, flip, w)| {
                let args: &[&str] = match (p.arity(), flip) {
                    (1, false) => &["x"],
                    (1, true) => &["y"],
                    (_, false) => &["x", "y"],
                    (_, true) => &["y", "x"],
                };
                Literal {
                    predicate: p,
                    args: args.iter().map(|s| s.to_string()).collect(),
                    negated: neg,
                    weight: w,
                }
            })
    }

    proptest! {
        #[test]
        fn round_trip_random_files(
            bodies in prop::collection::vec(prop::collection::vec(arb_literal(), 0..4), 1..5),
            human in prop::collection::vec(any::<bool>(), 5),
        ) {
            let heads = ["put/2", "insert/2", "take/2", "open/1", "go/1"];
            let mut file = RuleFile::new();
            file.push_comment("generated");
            for (i, body) in bodies.into_iter().enumerate() {
                let head: ActionPredicate = heads[i].parse().unwrap();
                let body: Vec<Literal> = body
                    .into_iter()
                    .filter(|l| head.arity == 2 || !l.args.contains(&"y".to_string()))
                    .collect();
                let source = if human[i] { RuleSource::Human } else { RuleSource::Learned };
                file.items.push(RuleItem::Rule(HornRule::new(head, body).with_source(source)));
            }
            validate(&file).unwrap();
            let text = serialize_rules(&file);
            let parsed = parse_rules(&text).unwrap();
            prop_assert_eq!(&parsed, &file);
            prop_assert_eq!(serialize_rules(&parsed), text);
        }
    }
}
