//! Executing horn rules as a policy.
//!
//! For each admissible command the rule for its predicate is invoked, head
//! variables are bound to the command's arguments, and body literals are
//! matched against the state facts by root noun. Likelihoods are then
//! normalized over the admissible set.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lnn::{ConjunctionNeuron, DEFAULT_ALPHA};
use crate::parser::{FactSet, Predicate};
use crate::rules_io::RuleFile;
use crate::world::{ActionCommand, ActionPredicate};

/// Head noun of a phrase, taken as its final token.
///
/// ```
/// use neurorule::policy::root_noun;
/// assert_eq!(root_noun("brown golf shoe").unwrap(), "shoe");
/// assert_eq!(root_noun("shoe cabinet").unwrap(), "cabinet");
/// assert!(root_noun("  ").is_err());
/// ```
pub fn root_noun(phrase: &str) -> Result<String> {
    phrase
        .split_whitespace()
        .last()
        .map(str::to_string)
        .ok_or(Error::EmptyPhrase)
}

fn root(phrase: &str) -> &str {
    phrase.split_whitespace().last().unwrap_or("")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleSource {
    #[default]
    Learned,
    Human,
}

/// A body literal: a state predicate over head variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Literal {
    pub predicate: Predicate,
    pub args: Vec<String>,
    #[serde(default)]
    pub negated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

impl Literal {
    pub fn positive(predicate: Predicate, args: &[&str]) -> Literal {
        Literal {
            predicate,
            args: args.iter().map(|a| a.to_string()).collect(),
            negated: false,
            weight: None,
        }
    }

    pub fn negative(predicate: Predicate, args: &[&str]) -> Literal {
        Literal {
            negated: true,
            ..Literal::positive(predicate, args)
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Literal {
        self.weight = Some(weight);
        self
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("¬")?;
        }
        write!(f, "{}({})", self.predicate, self.args.join(","))?;
        if let Some(w) = self.weight {
            write!(f, " @w={w}")?;
        }
        Ok(())
    }
}

/// A lifted action rule `head(vars) :- body`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HornRule {
    pub head: ActionPredicate,
    pub vars: Vec<String>,
    pub body: Vec<Literal>,
    #[serde(default)]
    pub source: RuleSource,
}

impl HornRule {
    /// Conventional head variables: `x`, then `y`.
    pub fn head_vars(arity: usize) -> Vec<String> {
        ["x", "y"][..arity].iter().map(|v| v.to_string()).collect()
    }

    pub fn new(head: ActionPredicate, body: Vec<Literal>) -> HornRule {
        HornRule {
            head,
            vars: HornRule::head_vars(head.arity),
            body,
            source: RuleSource::Learned,
        }
    }

    pub fn with_source(mut self, source: RuleSource) -> HornRule {
        self.source = source;
        self
    }

    /// First body variable that does not occur in the head.
    pub fn unsafe_variable(&self) -> Option<&str> {
        self.body
            .iter()
            .flat_map(|l| &l.args)
            .find(|a| !self.vars.contains(a))
            .map(String::as_str)
    }

    /// Structural problems: head arity, repeated head variables, literal
    /// arity, weights, safety.
    pub fn problem(&self) -> Option<String> {
        if self.vars.len() != self.head.arity {
            return Some(format!(
                "head `{}` lists {} variable(s)",
                self.head,
                self.vars.len()
            ));
        }
        let distinct: BTreeSet<&String> = self.vars.iter().collect();
        if distinct.len() != self.vars.len() {
            return Some(format!("head `{}` repeats a variable", self.head));
        }
        for lit in &self.body {
            if lit.args.len() != lit.predicate.arity() {
                return Some(format!(
                    "`{}` takes {} argument(s), got {}",
                    lit.predicate,
                    lit.predicate.arity(),
                    lit.args.len()
                ));
            }
            if let Some(w) = lit.weight {
                if !(w.is_finite() && w >= 0.0) {
                    return Some(format!("weight {w} on `{}` must be >= 0", lit.predicate));
                }
            }
        }
        None
    }

    fn head_text(&self) -> String {
        if self.vars.is_empty() {
            self.head.verb.name().to_string()
        } else {
            format!("{}({})", self.head.verb, self.vars.join(","))
        }
    }

    pub fn bind(&self, action: &ActionCommand) -> Result<Assignment> {
        if action.args().len() != self.vars.len() {
            return Err(Error::HeadArity {
                rule: self.head_text(),
                rule_arity: self.vars.len(),
                action_arity: action.args().len(),
            });
        }
        Ok(self
            .vars
            .iter()
            .cloned()
            .zip(action.args().iter().cloned())
            .collect())
    }
}

impl fmt::Display for HornRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.source == RuleSource::Human {
            f.write_str("[human] ")?;
        }
        f.write_str(&self.head_text())?;
        if !self.body.is_empty() {
            let body: Vec<String> = self.body.iter().map(|l| l.to_string()).collect();
            write!(f, " :- {}", body.join(" ∧ "))?;
        }
        f.write_str(".")
    }
}

/// Variable name to entity phrase.
pub type Assignment = BTreeMap<String, String>;

/// Facts keyed by predicate and argument root nouns.
#[derive(Debug, Clone, Default)]
pub struct FactIndex {
    facts: HashMap<(Predicate, Vec<String>), f64>,
}

impl FactIndex {
    pub fn new(facts: &FactSet) -> FactIndex {
        let mut index: HashMap<(Predicate, Vec<String>), f64> = HashMap::new();
        for f in facts {
            let key = (f.predicate, f.args.iter().map(|a| root(a).to_string()).collect());
            let c = index.entry(key).or_insert(0.0);
            *c = c.max(f.confidence);
        }
        FactIndex { facts: index }
    }

    /// Truth of `predicate(args)` under root-noun alignment: the highest
    /// confidence among matching facts, 0 if none.
    pub fn truth(&self, predicate: Predicate, args: &[&str]) -> f64 {
        let key = (predicate, args.iter().map(|a| root(a).to_string()).collect());
        self.facts.get(&key).copied().unwrap_or(0.0)
    }
}

/// Truth value of a literal under an assignment. Negation is negation as
/// failure: `1 − truth` of the positive literal.
pub fn match_literal(literal: &Literal, assignment: &Assignment, facts: &FactSet) -> Result<f64> {
    literal_truth(literal, assignment, &FactIndex::new(facts))
}

pub fn literal_truth(literal: &Literal, assignment: &Assignment, index: &FactIndex) -> Result<f64> {
    let args: Vec<&str> = literal
        .args
        .iter()
        .map(|v| {
            assignment
                .get(v)
                .map(String::as_str)
                .ok_or_else(|| Error::UnboundVariable(v.clone()))
        })
        .collect::<Result<_>>()?;
    let t = index.truth(literal.predicate, &args);
    Ok(if literal.negated { 1.0 - t } else { t })
}

/// How a rule body combines literal truths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scoring {
    /// Boolean AND of the body literals.
    #[default]
    Crisp,
    /// Weighted conjunction over positive literals (weight 1 when
    /// unannotated, bias 1); negated literals stay crisp.
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub likelihood: f64,
    /// No rule exists for the command's predicate.
    pub missing_rule: bool,
}

pub fn score_action(
    rules: &RuleFile,
    action: &ActionCommand,
    facts: &FactSet,
    scoring: Scoring,
) -> Result<Score> {
    score_indexed(rules, action, &FactIndex::new(facts), scoring)
}

pub fn score_indexed(
    rules: &RuleFile,
    action: &ActionCommand,
    index: &FactIndex,
    scoring: Scoring,
) -> Result<Score> {
    let Some(rule) = rules.rule_for(action.predicate()) else {
        return Ok(Score {
            likelihood: 0.0,
            missing_rule: true,
        });
    };
    let assignment = rule.bind(action)?;
    let likelihood = match scoring {
        Scoring::Crisp => {
            let mut v: f64 = 1.0;
            for lit in &rule.body {
                v = v.min(literal_truth(lit, &assignment, index)?);
            }
            v
        }
        Scoring::Weighted => {
            let mut inputs = Vec::new();
            let mut weights = Vec::new();
            for lit in &rule.body {
                let t = literal_truth(lit, &assignment, index)?;
                if lit.negated {
                    if t < 0.5 {
                        return Ok(Score {
                            likelihood: 0.0,
                            missing_rule: false,
                        });
                    }
                } else {
                    inputs.push(t);
                    weights.push(lit.weight.unwrap_or(1.0));
                }
            }
            ConjunctionNeuron::with_params(weights, 1.0, DEFAULT_ALPHA)?.forward(&inputs)?
        }
    };
    Ok(Score {
        likelihood,
        missing_rule: false,
    })
}

/// Probabilities over `admissible`. Commands whose predicate is outside
/// `allowed` get 0; the rest are proportional to their likelihood, or
/// uniform among themselves when every likelihood is 0. If `allowed`
/// excludes every admissible command, the distribution is uniform over all
/// of them.
pub fn action_distribution(
    rules: &RuleFile,
    admissible: &[ActionCommand],
    facts: &FactSet,
    allowed: Option<&BTreeSet<ActionPredicate>>,
    scoring: Scoring,
) -> Result<Vec<f64>> {
    distribution_indexed(rules, admissible, &FactIndex::new(facts), allowed, scoring)
}

fn distribution_indexed(
    rules: &RuleFile,
    admissible: &[ActionCommand],
    index: &FactIndex,
    allowed: Option<&BTreeSet<ActionPredicate>>,
    scoring: Scoring,
) -> Result<Vec<f64>> {
    let permitted: Vec<bool> = admissible
        .iter()
        .map(|a| allowed.is_none_or(|s| s.contains(&a.predicate())))
        .collect();
    let any_permitted = permitted.iter().any(|p| *p);
    let mut scores = Vec::with_capacity(admissible.len());
    for (a, ok) in admissible.iter().zip(&permitted) {
        scores.push(if *ok {
            score_indexed(rules, a, index, scoring)?.likelihood
        } else {
            0.0
        });
    }
    let total: f64 = scores.iter().sum();
    if total > 0.0 {
        return Ok(scores.into_iter().map(|s| s / total).collect());
    }
    let support: Vec<bool> = if any_permitted {
        permitted
    } else {
        vec![true; admissible.len()]
    };
    let n = support.iter().filter(|s| **s).count();
    Ok(support
        .into_iter()
        .map(|s| if s && n > 0 { 1.0 / n as f64 } else { 0.0 })
        .collect())
}

/// How ties among maximal actions are broken in greedy selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieBreak {
    /// Uniformly at random from the policy's seeded generator.
    #[default]
    Random,
    /// First in rendered-command order.
    Lexicographic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Greedy(TieBreak),
    Sample,
}

/// Chooses one admissible command per state.
pub trait Policy {
    fn choose(&mut self, facts: &FactSet, admissible: &[ActionCommand]) -> Result<usize>;
}

/// Uniform over admissible commands, optionally restricted to a set of
/// predicates.
#[derive(Debug, Clone)]
pub struct UniformPolicy {
    rng: ChaCha8Rng,
    allowed: Option<BTreeSet<ActionPredicate>>,
}

impl UniformPolicy {
    pub fn new(seed: u64) -> UniformPolicy {
        UniformPolicy {
            rng: ChaCha8Rng::seed_from_u64(seed),
            allowed: None,
        }
    }

    pub fn restricted(seed: u64, allowed: BTreeSet<ActionPredicate>) -> UniformPolicy {
        UniformPolicy {
            allowed: Some(allowed),
            ..UniformPolicy::new(seed)
        }
    }
}

impl Policy for UniformPolicy {
    fn choose(&mut self, _facts: &FactSet, admissible: &[ActionCommand]) -> Result<usize> {
        let mut idx: Vec<usize> = (0..admissible.len())
            .filter(|&i| {
                self.allowed
                    .as_ref()
                    .is_none_or(|s| s.contains(&admissible[i].predicate()))
            })
            .collect();
        if idx.is_empty() {
            idx = (0..admissible.len()).collect();
        }
        idx.choose(&mut self.rng).copied().ok_or(Error::GameFinished)
    }
}

/// Rule-driven policy.
#[derive(Debug, Clone)]
pub struct RulePolicy {
    rules: RuleFile,
    allowed: Option<BTreeSet<ActionPredicate>>,
    scoring: Scoring,
    selection: Selection,
    rng: ChaCha8Rng,
}

impl RulePolicy {
    pub fn new(rules: RuleFile, selection: Selection, seed: u64) -> RulePolicy {
        RulePolicy {
            rules,
            allowed: None,
            scoring: Scoring::Crisp,
            selection,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn with_allowed(mut self, allowed: Option<BTreeSet<ActionPredicate>>) -> RulePolicy {
        self.allowed = allowed;
        self
    }

    pub fn with_scoring(mut self, scoring: Scoring) -> RulePolicy {
        self.scoring = scoring;
        self
    }

    pub fn rules(&self) -> &RuleFile {
        &self.rules
    }

    pub fn distribution(&self, facts: &FactSet, admissible: &[ActionCommand]) -> Result<Vec<f64>> {
        let index = FactIndex::new(facts);
        distribution_indexed(&self.rules, admissible, &index, self.allowed.as_ref(), self.scoring)
    }
}

impl Policy for RulePolicy {
    fn choose(&mut self, facts: &FactSet, admissible: &[ActionCommand]) -> Result<usize> {
        if admissible.is_empty() {
            return Err(Error::GameFinished);
        }
        let probs = self.distribution(facts, admissible)?;
        match self.selection {
            Selection::Sample => {
                let u: f64 = self.rng.gen();
                let mut acc = 0.0;
                for (i, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return Ok(i);
                    }
                }
                Ok(probs.iter().rposition(|p| *p > 0.0).unwrap_or(0))
            }
            Selection::Greedy(tie) => {
                let best = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let top: Vec<usize> = (0..probs.len())
                    .filter(|&i| best - probs[i] <= 1e-12)
                    .collect();
                Ok(match tie {
                    TieBreak::Lexicographic => *top
                        .iter()
                        .min_by_key(|&&i| admissible[i].render())
                        .expect("nonempty"),
                    TieBreak::Random => *top.choose(&mut self.rng).expect("nonempty"),
                })
            }
        }
    }
}
