use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::buffer::Transition;
use crate::error::Result;
use crate::lnn::ConjunctionNeuron;
use crate::parser::Predicate;
use crate::policy::{literal_truth, FactIndex, HornRule, Literal};
use crate::world::{ActionCommand, ActionPredicate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelStatus {
    Untrained,
    Trained,
    /// The sub-buffer held no transition with positive return.
    NoSignal,
    /// Outlier rejection found no usable subset and trained on everything.
    Fallback,
}

/// A weighted conjunction over candidate literals for one action predicate.
///
/// `literals` lists every candidate; the neuron ranges over the `active`
/// ones only, and inactive literals carry weight 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleModel {
    pub head: ActionPredicate,
    pub literals: Vec<Literal>,
    pub active: Vec<usize>,
    pub neuron: ConjunctionNeuron,
    pub status: ModelStatus,
}

/// Candidate body literals for `head` over state predicates `predicates`:
/// `p(x)` (and `p(y)`) for unary `p`, `q(x,y)` and `q(y,x)` for binary `q`.
pub fn candidate_literals(
    head: ActionPredicate,
    predicates: &BTreeSet<Predicate>,
    negations: bool,
) -> Vec<Literal> {
    let vars = HornRule::head_vars(head.arity);
    let mut out = Vec::new();
    for &p in predicates {
        match p.arity() {
            1 => {
                for v in &vars {
                    out.push(Literal::positive(p, &[v]));
                }
            }
            2 if vars.len() == 2 => {
                out.push(Literal::positive(p, &["x", "y"]));
                out.push(Literal::positive(p, &["y", "x"]));
            }
            _ => {}
        }
    }
    if negations {
        let negated: Vec<Literal> = out
            .iter()
            .map(|l| Literal {
                negated: true,
                ..l.clone()
            })
            .collect();
        out.extend(negated);
    }
    out
}

/// A training example: truth vectors of every admissible grounding of the
/// head predicate, which one was taken, and its return.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub groundings: Vec<Vec<f64>>,
    pub taken: usize,
    pub ret: f64,
}

impl RuleModel {
    pub fn new(head: ActionPredicate, literals: Vec<Literal>) -> RuleModel {
        let n = literals.len();
        RuleModel {
            head,
            literals,
            active: (0..n).collect(),
            neuron: ConjunctionNeuron::new(n),
            status: ModelStatus::Untrained,
        }
    }

    pub fn from_predicates(
        head: ActionPredicate,
        predicates: &BTreeSet<Predicate>,
        negations: bool,
    ) -> RuleModel {
        RuleModel::new(head, candidate_literals(head, predicates, negations))
    }

    /// Weight per candidate literal (0 for inactive ones).
    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.literals.len()];
        for (slot, &i) in self.active.iter().enumerate() {
            w[i] = self.neuron.weights()[slot];
        }
        w
    }

    pub fn truths(&self, action: &ActionCommand, index: &FactIndex) -> Result<Vec<f64>> {
        let rule = HornRule::new(self.head, Vec::new());
        let assignment = rule.bind(action)?;
        self.literals
            .iter()
            .map(|l| literal_truth(l, &assignment, index))
            .collect()
    }

    pub fn example(&self, t: &Transition) -> Result<Example> {
        let index = FactIndex::new(&t.state);
        let mut groundings = Vec::new();
        let mut taken = 0;
        for a in t.admissible.iter().filter(|a| a.predicate() == self.head) {
            if *a == t.action {
                taken = groundings.len();
            }
            groundings.push(self.truths(a, &index)?);
        }
        Ok(Example {
            groundings,
            taken,
            ret: t.ret,
        })
    }

    pub fn examples(&self, transitions: &[&Transition]) -> Result<Vec<Example>> {
        transitions.iter().map(|t| self.example(t)).collect()
    }

    pub(crate) fn project(&self, x: &[f64]) -> Vec<f64> {
        self.active.iter().map(|&i| x[i]).collect()
    }

    pub fn likelihood(&self, x: &[f64]) -> f64 {
        self.neuron
            .forward(&self.project(x))
            .expect("dimensions fixed at construction")
    }

    /// `π(taken)` with likelihoods smoothed by `epsilon` and normalized over
    /// the example's groundings.
    pub fn probability(&self, ex: &Example, epsilon: f64) -> f64 {
        let ls: Vec<f64> = ex.groundings.iter().map(|x| self.likelihood(x) + epsilon).collect();
        ls[ex.taken] / ls.iter().sum::<f64>()
    }

    /// Return-weighted negative log-likelihood, averaged over examples.
    pub fn loss(&self, examples: &[Example], epsilon: f64) -> f64 {
        if examples.is_empty() {
            return 0.0;
        }
        let total: f64 = examples
            .iter()
            .filter(|e| e.ret != 0.0)
            .map(|e| -e.ret * self.probability(e, epsilon).ln())
            .sum();
        total / examples.len() as f64
    }

    /// The training objective: [`loss`](Self::loss) plus `lambda` times the
    /// squared truth-table residuals.
    pub fn objective(&self, examples: &[Example], epsilon: f64, lambda: f64) -> f64 {
        let penalty: f64 = self.neuron.check_constraints().iter().map(|r| r * r).sum();
        self.loss(examples, epsilon) + lambda * penalty
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidates_by_arity() {
        let preds: BTreeSet<Predicate> =
            [Predicate::BeLocatedAt, Predicate::Carry, Predicate::AtLocation].into();
        let unary = candidate_literals("take/1".parse().unwrap(), &preds, false);
        let shown: Vec<String> = unary.iter().map(|l| l.to_string()).collect();
        assert_eq!(shown, ["be-located-at(x)", "carry(x)"]);
        let binary = candidate_literals("put/2".parse().unwrap(), &preds, false);
        assert_eq!(binary.len(), 6);
        assert!(binary.iter().any(|l| l.to_string() == "atlocation(y,x)"));
        assert!(candidate_literals("look/0".parse().unwrap(), &preds, false).is_empty());
        let with_neg = candidate_literals("put/2".parse().unwrap(), &preds, true);
        assert_eq!(with_neg.len(), 12);
        assert_eq!(with_neg.iter().filter(|l| l.negated).count(), 6);
    }

    #[test]
    fn candidates_are_safe() {
        let preds: BTreeSet<Predicate> = Predicate::ALL.into();
        for head in ["go/1", "take/2", "insert/2"] {
            let head: ActionPredicate = head.parse().unwrap();
            let rule = HornRule::new(head, candidate_literals(head, &preds, true));
            assert!(rule.unsafe_variable().is_none());
            assert!(rule.problem().is_none());
        }
    }
}
