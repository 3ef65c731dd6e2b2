use serde::{Deserialize, Serialize};

use super::buffer::Transition;
use super::model::{Example, ModelStatus, RuleModel};
use crate::error::{Error, Result};
use crate::lnn::{ConjunctionNeuron, Gradient, DEFAULT_LAMBDA};
use crate::policy::HornRule;

/// Hyperparameters for fitting one rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Weight of the truth-table penalty.
    pub lambda: f64,
    /// Smoothing added to every grounding likelihood before normalizing.
    pub epsilon: f64,
    /// A literal enters the neuron when its return-weighted lift over the
    /// other admissible groundings exceeds `lift_tolerance`, or when its lift
    /// is within the tolerance and it holds on at least `min_coverage` of the
    /// taken groundings.
    pub min_coverage: f64,
    pub lift_tolerance: f64,
    pub init_weight: f64,
    pub init_bias: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            learning_rate: 0.1,
            lambda: DEFAULT_LAMBDA,
            epsilon: 0.05,
            min_coverage: 0.5,
            lift_tolerance: 0.02,
            init_weight: 1.0,
            init_bias: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate {} must be positive", self.learning_rate));
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon {} must be positive", self.epsilon));
        }
        if !(0.0..=1.0).contains(&self.min_coverage) {
            return bad(format!("min_coverage {} outside [0, 1]", self.min_coverage));
        }
        if !(self.lift_tolerance >= 0.0) {
            return bad(format!("lift_tolerance {} must be >= 0", self.lift_tolerance));
        }
        if !(self.lambda >= 0.0 && self.init_weight >= 0.0 && self.init_bias >= 0.0) {
            return bad("lambda and initial parameters must be nonnegative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutlierConfig {
    /// Share of each subset, best returns first, kept for training.
    pub k_percent: f64,
    /// Subsets smaller than this share of the sub-buffer are rejected.
    pub min_support: f64,
}

impl Default for OutlierConfig {
    fn default() -> Self {
        OutlierConfig {
            k_percent: 50.0,
            min_support: 0.10,
        }
    }
}

impl OutlierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_percent > 0.0 && self.k_percent <= 100.0) {
            return Err(Error::Config(format!("k_percent {} outside (0, 100]", self.k_percent)));
        }
        if !(0.0..=1.0).contains(&self.min_support) {
            return Err(Error::Config(format!(
                "min_support {} outside [0, 1]",
                self.min_support
            )));
        }
        Ok(())
    }
}

/// Return-weighted statistics of each literal over the taken groundings:
/// how often it holds (coverage), and how much more often than on the
/// average admissible grounding of the same state (lift). `None` when no
/// example carries a positive return.
///
/// Lift is the policy-gradient direction for switching the literal on, taken
/// at the point where every grounding is equally likely.
fn literal_stats(examples: &[Example], n: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut mass = 0.0;
    let mut cov = vec![0.0; n];
    let mut lift = vec![0.0; n];
    for e in examples.iter().filter(|e| e.ret > 0.0) {
        mass += e.ret;
        let m = e.groundings.len() as f64;
        for k in 0..n {
            let taken = e.groundings[e.taken][k];
            let mean = e.groundings.iter().map(|x| x[k]).sum::<f64>() / m;
            cov[k] += e.ret * taken;
            lift[k] += e.ret * (taken - mean);
        }
    }
    (mass > 0.0).then(|| {
        (
            cov.into_iter().map(|c| c / mass).collect(),
            lift.into_iter().map(|l| l / mass).collect(),
        )
    })
}

/// Output gradient, except that a grounding clamped at 0 (or 1) whose loss
/// wants a larger (or smaller) output gets the gradient of the unclamped
/// form, so saturated mistakes can still be corrected.
fn inward_grad(neuron: &ConjunctionNeuron, x: &[f64], upstream: f64) -> Result<Gradient> {
    let z = neuron.pre_activation(x)?;
    if (z <= 0.0 && upstream < 0.0) || (z >= 1.0 && upstream > 0.0) {
        neuron.pre_activation_grad(x, upstream)
    } else {
        neuron.grad(x, upstream)
    }
}

fn fit(mut model: RuleModel, examples: &[Example], cfg: &TrainConfig) -> Result<RuleModel> {
    let n = model.literals.len();
    let Some((cov, lift)) = literal_stats(examples, n) else {
        model.status = ModelStatus::NoSignal;
        return Ok(model);
    };
    model.active = (0..n)
        .filter(|&k| {
            lift[k] > cfg.lift_tolerance
                || (lift[k] >= -cfg.lift_tolerance && cov[k] >= cfg.min_coverage)
        })
        .collect();
    model.neuron = ConjunctionNeuron::with_params(
        vec![cfg.init_weight; model.active.len()],
        cfg.init_bias,
        model.neuron.alpha(),
    )?;
    let projected: Vec<(Vec<Vec<f64>>, usize, f64)> = examples
        .iter()
        .filter(|e| e.ret != 0.0)
        .map(|e| {
            let xs = e.groundings.iter().map(|x| model.project(x)).collect();
            (xs, e.taken, e.ret)
        })
        .collect();
    let scale = 1.0 / examples.len() as f64;
    for _ in 0..cfg.epochs {
        let mut grads = Gradient::zeros(model.active.len());
        for (xs, taken, ret) in &projected {
            let ls: Vec<f64> = xs
                .iter()
                .map(|x| model.neuron.forward(x))
                .collect::<Result<_>>()?;
            let z: f64 = ls.iter().map(|l| l + cfg.epsilon).sum();
            for (i, x) in xs.iter().enumerate() {
                let own = if i == *taken { 1.0 / (ls[i] + cfg.epsilon) } else { 0.0 };
                let upstream = -ret * scale * (own - 1.0 / z);
                if upstream != 0.0 {
                    grads.accumulate(&inward_grad(&model.neuron, x, upstream)?);
                }
            }
        }
        model.neuron.update(&grads, cfg.learning_rate, cfg.lambda)?;
    }
    model.status = ModelStatus::Trained;
    Ok(model)
}

/// Fits `model` on the transitions of its own action predicate by gradient
/// descent on the return-weighted negative log-likelihood of the taken
/// grounding, normalized over the admissible groundings of that predicate.
///
/// An empty sub-buffer leaves the model untouched with status
/// [`ModelStatus::Untrained`].
pub fn train_rule(model: RuleModel, transitions: &[&Transition], cfg: &TrainConfig) -> Result<RuleModel> {
    cfg.validate()?;
    if let Some(t) = transitions.iter().find(|t| t.action.predicate() != model.head) {
        return Err(Error::Config(format!(
            "transition with action {} given to the {} model",
            t.action, model.head
        )));
    }
    if transitions.is_empty() {
        return Ok(model);
    }
    let examples = model.examples(transitions)?;
    fit(model, &examples, cfg)
}

/// Trains one model per candidate literal on the transitions where that
/// literal holds for the taken grounding (best `k_percent` by return), and
/// keeps the model with the lowest training objective over all transitions.
///
/// When every subset falls under `min_support`, plain [`train_rule`] is used
/// and the result is marked [`ModelStatus::Fallback`].
pub fn train_with_outlier_rejection(
    model: RuleModel,
    transitions: &[&Transition],
    outlier: &OutlierConfig,
    cfg: &TrainConfig,
) -> Result<RuleModel> {
    outlier.validate()?;
    cfg.validate()?;
    if transitions.is_empty() {
        return train_rule(model, transitions, cfg);
    }
    let examples = model.examples(transitions)?;
    let threshold = outlier.min_support * examples.len() as f64;
    let mut best: Option<(f64, RuleModel)> = None;
    for k in 0..model.literals.len() {
        let mut subset: Vec<&Example> = examples
            .iter()
            .filter(|e| e.groundings[e.taken][k] >= 0.5)
            .collect();
        if subset.is_empty() || (subset.len() as f64) < threshold {
            continue;
        }
        subset.sort_by(|a, b| b.ret.total_cmp(&a.ret));
        let keep = ((subset.len() as f64) * outlier.k_percent / 100.0).ceil() as usize;
        let kept: Vec<Example> = subset.into_iter().take(keep.max(1)).cloned().collect();
        let candidate = fit(model.clone(), &kept, cfg)?;
        if candidate.status != ModelStatus::Trained {
            continue;
        }
        let loss = candidate.objective(&examples, cfg.epsilon, cfg.lambda);
        if best.as_ref().is_none_or(|(l, _)| loss < *l) {
            best = Some((loss, candidate));
        }
    }
    match best {
        Some((_, m)) => Ok(m),
        None => {
            log::warn!("outlier rejection kept no subset for {}; training on all", model.head);
            let mut m = fit(model, &examples, cfg)?;
            if m.status == ModelStatus::Trained {
                m.status = ModelStatus::Fallback;
            }
            Ok(m)
        }
    }
}

/// Keeps the literals whose weight reaches `threshold`, annotated with their
/// weights rounded to four decimals.
///
/// ```
/// use neurorule::learner::{extract_crisp_rule, RuleModel};
/// use neurorule::lnn::ConjunctionNeuron;
/// use neurorule::parser::Predicate;
/// use neurorule::policy::Literal;
///
/// let mut model = RuleModel::new(
///     "take/2".parse().unwrap(),
///     vec![
///         Literal::positive(Predicate::BeLocatedAt, &["y"]),
///         Literal::positive(Predicate::Carry, &["x"]),
///     ],
/// );
/// model.neuron = ConjunctionNeuron::with_params(vec![0.9, 0.1], 1.0, 0.95).unwrap();
/// let rule = extract_crisp_rule(&model, 0.5);
/// assert_eq!(rule.to_string(), "take(x,y) :- be-located-at(y) @w=0.9.");
/// ```
pub fn extract_crisp_rule(model: &RuleModel, threshold: f64) -> HornRule {
    let body: Vec<_> = model
        .literals
        .iter()
        .zip(model.weights())
        .filter(|(_, w)| *w >= threshold)
        .map(|(l, w)| l.clone().with_weight((w * 1e4).round() / 1e4))
        .collect();
    if body.is_empty() {
        log::warn!("rule for {} has an empty body and always fires", model.head);
    }
    HornRule::new(model.head, body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{FactSet, Predicate, SymbolicFact};
    use crate::policy::Literal;
    use crate::world::{ActionCommand, ActionPredicate};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn put() -> ActionPredicate {
        "put/2".parse().unwrap()
    }

    fn cmd(s: &str) -> ActionCommand {
        crate::parser::parse_action(s).unwrap()
    }

    fn preds() -> BTreeSet<Predicate> {
        [Predicate::BeLocatedAt, Predicate::Carry, Predicate::AtLocation].into()
    }

    /// Carrying one of `objects`, choosing between `holders`. The rewarded
    /// grounding puts the object on its matching holder; `drop` removes the
    /// carry fact with the given probability.
    fn planted(n: usize, seed: u64, drop: f64) -> Vec<Transition> {
        let objects = ["sock", "mug", "fork", "shoe"];
        let holders = ["drawer", "shelf", "rack", "cabinet"];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let o = rng.gen_range(0..4);
                let mut state = FactSet::new();
                if rng.gen::<f64>() >= drop {
                    state.insert(SymbolicFact::unary(Predicate::Carry, objects[o]));
                }
                for (h, holder) in holders.iter().enumerate() {
                    state.insert(SymbolicFact::unary(Predicate::BeLocatedAt, holder));
                    state.insert(SymbolicFact::binary(Predicate::AtLocation, objects[h], holder));
                }
                let admissible: Vec<ActionCommand> = holders
                    .iter()
                    .map(|h| cmd(&format!("put {} on {h}", objects[o])))
                    .collect();
                Transition {
                    episode: i,
                    step: 0,
                    state,
                    action: admissible[o].clone(),
                    admissible,
                    reward: 1.0,
                    ret: 1.0,
                }
            })
            .collect()
    }

    fn body(rule: &HornRule) -> Vec<String> {
        rule.body
            .iter()
            .map(|l| Literal { weight: None, ..l.clone() }.to_string())
            .collect()
    }

    #[test]
    fn recovers_planted_conjunction() {
        let data = planted(60, 1, 0.0);
        let refs: Vec<&Transition> = data.iter().collect();
        let model = RuleModel::from_predicates(put(), &preds(), false);
        let trained = train_rule(model, &refs, &TrainConfig::default()).unwrap();
        assert_eq!(trained.status, ModelStatus::Trained);
        let rule = extract_crisp_rule(&trained, 0.5);
        let shown = body(&rule);
        assert!(shown.contains(&"carry(x)".into()), "{rule}");
        assert!(shown.contains(&"atlocation(x,y)".into()), "{rule}");
        assert!(!shown.iter().any(|l| l.contains("(y,x)") || l == "carry(y)"), "{rule}");
    }

    #[test]
    fn single_literal_rule_weights_straddle_threshold() {
        let data = planted(40, 2, 0.0);
        let refs: Vec<&Transition> = data.iter().collect();
        let lits = vec![
            Literal::positive(Predicate::AtLocation, &["x", "y"]),
            Literal::positive(Predicate::AtLocation, &["y", "x"]),
            Literal::positive(Predicate::Carry, &["y"]),
        ];
        let trained = train_rule(RuleModel::new(put(), lits), &refs, &TrainConfig::default()).unwrap();
        let w = trained.weights();
        assert!(w[0] > 0.5 && w[1] < 0.5 && w[2] < 0.5, "{w:?}");
    }

    #[test]
    fn zero_returns_leave_weights() {
        let mut data = planted(10, 3, 0.0);
        data.iter_mut().for_each(|t| t.ret = 0.0);
        let refs: Vec<&Transition> = data.iter().collect();
        let model = RuleModel::from_predicates(put(), &preds(), false);
        let trained = train_rule(model.clone(), &refs, &TrainConfig::default()).unwrap();
        assert_eq!(trained.weights(), model.weights());
        assert_eq!(trained.status, ModelStatus::NoSignal);
    }

    #[test]
    fn empty_sub_buffer_is_untrained() {
        let model = RuleModel::from_predicates(put(), &preds(), false);
        let trained = train_rule(model.clone(), &[], &TrainConfig::default()).unwrap();
        assert_eq!(trained, model);
        assert_eq!(trained.status, ModelStatus::Untrained);
    }

    #[test]
    fn foreign_transitions_rejected() {
        let data = planted(2, 3, 0.0);
        let refs: Vec<&Transition> = data.iter().collect();
        let model = RuleModel::from_predicates("insert/2".parse().unwrap(), &preds(), false);
        assert!(train_rule(model, &refs, &TrainConfig::default()).is_err());
    }

    #[test]
    fn outlier_rejection_agrees_on_clean_data() {
        let data = planted(60, 4, 0.0);
        let refs: Vec<&Transition> = data.iter().collect();
        let model = RuleModel::from_predicates(put(), &preds(), false);
        let cfg = TrainConfig::default();
        let plain = extract_crisp_rule(&train_rule(model.clone(), &refs, &cfg).unwrap(), 0.5);
        let or = train_with_outlier_rejection(model, &refs, &OutlierConfig::default(), &cfg).unwrap();
        assert_eq!(or.status, ModelStatus::Trained);
        assert_eq!(body(&plain), body(&extract_crisp_rule(&or, 0.5)));
    }

    #[test]
    fn outlier_rejection_keeps_noisy_literal() {
        let data = planted(200, 5, 0.2);
        let refs: Vec<&Transition> = data.iter().collect();
        let model = RuleModel::from_predicates(put(), &preds(), false);
        let cfg = TrainConfig { min_coverage: 0.0, ..TrainConfig::default() };
        let carry = model
            .literals
            .iter()
            .position(|l| l.to_string() == "carry(x)")
            .unwrap();
        let plain = train_rule(model.clone(), &refs, &cfg).unwrap();
        let or = train_with_outlier_rejection(model, &refs, &OutlierConfig::default(), &cfg).unwrap();
        assert!(plain.weights()[carry] < 0.5, "{:?}", plain.weights());
        let rule = extract_crisp_rule(&or, 0.5);
        let shown = body(&rule);
        assert!(shown.contains(&"carry(x)".into()) && shown.contains(&"atlocation(x,y)".into()), "{rule}");
    }

    #[test]
    fn full_support_requirement_falls_back() {
        let data = planted(50, 6, 0.3);
        let refs: Vec<&Transition> = data.iter().collect();
        let model = RuleModel::new(
            put(),
            vec![
                Literal::positive(Predicate::Carry, &["x"]),
                Literal::positive(Predicate::Carry, &["y"]),
            ],
        );
        let out = OutlierConfig { min_support: 1.0, ..OutlierConfig::default() };
        let m = train_with_outlier_rejection(model, &refs, &out, &TrainConfig::default()).unwrap();
        assert_eq!(m.status, ModelStatus::Fallback);
    }

    #[test]
    fn threshold_edges() {
        let mut model = RuleModel::from_predicates(put(), &preds(), false);
        model.neuron = ConjunctionNeuron::with_params(vec![0.2; 6], 1.0, 0.95).unwrap();
        assert!(extract_crisp_rule(&model, 0.5).body.is_empty());
        assert_eq!(extract_crisp_rule(&model, 0.0).body.len(), 6);
    }

    #[test]
    fn doubling_returns_keeps_the_rule() {
        let data = planted(60, 7, 0.0);
        let doubled: Vec<Transition> = data
            .iter()
            .cloned()
            .map(|mut t| {
                t.ret *= 2.0;
                t
            })
            .collect();
        let cfg = TrainConfig::default();
        let model = RuleModel::from_predicates(put(), &preds(), false);
        let a = train_rule(model.clone(), &data.iter().collect::<Vec<_>>(), &cfg).unwrap();
        let b = train_rule(model, &doubled.iter().collect::<Vec<_>>(), &cfg).unwrap();
        assert_eq!(body(&extract_crisp_rule(&a, 0.5)), body(&extract_crisp_rule(&b, 0.5)));
    }
}
