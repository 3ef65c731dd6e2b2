use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::knowledge::CommonsenseGraph;
use crate::learner::{
    collect, extract_crisp_rule, extract_templates, train_rule, train_with_outlier_rejection,
    Buffer, ModelStatus, Perception, RuleModel,
};
use crate::lnn::ConjunctionNeuron;
use crate::parser::Predicate;
use crate::policy::{Policy, RulePolicy, Selection, UniformPolicy};
use crate::pruner::{prune, Episode, PruneReport};
use crate::rules_io::RuleFile;
use crate::world::{generate_games, ActionPredicate, EntityVocabulary, GameSpec, Split};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub head: ActionPredicate,
    pub status: ModelStatus,
    pub transitions: usize,
    pub literals: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    /// Episodes played so far, this round included.
    pub episodes: usize,
    /// Mean normalized score of the episodes played this round.
    pub mean_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub seed: u64,
    pub state_predicates: BTreeSet<Predicate>,
    pub action_predicates: BTreeSet<ActionPredicate>,
    pub rounds: Vec<RoundSummary>,
    pub transitions: usize,
    pub models: Vec<ModelSummary>,
}

/// Artifacts of one training seed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub rules: RuleFile,
    pub prune: Option<PruneReport>,
    pub log: TrainLog,
}

/// The world shared by every seed of an experiment.
#[derive(Debug, Clone)]
pub struct Workbench {
    pub vocab: EntityVocabulary,
    pub graph: CommonsenseGraph,
}

impl Default for Workbench {
    fn default() -> Self {
        let vocab = EntityVocabulary::builtin();
        let graph = CommonsenseGraph::from_vocabulary(&vocab);
        Workbench { vocab, graph }
    }
}

impl Workbench {
    pub fn games(&self, cfg: &ExperimentConfig, split: Split, seed: u64) -> Result<Vec<GameSpec>> {
        let count = match split {
            Split::Train => cfg.train_games,
            _ => cfg.eval_games,
        };
        generate_games(cfg.difficulty, &self.vocab, count, split, seed)
    }
}

fn mean_score(buffer: &Buffer, specs: &[GameSpec]) -> f64 {
    let total: f64 = buffer
        .episodes
        .iter()
        .map(|e| f64::from(e.total_reward) / specs[e.spec].goal_map.len() as f64)
        .sum();
    total / buffer.episodes.len() as f64
}

/// Fits one rule per predicate in `heads` on the shared buffer. Models are
/// independent and run on scoped threads.
fn fit_rules(
    cfg: &ExperimentConfig,
    buffer: &Buffer,
    predicates: &BTreeSet<Predicate>,
    heads: &BTreeSet<ActionPredicate>,
) -> Result<Vec<RuleModel>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = heads
            .iter()
            .map(|&head| {
                scope.spawn(move || {
                    let mut model = RuleModel::from_predicates(head, predicates, cfg.negations);
                    model.neuron = ConjunctionNeuron::with_params(
                        model.neuron.weights().to_vec(),
                        model.neuron.bias(),
                        cfg.alpha,
                    )?;
                    let sub = buffer.sub_buffer(head);
                    if cfg.outlier {
                        train_with_outlier_rejection(model, &sub, &cfg.outlier_rejection, &cfg.train)
                    } else {
                        train_rule(model, &sub, &cfg.train)
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training thread panicked"))
            .collect()
    })
}

fn rule_file(cfg: &ExperimentConfig, seed: u64, models: &[RuleModel]) -> Result<RuleFile> {
    let mut file = RuleFile::new();
    file.push_comment(format!(
        "trained on {} games, {} episodes, seed {seed}",
        cfg.difficulty, cfg.episodes
    ));
    for m in models {
        file.upsert(extract_crisp_rule(m, cfg.tau));
    }
    Ok(file)
}

/// Plays `count` episodes starting at game `offset` of the rotation.
fn play(
    policy: &mut dyn Policy,
    specs: &[GameSpec],
    perception: &Perception<'_>,
    offset: usize,
    count: usize,
    gamma: f64,
    seed: u64,
) -> Result<(Buffer, Vec<GameSpec>)> {
    let rotated: Vec<GameSpec> = (0..specs.len().min(count))
        .map(|i| specs[(offset + i) % specs.len()].clone())
        .collect();
    let buffer = collect(policy, &rotated, perception, count, gamma, seed)?;
    Ok((buffer, rotated))
}

/// Trains rules for one seed: uniform play up to the milestone, pruning,
/// then rounds of play with the current rules, refitting after each round.
pub fn train_seed(cfg: &ExperimentConfig, bench: &Workbench, seed: u64) -> Result<TrainOutcome> {
    cfg.validate()?;
    let specs = bench.games(cfg, Split::Train, seed)?;
    let perception = Perception {
        graph: &bench.graph,
        distractors: cfg.distractors_enabled(),
        noise: cfg.noise(seed),
    };
    let mut uniform = UniformPolicy::new(seed);
    let (mut buffer, played) =
        play(&mut uniform, &specs, &perception, 0, cfg.milestone, cfg.gamma, seed)?;
    let mut rounds = vec![RoundSummary {
        episodes: cfg.milestone,
        mean_score: mean_score(&buffer, &played),
    }];
    let mut played_specs = played;
    let (predicates, actions) = extract_templates(&buffer)?;

    let report = if cfg.prune {
        let episodes: Vec<Episode> = buffer
            .episodes
            .iter()
            .map(|e| Episode {
                spec: played_specs[e.spec].clone(),
                actions: e.actions.clone(),
                total_reward: e.total_reward,
            })
            .collect();
        Some(prune(&episodes, &actions, cfg.prune_tolerance)?)
    } else {
        None
    };
    let heads = report.as_ref().map_or(actions.clone(), |r| r.retained.clone());

    let mut models = fit_rules(cfg, &buffer, &predicates, &heads)?;
    let mut done = cfg.milestone;
    let mut round_index = 1u64;
    while done < cfg.episodes {
        let count = cfg.round.min(cfg.episodes - done);
        let round_seed = seed.wrapping_add(round_index.wrapping_mul(0x9e37_79b9));
        let mut policy: Box<dyn Policy> = if cfg.on_policy {
            Box::new(
                RulePolicy::new(rule_file(cfg, seed, &models)?, Selection::Sample, round_seed)
                    .with_allowed(Some(heads.clone()))
                    .with_scoring(cfg.scoring),
            )
        } else {
            Box::new(UniformPolicy::restricted(round_seed, heads.clone()))
        };
        let (mut batch, played) =
            play(policy.as_mut(), &specs, &perception, done, count, cfg.gamma, round_seed)?;
        done += count;
        rounds.push(RoundSummary {
            episodes: done,
            mean_score: mean_score(&batch, &played),
        });
        let offset = played_specs.len();
        batch.episodes.iter_mut().for_each(|e| e.spec += offset);
        played_specs.extend(played);
        buffer.extend(batch);
        models = fit_rules(cfg, &buffer, &predicates, &heads)?;
        round_index += 1;
    }

    let rules = rule_file(cfg, seed, &models)?;
    let summaries = models
        .iter()
        .map(|m| ModelSummary {
            head: m.head,
            status: m.status,
            transitions: buffer.sub_buffer(m.head).len(),
            literals: m.literals.iter().map(ToString::to_string).collect(),
            weights: m.weights(),
            bias: m.neuron.bias(),
            rule: extract_crisp_rule(m, cfg.tau).to_string(),
        })
        .collect();
    Ok(TrainOutcome {
        rules,
        prune: report,
        log: TrainLog {
            seed,
            state_predicates: predicates,
            action_predicates: actions,
            rounds,
            transitions: buffer.len(),
            models: summaries,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ExperimentConfig {
        ExperimentConfig {
            episodes: 20,
            train_games: 5,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn training_is_deterministic() {
        let bench = Workbench::default();
        let a = train_seed(&quick(), &bench, 3).unwrap();
        let b = train_seed(&quick(), &bench, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.log.rounds.last().unwrap().episodes, 20);
    }

    #[test]
    fn rules_cover_exactly_the_retained_predicates() {
        let bench = Workbench::default();
        let out = train_seed(&quick(), &bench, 1).unwrap();
        let heads: BTreeSet<ActionPredicate> = out.rules.rules().map(|r| r.head).collect();
        assert_eq!(heads, out.prune.unwrap().retained);
    }

    #[test]
    fn zero_episodes_fail_before_training() {
        let cfg = ExperimentConfig {
            episodes: 0,
            ..quick()
        };
        assert!(train_seed(&cfg, &Workbench::default(), 0).is_err());
    }
}
