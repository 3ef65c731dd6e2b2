use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knowledge::CommonsenseGraph;
use crate::learner::symbolic_state;
use crate::parser::{NoiseConfig, NoiseInjector};
use crate::policy::{Policy, RulePolicy, Scoring, Selection, TieBreak};
use crate::rules_io::RuleFile;
use crate::world::{ActionPredicate, Game, GameSpec};

/// How rules are played during evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub scoring: Scoring,
    pub tie_break: TieBreak,
    pub distractors: bool,
    pub noise_drop: f64,
    pub noise_swap: f64,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            scoring: Scoring::Weighted,
            tie_break: TieBreak::Random,
            distractors: true,
            noise_drop: 0.0,
            noise_swap: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameResult {
    pub seed: u64,
    pub game: usize,
    pub score: f64,
    pub steps: u32,
    pub optimal_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub score: f64,
    pub steps: f64,
}

/// Greedy-rollout metrics. Means and standard deviations are taken over
/// the per-seed averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub score_mean: f64,
    pub score_std: f64,
    pub steps_mean: f64,
    pub steps_std: f64,
    pub seeds: Vec<SeedResult>,
    pub games: Vec<GameResult>,
    pub settings: EvalSettings,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub config: serde_json::Value,
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl EvalResult {
    /// Pools results, e.g. of one rule file per training seed.
    pub fn from_seeds(
        seeds: Vec<SeedResult>,
        games: Vec<GameResult>,
        settings: EvalSettings,
    ) -> EvalResult {
        let scores: Vec<f64> = seeds.iter().map(|s| s.score).collect();
        let steps: Vec<f64> = seeds.iter().map(|s| s.steps).collect();
        let (score_mean, score_std) = mean_std(&scores);
        let (steps_mean, steps_std) = mean_std(&steps);
        EvalResult {
            score_mean,
            score_std,
            steps_mean,
            steps_std,
            seeds,
            games,
            settings,
            config: serde_json::Value::Null,
        }
    }

    pub fn merge(results: Vec<EvalResult>) -> Result<EvalResult> {
        let settings = results.first().ok_or(Error::NoEpisodes)?.settings.clone();
        let mut seeds = Vec::new();
        let mut games = Vec::new();
        for r in results {
            seeds.extend(r.seeds);
            games.extend(r.games);
        }
        Ok(EvalResult::from_seeds(seeds, games, settings))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per game rollout.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for g in &self.games {
            w.serialize(g).map_err(|e| Error::Config(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Mean of steps-to-finish over optimal steps, across games with a
    /// recorded witness.
    pub fn step_ratio(&self) -> Option<f64> {
        let ratios: Vec<f64> = self
            .games
            .iter()
            .filter_map(|g| g.optimal_steps.map(|o| f64::from(g.steps) / o as f64))
            .collect();
        (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64)
    }
}

/// Plays every game once per seed with greedy selection over `rules`.
/// Predicates without a rule score 0 and are only chosen as a fallback.
pub fn evaluate(
    rules: &RuleFile,
    specs: &[GameSpec],
    graph: &CommonsenseGraph,
    settings: &EvalSettings,
    seeds: &[u64],
) -> Result<EvalResult> {
    if specs.is_empty() {
        return Err(Error::Config("evaluation game set is empty".into()));
    }
    if seeds.is_empty() {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let heads: BTreeSet<ActionPredicate> = rules.rules().map(|r| r.head).collect();
    let mut per_seed = Vec::new();
    let mut games = Vec::new();
    let mut missing = BTreeSet::new();
    for &seed in seeds {
        let mut policy = RulePolicy::new(rules.clone(), Selection::Greedy(settings.tie_break), seed)
            .with_allowed(Some(heads.clone()))
            .with_scoring(settings.scoring);
        let noise_cfg = NoiseConfig {
            p_drop: settings.noise_drop,
            p_swap: settings.noise_swap,
            seed: seed ^ 0x5eed_0e7a,
        };
        let mut noise = if noise_cfg.is_clean() {
            None
        } else {
            Some(NoiseInjector::new(noise_cfg)?)
        };
        let mut scores = Vec::new();
        let mut steps = Vec::new();
        for (index, spec) in specs.iter().enumerate() {
            let commonsense = graph.subgraph_for(spec, settings.distractors)?;
            let (mut game, mut obs) = Game::start(spec)?;
            while !obs.done {
                missing.extend(
                    obs.admissible.iter().map(|a| a.predicate()).filter(|p| !heads.contains(p)),
                );
                let state = symbolic_state(&obs.text, &commonsense, noise.as_mut())?;
                let choice = policy.choose(&state, &obs.admissible)?;
                obs = game.step(&obs.admissible[choice])?;
            }
            let result = GameResult {
                seed,
                game: index,
                score: game.normalized_score(),
                steps: game.steps(),
                optimal_steps: spec.optimal_steps(),
            };
            scores.push(result.score);
            steps.push(f64::from(result.steps));
            games.push(result);
        }
        per_seed.push(SeedResult {
            seed,
            score: mean_std(&scores).0,
            steps: mean_std(&steps).0,
        });
    }
    if !missing.is_empty() {
        let names: Vec<String> = missing.iter().map(ToString::to_string).collect();
        log::warn!("no rule for admissible predicates {}; scored 0", names.join(", "));
    }
    Ok(EvalResult::from_seeds(per_seed, games, settings.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules_io::parse_rules;
    use crate::world::{generate_games, Difficulty, EntityVocabulary, Split};

    fn setup(difficulty: Difficulty, split: Split) -> (Vec<GameSpec>, CommonsenseGraph) {
        let vocab = EntityVocabulary::builtin();
        (
            generate_games(difficulty, &vocab, 8, split, 11).unwrap(),
            CommonsenseGraph::from_vocabulary(&vocab),
        )
    }

    const HUMAN: &str = "go(x) :- direction(x).
take(x) :- be-located-at(x).
take(x,y) :- ¬atlocation(x,y).
put(x,y) :- carry(x) ∧ atlocation(x,y).
insert(x,y) :- carry(x) ∧ atlocation(x,y).
";

    #[test]
    fn metric_helpers() {
        assert_eq!(mean_std(&[1.0, 1.0]), (1.0, 0.0));
        let (m, s) = mean_std(&[0.0, 1.0]);
        assert_eq!((m, s), (0.5, 0.5));
    }

    #[test]
    fn corrected_rules_solve_easy_games_optimally() {
        let (specs, graph) = setup(Difficulty::Easy, Split::InDist);
        let rules = parse_rules(HUMAN).unwrap();
        let r = evaluate(&rules, &specs, &graph, &EvalSettings::default(), &[1, 2]).unwrap();
        assert_eq!(r.score_mean, 1.0);
        assert_eq!(r.step_ratio(), Some(1.0));
        for g in &r.games {
            assert!(g.score >= 0.0 && g.score <= 1.0);
            assert!(g.steps as usize >= g.optimal_steps.unwrap() && g.steps <= 50);
        }
    }

    #[test]
    fn useless_rules_score_nothing() {
        let (specs, graph) = setup(Difficulty::Medium, Split::InDist);
        let rules = parse_rules("look.\n").unwrap();
        let r = evaluate(&rules, &specs, &graph, &EvalSettings::default(), &[0]).unwrap();
        assert_eq!(r.score_mean, 0.0);
        assert_eq!(r.steps_mean, 50.0);
    }

    #[test]
    fn empty_game_set_is_an_error() {
        let (_, graph) = setup(Difficulty::Easy, Split::InDist);
        assert!(evaluate(&RuleFile::new(), &[], &graph, &EvalSettings::default(), &[0]).is_err());
    }

    #[test]
    fn csv_has_a_row_per_rollout() {
        let (specs, graph) = setup(Difficulty::Easy, Split::OutDist);
        let rules = parse_rules(HUMAN).unwrap();
        let r = evaluate(&rules, &specs, &graph, &EvalSettings::default(), &[4, 5]).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * specs.len());
        assert!(text.starts_with("seed,game,score,steps,optimal_steps"));
    }
}
