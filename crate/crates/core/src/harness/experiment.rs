use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::eval::{evaluate, EvalResult, EvalSettings};
use super::pipeline::{train_seed, TrainOutcome, Workbench};
use crate::error::{Error, Result};
use crate::world::Split;

impl ExperimentConfig {
    pub fn eval_settings(&self) -> EvalSettings {
        EvalSettings {
            scoring: self.scoring,
            tie_break: self.tie_break,
            distractors: self.distractors_enabled(),
            noise_drop: self.noise_drop,
            noise_swap: self.noise_swap,
        }
    }
}

/// Training outcomes for every seed, with each seed's rules evaluated on
/// the shared in- and out-of-distribution sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub outcomes: Vec<TrainOutcome>,
    pub in_dist: EvalResult,
    pub out_dist: EvalResult,
}

pub fn run_experiment(cfg: &ExperimentConfig, bench: &Workbench) -> Result<Experiment> {
    cfg.validate()?;
    let in_specs = bench.games(cfg, Split::InDist, cfg.eval_seed)?;
    let out_specs = bench.games(cfg, Split::OutDist, cfg.eval_seed)?;
    let settings = cfg.eval_settings();
    let snapshot = serde_json::to_value(cfg)?;
    let mut outcomes = Vec::new();
    let mut in_results = Vec::new();
    let mut out_results = Vec::new();
    for seed in cfg.seed_list() {
        let outcome = train_seed(cfg, bench, seed)?;
        in_results.push(evaluate(&outcome.rules, &in_specs, &bench.graph, &settings, &[seed])?);
        out_results.push(evaluate(&outcome.rules, &out_specs, &bench.graph, &settings, &[seed])?);
        outcomes.push(outcome);
    }
    let mut in_dist = EvalResult::merge(in_results)?;
    let mut out_dist = EvalResult::merge(out_results)?;
    in_dist.config = snapshot.clone();
    out_dist.config = snapshot;
    Ok(Experiment {
        outcomes,
        in_dist,
        out_dist,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub episodes: usize,
    pub split: Split,
    pub score_mean: f64,
    pub score_std: f64,
    pub steps_mean: f64,
    pub steps_std: f64,
}

/// Trains and evaluates at each episode budget. Budgets must ascend; a zero
/// budget is skipped.
pub fn learning_curve(
    cfg: &ExperimentConfig,
    bench: &Workbench,
    budgets: &[usize],
) -> Result<Vec<CurveRow>> {
    if budgets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("budgets {budgets:?} must be strictly ascending")));
    }
    let mut rows = Vec::new();
    for &budget in budgets {
        if budget == 0 {
            log::warn!("skipping episode budget 0");
            continue;
        }
        let at_budget = ExperimentConfig {
            episodes: budget,
            milestone: cfg.milestone.min(budget),
            ..cfg.clone()
        };
        let exp = run_experiment(&at_budget, bench)?;
        for (split, r) in [(Split::InDist, &exp.in_dist), (Split::OutDist, &exp.out_dist)] {
            rows.push(CurveRow {
                episodes: budget,
                split,
                score_mean: r.score_mean,
                score_std: r.score_std,
                steps_mean: r.steps_mean,
                steps_std: r.steps_std,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            episodes: 10,
            seeds: 2,
            train_games: 4,
            eval_games: 4,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn curve_rows_and_skips() {
        let bench = Workbench::default();
        let rows = learning_curve(&tiny(), &bench, &[0, 5]).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.episodes == 5));
        assert!(learning_curve(&tiny(), &bench, &[5, 5]).is_err());
    }

    #[test]
    fn experiment_pools_seeds() {
        let exp = run_experiment(&tiny(), &Workbench::default()).unwrap();
        assert_eq!(exp.outcomes.len(), 2);
        assert_eq!(exp.in_dist.seeds.len(), 2);
        assert_eq!(exp.out_dist.games.len(), 8);
        assert!(exp.in_dist.config.get("episodes").is_some());
    }
}
