use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{OutlierConfig, TrainConfig};
use crate::lnn::DEFAULT_ALPHA;
use crate::parser::NoiseConfig;
use crate::policy::{Scoring, TieBreak};
use crate::world::Difficulty;

/// Everything that determines a training and evaluation run.
///
/// Read from TOML; every key is optional.
///
/// ```
/// use neurorule::harness::ExperimentConfig;
///
/// let cfg = ExperimentConfig::from_toml_str(r#"
/// difficulty = "medium"
/// episodes = 40
/// outlier = true
///
/// [train]
/// epochs = 50
/// "#).unwrap();
/// assert_eq!(cfg.episodes, 40);
/// assert_eq!(cfg.train.epochs, 50);
/// assert_eq!(cfg.milestone, 10);
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub difficulty: Difficulty,
    /// Number of generated training games, played in rotation.
    pub train_games: usize,
    /// Number of generated games per evaluation split.
    pub eval_games: usize,
    /// Seed of the evaluation game sets, shared by all training seeds.
    pub eval_seed: u64,
    /// Total training episodes, the pruning milestone included.
    pub episodes: usize,
    /// Uniform-policy episodes played before pruning and the first fit.
    pub milestone: usize,
    /// Episodes collected between refits.
    pub round: usize,
    /// Collect after the milestone by sampling from the current rules
    /// instead of uniformly over the retained predicates.
    pub on_policy: bool,
    /// Number of independent seeds, starting at `seed`.
    pub seeds: usize,
    pub seed: u64,
    pub gamma: f64,
    pub alpha: f64,
    /// Weight threshold for crisp rule extraction.
    pub tau: f64,
    pub prune: bool,
    pub prune_tolerance: f64,
    pub outlier: bool,
    /// Include negated candidate literals.
    pub negations: bool,
    /// Include distractor commonsense facts in the agent's state. Unset
    /// means on for medium and hard games, off for easy ones.
    pub distractors: Option<bool>,
    pub noise_drop: f64,
    pub noise_swap: f64,
    pub scoring: Scoring,
    pub tie_break: TieBreak,
    pub train: TrainConfig,
    pub outlier_rejection: OutlierConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            difficulty: Difficulty::Easy,
            train_games: 20,
            eval_games: 20,
            eval_seed: 1000,
            episodes: 100,
            milestone: 10,
            round: 10,
            on_policy: false,
            seeds: 5,
            seed: 0,
            gamma: 0.9,
            alpha: DEFAULT_ALPHA,
            tau: 0.5,
            prune: true,
            prune_tolerance: 0.0,
            outlier: false,
            negations: false,
            distractors: None,
            noise_drop: 0.0,
            noise_swap: 0.0,
            scoring: Scoring::Weighted,
            tie_break: TieBreak::Random,
            train: TrainConfig::default(),
            outlier_rejection: OutlierConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64).map(|i| self.seed + i).collect()
    }

    pub fn distractors_enabled(&self) -> bool {
        self.distractors.unwrap_or(self.difficulty != Difficulty::Easy)
    }

    pub fn noise(&self, seed: u64) -> NoiseConfig {
        NoiseConfig {
            p_drop: self.noise_drop,
            p_swap: self.noise_swap,
            seed,
        }
    }

    /// Rejects settings no run could use, before any work starts.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.episodes == 0 {
            return bad("episodes must be positive".into());
        }
        if self.milestone == 0 || self.milestone > self.episodes {
            return bad(format!(
                "milestone {} must be in 1..={}",
                self.milestone, self.episodes
            ));
        }
        if self.round == 0 {
            return bad("round must be positive".into());
        }
        if self.train_games == 0 || self.eval_games == 0 {
            return bad("game counts must be positive".into());
        }
        if self.seeds == 0 {
            return bad("seeds must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidDiscount(self.gamma));
        }
        if !(self.alpha > 0.5 && self.alpha <= 1.0) {
            return bad(format!("alpha {} outside (0.5, 1]", self.alpha));
        }
        if !self.tau.is_finite() || self.tau < 0.0 {
            return bad(format!("tau {} must be >= 0", self.tau));
        }
        if !(self.prune_tolerance >= 0.0) {
            return bad(format!("prune_tolerance {} must be >= 0", self.prune_tolerance));
        }
        self.noise(0).validate()?;
        self.train.validate()?;
        self.outlier_rejection.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
        assert_eq!(cfg.seed_list(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn distractors_follow_difficulty_unless_set() {
        let easy = ExperimentConfig::default();
        assert!(!easy.distractors_enabled());
        let hard = ExperimentConfig::from_toml_str("difficulty = \"hard\"").unwrap();
        assert!(hard.distractors_enabled());
        let forced = ExperimentConfig::from_toml_str("distractors = true").unwrap();
        assert!(forced.distractors_enabled());
    }

    #[test]
    fn bad_settings_are_rejected() {
        for text in [
            "episodes = 0",
            "milestone = 0",
            "episodes = 5",
            "gamma = 1.5",
            "alpha = 0.4",
            "noise_drop = 2.0",
            "seeds = 0",
            "unknown_key = 1",
            "difficulty = \"expert\"",
            "[outlier_rejection]\nk_percent = 0.0",
        ] {
            assert!(ExperimentConfig::from_toml_str(text).is_err(), "{text}");
        }
    }
}
