//! Look-ahead pruning: an action predicate is dropped when replaying the
//! recorded episodes without any of its commands leaves the mean episodic
//! reward unchanged.
//!
//! ```
//! use neurorule::pruner::{prune, Episode, Verdict};
//! use neurorule::world::{generate_games, Difficulty, EntityVocabulary, Split};
//!
//! let vocab = EntityVocabulary::builtin();
//! let spec = generate_games(Difficulty::Easy, &vocab, 1, Split::Train, 3).unwrap().remove(0);
//! let mut actions = vec!["look".parse().unwrap()];
//! actions.extend(spec.witness.iter().cloned());
//! let episode = Episode::replayed(spec, actions).unwrap();
//! let all = ["look/0", "take/1", "put/2", "insert/2"].map(|p| p.parse().unwrap());
//! let report = prune(&[episode], &all.into(), 0.0).unwrap();
//! assert_eq!(report.verdict(&"look/0".parse().unwrap()), Some(Verdict::Pruned));
//! assert_eq!(report.verdict(&"take/1".parse().unwrap()), Some(Verdict::Retained));
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::{replay, ActionCommand, ActionPredicate, GameSpec};

/// A played episode, replayable from its spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub spec: GameSpec,
    pub actions: Vec<ActionCommand>,
    pub total_reward: u32,
}

impl Episode {
    /// Builds an episode whose reward is obtained by replaying `actions`.
    pub fn replayed(spec: GameSpec, actions: Vec<ActionCommand>) -> Result<Episode> {
        let total_reward = replay(&spec, &actions)?;
        Ok(Episode {
            spec,
            actions,
            total_reward,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pruned,
    Retained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateReport {
    pub predicate: ActionPredicate,
    pub mean_reward_with: f64,
    pub mean_reward_without: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneReport {
    pub episodes: usize,
    pub tolerance: f64,
    pub predicates: Vec<PredicateReport>,
    /// The action predicates kept for training and play.
    pub retained: BTreeSet<ActionPredicate>,
}

impl PruneReport {
    pub fn verdict(&self, predicate: &ActionPredicate) -> Option<Verdict> {
        self.predicates
            .iter()
            .find(|p| p.predicate == *predicate)
            .map(|p| p.verdict)
    }

    pub fn pruned(&self) -> impl Iterator<Item = &ActionPredicate> {
        self.predicates
            .iter()
            .filter(|p| p.verdict == Verdict::Pruned)
            .map(|p| &p.predicate)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Replays every episode once per predicate in `predicates` with that
/// predicate's commands removed, and prunes the predicate when the mean
/// reward moves by at most `tolerance`. The step cap applies to the commands
/// that remain.
pub fn prune(
    episodes: &[Episode],
    predicates: &BTreeSet<ActionPredicate>,
    tolerance: f64,
) -> Result<PruneReport> {
    if episodes.is_empty() {
        return Err(Error::NoEpisodes);
    }
    if !(tolerance >= 0.0) {
        return Err(Error::Config(format!("tolerance {tolerance} must be >= 0")));
    }
    let n = episodes.len() as f64;
    let mean_with = episodes.iter().map(|e| f64::from(e.total_reward)).sum::<f64>() / n;
    let mut reports = Vec::with_capacity(predicates.len());
    for &predicate in predicates {
        let mut total = 0.0;
        for e in episodes {
            let kept: Vec<ActionCommand> = e
                .actions
                .iter()
                .filter(|a| a.predicate() != predicate)
                .cloned()
                .collect();
            total += f64::from(replay(&e.spec, &kept)?);
        }
        let mean_without = total / n;
        let verdict = if (mean_with - mean_without).abs() <= tolerance {
            Verdict::Pruned
        } else {
            Verdict::Retained
        };
        reports.push(PredicateReport {
            predicate,
            mean_reward_with: mean_with,
            mean_reward_without: mean_without,
            verdict,
        });
    }
    let retained = reports
        .iter()
        .filter(|r| r.verdict == Verdict::Retained)
        .map(|r| r.predicate)
        .collect();
    Ok(PruneReport {
        episodes: episodes.len(),
        tolerance,
        predicates: reports,
        retained,
    })
}
