use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fact::{FactSet, SymbolicFact};
use crate::error::{Error, Result};

/// Parse-error emulation: facts are deleted with probability `p_drop`, and
/// each argument of a surviving fact is replaced by another entity with
/// probability `p_swap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub p_drop: f64,
    pub p_swap: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            p_drop: 0.0,
            p_swap: 0.0,
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_drop", self.p_drop), ("p_swap", self.p_swap)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(())
    }

    pub fn is_clean(&self) -> bool {
        self.p_drop == 0.0 && self.p_swap == 0.0
    }
}

/// Stateful noise source: one injector corrupts a whole stream of states
/// reproducibly from its seed.
#[derive(Debug, Clone)]
pub struct NoiseInjector {
    cfg: NoiseConfig,
    rng: ChaCha8Rng,
    vocabulary: Option<Vec<String>>,
}

impl NoiseInjector {
    pub fn new(cfg: NoiseConfig) -> Result<NoiseInjector> {
        cfg.validate()?;
        Ok(NoiseInjector {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            vocabulary: None,
        })
    }

    /// Swap replacements are drawn from `entities` instead of from the
    /// arguments of the fact set being corrupted.
    pub fn with_vocabulary(mut self, entities: impl IntoIterator<Item = String>) -> Self {
        let set: BTreeSet<String> = entities.into_iter().collect();
        self.vocabulary = Some(set.into_iter().collect());
        self
    }

    pub fn config(&self) -> &NoiseConfig {
        &self.cfg
    }

    pub fn apply(&mut self, facts: &FactSet) -> FactSet {
        if self.cfg.is_clean() {
            return facts.clone();
        }
        let local: Vec<String>;
        let pool: &[String] = match &self.vocabulary {
            Some(v) => v,
            None => {
                let set: BTreeSet<&String> = facts.iter().flat_map(|f| &f.args).collect();
                local = set.into_iter().cloned().collect();
                &local
            }
        };
        let mut out = FactSet::new();
        for fact in facts {
            if self.rng.gen_bool(self.cfg.p_drop) {
                continue;
            }
            let mut noisy: SymbolicFact = fact.clone();
            for arg in &mut noisy.args {
                if self.rng.gen_bool(self.cfg.p_swap) {
                    let others: Vec<&String> = pool.iter().filter(|e| *e != arg).collect();
                    if let Some(other) = others.choose(&mut self.rng) {
                        *arg = (*other).clone();
                    }
                }
            }
            out.insert(noisy);
        }
        out
    }
}

/// One-shot noise over a single fact set; deterministic in `cfg.seed`.
///
/// ```
/// use neurorule::parser::{apply_noise, NoiseConfig, Predicate, SymbolicFact, FactSet};
///
/// let facts: FactSet = ["fork", "spoon", "ladle"]
///     .into_iter()
///     .map(|e| SymbolicFact::unary(Predicate::BeLocatedAt, e))
///     .collect();
/// let none = NoiseConfig { p_drop: 1.0, p_swap: 0.0, seed: 3 };
/// assert!(apply_noise(&facts, &none).unwrap().is_empty());
/// let clean = NoiseConfig::default();
/// assert_eq!(apply_noise(&facts, &clean).unwrap(), facts);
/// ```
pub fn apply_noise(facts: &FactSet, cfg: &NoiseConfig) -> Result<FactSet> {
    Ok(NoiseInjector::new(*cfg)?.apply(facts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::Predicate;

    fn many(n: usize) -> FactSet {
        (0..n)
            .map(|i| SymbolicFact::unary(Predicate::BeLocatedAt, &format!("thing{i}")))
            .collect()
    }

    #[test]
    fn rejects_bad_probabilities() {
        let cfg = NoiseConfig {
            p_drop: 1.5,
            ..NoiseConfig::default()
        };
        assert!(apply_noise(&many(1), &cfg).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let cfg = NoiseConfig {
            p_drop: 0.3,
            p_swap: 0.3,
            seed: 11,
        };
        let facts = many(200);
        assert_eq!(apply_noise(&facts, &cfg).unwrap(), apply_noise(&facts, &cfg).unwrap());
    }

    #[test]
    fn swap_replaces_arguments() {
        let cfg = NoiseConfig {
            p_drop: 0.0,
            p_swap: 1.0,
            seed: 5,
        };
        let facts = many(10);
        let noisy = apply_noise(&facts, &cfg).unwrap();
        for f in &noisy {
            assert!(!facts.contains(f) || facts.len() > noisy.len());
        }
        let pool: BTreeSet<&String> = facts.iter().flat_map(|f| &f.args).collect();
        assert!(noisy.iter().all(|f| pool.contains(&f.args[0])));
    }

    #[test]
    fn vocabulary_pool() {
        let cfg = NoiseConfig {
            p_drop: 0.0,
            p_swap: 1.0,
            seed: 2,
        };
        let mut inj = NoiseInjector::new(cfg)
            .unwrap()
            .with_vocabulary(["zebra".to_string()]);
        let noisy = inj.apply(&many(3));
        assert_eq!(noisy.len(), 1);
        assert_eq!(noisy.iter().next().unwrap().args[0], "zebra");
    }
}
