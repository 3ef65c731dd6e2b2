use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knowledge::CommonsenseGraph;
use crate::parser::{parse_observation, FactSet, NoiseConfig, NoiseInjector, Predicate};
use crate::policy::Policy;
use crate::world::{ActionCommand, ActionPredicate, Game, GameSpec};

/// One buffered step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub episode: usize,
    pub step: usize,
    pub state: FactSet,
    pub admissible: Vec<ActionCommand>,
    pub action: ActionCommand,
    pub reward: f64,
    /// Discounted return from this step to the end of the episode.
    pub ret: f64,
}

/// The command sequence of one played episode, enough to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub spec: usize,
    pub actions: Vec<ActionCommand>,
    pub total_reward: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Buffer {
    pub transitions: Vec<Transition>,
    pub episodes: Vec<EpisodeRecord>,
}

impl Buffer {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Transitions whose taken action has predicate `head`.
    pub fn sub_buffer(&self, head: ActionPredicate) -> Vec<&Transition> {
        self.transitions
            .iter()
            .filter(|t| t.action.predicate() == head)
            .collect()
    }

    pub fn extend(&mut self, other: Buffer) {
        let offset = self.episodes.len();
        self.episodes.extend(other.episodes);
        self.transitions.extend(other.transitions.into_iter().map(|mut t| {
            t.episode += offset;
            t
        }));
    }
}

/// `g_t = Σ_{k ≥ t} γ^{k−t} r_k`.
///
/// ```
/// use neurorule::learner::compute_returns;
/// let g = compute_returns(&[0.0, 0.0, 1.0], 0.9).unwrap();
/// assert!((g[0] - 0.81).abs() < 1e-12 && (g[1] - 0.9).abs() < 1e-12 && g[2] == 1.0);
/// ```
pub fn compute_returns(rewards: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidDiscount(gamma));
    }
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for (t, r) in rewards.iter().enumerate().rev() {
        acc = r + gamma * acc;
        out[t] = acc;
    }
    Ok(out)
}

/// State predicates seen in any state, and action predicates seen in any
/// admissible set.
pub fn extract_templates(
    buffer: &Buffer,
) -> Result<(BTreeSet<Predicate>, BTreeSet<ActionPredicate>)> {
    if buffer.is_empty() {
        return Err(Error::EmptyBuffer);
    }
    let states = buffer
        .transitions
        .iter()
        .flat_map(|t| t.state.iter().map(|f| f.predicate))
        .collect();
    let actions = buffer
        .transitions
        .iter()
        .flat_map(|t| t.admissible.iter().map(ActionCommand::predicate))
        .collect();
    Ok((states, actions))
}

/// Turns observation text plus the game's commonsense facts into the agent's
/// symbolic state, optionally corrupted.
pub fn symbolic_state(
    text: &str,
    commonsense: &FactSet,
    noise: Option<&mut NoiseInjector>,
) -> Result<FactSet> {
    let mut state = parse_observation(text)?;
    state.extend(commonsense.iter().cloned());
    Ok(match noise {
        Some(n) => n.apply(&state),
        None => state,
    })
}

/// Where states come from while playing.
#[derive(Debug, Clone)]
pub struct Perception<'g> {
    pub graph: &'g CommonsenseGraph,
    pub distractors: bool,
    pub noise: NoiseConfig,
}

impl<'g> Perception<'g> {
    pub fn clean(graph: &'g CommonsenseGraph) -> Perception<'g> {
        Perception {
            graph,
            distractors: true,
            noise: NoiseConfig::default(),
        }
    }
}

/// Plays `episodes` episodes, cycling through `specs`, and records every
/// step. Noise draws are seeded from `seed`.
pub fn collect(
    policy: &mut dyn Policy,
    specs: &[GameSpec],
    perception: &Perception<'_>,
    episodes: usize,
    gamma: f64,
    seed: u64,
) -> Result<Buffer> {
    if episodes == 0 {
        return Err(Error::Config("episodes must be positive".into()));
    }
    if specs.is_empty() {
        return Err(Error::NoEpisodes);
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidDiscount(gamma));
    }
    let mut noise = if perception.noise.is_clean() {
        None
    } else {
        Some(NoiseInjector::new(NoiseConfig {
            seed: perception.noise.seed ^ seed.rotate_left(17),
            ..perception.noise
        })?)
    };
    let commonsense: Vec<FactSet> = specs
        .iter()
        .map(|s| perception.graph.subgraph_for(s, perception.distractors))
        .collect::<Result<_>>()?;
    let mut buffer = Buffer::default();
    for episode in 0..episodes {
        let idx = episode % specs.len();
        let (mut game, mut obs) = Game::start(&specs[idx])?;
        let mut steps: Vec<Transition> = Vec::new();
        while !obs.done {
            let state = symbolic_state(&obs.text, &commonsense[idx], noise.as_mut())?;
            let choice = policy.choose(&state, &obs.admissible)?;
            let action = obs.admissible[choice].clone();
            let next = game.step(&action)?;
            steps.push(Transition {
                episode,
                step: steps.len(),
                state,
                admissible: std::mem::take(&mut obs.admissible),
                action,
                reward: f64::from(next.reward),
                ret: 0.0,
            });
            obs = next;
        }
        let rewards: Vec<f64> = steps.iter().map(|t| t.reward).collect();
        for (t, g) in steps.iter_mut().zip(compute_returns(&rewards, gamma)?) {
            t.ret = g;
        }
        buffer.episodes.push(EpisodeRecord {
            spec: idx,
            actions: steps.iter().map(|t| t.action.clone()).collect(),
            total_reward: game.score(),
        });
        buffer.transitions.extend(steps);
    }
    Ok(buffer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::UniformPolicy;
    use crate::world::{replay, Difficulty, EntityVocabulary, Split};
    use proptest::prelude::*;

    fn setup() -> (Vec<GameSpec>, CommonsenseGraph) {
        let vocab = EntityVocabulary::builtin();
        let specs = crate::world::generate_games(Difficulty::Easy, &vocab, 3, Split::Train, 1).unwrap();
        (specs, CommonsenseGraph::from_vocabulary(&vocab))
    }

    #[test]
    fn returns_examples() {
        assert_eq!(compute_returns(&[1.0], 0.3).unwrap(), vec![1.0]);
        assert_eq!(compute_returns(&[1.0, 0.0, 2.0], 0.0).unwrap(), vec![1.0, 0.0, 2.0]);
        assert!(compute_returns(&[1.0], 1.5).is_err());
    }

    #[test]
    fn collection_is_bounded_and_deterministic() {
        let (specs, graph) = setup();
        let p = Perception::clean(&graph);
        let a = collect(&mut UniformPolicy::new(4), &specs[..1], &p, 10, 0.9, 4).unwrap();
        let b = collect(&mut UniformPolicy::new(4), &specs[..1], &p, 10, 0.9, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.len() <= 10 * 50);
        assert_eq!(a.episodes.len(), 10);
        for t in &a.transitions {
            assert!(t.admissible.contains(&t.action));
        }
    }

    #[test]
    fn episodes_end_at_done_and_replay() {
        let (specs, graph) = setup();
        let buf = collect(&mut UniformPolicy::new(2), &specs, &Perception::clean(&graph), 6, 0.9, 2)
            .unwrap();
        for (i, ep) in buf.episodes.iter().enumerate() {
            let spec = &specs[ep.spec];
            assert_eq!(replay(spec, &ep.actions).unwrap(), ep.total_reward);
            let steps = buf.transitions.iter().filter(|t| t.episode == i).count();
            assert_eq!(steps, ep.actions.len());
            if ep.total_reward as usize == spec.goal_map.len() {
                let mut game = Game::new(spec).unwrap();
                for a in &ep.actions {
                    assert!(!game.is_done());
                    game.step(a).unwrap();
                }
                assert!(game.is_done());
            }
        }
    }

    #[test]
    fn templates_of_an_easy_episode() {
        let (specs, graph) = setup();
        let buf = collect(&mut UniformPolicy::new(0), &specs[..1], &Perception::clean(&graph), 1, 0.9, 0)
            .unwrap();
        let (p, a) = extract_templates(&buf).unwrap();
        for needed in [Predicate::BeLocatedAt, Predicate::Carry, Predicate::AtLocation] {
            assert!(p.contains(&needed), "{needed}");
        }
        assert!(a.contains(&"take/1".parse().unwrap()));
        assert!(extract_templates(&Buffer::default()).is_err());
    }

    proptest! {
        #[test]
        fn returns_satisfy_recursion(
            rewards in prop::collection::vec(0.0f64..3.0, 1..30),
            gamma in 0.0f64..=1.0,
        ) {
            let g = compute_returns(&rewards, gamma).unwrap();
            let n = rewards.len();
            prop_assert!((g[n - 1] - rewards[n - 1]).abs() < 1e-12);
            for t in 0..n - 1 {
                prop_assert!((g[t] - (rewards[t] + gamma * g[t + 1])).abs() < 1e-9);
            }
        }
    }
}
