use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::action::{ActionCommand, Verb};
use super::engine::Game;
use super::spec::{
    Difficulty, Direction, EntityKind, EntitySpec, GameSpec, Location, RoomSpec, Split,
    DEFAULT_MAX_STEPS,
};
use super::vocab::{EntityVocabulary, HolderEntry, ObjectEntry};
use crate::error::{Error, Result};

struct Tier {
    rooms: usize,
    objects: RangeInclusive<usize>,
    distractors: RangeInclusive<usize>,
    floor_only: bool,
}

fn tier(difficulty: Difficulty) -> Tier {
    match difficulty {
        Difficulty::Easy => Tier {
            rooms: 1,
            objects: 1..=3,
            distractors: 0..=0,
            floor_only: true,
        },
        Difficulty::Medium => Tier {
            rooms: 1,
            objects: 2..=3,
            distractors: 1..=2,
            floor_only: false,
        },
        Difficulty::Hard => Tier {
            rooms: 2,
            objects: 3..=5,
            distractors: 1..=2,
            floor_only: false,
        },
    }
}

const FLOOR: &str = "floor";
const MAX_ATTEMPTS: usize = 2000;

/// Which of the two training-vocabulary splits a starting configuration
/// belongs to. Train and in-distribution games draw from disjoint halves of
/// the (object, initial location) space, so an in-distribution configuration
/// never occurs in any training game.
pub fn configuration_split(object_concept: &str, start: &str) -> Split {
    // FNV-1a, stable across platforms and releases.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in object_concept.bytes().chain([b'|']).chain(start.bytes()) {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    if h % 2 == 0 {
        Split::Train
    } else {
        Split::InDist
    }
}

/// Object concept of a generated phrase (`"brown golf shoe"` -> `"golf shoe"`).
fn concept_of<'v>(vocab: &'v EntityVocabulary, phrase: &str) -> Option<&'v ObjectEntry> {
    vocab
        .objects
        .iter()
        .find(|o| phrase == o.concept || phrase.ends_with(&format!(" {}", o.concept)))
}

/// The (object concept, initial location, goal holder) configuration of every
/// object in a spec. Initial location is a holder phrase or `"floor"`.
pub fn configurations(spec: &GameSpec, vocab: &EntityVocabulary) -> Vec<(String, String, String)> {
    spec.objects()
        .filter_map(|e| {
            let concept = concept_of(vocab, &e.phrase)?.concept.clone();
            let start = match &e.location {
                Location::Room(_) => FLOOR.to_string(),
                Location::Holder(h) => h.clone(),
            };
            let goal = spec.goal_map.get(&e.phrase)?.clone();
            Some((concept, start, goal))
        })
        .collect()
}

fn game_seed(seed: u64, difficulty: Difficulty, split: Split, index: usize) -> u64 {
    let tag = (difficulty as u64) << 8 | split as u64;
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(tag << 32)
        .wrapping_add(index as u64)
}

/// Generates `count` game specs of one difficulty for one split.
pub fn generate_games(
    difficulty: Difficulty,
    vocab: &EntityVocabulary,
    count: usize,
    split: Split,
    seed: u64,
) -> Result<Vec<GameSpec>> {
    let t = tier(difficulty);
    let pool: Vec<&ObjectEntry> = match split {
        Split::OutDist => vocab.held_out_objects().collect(),
        _ => vocab.train_objects().collect(),
    };
    check_capacity(difficulty, vocab, &t, &pool, split)?;
    (0..count)
        .map(|i| {
            let gs = game_seed(seed, difficulty, split, i);
            let mut rng = ChaCha8Rng::seed_from_u64(gs);
            for _ in 0..MAX_ATTEMPTS {
                if let Some(spec) = attempt(difficulty, vocab, &t, &pool, split, gs, &mut rng) {
                    return finish(spec);
                }
            }
            Err(Error::VocabularyTooSmall {
                difficulty,
                shortfall: format!("no valid {split} configuration found for game {i}"),
            })
        })
        .collect()
}

fn check_capacity(
    difficulty: Difficulty,
    vocab: &EntityVocabulary,
    t: &Tier,
    pool: &[&ObjectEntry],
    split: Split,
) -> Result<()> {
    let short = |shortfall: String| Err(Error::VocabularyTooSmall { difficulty, shortfall });
    let eligible = if t.floor_only && split != Split::OutDist {
        pool.iter()
            .filter(|o| configuration_split(&o.concept, FLOOR) == split)
            .count()
    } else {
        pool.len()
    };
    if eligible < *t.objects.end() {
        return short(format!(
            "needs {} {split} objects, vocabulary provides {eligible}",
            t.objects.end()
        ));
    }
    let min_holders = 1 + t.distractors.start().max(&(t.rooms - 1));
    if vocab.holders.len() < min_holders {
        return short(format!(
            "needs {min_holders} holders, vocabulary provides {}",
            vocab.holders.len()
        ));
    }
    if vocab.rooms.len() < t.rooms {
        return short(format!(
            "needs {} rooms, vocabulary provides {}",
            t.rooms,
            vocab.rooms.len()
        ));
    }
    if vocab.adjectives.is_empty() {
        return short("needs at least one adjective".to_string());
    }
    Ok(())
}

fn attempt(
    difficulty: Difficulty,
    vocab: &EntityVocabulary,
    t: &Tier,
    pool: &[&ObjectEntry],
    split: Split,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Option<GameSpec> {
    let n = rng.gen_range(t.objects.clone());
    let candidates: Vec<&ObjectEntry> = if t.floor_only && split != Split::OutDist {
        pool.iter()
            .copied()
            .filter(|o| configuration_split(&o.concept, FLOOR) == split)
            .collect()
    } else {
        pool.to_vec()
    };
    let objects: Vec<&ObjectEntry> = candidates.choose_multiple(rng, n).copied().collect();

    let mut holders: Vec<&HolderEntry> = Vec::new();
    for o in &objects {
        let h = vocab.holder(&o.holder)?;
        if !holders.iter().any(|x| x.phrase == h.phrase) {
            holders.push(h);
        }
    }
    let spare: Vec<&HolderEntry> = vocab
        .holders
        .iter()
        .filter(|h| !holders.iter().any(|x| x.phrase == h.phrase))
        .collect();
    let d = rng.gen_range(t.distractors.clone());
    holders.extend(spare.choose_multiple(rng, d).copied());
    if holders.len() < t.rooms {
        return None;
    }
    holders.shuffle(rng);

    // Room layout: the first room is the natural room of one of the holders.
    let first = holders.choose(rng)?.room.clone();
    let mut room_names = vec![first.clone()];
    let mut holder_room: Vec<usize> = vec![0; holders.len()];
    if t.rooms == 2 {
        let others: Vec<&String> = holders
            .iter()
            .map(|h| &h.room)
            .filter(|r| **r != first)
            .chain(vocab.rooms.iter().filter(|r| **r != first))
            .collect();
        let second = (*others.first()?).clone();
        room_names.push(second.clone());
        for (i, h) in holders.iter().enumerate() {
            holder_room[i] = if h.room == first {
                0
            } else if h.room == second {
                1
            } else {
                rng.gen_range(0..2)
            };
        }
        for r in 0..2 {
            if !holder_room.contains(&r) {
                let i = rng.gen_range(0..holders.len());
                holder_room[i] = r;
            }
        }
        if !(holder_room.contains(&0) && holder_room.contains(&1)) {
            return None;
        }
    }

    let mut rooms: Vec<RoomSpec> = room_names
        .iter()
        .map(|name| RoomSpec {
            name: name.clone(),
            exits: BTreeMap::new(),
        })
        .collect();
    if t.rooms == 2 {
        let dir = *[Direction::East, Direction::North].choose(rng)?;
        rooms[0].exits.insert(dir, room_names[1].clone());
        rooms[1].exits.insert(dir.opposite(), room_names[0].clone());
    }

    let mut entities: Vec<EntitySpec> = holders
        .iter()
        .enumerate()
        .map(|(i, h)| EntitySpec {
            phrase: h.phrase.clone(),
            kind: h.kind,
            location: Location::Room(room_names[holder_room[i]].clone()),
            closed: false,
        })
        .collect();

    let mut goal_map = BTreeMap::new();
    let mut crosses_rooms = false;
    for o in &objects {
        let goal_idx = holders.iter().position(|h| h.phrase == o.holder)?;
        let wrong: Vec<usize> = (0..holders.len()).filter(|&i| i != goal_idx).collect();
        let mut start = None;
        for _ in 0..20 {
            let candidate = if t.floor_only || wrong.is_empty() || rng.gen_bool(0.4) {
                let r = rng.gen_range(0..t.rooms);
                (FLOOR.to_string(), Location::Room(room_names[r].clone()), r)
            } else {
                let h = *wrong.choose(rng)?;
                (
                    holders[h].phrase.clone(),
                    Location::Holder(holders[h].phrase.clone()),
                    holder_room[h],
                )
            };
            if split == Split::OutDist || configuration_split(&o.concept, &candidate.0) == split {
                start = Some(candidate);
                break;
            }
        }
        let (_, location, start_room) = start?;
        crosses_rooms |= start_room != holder_room[goal_idx];
        let adjective = vocab.adjectives.choose(rng)?;
        let phrase = format!("{adjective} {}", o.concept);
        goal_map.insert(phrase.clone(), o.holder.clone());
        entities.push(EntitySpec {
            phrase,
            kind: EntityKind::Object,
            location,
            closed: false,
        });
    }
    if t.rooms == 2 && !crosses_rooms {
        return None;
    }

    Some(GameSpec {
        difficulty,
        rooms,
        entities,
        goal_map,
        seed,
        max_steps: DEFAULT_MAX_STEPS,
        witness: Vec::new(),
    })
}

fn finish(mut spec: GameSpec) -> Result<GameSpec> {
    spec.validate()?;
    spec.witness = plan_witness(&spec)?;
    let mut game = Game::new(&spec)?;
    for a in &spec.witness {
        game.step(a)?;
    }
    if game.score() != game.max_score() || !game.is_done() {
        return Err(Error::InvalidSpec(format!(
            "witness for game {} does not solve it",
            spec.seed
        )));
    }
    Ok(spec)
}

/// Shortest solving sequence for a spec whose containers all start open:
/// in each room, place what can be placed and pick up every misplaced object,
/// then move on. Every object costs one take and one placement, and the plan
/// crosses rooms only as often as some object requires.
pub fn plan_witness(spec: &GameSpec) -> Result<Vec<ActionCommand>> {
    if spec.entities.iter().any(|e| e.closed) {
        return Err(Error::InvalidSpec(
            "witness planning requires open containers".into(),
        ));
    }
    let room_of = |phrase: &str| spec.room_of(phrase).map(str::to_string);
    struct Item {
        phrase: String,
        start_room: String,
        start_holder: Option<String>,
        goal: String,
        goal_room: String,
        goal_kind: EntityKind,
    }
    let mut pending: Vec<Item> = Vec::new();
    for e in spec.objects() {
        let Some(goal) = spec.goal_map.get(&e.phrase) else {
            continue;
        };
        let start_holder = match &e.location {
            Location::Holder(h) if h == goal => continue,
            Location::Holder(h) => Some(h.clone()),
            Location::Room(_) => None,
        };
        pending.push(Item {
            phrase: e.phrase.clone(),
            start_room: room_of(&e.phrase).expect("validated"),
            start_holder,
            goal: goal.clone(),
            goal_room: room_of(goal).expect("validated"),
            goal_kind: spec.entity(goal).expect("validated").kind,
        });
    }

    let place = |item: &Item| {
        let verb = if item.goal_kind == EntityKind::Container {
            Verb::Insert
        } else {
            Verb::Put
        };
        ActionCommand::new(verb, [item.phrase.clone(), item.goal.clone()])
    };
    let mut plan = Vec::new();
    let mut carried: Vec<Item> = Vec::new();
    let mut here = spec.rooms[0].name.clone();
    let mut visits = 0;
    while !(pending.is_empty() && carried.is_empty()) {
        let (drop, keep): (Vec<Item>, Vec<Item>) =
            carried.into_iter().partition(|i| i.goal_room == here);
        for item in &drop {
            plan.push(place(item)?);
        }
        carried = keep;
        let (local, rest): (Vec<Item>, Vec<Item>) =
            pending.into_iter().partition(|i| i.start_room == here);
        pending = rest;
        for item in local {
            let take = match &item.start_holder {
                Some(h) => ActionCommand::new(Verb::Take, [item.phrase.clone(), h.clone()])?,
                None => ActionCommand::new(Verb::Take, [item.phrase.clone()])?,
            };
            plan.push(take);
            if item.goal_room == here {
                plan.push(place(&item)?);
            } else {
                carried.push(item);
            }
        }
        if pending.is_empty() && carried.is_empty() {
            break;
        }
        let room = spec
            .rooms
            .iter()
            .find(|r| r.name == here)
            .expect("current room exists");
        let Some((dir, next)) = room.exits.iter().next() else {
            return Err(Error::InvalidSpec("objects unreachable from the start room".into()));
        };
        plan.push(ActionCommand::new(Verb::Go, [dir.name()])?);
        here = next.clone();
        visits += 1;
        if visits > 2 * spec.rooms.len() {
            return Err(Error::InvalidSpec("witness planning supports two rooms".into()));
        }
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::world::replay;

    fn vocab() -> EntityVocabulary {
        EntityVocabulary::builtin()
    }

    #[test]
    fn easy_games_shape() {
        let specs = generate_games(Difficulty::Easy, &vocab(), 5, Split::Train, 1).unwrap();
        assert_eq!(specs.len(), 5);
        for s in &specs {
            assert_eq!(s.rooms.len(), 1);
            let n = s.objects().count();
            assert!((1..=3).contains(&n));
            assert_eq!(s.goal_map.len(), n);
            assert!(s.objects().all(|o| matches!(o.location, Location::Room(_))));
        }
        assert!(generate_games(Difficulty::Easy, &vocab(), 0, Split::Train, 1)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn medium_and_hard_shape() {
        for s in generate_games(Difficulty::Medium, &vocab(), 20, Split::Train, 2).unwrap() {
            assert_eq!(s.rooms.len(), 1);
            let goals: BTreeSet<&String> = s.goal_map.values().collect();
            assert!(s.holders().any(|h| !goals.contains(&h.phrase)), "needs a distractor");
        }
        for s in generate_games(Difficulty::Hard, &vocab(), 20, Split::Train, 2).unwrap() {
            assert_eq!(s.rooms.len(), 2);
            assert!(s
                .goal_map
                .iter()
                .any(|(o, h)| s.room_of(o) != s.room_of(h)));
        }
    }

    #[test]
    fn witnesses_are_optimal_and_solve() {
        for d in [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard] {
            for s in generate_games(d, &vocab(), 15, Split::Train, 3).unwrap() {
                assert_eq!(replay(&s, &s.witness).unwrap() as usize, s.goal_map.len());
                let lower = 2 * s.goal_map.len();
                assert!(s.witness.len() >= lower && s.witness.len() <= lower + 2);
            }
        }
    }

    #[test]
    fn splits_use_disjoint_material() {
        let v = vocab();
        let train = generate_games(Difficulty::Hard, &v, 40, Split::Train, 7).unwrap();
        let seen: BTreeSet<(String, String)> = train
            .iter()
            .flat_map(|s| configurations(s, &v))
            .map(|(o, start, _)| (o, start))
            .collect();
        for s in generate_games(Difficulty::Hard, &v, 10, Split::InDist, 7).unwrap() {
            for (o, start, _) in configurations(&s, &v) {
                assert!(!v.held_out.contains(&o));
                assert!(!seen.contains(&(o, start)));
            }
        }
        for s in generate_games(Difficulty::Medium, &v, 10, Split::OutDist, 7).unwrap() {
            assert!(configurations(&s, &v).iter().any(|(o, _, _)| v.held_out.contains(o)));
        }
    }

    #[test]
    fn deterministic_generation() {
        let a = generate_games(Difficulty::Hard, &vocab(), 5, Split::OutDist, 11).unwrap();
        let b = generate_games(Difficulty::Hard, &vocab(), 5, Split::OutDist, 11).unwrap();
        assert_eq!(a, b);
        let json = a[0].to_json().unwrap();
        assert_eq!(GameSpec::from_json(&json).unwrap(), a[0]);
    }

    #[test]
    fn small_vocabulary_is_reported() {
        let mut v = vocab();
        v.objects.truncate(2);
        v.held_out.clear();
        match generate_games(Difficulty::Hard, &v, 1, Split::Train, 0) {
            Err(Error::VocabularyTooSmall { shortfall, .. }) => assert!(shortfall.contains("objects")),
            other => panic!("{other:?}"),
        }
    }
}
