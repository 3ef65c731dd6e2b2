use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::action::{ActionCommand, Verb};
use super::spec::{Direction, EntityKind, GameSpec, Location};
use super::text;
use crate::error::{Error, Result};
use crate::parser::{FactSet, Predicate, SymbolicFact};

/// What the agent sees after `reset` or `step`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub text: String,
    pub admissible: Vec<ActionCommand>,
    pub done: bool,
    pub reward: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Place {
    Floor(usize),
    On(usize),
    Carried,
}

#[derive(Debug)]
struct Entity {
    phrase: String,
    kind: EntityKind,
    goal: Option<usize>,
}

/// Index-resolved, immutable view of a spec.
#[derive(Debug)]
struct World {
    spec: GameSpec,
    rooms: Vec<String>,
    exits: Vec<Vec<(Direction, usize)>>,
    entities: Vec<Entity>,
    start: Vec<Place>,
    start_closed: Vec<bool>,
}

impl World {
    fn build(spec: &GameSpec) -> Result<World> {
        spec.validate()?;
        let rooms: Vec<String> = spec.rooms.iter().map(|r| r.name.clone()).collect();
        let room_idx = |name: &str| rooms.iter().position(|r| r == name).expect("validated");
        let ent_idx =
            |name: &str| spec.entities.iter().position(|e| e.phrase == name).expect("validated");
        let exits = spec
            .rooms
            .iter()
            .map(|r| r.exits.iter().map(|(d, t)| (*d, room_idx(t))).collect())
            .collect();
        let entities = spec
            .entities
            .iter()
            .map(|e| Entity {
                phrase: e.phrase.clone(),
                kind: e.kind,
                goal: spec.goal_map.get(&e.phrase).map(|h| ent_idx(h)),
            })
            .collect();
        let start = spec
            .entities
            .iter()
            .map(|e| match &e.location {
                Location::Room(r) => Place::Floor(room_idx(r)),
                Location::Holder(h) => Place::On(ent_idx(h)),
            })
            .collect();
        let start_closed = spec.entities.iter().map(|e| e.closed).collect();
        Ok(World {
            spec: spec.clone(),
            rooms,
            exits,
            entities,
            start,
            start_closed,
        })
    }
}

/// A running game. Cheap to clone: the resolved world is shared.
#[derive(Debug, Clone)]
pub struct Game {
    world: Arc<World>,
    places: Vec<Place>,
    open: Vec<bool>,
    rewarded: Vec<bool>,
    player: usize,
    steps: u32,
    score: u32,
    done: bool,
}

/// Hashable snapshot of the mutable part of a game, used by search.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateKey {
    places: Vec<Place>,
    open: Vec<bool>,
    rewarded: Vec<bool>,
    player: usize,
}

impl Game {
    pub fn new(spec: &GameSpec) -> Result<Game> {
        let world = Arc::new(World::build(spec)?);
        let n = world.entities.len();
        let mut game = Game {
            places: world.start.clone(),
            open: world.start_closed.iter().map(|c| !c).collect(),
            rewarded: vec![false; n],
            player: 0,
            steps: 0,
            score: 0,
            done: false,
            world,
        };
        game.reset();
        Ok(game)
    }

    /// Starts a new game from `spec` and returns it with its first observation.
    pub fn start(spec: &GameSpec) -> Result<(Game, Observation)> {
        let mut game = Game::new(spec)?;
        let obs = game.reset();
        Ok((game, obs))
    }

    /// Returns the game to its initial state.
    pub fn reset(&mut self) -> Observation {
        self.places = self.world.start.clone();
        self.open = self.world.start_closed.iter().map(|c| !c).collect();
        self.rewarded.iter_mut().for_each(|r| *r = false);
        self.player = 0;
        self.steps = 0;
        self.score = 0;
        self.done = false;
        Observation {
            text: format!("{} {}", self.description(), self.inventory_text()),
            admissible: self.admissible(),
            done: false,
            reward: 0,
        }
    }

    pub fn spec(&self) -> &GameSpec {
        &self.world.spec
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn score(&self) -> u32 {
        self.score
    }

    pub fn max_score(&self) -> u32 {
        self.world.spec.goal_map.len() as u32
    }

    pub fn normalized_score(&self) -> f64 {
        match self.max_score() {
            0 => 1.0,
            m => f64::from(self.score) / f64::from(m),
        }
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn current_room(&self) -> &str {
        &self.world.rooms[self.player]
    }

    pub fn state_key(&self) -> StateKey {
        StateKey {
            places: self.places.clone(),
            open: self.open.clone(),
            rewarded: self.rewarded.clone(),
            player: self.player,
        }
    }

    fn ent(&self, i: usize) -> &Entity {
        &self.world.entities[i]
    }

    fn find(&self, phrase: &str) -> Option<usize> {
        self.world.entities.iter().position(|e| e.phrase == phrase)
    }

    fn holders_here(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.world.entities.len()).filter(move |&i| {
            self.ent(i).kind.is_holder() && self.places[i] == Place::Floor(self.player)
        })
    }

    fn floor_objects_here(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.world.entities.len()).filter(move |&i| {
            self.ent(i).kind == EntityKind::Object && self.places[i] == Place::Floor(self.player)
        })
    }

    fn contents(&self, holder: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.world.entities.len()).filter(move |&i| self.places[i] == Place::On(holder))
    }

    fn carried(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.world.entities.len()).filter(move |&i| self.places[i] == Place::Carried)
    }

    fn accessible(&self, holder: usize) -> bool {
        self.ent(holder).kind != EntityKind::Container || self.open[holder]
    }

    fn is_here(&self, holder: usize) -> bool {
        self.places[holder] == Place::Floor(self.player)
    }

    fn phrases(&self, idx: impl Iterator<Item = usize>) -> Vec<&str> {
        idx.map(|i| self.ent(i).phrase.as_str()).collect()
    }

    fn is_closable(&self, i: usize) -> bool {
        self.world.start_closed[i]
    }

    /// Room description: location, furniture, contents, doors and exits.
    pub fn description(&self) -> String {
        let room = self.current_room();
        let mut out = vec![text::location(room)];
        let holders: Vec<usize> = self.holders_here().collect();
        if !holders.is_empty() {
            out.push(text::there_is(&self.phrases(holders.iter().copied()), "in", room));
        }
        for &h in &holders {
            if !self.accessible(h) {
                continue;
            }
            let items = self.phrases(self.contents(h));
            if !items.is_empty() {
                let prep = if self.ent(h).kind == EntityKind::Container { "in" } else { "on" };
                out.push(text::there_is(&items, prep, &self.ent(h).phrase));
            }
        }
        let floor = self.phrases(self.floor_objects_here());
        if !floor.is_empty() {
            out.push(text::there_is(&floor, "on", "floor"));
        }
        if holders.is_empty() && floor.is_empty() {
            out.push(text::EMPTY_ROOM.to_string());
        }
        for &h in &holders {
            if self.is_closable(h) {
                out.push(text::container_state(&self.ent(h).phrase, self.open[h]));
            }
        }
        let dirs: Vec<&str> = self.world.exits[self.player]
            .iter()
            .map(|(d, _)| d.name())
            .collect();
        if !dirs.is_empty() {
            out.push(text::exits(&dirs));
        }
        out.join(" ")
    }

    fn inventory_text(&self) -> String {
        text::inventory(&self.phrases(self.carried()))
    }

    /// Ground-truth facts for the current state: exactly what parsing the
    /// description and inventory yields.
    pub fn facts(&self) -> FactSet {
        let mut facts = FactSet::new();
        let holders: Vec<usize> = self.holders_here().collect();
        for &h in &holders {
            facts.insert(SymbolicFact::unary(Predicate::BeLocatedAt, &self.ent(h).phrase));
        }
        for &h in &holders {
            if self.accessible(h) {
                for o in self.contents(h) {
                    facts.insert(SymbolicFact::unary(Predicate::BeLocatedAt, &self.ent(o).phrase));
                }
            }
        }
        for o in self.floor_objects_here() {
            facts.insert(SymbolicFact::unary(Predicate::BeLocatedAt, &self.ent(o).phrase));
        }
        for &h in &holders {
            if self.is_closable(h) && self.open[h] {
                facts.insert(SymbolicFact::unary(Predicate::Open, &self.ent(h).phrase));
            }
        }
        for (d, _) in &self.world.exits[self.player] {
            facts.insert(SymbolicFact::unary(Predicate::Direction, d.name()));
        }
        for o in self.carried() {
            facts.insert(SymbolicFact::unary(Predicate::Carry, &self.ent(o).phrase));
        }
        facts
    }

    /// Commands that have an effect in the current state, sorted by their
    /// rendered text. Empty once the game is over.
    pub fn admissible(&self) -> Vec<ActionCommand> {
        if self.done {
            return Vec::new();
        }
        let cmd = |verb: Verb, args: &[&str]| {
            ActionCommand::new(verb, args.iter().copied()).expect("well-formed")
        };
        let mut out = Vec::new();
        for (d, _) in &self.world.exits[self.player] {
            out.push(cmd(Verb::Go, &[d.name()]));
        }
        let holders: Vec<usize> = self.holders_here().collect();
        let mut visible: Vec<usize> = holders.clone();
        for o in self.floor_objects_here() {
            out.push(cmd(Verb::Take, &[&self.ent(o).phrase]));
            visible.push(o);
        }
        for &h in &holders {
            let hp = &self.ent(h).phrase;
            if !self.accessible(h) {
                out.push(cmd(Verb::Open, &[hp]));
                continue;
            }
            for o in self.contents(h) {
                out.push(cmd(Verb::Take, &[&self.ent(o).phrase, hp]));
                visible.push(o);
            }
        }
        let carried: Vec<usize> = self.carried().collect();
        for &o in &carried {
            for &h in &holders {
                let verb = match self.ent(h).kind {
                    EntityKind::Supporter => Verb::Put,
                    EntityKind::Container if self.open[h] => Verb::Insert,
                    _ => continue,
                };
                out.push(cmd(verb, &[&self.ent(o).phrase, &self.ent(h).phrase]));
            }
            visible.push(o);
        }
        for e in visible {
            out.push(cmd(Verb::Examine, &[&self.ent(e).phrase]));
        }
        out.push(cmd(Verb::Look, &[]));
        out.push(cmd(Verb::Inventory, &[]));
        out.sort_by_key(|a| a.render());
        out.dedup();
        out
    }

    /// Executes one command. Commands without effect consume a step and
    /// answer `Nothing happens.`
    pub fn step(&mut self, action: &ActionCommand) -> Result<Observation> {
        if self.done {
            return Err(Error::GameFinished);
        }
        self.steps += 1;
        let (feedback, placed) = match self.apply(action) {
            Some(effect) => effect,
            None => (text::NOTHING_HAPPENS.to_string(), None),
        };
        let mut reward = 0;
        if let Some(o) = placed {
            if self.ent(o).goal == Some(self.place_holder(o)) && !self.rewarded[o] {
                self.rewarded[o] = true;
                reward = 1;
                self.score += 1;
            }
        }
        let solved = !self.world.spec.goal_map.is_empty()
            && self
                .world
                .entities
                .iter()
                .enumerate()
                .all(|(i, e)| e.goal.is_none_or(|g| self.places[i] == Place::On(g)));
        self.done = solved || self.steps >= self.world.spec.max_steps;
        let mut parts = vec![feedback];
        if reward > 0 {
            parts.push(text::SCORE_UP.to_string());
        }
        if self.done {
            parts.push(text::GAME_OVER.to_string());
        }
        parts.push(self.description());
        parts.push(self.inventory_text());
        Ok(Observation {
            text: parts.join(" "),
            admissible: self.admissible(),
            done: self.done,
            reward,
        })
    }

    fn place_holder(&self, o: usize) -> usize {
        match self.places[o] {
            Place::On(h) => h,
            _ => usize::MAX,
        }
    }

    /// Applies the command if it has an effect; returns the feedback sentence
    /// and the object just placed on a holder, if any.
    fn apply(&mut self, action: &ActionCommand) -> Option<(String, Option<usize>)> {
        let args = action.args();
        let object = |g: &Game, i: usize| g.find(&args[i]).filter(|&e| g.ent(e).kind == EntityKind::Object);
        let holder = |g: &Game, i: usize| g.find(&args[i]).filter(|&e| g.ent(e).kind.is_holder());
        match (action.verb(), args.len()) {
            (Verb::Go, 1) => {
                let d = Direction::from_name(&args[0])?;
                let (_, to) = *self.world.exits[self.player].iter().find(|(x, _)| *x == d)?;
                self.player = to;
                Some((format!("You go {}.", d.name()), None))
            }
            (Verb::Take, 1) => {
                let o = object(self, 0)?;
                if self.places[o] != Place::Floor(self.player) {
                    return None;
                }
                self.places[o] = Place::Carried;
                Some((format!("You take the {}.", args[0]), None))
            }
            (Verb::Take, 2) => {
                let (o, h) = (object(self, 0)?, holder(self, 1)?);
                if self.places[o] != Place::On(h) || !self.is_here(h) || !self.accessible(h) {
                    return None;
                }
                self.places[o] = Place::Carried;
                Some((format!("You take the {} from the {}.", args[0], args[1]), None))
            }
            (Verb::Put | Verb::Insert, 2) => {
                let (o, h) = (object(self, 0)?, holder(self, 1)?);
                let wanted = match action.verb() {
                    Verb::Put => EntityKind::Supporter,
                    _ => EntityKind::Container,
                };
                if self.places[o] != Place::Carried
                    || self.ent(h).kind != wanted
                    || !self.is_here(h)
                    || !self.accessible(h)
                {
                    return None;
                }
                self.places[o] = Place::On(h);
                let sentence = match action.verb() {
                    Verb::Put => format!("You put the {} on the {}.", args[0], args[1]),
                    _ => format!("You insert the {} into the {}.", args[0], args[1]),
                };
                Some((sentence, Some(o)))
            }
            (Verb::Open, 1) => {
                let h = holder(self, 0)?;
                if self.ent(h).kind != EntityKind::Container || !self.is_here(h) || self.open[h] {
                    return None;
                }
                self.open[h] = true;
                Some((format!("You open the {}.", args[0]), None))
            }
            (Verb::Examine, 1) => {
                let e = self.find(&args[0])?;
                let visible = match self.places[e] {
                    Place::Carried => true,
                    Place::Floor(r) => r == self.player,
                    Place::On(h) => self.is_here(h) && self.accessible(h),
                };
                visible.then(|| (format!("You see nothing special about the {}.", args[0]), None))
            }
            (Verb::Look, 0) => Some((text::LOOK.to_string(), None)),
            (Verb::Inventory, 0) => Some((text::CHECK_INVENTORY.to_string(), None)),
            _ => None,
        }
    }
}

/// Total reward from executing `actions` after a reset. Stops at the end of
/// the game; commands without effect are no-ops that consume a step.
pub fn replay(spec: &GameSpec, actions: &[ActionCommand]) -> Result<u32> {
    let mut game = Game::new(spec)?;
    for a in actions {
        if game.is_done() {
            break;
        }
        game.step(a)?;
    }
    Ok(game.score())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::parser::parse_observation;
    use crate::world::{generate_games, Difficulty, EntitySpec, EntityVocabulary, RoomSpec, Split};

    fn shoe_spec() -> GameSpec {
        GameSpec {
            difficulty: Difficulty::Easy,
            rooms: vec![RoomSpec {
                name: "hallway".into(),
                exits: BTreeMap::new(),
            }],
            entities: vec![
                EntitySpec {
                    phrase: "cabinet".into(),
                    kind: EntityKind::Supporter,
                    location: Location::Room("hallway".into()),
                    closed: false,
                },
                EntitySpec {
                    phrase: "shoe rack".into(),
                    kind: EntityKind::Container,
                    location: Location::Room("hallway".into()),
                    closed: false,
                },
                EntitySpec {
                    phrase: "brown golf shoe".into(),
                    kind: EntityKind::Object,
                    location: Location::Holder("cabinet".into()),
                    closed: false,
                },
                EntitySpec {
                    phrase: "blue moccasin".into(),
                    kind: EntityKind::Object,
                    location: Location::Holder("cabinet".into()),
                    closed: false,
                },
            ],
            goal_map: [
                ("brown golf shoe".to_string(), "shoe rack".to_string()),
                ("blue moccasin".to_string(), "shoe rack".to_string()),
            ]
            .into(),
            seed: 0,
            max_steps: 50,
            witness: vec![],
        }
    }

    fn cmd(s: &str) -> ActionCommand {
        s.parse().unwrap()
    }

    #[test]
    fn reset_describes_contents() {
        let (game, obs) = Game::start(&shoe_spec()).unwrap();
        assert!(obs
            .text
            .contains("There is a brown golf shoe and a blue moccasin on the cabinet."));
        assert_eq!(game.steps(), 0);
        assert!(!obs.done);
        let (_, again) = Game::start(&shoe_spec()).unwrap();
        assert_eq!(obs, again);
    }

    #[test]
    fn empty_room() {
        let mut spec = shoe_spec();
        spec.entities.clear();
        spec.goal_map.clear();
        let (_, obs) = Game::start(&spec).unwrap();
        assert!(obs.text.contains("The room is empty."));
    }

    #[test]
    fn reward_on_goal_placement_only_once() {
        let mut game = Game::new(&shoe_spec()).unwrap();
        let obs = game.step(&cmd("take brown golf shoe from cabinet")).unwrap();
        assert_eq!(obs.reward, 0);
        let obs = game.step(&cmd("insert brown golf shoe into shoe rack")).unwrap();
        assert_eq!(obs.reward, 1);
        assert!(obs.text.contains("Your score has just gone up by one point."));
        game.step(&cmd("take brown golf shoe from shoe rack")).unwrap();
        let obs = game.step(&cmd("insert brown golf shoe into shoe rack")).unwrap();
        assert_eq!(obs.reward, 0);
        assert_eq!(game.score(), 1);
    }

    #[test]
    fn examine_changes_only_the_counter() {
        let mut game = Game::new(&shoe_spec()).unwrap();
        let before = game.state_key();
        let obs = game.step(&cmd("examine blue moccasin")).unwrap();
        assert_eq!(obs.reward, 0);
        assert_eq!(game.state_key(), before);
        assert_eq!(game.steps(), 1);
    }

    #[test]
    fn inadmissible_is_a_noop() {
        let mut game = Game::new(&shoe_spec()).unwrap();
        let obs = game.step(&cmd("put blue moccasin on cabinet")).unwrap();
        assert!(obs.text.starts_with("Nothing happens."));
        assert_eq!(game.steps(), 1);
    }

    #[test]
    fn step_cap_ends_game() {
        let mut game = Game::new(&shoe_spec()).unwrap();
        for i in 0..50 {
            let obs = game.step(&cmd("look")).unwrap();
            assert_eq!(obs.done, i == 49);
            if obs.done {
                assert!(obs.admissible.is_empty());
            }
        }
        assert!(matches!(game.step(&cmd("look")), Err(Error::GameFinished)));
    }

    #[test]
    fn solved_game_is_done() {
        let mut game = Game::new(&shoe_spec()).unwrap();
        for a in [
            "take brown golf shoe from cabinet",
            "insert brown golf shoe into shoe rack",
            "take blue moccasin from cabinet",
            "insert blue moccasin into shoe rack",
        ] {
            game.step(&cmd(a)).unwrap();
        }
        assert!(game.is_done());
        assert_eq!(game.normalized_score(), 1.0);
    }

    #[test]
    fn closed_containers_hide_contents() {
        let mut spec = shoe_spec();
        spec.entities[1].closed = true;
        spec.entities[2].location = Location::Holder("shoe rack".into());
        spec.goal_map = [("brown golf shoe".to_string(), "cabinet".to_string())].into();
        let (mut game, obs) = Game::start(&spec).unwrap();
        assert!(obs.text.contains("The shoe rack is closed."));
        assert!(!obs.text.contains("brown golf shoe"));
        assert!(obs.admissible.contains(&cmd("open shoe rack")));
        let obs = game.step(&cmd("open shoe rack")).unwrap();
        assert!(obs.text.contains("The shoe rack is open."));
        assert!(obs.admissible.contains(&cmd("take brown golf shoe from shoe rack")));
    }

    fn random_walks(difficulty: Difficulty, seed: u64, check: impl Fn(&Game, &Observation)) {
        let vocab = EntityVocabulary::builtin();
        let specs = generate_games(difficulty, &vocab, 8, Split::Train, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for spec in &specs {
            let (mut game, mut obs) = Game::start(spec).unwrap();
            check(&game, &obs);
            while !obs.done {
                let a = obs.admissible.choose(&mut rng).unwrap().clone();
                obs = game.step(&a).unwrap();
                check(&game, &obs);
            }
        }
    }

    #[test]
    fn parser_agrees_with_oracle_facts() {
        for d in [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard] {
            random_walks(d, 3, |game, obs| {
                assert_eq!(parse_observation(&obs.text).unwrap(), game.facts(), "{}", obs.text);
            });
        }
    }

    #[test]
    fn admissible_actions_always_have_effect() {
        for d in [Difficulty::Medium, Difficulty::Hard] {
            random_walks(d, 9, |game, obs| {
                assert_eq!(obs.done, obs.admissible.is_empty());
                for a in &obs.admissible {
                    let mut probe = game.clone();
                    let next = probe.step(a).unwrap();
                    assert!(!next.text.starts_with(text::NOTHING_HAPPENS), "{a}");
                }
            });
        }
    }

    #[test]
    fn replay_is_deterministic() {
        let vocab = EntityVocabulary::builtin();
        let spec = &generate_games(Difficulty::Hard, &vocab, 1, Split::Train, 5).unwrap()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (mut game, mut obs) = Game::start(spec).unwrap();
        let mut actions = Vec::new();
        let mut texts = vec![obs.text.clone()];
        while !obs.done {
            let a = obs.admissible.choose(&mut rng).unwrap().clone();
            obs = game.step(&a).unwrap();
            texts.push(obs.text.clone());
            actions.push(a);
        }
        let (mut again, first) = Game::start(spec).unwrap();
        let mut texts2 = vec![first.text];
        for a in &actions {
            texts2.push(again.step(a).unwrap().text);
        }
        assert_eq!(texts, texts2);
        assert_eq!(replay(spec, &actions).unwrap(), game.score());
    }

    #[test]
    fn pruning_examine_keeps_reward_and_dropping_take_loses_it() {
        let spec = shoe_spec();
        let actions: Vec<ActionCommand> = [
            "examine blue moccasin",
            "take brown golf shoe from cabinet",
            "look",
            "insert brown golf shoe into shoe rack",
            "take blue moccasin from cabinet",
            "inventory",
            "insert blue moccasin into shoe rack",
        ]
        .iter()
        .map(|s| cmd(s))
        .collect();
        let full = replay(&spec, &actions).unwrap();
        assert_eq!(full, 2);
        let no_examine: Vec<_> = actions.iter().filter(|a| a.verb() != Verb::Examine).cloned().collect();
        assert_eq!(replay(&spec, &no_examine).unwrap(), full);
        let no_take: Vec<_> = actions.iter().skip(2).cloned().collect();
        assert!(replay(&spec, &no_take).unwrap() < full);
    }
}
