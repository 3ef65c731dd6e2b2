use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::world::{
    generate_games, Difficulty, EntityVocabulary, Game, GameSpec, Split, StateKey,
};

/// Steps allowed in a micro-game.
pub const MICRO_HORIZON: u32 = 6;

/// One-room games with exactly two objects and a six-step cap.
pub fn micro_games(vocab: &EntityVocabulary, count: usize, seed: u64) -> Result<Vec<GameSpec>> {
    let mut out = Vec::with_capacity(count);
    for k in 0..10_000u64 {
        if out.len() == count {
            break;
        }
        let mut spec = generate_games(Difficulty::Easy, vocab, 1, Split::InDist, seed.wrapping_add(k))?
            .remove(0);
        if spec.objects().count() == 2 {
            spec.max_steps = MICRO_HORIZON;
            spec.validate()?;
            out.push(spec);
        }
    }
    if out.len() < count {
        return Err(Error::Config(format!("only {} micro-games found", out.len())));
    }
    Ok(out)
}

/// Best total reward reachable within `horizon` steps (and the game's own
/// cap), by exhaustive search over admissible commands with memoization.
pub fn optimal_return(spec: &GameSpec, horizon: u32) -> Result<u32> {
    let game = Game::new(spec)?;
    let mut memo = HashMap::new();
    best(&game, horizon.min(spec.max_steps), &mut memo)
}

fn best(game: &Game, remaining: u32, memo: &mut HashMap<(StateKey, u32), u32>) -> Result<u32> {
    if remaining == 0 || game.is_done() {
        return Ok(0);
    }
    let key = (game.state_key(), remaining);
    if let Some(&v) = memo.get(&key) {
        return Ok(v);
    }
    let mut value = 0;
    for action in game.admissible() {
        let mut next = game.clone();
        let obs = next.step(&action)?;
        value = value.max(obs.reward + best(&next, remaining - 1, memo)?);
    }
    memo.insert(key, value);
    Ok(value)
}
