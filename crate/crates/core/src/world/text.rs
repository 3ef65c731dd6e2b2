//! The simulator's fixed sentence templates.
//!
//! Every observation is a concatenation of the sentences below; the
//! observation parser in [`crate::parser`] is written against exactly this
//! set.
//!
//! | sentence                                      | facts               |
//! |-----------------------------------------------|---------------------|
//! | `You are in the R.`                           | –                   |
//! | `There is a X, a Y and a Z in/on the P.`      | `be-located-at(·)`  |
//! | `The room is empty.`                          | –                   |
//! | `The C is open.` / `The C is closed.`         | `open(C)` / –       |
//! | `You can go east and west.`                   | `direction(·)`      |
//! | `You are carrying: a X and a Y.`              | `carry(·)`          |
//! | `You are carrying nothing.`                   | –                   |
//! | `You take the X.` / `You take the X from the Y.` | –                |
//! | `You put the X on the Y.` / `You insert the X into the Y.` | –      |
//! | `You open the C.` / `You go D.`               | –                   |
//! | `You see nothing special about the X.`        | –                   |
//! | `You look around.` / `You check your inventory.` | –                |
//! | `Nothing happens.`                            | –                   |
//! | `Your score has just gone up by one point.`   | –                   |
//! | `The game is over.`                           | –                   |

pub(crate) fn with_article(phrase: &str) -> String {
    let vowel = phrase
        .chars()
        .next()
        .is_some_and(|c| matches!(c.to_ascii_lowercase(), 'a' | 'e' | 'i' | 'o' | 'u'));
    if vowel {
        format!("an {phrase}")
    } else {
        format!("a {phrase}")
    }
}

/// `a X`, `a X and a Y`, `a X, a Y and a Z`.
pub(crate) fn join_list<S: AsRef<str>>(items: &[S], article: bool) -> String {
    let words: Vec<String> = items
        .iter()
        .map(|s| {
            if article {
                with_article(s.as_ref())
            } else {
                s.as_ref().to_string()
            }
        })
        .collect();
    match words.len() {
        0 => String::new(),
        1 => words[0].clone(),
        n => format!("{} and {}", words[..n - 1].join(", "), words[n - 1]),
    }
}

pub(crate) fn location(room: &str) -> String {
    format!("You are in the {room}.")
}

pub(crate) fn there_is(items: &[&str], preposition: &str, place: &str) -> String {
    format!("There is {} {preposition} the {place}.", join_list(items, true))
}

pub(crate) const EMPTY_ROOM: &str = "The room is empty.";

pub(crate) fn container_state(container: &str, open: bool) -> String {
    let state = if open { "open" } else { "closed" };
    format!("The {container} is {state}.")
}

pub(crate) fn exits(directions: &[&str]) -> String {
    format!("You can go {}.", join_list(directions, false))
}

pub(crate) fn inventory(carried: &[&str]) -> String {
    if carried.is_empty() {
        "You are carrying nothing.".to_string()
    } else {
        format!("You are carrying: {}.", join_list(carried, true))
    }
}

pub(crate) const NOTHING_HAPPENS: &str = "Nothing happens.";
pub(crate) const SCORE_UP: &str = "Your score has just gone up by one point.";
pub(crate) const GAME_OVER: &str = "The game is over.";
pub(crate) const LOOK: &str = "You look around.";
pub(crate) const CHECK_INVENTORY: &str = "You check your inventory.";
