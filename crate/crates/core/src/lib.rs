//! Scriptable poker engine core.
//!
//! Everything in this crate is pure: a [`script::GameScript`] describes a
//! variant, [`engine::next_state`] maps `(state, input, script)` to the next
//! state, and [`statelang`] gives the canonical pipe-delimited text form of
//! states and player inputs. No IO happens here; the crate is `no_std` and
//! only needs an allocator.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cards;
pub mod coreset;
pub mod engine;
pub mod evaluator;
pub mod rephrase;
pub mod rng;
pub mod rules;
pub mod script;
pub mod statelang;
pub mod variants;

pub use cards::{Card, Deck, DeckExhausted};
pub use engine::{
    init_round, legal_actions, next_state, run_round, Action, Agent, EngineError, GameState,
    LegalAction, PlayerId, PlayerInput, RandomAgent, Round,
};
pub use evaluator::{best_hand, compare, HandValue, Winners};
pub use rng::SplitMix64;
pub use script::{parse_script, serialize_script, CombinationId, GameScript, PhaseKind, ScriptError};
pub use statelang::{parse_state, serialize_state};
