//! Cards, decks and dealing.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::rng::SplitMix64;
use crate::script::GameScript;

/// A card: a suit letter plus a rank label.
///
/// The rank is a label, not a strength. Strength comes from the position of
/// the label in the script's rank order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Card {
    pub suit: char,
    pub rank: u16,
}

impl Card {
    pub const fn new(suit: char, rank: u16) -> Self {
        Self { suit, rank }
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.suit, self.rank)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed card {0:?}")]
pub struct CardParseError(pub String);

impl FromStr for Card {
    type Err = CardParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        let suit = chars.next().ok_or_else(|| CardParseError(s.into()))?;
        if !suit.is_ascii_uppercase() {
            return Err(CardParseError(s.into()));
        }
        let rest = chars.as_str();
        if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
            return Err(CardParseError(s.into()));
        }
        let rank = rest.parse::<u16>().map_err(|_| CardParseError(s.into()))?;
        Ok(Card { suit, rank })
    }
}

/// Formats cards separated by `sep`.
pub fn join_cards(cards: &[Card], sep: &str) -> String {
    let mut out = String::new();
    for (i, c) in cards.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        out.push_str(&alloc::format!("{c}"));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("deck exhausted: {requested} cards requested, {remaining} remaining")]
pub struct DeckExhausted {
    pub requested: usize,
    pub remaining: usize,
}

/// Ordered pile of cards; index 0 is the top.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Deck {
    cards: Vec<Card>,
}

impl Deck {
    pub fn from_cards(cards: Vec<Card>) -> Self {
        Self { cards }
    }

    /// Every `(suit, rank)` pair once, suit-major, ranks in script order.
    pub fn build(suits: &[char], ranks: &[u16]) -> Self {
        let cards = suits
            .iter()
            .flat_map(|&s| ranks.iter().map(move |&r| Card::new(s, r)))
            .collect();
        Self { cards }
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    pub fn cards(&self) -> &[Card] {
        &self.cards
    }

    pub fn into_cards(self) -> Vec<Card> {
        self.cards
    }

    pub fn shuffle(&mut self, rng: &mut SplitMix64) {
        rng.shuffle(&mut self.cards);
    }

    /// Removes the top `n` cards. On error the deck is untouched.
    pub fn draw(&mut self, n: usize) -> Result<Vec<Card>, DeckExhausted> {
        if n > self.cards.len() {
            return Err(DeckExhausted {
                requested: n,
                remaining: self.cards.len(),
            });
        }
        Ok(self.cards.drain(..n).collect())
    }

    pub fn draw_one(&mut self) -> Result<Card, DeckExhausted> {
        self.draw(1).map(|mut v| v.remove(0))
    }
}

/// Unshuffled deck for a script.
pub fn build_deck(script: &GameScript) -> Deck {
    Deck::build(&script.suits, &script.rank_order)
}

/// Position of a card in the unshuffled deck; the canonical sort key.
pub fn deck_index(script: &GameScript, card: Card) -> Option<usize> {
    let s = script.suits.iter().position(|&x| x == card.suit)?;
    let r = script.rank_order.iter().position(|&x| x == card.rank)?;
    Some(s * script.rank_order.len() + r)
}

/// Sorts cards into unshuffled-deck order. Unknown cards sort last.
pub fn sort_canonical(script: &GameScript, cards: &mut [Card]) {
    cards.sort_by_key(|c| (deck_index(script, *c).unwrap_or(usize::MAX), *c));
}
