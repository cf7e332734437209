//! Game scripts: the data model, the structured text format and validation.
//!
//! A script is a handful of `Key: value` lines followed by an optional
//! `Specific Rules:` block:
//!
//! ```text
//! Game: Texas hold'em
//! Number of players: 3
//! Suit: Hearts (H), Diamonds (D), Clubs (C), Spades (S)
//! Card Rank: 2<3<4<5<6<7<8<9<10<11<12<13<1
//! Hand Rank: High Card<Pair<Two Pair<Three of a Kind<Straight<Flush<Four of a Kind<Straight Flush
//! Min / Max bet: 10 / 1000
//! Flow: start->blind->deal2->bet->flop3->bet->flop1->bet->show->prize
//! ```
//!
//! Rule sentences must come from the fixed bank in [`crate::rules`]; anything
//! else is rejected rather than ignored.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::rules::{self, RulePredicate};

pub const DEFAULT_NAME: &str = "poker";
pub const DEFAULT_HAND_SIZE: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScriptError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown rule sentence: {0:?}")]
    UnknownPredicate(String),
    #[error("invalid script: {0}")]
    Validation(String),
    #[error("unrecognized sentence: {0:?}")]
    UnrecognizedTemplate(String),
}

fn invalid(msg: impl Into<String>) -> ScriptError {
    ScriptError::Validation(msg.into())
}

/// A multi-card combination that can appear in the hand ranking.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CombinationId {
    HighCard,
    Pair,
    TwoPair,
    ThreeOfAKind,
    Straight,
    Flush,
    FullHouse,
    FourOfAKind,
    StraightFlush,
    /// Declared by a `NewCombination` rule; detected by its rank-group shape.
    Custom(String),
}

impl CombinationId {
    pub const BUILTIN: [CombinationId; 9] = [
        CombinationId::HighCard,
        CombinationId::Pair,
        CombinationId::TwoPair,
        CombinationId::ThreeOfAKind,
        CombinationId::Straight,
        CombinationId::Flush,
        CombinationId::FullHouse,
        CombinationId::FourOfAKind,
        CombinationId::StraightFlush,
    ];

    pub fn name(&self) -> &str {
        match self {
            CombinationId::HighCard => "High Card",
            CombinationId::Pair => "Pair",
            CombinationId::TwoPair => "Two Pair",
            CombinationId::ThreeOfAKind => "Three of a Kind",
            CombinationId::Straight => "Straight",
            CombinationId::Flush => "Flush",
            CombinationId::FullHouse => "Full House",
            CombinationId::FourOfAKind => "Four of a Kind",
            CombinationId::StraightFlush => "Straight Flush",
            CombinationId::Custom(name) => name,
        }
    }

    /// Built-in combination for a name, accepting the "3 of a Kind" spellings.
    pub fn builtin(name: &str) -> Option<CombinationId> {
        let n = name.trim().to_ascii_lowercase();
        let id = match n.as_str() {
            "high card" => CombinationId::HighCard,
            "pair" | "one pair" => CombinationId::Pair,
            "two pair" | "two pairs" => CombinationId::TwoPair,
            "three of a kind" | "3 of a kind" => CombinationId::ThreeOfAKind,
            "straight" => CombinationId::Straight,
            "flush" => CombinationId::Flush,
            "full house" => CombinationId::FullHouse,
            "four of a kind" | "4 of a kind" => CombinationId::FourOfAKind,
            "straight flush" => CombinationId::StraightFlush,
            _ => return None,
        };
        Some(id)
    }
}

impl fmt::Display for CombinationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One step of the game flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseKind {
    Start,
    Shuffle,
    Blind,
    Deal(u8),
    Bet,
    Flop(u8),
    Switch,
    Show,
    Prize,
}

impl PhaseKind {
    pub fn label(&self) -> String {
        match self {
            PhaseKind::Start => "start".into(),
            PhaseKind::Shuffle => "shuffle".into(),
            PhaseKind::Blind => "blind".into(),
            PhaseKind::Deal(x) => format!("deal{x}"),
            PhaseKind::Bet => "bet".into(),
            PhaseKind::Flop(x) => format!("flop{x}"),
            PhaseKind::Switch => "switch".into(),
            PhaseKind::Show => "show".into(),
            PhaseKind::Prize => "prize".into(),
        }
    }

    /// Parses a flow label. `dea5` is read as `deal5`; that misspelling occurs
    /// in published variant listings.
    pub fn from_label(label: &str) -> Option<PhaseKind> {
        let l = label.trim().to_ascii_lowercase();
        let counted = |prefix: &str| -> Option<u8> {
            let rest = l.strip_prefix(prefix)?.trim();
            if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            rest.parse().ok()
        };
        Some(match l.as_str() {
            "start" => PhaseKind::Start,
            "shuffle" => PhaseKind::Shuffle,
            "blind" | "blinds" => PhaseKind::Blind,
            "bet" => PhaseKind::Bet,
            "switch" => PhaseKind::Switch,
            "show" => PhaseKind::Show,
            "prize" => PhaseKind::Prize,
            _ => {
                if let Some(x) = counted("deal").or_else(|| counted("dea")) {
                    PhaseKind::Deal(x)
                } else if let Some(x) = counted("flop") {
                    PhaseKind::Flop(x)
                } else {
                    return None;
                }
            }
        })
    }

    /// Phases that wait for a player.
    pub fn is_interactive(&self) -> bool {
        matches!(self, PhaseKind::Bet | PhaseKind::Switch)
    }
}

/// One poker variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameScript {
    pub name: String,
    pub num_players: u8,
    pub suits: Vec<char>,
    /// Rank labels from lowest to highest.
    pub rank_order: Vec<u16>,
    /// Combinations from lowest to highest. Empty for pure Badugi ranking.
    pub hand_rank: Vec<CombinationId>,
    pub min_bet: u64,
    pub max_bet: u64,
    pub flow: Vec<PhaseKind>,
    pub rules: Vec<RulePredicate>,
}

impl GameScript {
    pub fn has_rule(&self, rule: &RulePredicate) -> bool {
        self.rules.contains(rule)
    }

    pub fn low_wins(&self) -> bool {
        self.has_rule(&RulePredicate::LowWins)
    }

    pub fn badugi(&self) -> bool {
        self.has_rule(&RulePredicate::BadugiRanking)
    }

    pub fn high_low_split(&self) -> bool {
        self.has_rule(&RulePredicate::HighLowSplit)
    }

    pub fn small_straight(&self) -> bool {
        self.has_rule(&RulePredicate::SmallStraight)
    }

    pub fn all_in_allowed(&self) -> bool {
        self.has_rule(&RulePredicate::AllInAllowed)
    }

    pub fn omaha(&self) -> Option<(usize, usize)> {
        self.rules.iter().find_map(|r| match r {
            RulePredicate::OmahaConstraint { holes, community } => {
                Some((*holes as usize, *community as usize))
            }
            _ => None,
        })
    }

    pub fn custom_shape(&self, name: &str) -> Option<&[u8]> {
        self.rules.iter().find_map(|r| match r {
            RulePredicate::NewCombination { name: n, shape } if n == name => Some(shape.as_slice()),
            _ => None,
        })
    }

    pub fn hole_cards_per_player(&self) -> usize {
        self.flow
            .iter()
            .map(|p| match p {
                PhaseKind::Deal(x) => *x as usize,
                _ => 0,
            })
            .sum()
    }

    pub fn community_cards(&self) -> usize {
        self.flow
            .iter()
            .map(|p| match p {
                PhaseKind::Flop(x) => *x as usize,
                _ => 0,
            })
            .sum()
    }

    /// Number of cards that form a hand at showdown.
    pub fn hand_size(&self) -> usize {
        self.rules
            .iter()
            .find_map(|r| match r {
                RulePredicate::HandSize(k) => Some(*k as usize),
                _ => None,
            })
            .unwrap_or_else(|| {
                DEFAULT_HAND_SIZE.min(self.hole_cards_per_player() + self.community_cards())
            })
    }

    /// Ordinal of a rank label in the rank order (0 = lowest).
    pub fn ordinal(&self, rank: u16) -> Option<usize> {
        self.rank_order.iter().position(|&r| r == rank)
    }

    pub fn deck_size(&self) -> usize {
        self.suits.len() * self.rank_order.len()
    }

    pub fn has_blinds(&self) -> bool {
        self.flow.contains(&PhaseKind::Blind)
    }

    pub fn validate(&self) -> Result<(), ScriptError> {
        if self.num_players < 2 {
            return Err(invalid("at least 2 players are required"));
        }
        if self.suits.is_empty() {
            return Err(invalid("at least one suit is required"));
        }
        for (i, s) in self.suits.iter().enumerate() {
            if !s.is_ascii_uppercase() {
                return Err(invalid(format!("suit {s:?} is not an uppercase letter")));
            }
            if self.suits[..i].contains(s) {
                return Err(invalid(format!("duplicate suit {s}")));
            }
        }
        if self.rank_order.len() < 2 {
            return Err(invalid("at least two ranks are required"));
        }
        for (i, r) in self.rank_order.iter().enumerate() {
            if *r == 0 {
                return Err(invalid("rank labels must be positive"));
            }
            if self.rank_order[..i].contains(r) {
                return Err(invalid(format!("duplicate rank {r}")));
            }
        }
        if self.min_bet < 2 || self.min_bet % 2 != 0 {
            return Err(invalid("minimum bet must be even and at least 2"));
        }
        if self.min_bet > self.max_bet {
            return Err(invalid("minimum bet exceeds maximum bet"));
        }
        self.validate_flow()?;
        self.validate_rules()?;
        self.validate_hand_rank()
    }

    fn validate_flow(&self) -> Result<(), ScriptError> {
        let flow = &self.flow;
        if flow.first() != Some(&PhaseKind::Start) {
            return Err(invalid("flow must begin with start"));
        }
        if flow.last() != Some(&PhaseKind::Prize) {
            return Err(invalid("flow must end with prize"));
        }
        let show = flow.iter().position(|p| *p == PhaseKind::Show);
        if show.is_none() {
            return Err(invalid("flow needs show before prize"));
        }
        if flow.iter().filter(|p| **p == PhaseKind::Start).count() != 1
            || flow.iter().filter(|p| **p == PhaseKind::Prize).count() != 1
        {
            return Err(invalid("start and prize must appear exactly once"));
        }
        if flow.iter().filter(|p| **p == PhaseKind::Show).count() != 1 {
            return Err(invalid("show must appear exactly once"));
        }
        if flow.iter().filter(|p| **p == PhaseKind::Blind).count() > 1 {
            return Err(invalid("blind may appear at most once"));
        }
        for p in flow {
            if let PhaseKind::Deal(0) | PhaseKind::Flop(0) = p {
                return Err(invalid("deal and flop counts must be at least 1"));
            }
        }
        if self.hole_cards_per_player() == 0 {
            return Err(invalid("flow never deals cards"));
        }
        Ok(())
    }

    fn validate_rules(&self) -> Result<(), ScriptError> {
        for (i, r) in self.rules.iter().enumerate() {
            if self.rules[..i].iter().any(|o| o.same_kind(r)) {
                return Err(invalid(format!("rule listed twice: {}", r.kind_name())));
            }
        }
        if self.low_wins() && self.high_low_split() {
            return Err(invalid("low-wins and high-low split cannot be combined"));
        }
        let total = self.hole_cards_per_player() + self.community_cards();
        for r in &self.rules {
            match r {
                RulePredicate::HandSize(k) => {
                    if *k == 0 {
                        return Err(invalid("hand size must be positive"));
                    }
                    if (*k as usize) > total {
                        return Err(invalid(format!(
                            "hand size {k} exceeds the {total} cards each player receives"
                        )));
                    }
                }
                RulePredicate::OmahaConstraint { holes, community } => {
                    if *holes as usize + *community as usize != self.hand_size() {
                        return Err(invalid("hole + community cards must equal the hand size"));
                    }
                    if *holes as usize > self.hole_cards_per_player()
                        || *community as usize > self.community_cards()
                    {
                        return Err(invalid("hole/community requirement exceeds dealt cards"));
                    }
                }
                RulePredicate::NewCombination { name, shape } => {
                    if CombinationId::builtin(name).is_some() {
                        return Err(invalid(format!("{name} is already a built-in combination")));
                    }
                    if shape.is_empty() || shape.iter().any(|&g| g < 2) {
                        return Err(invalid(format!("{name}: groups need at least 2 cards")));
                    }
                    let size: usize = shape.iter().map(|&g| g as usize).sum();
                    if size > self.hand_size() {
                        return Err(invalid(format!("{name} needs more cards than a hand holds")));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn validate_hand_rank(&self) -> Result<(), ScriptError> {
        if self.hand_rank.is_empty() {
            if !self.badugi() || self.high_low_split() {
                return Err(invalid("hand rank is required"));
            }
            return Ok(());
        }
        if !self.hand_rank.contains(&CombinationId::HighCard) {
            return Err(invalid("hand rank must include High Card"));
        }
        for (i, c) in self.hand_rank.iter().enumerate() {
            if self.hand_rank[..i].contains(c) {
                return Err(invalid(format!("{c} ranked twice")));
            }
            if let CombinationId::Custom(name) = c {
                if self.custom_shape(name).is_none() {
                    return Err(invalid(format!("combination {name} is never defined")));
                }
            }
        }
        if self.high_low_split() && self.badugi() && self.hand_rank.is_empty() {
            return Err(invalid("badugi split needs a hand rank for the low side"));
        }
        Ok(())
    }
}

/// Which structured line an element of the script occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Element {
    Name,
    Players,
    Suits,
    Ranks,
    HandRank,
    Bets,
    Flow,
}

impl Element {
    pub const ALL: [Element; 7] = [
        Element::Name,
        Element::Players,
        Element::Suits,
        Element::Ranks,
        Element::HandRank,
        Element::Bets,
        Element::Flow,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Element::Name => "name",
            Element::Players => "players",
            Element::Suits => "suits",
            Element::Ranks => "ranks",
            Element::HandRank => "hand_rank",
            Element::Bets => "bets",
            Element::Flow => "flow",
        }
    }

    pub fn from_id(id: &str) -> Option<Element> {
        Element::ALL.iter().copied().find(|e| e.id() == id)
    }

    pub(crate) fn from_key(key: &str) -> Option<Element> {
        let k = key.trim().to_ascii_lowercase();
        Some(match k.as_str() {
            "game" | "name" => Element::Name,
            "number of players" | "players" => Element::Players,
            "suit" | "suits" => Element::Suits,
            "card rank" | "number" => Element::Ranks,
            "hand rank" | "hand" => Element::HandRank,
            "min / max bet" | "min/max bet" => Element::Bets,
            "flow" => Element::Flow,
            _ => return None,
        })
    }
}

/// Partially assembled script; shared by the structured and the rephrased parsers.
#[derive(Debug, Clone, Default)]
pub(crate) struct Draft {
    pub name: Option<String>,
    pub num_players: Option<u8>,
    pub suits: Option<Vec<char>>,
    pub rank_order: Option<Vec<u16>>,
    pub hand_rank: Option<Vec<String>>,
    pub bets: Option<(u64, u64)>,
    pub flow: Option<Vec<PhaseKind>>,
    pub rules: Vec<RulePredicate>,
}

impl Draft {
    pub fn seen(&self, e: Element) -> bool {
        match e {
            Element::Name => self.name.is_some(),
            Element::Players => self.num_players.is_some(),
            Element::Suits => self.suits.is_some(),
            Element::Ranks => self.rank_order.is_some(),
            Element::HandRank => self.hand_rank.is_some(),
            Element::Bets => self.bets.is_some(),
            Element::Flow => self.flow.is_some(),
        }
    }

    /// Parses the value of a structured `Key: value` line.
    pub fn set_structured(&mut self, e: Element, value: &str, line: usize) -> Result<(), ScriptError> {
        let syntax = |message: String| ScriptError::Syntax { line, message };
        if self.seen(e) {
            return Err(syntax(format!("{} given twice", e.id())));
        }
        let value = value.trim();
        match e {
            Element::Name => {
                if value.is_empty() {
                    return Err(syntax("empty game name".into()));
                }
                self.name = Some(value.to_string());
            }
            Element::Players => {
                let n = value
                    .parse::<u8>()
                    .map_err(|_| syntax(format!("bad player count {value:?}")))?;
                self.num_players = Some(n);
            }
            Element::Suits => self.suits = Some(parse_suit_list(value).map_err(syntax)?),
            Element::Ranks => self.rank_order = Some(parse_rank_chain(value).map_err(syntax)?),
            Element::HandRank => {
                let names: Vec<String> = value.split('<').map(|s| s.trim().to_string()).collect();
                if names.iter().any(|n| n.is_empty()) {
                    return Err(syntax("empty combination name".into()));
                }
                self.hand_rank = Some(names);
            }
            Element::Bets => {
                let (a, b) = value
                    .split_once('/')
                    .ok_or_else(|| syntax("expected `min / max`".into()))?;
                let min = a.trim().parse().map_err(|_| syntax(format!("bad min bet {a:?}")))?;
                let max = b.trim().parse().map_err(|_| syntax(format!("bad max bet {b:?}")))?;
                self.bets = Some((min, max));
            }
            Element::Flow => self.flow = Some(parse_flow(value).map_err(syntax)?),
        }
        Ok(())
    }

    pub fn push_rule(&mut self, sentence: &str) -> Result<(), ScriptError> {
        let rule = rules::parse_rule(sentence)
            .ok_or_else(|| ScriptError::UnknownPredicate(sentence.trim().to_string()))?;
        self.rules.push(rule);
        Ok(())
    }

    pub fn finish(self) -> Result<GameScript, ScriptError> {
        let missing = |what: &str| invalid(format!("missing {what}"));
        let mut hand_rank = Vec::new();
        for name in self.hand_rank.unwrap_or_default() {
            let id = CombinationId::builtin(&name).or_else(|| {
                self.rules.iter().find_map(|r| match r {
                    RulePredicate::NewCombination { name: n, .. } if n.eq_ignore_ascii_case(&name) => {
                        Some(CombinationId::Custom(n.clone()))
                    }
                    _ => None,
                })
            });
            hand_rank.push(id.ok_or_else(|| invalid(format!("combination {name} is never defined")))?);
        }
        let (min_bet, max_bet) = self.bets.ok_or_else(|| missing("Min / Max bet"))?;
        let script = GameScript {
            name: self.name.unwrap_or_else(|| DEFAULT_NAME.to_string()),
            num_players: self.num_players.ok_or_else(|| missing("Number of players"))?,
            suits: self.suits.ok_or_else(|| missing("Suit"))?,
            rank_order: self.rank_order.ok_or_else(|| missing("Card Rank"))?,
            hand_rank,
            min_bet,
            max_bet,
            flow: self.flow.ok_or_else(|| missing("Flow"))?,
            rules: self.rules,
        };
        script.validate()?;
        Ok(script)
    }
}

fn parse_suit_list(value: &str) -> Result<Vec<char>, String> {
    let items: Vec<&str> = if value.contains(',') || value.contains('(') {
        value.split(',').collect()
    } else {
        value.split_whitespace().collect()
    };
    let mut suits = Vec::new();
    for item in items {
        let item = item.trim();
        let item = item.strip_prefix("and ").unwrap_or(item).trim();
        let letter = match (item.find('('), item.find(')')) {
            (Some(a), Some(b)) if b > a => item[a + 1..b].trim(),
            _ => item,
        };
        let mut chars = letter.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_uppercase() => suits.push(c),
            _ => return Err(format!("bad suit {item:?}")),
        }
    }
    if suits.is_empty() {
        return Err("no suits given".into());
    }
    Ok(suits)
}

fn parse_rank_chain(value: &str) -> Result<Vec<u16>, String> {
    value
        .split('<')
        .map(|r| r.trim().parse::<u16>().map_err(|_| format!("bad rank {:?}", r.trim())))
        .collect()
}

fn parse_flow(value: &str) -> Result<Vec<PhaseKind>, String> {
    value
        .split("->")
        .map(|p| PhaseKind::from_label(p).ok_or_else(|| format!("unknown phase {:?}", p.trim())))
        .collect()
}

/// Parses the structured script format.
pub fn parse_script(text: &str) -> Result<GameScript, ScriptError> {
    let mut draft = Draft::default();
    let mut in_rules = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((key, value)) = line.split_once(':') {
            if key.trim().eq_ignore_ascii_case("specific rules") {
                if in_rules {
                    return Err(ScriptError::Syntax {
                        line: line_no,
                        message: "second Specific Rules block".into(),
                    });
                }
                in_rules = true;
                if !value.trim().is_empty() {
                    draft.push_rule(value)?;
                }
                continue;
            }
            if let Some(e) = Element::from_key(key) {
                if in_rules {
                    return Err(ScriptError::Syntax {
                        line: line_no,
                        message: "structured lines must precede Specific Rules".into(),
                    });
                }
                draft.set_structured(e, value, line_no)?;
                continue;
            }
        }
        if in_rules {
            draft.push_rule(line)?;
        } else {
            return Err(ScriptError::Syntax {
                line: line_no,
                message: format!("expected `Key: value`, got {line:?}"),
            });
        }
    }
    draft.finish()
}

pub(crate) fn suit_name(letter: char) -> Option<&'static str> {
    match letter {
        'H' => Some("Hearts"),
        'D' => Some("Diamonds"),
        'C' => Some("Clubs"),
        'S' => Some("Spades"),
        _ => None,
    }
}

/// Canonical text of one structured element.
pub fn structured_line(script: &GameScript, e: Element) -> Option<String> {
    let line = match e {
        Element::Name => format!("Game: {}", script.name),
        Element::Players => format!("Number of players: {}", script.num_players),
        Element::Suits => {
            let parts: Vec<String> = script
                .suits
                .iter()
                .map(|&s| match suit_name(s) {
                    Some(n) => format!("{n} ({s})"),
                    None => s.to_string(),
                })
                .collect();
            format!("Suit: {}", parts.join(", "))
        }
        Element::Ranks => {
            let parts: Vec<String> = script.rank_order.iter().map(|r| r.to_string()).collect();
            format!("Card Rank: {}", parts.join("<"))
        }
        Element::HandRank => {
            if script.hand_rank.is_empty() {
                return None;
            }
            let parts: Vec<&str> = script.hand_rank.iter().map(|c| c.name()).collect();
            format!("Hand Rank: {}", parts.join("<"))
        }
        Element::Bets => format!("Min / Max bet: {} / {}", script.min_bet, script.max_bet),
        Element::Flow => {
            let parts: Vec<String> = script.flow.iter().map(|p| p.label()).collect();
            format!("Flow: {}", parts.join("->"))
        }
    };
    Some(line)
}

pub(crate) fn rules_block(script: &GameScript, out: &mut String) {
    if script.rules.is_empty() {
        return;
    }
    out.push_str("Specific Rules:\n");
    for r in &script.rules {
        out.push_str(&rules::rule_sentence(r, script));
        out.push('\n');
    }
}

/// Canonical structured text; `parse_script` inverts it.
pub fn serialize_script(script: &GameScript) -> String {
    let mut out = String::new();
    for e in Element::ALL {
        if let Some(line) = structured_line(script, e) {
            out.push_str(&line);
            out.push('\n');
        }
    }
    rules_block(script, &mut out);
    out
}
