//! Core functions: small, self-contained poker operations phrased as
//! instructions, with generated inputs and engine-computed outputs.
//!
//! A sample's input is the structured script text, a blank line, then
//! `key: value` data lines. [`solve`] computes the output from the input
//! alone, so [`verify`] can recheck any stored sample.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::cards::{join_cards, Card, Deck};
use crate::engine::{blind_seats, commit, player_name, split_pot, PlayerId, Seat};
use crate::evaluator::{best_hand_in, detect, evaluate, winners, Direction, HandValue, WinnerKind, Winners};
use crate::rng::SplitMix64;
use crate::rules::RulePredicate;
use crate::script::{parse_script, serialize_script, GameScript};
use crate::statelang::{chip_entry, parse_chip, parse_player, showdown_text};
use crate::variants::STANDARD;

const TABLE: &str = include_str!("../data/coreset.txt");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoreError {
    #[error("unknown core function {0:?}")]
    UnknownFunction(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("{function}: expected {expected:?}, got {actual:?}")]
    Mismatch {
        function: String,
        expected: String,
        actual: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreSample {
    pub function: String,
    pub instruction: String,
    pub input: String,
    pub output: String,
}

/// `(id, instruction template)` for every core function, in table order.
pub fn functions() -> Vec<(&'static str, &'static str)> {
    TABLE
        .lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with("version "))
        .map(|l| l.split_once('\t').expect("core table rows are tab separated"))
        .collect()
}

fn template(function: &str) -> Result<&'static str, CoreError> {
    functions()
        .into_iter()
        .find(|(id, _)| *id == function)
        .map(|(_, t)| t)
        .ok_or_else(|| CoreError::UnknownFunction(function.into()))
}

fn malformed(msg: impl Into<String>) -> CoreError {
    CoreError::Malformed(msg.into())
}

struct Data {
    script: GameScript,
    fields: Vec<(String, String)>,
}

impl Data {
    fn parse(input: &str) -> Result<Self, CoreError> {
        let (script_text, body) = input.split_once("\n\n").ok_or_else(|| malformed("missing blank line"))?;
        let script = parse_script(script_text).map_err(|e| malformed(e.to_string()))?;
        let mut fields = Vec::new();
        for line in body.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line.split_once(':').ok_or_else(|| malformed(format!("line {line:?}")))?;
            fields.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(Self { script, fields })
    }

    fn get(&self, key: &str) -> Result<&str, CoreError> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| malformed(format!("missing {key:?}")))
    }

    fn num(&self, key: &str) -> Result<u64, CoreError> {
        self.get(key)?.parse().map_err(|_| malformed(format!("{key} is not a number")))
    }

    fn cards(&self, key: &str) -> Result<Vec<Card>, CoreError> {
        parse_cards(self.get(key)?)
    }

    fn player(&self, key: &str) -> Result<PlayerId, CoreError> {
        parse_player(self.get(key)?).ok_or_else(|| malformed(format!("bad player in {key}")))
    }

    fn chips(&self) -> Result<Vec<Seat>, CoreError> {
        let mut seats = Vec::new();
        for (i, entry) in self.get("chip")?.split('|').enumerate() {
            let (id, seat) = parse_chip(entry, 1).map_err(|e| malformed(e.to_string()))?;
            if id != i {
                return Err(malformed("chip entries out of order"));
            }
            seats.push(seat);
        }
        Ok(seats)
    }

    /// Seat hands given as `pN: cards` lines.
    fn hands(&self) -> Result<Vec<(PlayerId, Vec<Card>)>, CoreError> {
        self.fields
            .iter()
            .filter_map(|(k, v)| parse_player(k).map(|p| (p, v)))
            .map(|(p, v)| Ok((p, parse_cards(v)?)))
            .collect()
    }
}

fn parse_cards(text: &str) -> Result<Vec<Card>, CoreError> {
    text.split_whitespace()
        .map(|c| c.parse::<Card>().map_err(|e| malformed(e.to_string())))
        .collect()
}

fn cards_text(cards: &[Card]) -> String {
    join_cards(cards, " ")
}

fn line(key: &str, value: impl AsRef<str>) -> String {
    format!("{key}: {}", value.as_ref()).trim_end().to_string()
}

fn chip_line(seats: &[Seat]) -> String {
    let v: Vec<String> = seats.iter().enumerate().map(|(i, s)| chip_entry(i, s)).collect();
    line("chip", v.join("|"))
}

fn ord(script: &GameScript, c: &Card) -> usize {
    script.ordinal(c.rank).unwrap_or(0)
}

fn suit_pos(script: &GameScript, c: &Card) -> usize {
    script.suits.iter().position(|&s| s == c.suit).unwrap_or(usize::MAX)
}

fn sorted_low_high(script: &GameScript, cards: &[Card]) -> Vec<Card> {
    let mut v = cards.to_vec();
    v.sort_by_key(|c| (ord(script, c), suit_pos(script, c)));
    v
}

fn sorted_high_low(script: &GameScript, cards: &[Card]) -> Vec<Card> {
    let mut v = cards.to_vec();
    v.sort_by_key(|c| (core::cmp::Reverse(ord(script, c)), suit_pos(script, c)));
    v
}

fn extreme(values: &[(PlayerId, HandValue)], dir: Direction) -> Vec<PlayerId> {
    let pick = |a: &HandValue, b: &HandValue| match dir {
        Direction::High => a > b,
        Direction::Low => a < b,
    };
    let mut best: Option<&HandValue> = None;
    for (_, v) in values {
        if best.map_or(true, |b| pick(v, b)) {
            best = Some(v);
        }
    }
    values
        .iter()
        .filter(|(_, v)| Some(v) == best)
        .map(|(p, _)| *p)
        .collect()
}

fn directed_winners(
    script: &GameScript,
    hands: &[(PlayerId, Vec<Card>)],
    community: &[Card],
    dir: Direction,
) -> Result<Vec<PlayerId>, CoreError> {
    let values = hands
        .iter()
        .map(|(p, h)| {
            best_hand_in(script, h, community, dir)
                .map(|b| (*p, b.value))
                .map_err(|e| malformed(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(extreme(&values, dir))
}

/// Script where exactly `x` hole cards form a hand.
fn with_hand_size(script: &GameScript, x: u8) -> GameScript {
    let mut s = script.clone();
    s.rules
        .retain(|r| !matches!(r, RulePredicate::HandSize(_) | RulePredicate::OmahaConstraint { .. }));
    s.rules.push(RulePredicate::HandSize(x));
    s
}

fn payouts_text(paid: &[u64]) -> String {
    let v: Vec<String> = paid
        .iter()
        .enumerate()
        .filter(|(_, a)| **a > 0)
        .map(|(p, a)| format!("{} wins {a}.", player_name(p)))
        .collect();
    v.join("\n")
}

fn parse_names(text: &str) -> Result<Vec<PlayerId>, CoreError> {
    text.split(',')
        .map(|s| parse_player(s.trim()).ok_or_else(|| malformed(format!("bad player {s:?}"))))
        .collect()
}

/// Fills `{x}` and `{a}` from the `x` and `player` fields.
fn instruction_for(function: &str, data: &Data) -> Result<String, CoreError> {
    let mut text = template(function)?.to_string();
    if text.contains("{x}") {
        text = text.replace("{x}", data.get("x")?);
    }
    if text.contains("p{a}") {
        text = text.replace("p{a}", data.get("player")?);
    }
    if text.contains("{a}") {
        text = text.replace("{a}", data.get("player")?);
    }
    Ok(text)
}

/// Output of `function` for `input`.
pub fn solve(function: &str, input: &str) -> Result<String, CoreError> {
    template(function)?;
    let d = Data::parse(input)?;
    let s = &d.script;
    let out = match function {
        "shuffle" => {
            let mut deck = Deck::build(&s.suits, &s.rank_order);
            deck.shuffle(&mut SplitMix64::new(d.num("seed")?));
            cards_text(deck.cards())
        }
        "blind" => {
            let mut seats = d.chips()?;
            let (sb, bb) = blind_seats(seats.len(), d.player("button")?);
            for (seat, amount) in [(sb, s.min_bet / 2), (bb, s.min_bet)] {
                let st = &mut seats[seat];
                let amount = amount.min(st.stack);
                commit(st, amount);
            }
            chip_line(&seats)
        }
        "dealx" => {
            let x = d.num("x")? as usize;
            let order = parse_names(d.get("order")?)?;
            let mut deck = Deck::from_cards(d.cards("deck")?);
            let drawn = deck
                .draw(order.len() * x)
                .map_err(|e| malformed(e.to_string()))?;
            let mut hands: Vec<Vec<Card>> = vec![Vec::new(); order.len()];
            for (i, c) in drawn.into_iter().enumerate() {
                hands[i % order.len()].push(c);
            }
            let mut lines: Vec<String> = order
                .iter()
                .zip(&hands)
                .map(|(p, h)| line(&player_name(*p), cards_text(h)))
                .collect();
            lines.push(line("deck", cards_text(deck.cards())));
            lines.join("\n")
        }
        "flopx" => {
            let x = d.num("x")? as usize;
            let mut deck = Deck::from_cards(d.cards("deck")?);
            let burn = deck.draw(1).map_err(|e| malformed(e.to_string()))?;
            let shown = deck.draw(x).map_err(|e| malformed(e.to_string()))?;
            [
                line("discard", cards_text(&burn)),
                line("community", cards_text(&shown)),
                line("deck", cards_text(deck.cards())),
            ]
            .join("\n")
        }
        "switch" => {
            let p = d.player("player")?;
            let mut hole = d.cards(&player_name(p))?;
            let named = match d.get("x")? {
                "0" => Vec::new(),
                t => parse_cards(t)?,
            };
            let mut deck = Deck::from_cards(d.cards("deck")?);
            let mut fresh = deck
                .draw(named.len())
                .map_err(|e| malformed(e.to_string()))?
                .into_iter();
            for c in &named {
                let i = hole
                    .iter()
                    .position(|h| h == c)
                    .ok_or_else(|| malformed(format!("{c} not held")))?;
                hole[i] = fresh.next().expect("drew one per named card");
            }
            [
                line(&player_name(p), cards_text(&hole)),
                line("discard", cards_text(&named)),
                line("deck", cards_text(deck.cards())),
            ]
            .join("\n")
        }
        "show" => {
            let community = d.cards("community").unwrap_or_default();
            let w = winners(s, &d.hands()?, &community).map_err(|e| malformed(e.to_string()))?;
            showdown_text(&w)
        }
        "show low" | "show high" => {
            let dir = if function == "show low" { Direction::Low } else { Direction::High };
            let community = d.cards("community").unwrap_or_default();
            showdown_text(&Winners::single(directed_winners(s, &d.hands()?, &community, dir)?))
        }
        "show high low" => {
            let community = d.cards("community").unwrap_or_default();
            let hands = d.hands()?;
            showdown_text(&Winners {
                kind: WinnerKind::HighLow,
                primary: directed_winners(s, &hands, &community, Direction::High)?,
                secondary: directed_winners(s, &hands, &community, Direction::Low)?,
            })
        }
        "show high x" | "show low x" => {
            let dir = if function == "show low x" { Direction::Low } else { Direction::High };
            let x = d.num("x")? as u8;
            let sized = with_hand_size(s, x);
            showdown_text(&Winners::single(directed_winners(&sized, &d.hands()?, &[], dir)?))
        }
        "prize" => {
            let w = parse_names(d.get("winners")?)?;
            payouts_text(&split_pot(s.num_players as usize, d.player("button")?, d.num("pot")?, &w))
        }
        "prize high low" => {
            let pot = d.num("pot")?;
            let button = d.player("button")?;
            let n = s.num_players as usize;
            let half = pot / 2;
            let a = split_pot(n, button, pot - half, &parse_names(d.get("high winners")?)?);
            let b = split_pot(n, button, half, &parse_names(d.get("low winners")?)?);
            let paid: Vec<u64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            payouts_text(&paid)
        }
        f if f.starts_with("get ") && f != "get all" => {
            let combo = crate::script::CombinationId::builtin(&f[4..])
                .ok_or_else(|| CoreError::UnknownFunction(f.into()))?;
            match detect(s, &combo, &d.cards("cards")?) {
                Some(c) => cards_text(&c),
                None => "None".into(),
            }
        }
        "get all" => {
            let cards = d.cards("cards")?;
            let v: Vec<String> = s
                .hand_rank
                .iter()
                .filter_map(|c| detect(s, c, &cards).map(|found| format!("{}: {}", c.name(), cards_text(&found))))
                .collect();
            v.join("\n")
        }
        "rank low high" => cards_text(&sorted_low_high(s, &d.cards("cards")?)),
        "rank high low" => cards_text(&sorted_high_low(s, &d.cards("cards")?)),
        "low suit" | "high suit" => {
            let cards = d.cards("cards")?;
            let pick: Vec<Card> = s
                .suits
                .iter()
                .filter_map(|&suit| {
                    let of_suit = cards.iter().filter(|c| c.suit == suit);
                    if function == "low suit" {
                        of_suit.min_by_key(|c| ord(s, c)).copied()
                    } else {
                        of_suit.max_by_key(|c| ord(s, c)).copied()
                    }
                })
                .collect();
            cards_text(&pick)
        }
        "highest x" => {
            let x = d.num("x")? as usize;
            cards_text(&sorted_high_low(s, &d.cards("cards")?)[..x])
        }
        "lowest x" => {
            let x = d.num("x")? as usize;
            cards_text(&sorted_low_high(s, &d.cards("cards")?)[..x])
        }
        "highest no pair" | "lowest no pair" => {
            let cards = d.cards("cards")?;
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for c in &cards {
                *counts.entry(ord(s, c)).or_default() += 1;
            }
            let singles = cards.iter().filter(|c| counts[&ord(s, c)] == 1);
            let pick = if function == "highest no pair" {
                singles.max_by_key(|c| ord(s, c))
            } else {
                singles.min_by_key(|c| ord(s, c))
            };
            pick.map_or_else(|| "None".to_string(), |c| c.to_string())
        }
        "group suits" => {
            let cards = d.cards("cards")?;
            let v: Vec<String> = s
                .suits
                .iter()
                .filter_map(|&suit| {
                    let group: Vec<Card> = cards.iter().filter(|c| c.suit == suit).copied().collect();
                    (!group.is_empty()).then(|| line(&suit.to_string(), cards_text(&group)))
                })
                .collect();
            v.join("\n")
        }
        "rank" => {
            let v = evaluate(s, &d.cards("cards")?);
            s.hand_rank
                .get(v.category)
                .map_or_else(|| "None".to_string(), |c| c.name().to_string())
        }
        "len" => d.cards("cards")?.len().to_string(),
        "total bonus" => d.chips()?.iter().map(|s| s.bet).sum::<u64>().to_string(),
        "bonus for x" => {
            let x = d.num("x")?;
            let pot = d.num("pot")?;
            if x == 0 || pot % x != 0 {
                return Err(malformed("pot does not divide evenly"));
            }
            (pot / x).to_string()
        }
        "add x chips" | "drop x chips" | "bet check" | "bet call" | "bet raise to x" | "bet fold" => {
            let mut seats = d.chips()?;
            let p = d.player("player")?;
            let high = seats.iter().map(|s| s.bet).max().unwrap_or(0);
            let seat = seats.get_mut(p).ok_or_else(|| malformed("player not seated"))?;
            match function {
                "add x chips" => {
                    let x = d.num("x")?;
                    if x > seat.stack {
                        return Err(malformed("not enough chips"));
                    }
                    commit(seat, x);
                }
                "drop x chips" => {
                    let x = d.num("x")?;
                    if x > seat.bet {
                        return Err(malformed("bet is smaller than x"));
                    }
                    seat.bet -= x;
                    seat.stack += x;
                    seat.all_in = seat.stack == 0;
                }
                "bet check" => {
                    if seat.bet < high {
                        return Err(malformed("check while unmatched"));
                    }
                }
                "bet call" => {
                    let amount = high.saturating_sub(seat.bet).min(seat.stack);
                    commit(seat, amount);
                }
                "bet raise to x" => {
                    let x = d.num("x")?;
                    if x <= high || x > seat.bet + seat.stack {
                        return Err(malformed("raise target out of range"));
                    }
                    let amount = x - seat.bet;
                    commit(seat, amount);
                }
                _ => seat.folded = true,
            }
            chip_line(&seats)
        }
        other => return Err(CoreError::UnknownFunction(other.into())),
    };
    Ok(out)
}

/// Rechecks the instruction and the output of a stored sample.
pub fn verify(sample: &CoreSample) -> Result<(), CoreError> {
    let data = Data::parse(&sample.input)?;
    let instruction = instruction_for(&sample.function, &data)?;
    if instruction != sample.instruction {
        return Err(CoreError::Mismatch {
            function: sample.function.clone(),
            expected: instruction,
            actual: sample.instruction.clone(),
        });
    }
    let output = solve(&sample.function, &sample.input)?;
    if output != sample.output {
        return Err(CoreError::Mismatch {
            function: sample.function.clone(),
            expected: output,
            actual: sample.output.clone(),
        });
    }
    Ok(())
}

fn pick<'a, T>(rng: &mut SplitMix64, items: &'a [T]) -> &'a T {
    &items[rng.below(items.len() as u64) as usize]
}

fn context(rng: &mut SplitMix64, keep: impl Fn(&GameScript) -> bool) -> GameScript {
    let pool: Vec<GameScript> = STANDARD.iter().map(|b| b.script()).filter(|s| keep(s)).collect();
    pick(rng, &pool).clone()
}

fn shuffled_deck(script: &GameScript, rng: &mut SplitMix64) -> Vec<Card> {
    let mut deck = Deck::build(&script.suits, &script.rank_order);
    deck.shuffle(rng);
    deck.into_cards()
}

fn random_seats(script: &GameScript, rng: &mut SplitMix64, max_bet: u64) -> Vec<Seat> {
    (0..script.num_players)
        .map(|_| Seat {
            bet: rng.range_inclusive(0, max_bet),
            stack: rng.range_inclusive(0, 1000),
            ..Seat::default()
        })
        .collect()
}

fn has_combos(s: &GameScript) -> bool {
    !s.hand_rank.is_empty() && s.omaha().is_none()
}

/// Draws `n` cards, retrying for a while until `combo` appears when `want` is set.
fn cards_for(script: &GameScript, rng: &mut SplitMix64, n: usize, combo: Option<&str>) -> Vec<Card> {
    let id = combo.and_then(crate::script::CombinationId::builtin);
    let want = id.is_some() && rng.below(2) == 0;
    let mut cards = Vec::new();
    for _ in 0..2000 {
        cards = shuffled_deck(script, rng);
        cards.truncate(n);
        match &id {
            Some(c) if want && detect(script, c, &cards).is_none() => continue,
            _ => break,
        }
    }
    cards
}

/// Builds the data lines for one sample of `function`.
fn draw_input(function: &str, rng: &mut SplitMix64) -> (GameScript, Vec<String>) {
    let mut lines = Vec::new();
    let script = match function {
        "shuffle" => {
            let s = context(rng, |_| true);
            lines.push(line("seed", rng.below(1 << 32).to_string()));
            s
        }
        "blind" => {
            let s = context(rng, GameScript::has_blinds);
            let seats: Vec<Seat> = (0..s.num_players)
                .map(|_| Seat {
                    stack: if rng.below(5) == 0 { rng.range_inclusive(1, s.min_bet) } else { 1000 },
                    ..Seat::default()
                })
                .collect();
            lines.push(line("button", player_name(rng.below(s.num_players as u64) as usize)));
            lines.push(chip_line(&seats));
            s
        }
        "dealx" => {
            let s = context(rng, |_| true);
            let x = rng.range_inclusive(1, 5);
            let n = s.num_players as usize;
            let start = rng.below(n as u64) as usize;
            let order: Vec<String> = (0..n).map(|i| player_name((start + i) % n)).collect();
            lines.push(line("x", x.to_string()));
            lines.push(line("order", order.join(", ")));
            lines.push(line("deck", cards_text(&shuffled_deck(&s, rng))));
            s
        }
        "flopx" => {
            let s = context(rng, |_| true);
            lines.push(line("x", rng.range_inclusive(1, 3).to_string()));
            lines.push(line("deck", cards_text(&shuffled_deck(&s, rng))));
            s
        }
        "switch" => {
            let s = context(rng, |s| s.flow.contains(&crate::script::PhaseKind::Switch));
            let mut deck = shuffled_deck(&s, rng);
            let hole: Vec<Card> = deck.drain(..s.hole_cards_per_player()).collect();
            let k = rng.below(hole.len() as u64 + 1) as usize;
            let mut named = hole.clone();
            rng.shuffle(&mut named);
            named.truncate(k);
            let p = player_name(rng.below(s.num_players as u64) as usize);
            lines.push(line("player", &p));
            lines.push(line(&p, cards_text(&hole)));
            lines.push(line("x", if named.is_empty() { "0".into() } else { cards_text(&named) }));
            lines.push(line("deck", cards_text(&deck)));
            s
        }
        "show" | "show low" | "show high" | "show high low" => {
            let s = if function == "show" {
                context(rng, |_| true)
            } else {
                context(rng, |s| !s.badugi() && !s.hand_rank.is_empty())
            };
            let mut deck = shuffled_deck(&s, rng);
            let k = rng.range_inclusive(2, s.num_players as u64) as usize;
            let hole = s.hole_cards_per_player();
            for p in 0..k {
                lines.push(line(&player_name(p), cards_text(&deck.drain(..hole).collect::<Vec<_>>())));
            }
            if s.community_cards() > 0 {
                lines.push(line("community", cards_text(&deck[..s.community_cards()])));
            }
            s
        }
        "show high x" | "show low x" => {
            let s = context(rng, has_combos);
            let x = rng.range_inclusive(2, 5) as usize;
            let mut deck = shuffled_deck(&s, rng);
            let k = rng.range_inclusive(2, s.num_players as u64) as usize;
            lines.push(line("x", x.to_string()));
            let held = x + rng.below(3) as usize;
            for p in 0..k {
                lines.push(line(&player_name(p), cards_text(&deck.drain(..held).collect::<Vec<_>>())));
            }
            s
        }
        "prize" | "prize high low" => {
            let s = context(rng, |_| true);
            let n = s.num_players as usize;
            let subset = |rng: &mut SplitMix64| -> String {
                let mut seats: Vec<usize> = (0..n).collect();
                rng.shuffle(&mut seats);
                seats.truncate(rng.range_inclusive(1, n as u64) as usize);
                seats.sort_unstable();
                let v: Vec<String> = seats.into_iter().map(player_name).collect();
                v.join(", ")
            };
            lines.push(line("button", player_name(rng.below(n as u64) as usize)));
            lines.push(line("pot", rng.range_inclusive(1, 4000).to_string()));
            if function == "prize" {
                lines.push(line("winners", subset(rng)));
            } else {
                lines.push(line("high winners", subset(rng)));
                lines.push(line("low winners", subset(rng)));
            }
            s
        }
        f if f.starts_with("get ") || f == "rank" => {
            let s = context(rng, has_combos);
            let n = if f == "rank" { s.hand_size() } else { rng.range_inclusive(5, 7) as usize };
            let combo = f.strip_prefix("get ").filter(|c| *c != "all");
            lines.push(line("cards", cards_text(&cards_for(&s, rng, n, combo))));
            s
        }
        "highest x" | "lowest x" => {
            let s = context(rng, |_| true);
            let n = rng.range_inclusive(2, 8) as usize;
            lines.push(line("x", rng.range_inclusive(1, n as u64).to_string()));
            lines.push(line("cards", cards_text(&cards_for(&s, rng, n, None))));
            s
        }
        "total bonus" => {
            let s = context(rng, |_| true);
            lines.push(chip_line(&random_seats(&s, rng, 500)));
            s
        }
        "bonus for x" => {
            let s = context(rng, |_| true);
            let x = rng.range_inclusive(1, s.num_players as u64);
            lines.push(line("pot", (x * rng.range_inclusive(1, 500)).to_string()));
            lines.push(line("x", x.to_string()));
            s
        }
        "add x chips" | "drop x chips" | "bet check" | "bet call" | "bet raise to x" | "bet fold" => {
            let s = context(rng, |_| true);
            let mut seats = random_seats(&s, rng, 300);
            let p = rng.below(seats.len() as u64) as usize;
            let high = seats.iter().map(|s| s.bet).max().unwrap_or(0);
            let seat = &mut seats[p];
            let x = match function {
                "add x chips" => {
                    seat.stack = seat.stack.max(1);
                    Some(rng.range_inclusive(1, seat.stack))
                }
                "drop x chips" => {
                    seat.bet = seat.bet.max(1);
                    Some(rng.range_inclusive(1, seat.bet))
                }
                "bet check" => {
                    seat.bet = high;
                    None
                }
                "bet call" => {
                    seat.bet = rng.below(high.max(1));
                    seat.stack = seat.stack.max(1);
                    None
                }
                "bet raise to x" => {
                    seat.stack = seat.stack.max(high + s.min_bet);
                    Some(rng.range_inclusive(high + s.min_bet, seat.bet + seat.stack))
                }
                _ => None,
            };
            lines.push(line("player", player_name(p)));
            if let Some(x) = x {
                lines.push(line("x", x.to_string()));
            }
            lines.push(chip_line(&seats));
            s
        }
        _ => {
            // low suit, high suit, rank low high, rank high low, highest/lowest no pair, group suits, len
            let s = context(rng, |_| true);
            let n = rng.range_inclusive(2, 8) as usize;
            lines.push(line("cards", cards_text(&cards_for(&s, rng, n, None))));
            s
        }
    };
    (script, lines)
}

/// One sample of `function`.
pub fn generate(function: &str, rng: &mut SplitMix64) -> Result<CoreSample, CoreError> {
    template(function)?;
    let (script, lines) = draw_input(function, rng);
    let input = format!("{}\n{}", serialize_script(&script), lines.join("\n"));
    let data = Data::parse(&input)?;
    Ok(CoreSample {
        function: function.to_string(),
        instruction: instruction_for(function, &data)?,
        output: solve(function, &input)?,
        input,
    })
}

/// `n_per_function` samples of every function, function-major.
pub fn generate_core_set(n_per_function: usize, seed: u64) -> Result<Vec<CoreSample>, CoreError> {
    let mut out = Vec::new();
    for (i, (id, _)) in functions().into_iter().enumerate() {
        let mut rng = SplitMix64::new(seed).fork(i as u64);
        for _ in 0..n_per_function {
            out.push(generate(id, &mut rng)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn holdem() -> String {
        serialize_script(&STANDARD[0].script())
    }

    fn run(function: &str, data: &str) -> String {
        solve(function, &format!("{}\n{data}", holdem())).unwrap()
    }

    #[test]
    fn forty_functions() {
        let f = functions();
        assert_eq!(f.len(), 40);
        let mut ids: Vec<&str> = f.iter().map(|(id, _)| *id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 40);
    }

    #[test]
    fn every_function_generates_and_verifies() {
        let set = generate_core_set(5, 11).unwrap();
        assert_eq!(set.len(), 200);
        for s in &set {
            verify(s).unwrap_or_else(|e| panic!("{e}\n{}", s.input));
            assert!(!s.instruction.contains('{'), "{}", s.instruction);
        }
        assert_eq!(set, generate_core_set(5, 11).unwrap());
    }

    #[test]
    fn tampered_output_fails() {
        let mut s = generate("len", &mut SplitMix64::new(1)).unwrap();
        s.output.push('0');
        assert!(matches!(verify(&s), Err(CoreError::Mismatch { .. })));
    }

    #[test]
    fn hand_computed_outputs() {
        assert_eq!(run("len", "cards: H2 D3 C4 S5 H6 D7 C8"), "7");
        assert_eq!(run("bonus for x", "pot: 900\nx: 3"), "300");
        assert_eq!(run("total bonus", "chip: p1: 5/995|p2: 10/990|p3: 0/1000|p4: 0/1000|p5: 0/1000"), "15");
        assert_eq!(
            run("blind", "button: p3\nchip: p1: 0/1000|p2: 0/1000|p3: 0/1000|p4: 0/1000|p5: 0/1000"),
            "chip: p1: 0/1000|p2: 0/1000|p3: 0/1000|p4: 5/995|p5: 10/990"
        );
        assert_eq!(run("get pair", "cards: H2 D9 C9 S13 H13 D4"), "S13 H13");
        assert_eq!(run("get straight", "cards: H1 D2 C3 S4 H5 D7"), "None");
        assert_eq!(run("get straight", "cards: H10 D11 C12 S13 H1 D2"), "H1 S13 C12 D11 H10");
        assert_eq!(run("rank low high", "cards: H1 D2 S2 C13"), "D2 S2 C13 H1");
        assert_eq!(run("rank high low", "cards: H1 D2 S2 C13"), "H1 C13 D2 S2");
        assert_eq!(run("high suit", "cards: H3 H9 D1 S4"), "H9 D1 S4");
        assert_eq!(run("low suit", "cards: H3 H9 D1 S4"), "H3 D1 S4");
        assert_eq!(run("highest no pair", "cards: H1 D1 C7 S5"), "C7");
        assert_eq!(run("lowest no pair", "cards: H2 D2 S2"), "None");
        assert_eq!(run("group suits", "cards: S4 H3 D1 H9"), "H: H3 H9\nD: D1\nS: S4");
        assert_eq!(run("rank", "cards: H2 H5 H7 H9 H11"), "Flush");
        assert_eq!(run("flopx", "x: 3\ndeck: H2 H3 H4 H5 H6"), "discard: H2\ncommunity: H3 H4 H5\ndeck: H6");
        assert_eq!(
            run("dealx", "x: 2\norder: p2, p1\ndeck: H2 H3 H4 H5 H6"),
            "p2: H2 H4\np1: H3 H5\ndeck: H6"
        );
        assert_eq!(
            run("switch", "player: p1\np1: H2 H3 H4\nx: H3\ndeck: D9 D10"),
            "p1: H2 D9 H4\ndiscard: H3\ndeck: D10"
        );
        assert_eq!(run("prize", "button: p3\npot: 31\nwinners: p1, p5"), "p1 wins 15.\np5 wins 16.");
        assert_eq!(
            run("prize high low", "button: p1\npot: 101\nhigh winners: p2\nlow winners: p3"),
            "p2 wins 51.\np3 wins 50."
        );
        assert_eq!(
            run("bet call", "player: p2\nchip: p1: 40/960|p2: 10/20|p3: 0/1000|p4: 0/1000|p5: 0/1000"),
            "chip: p1: 40/960|p2: 30/0 (all-in)|p3: 0/1000|p4: 0/1000|p5: 0/1000"
        );
        assert_eq!(
            run("bet fold", "player: p3\nchip: p1: 40/960|p2: 10/20|p3: 0/1000|p4: 0/1000|p5: 0/1000"),
            "chip: p1: 40/960|p2: 10/20|p3: 0/1000 (folded)|p4: 0/1000|p5: 0/1000"
        );
        assert_eq!(
            run("show", "p1: H1 D1\np2: H13 D12\ncommunity: C1 S5 H7 D9 C11"),
            "Winners: p1."
        );
        assert_eq!(
            run("show low x", "x: 2\np1: H1 D1 C5\np2: H13 D12 C2"),
            "Winners: p2."
        );
    }

    #[test]
    fn instruction_slots_are_filled() {
        let s = generate("bet raise to x", &mut SplitMix64::new(4)).unwrap();
        assert!(s.instruction.ends_with(".") && s.instruction.contains(": Raise to "));
        let s = generate("dealx", &mut SplitMix64::new(4)).unwrap();
        assert!(s.instruction.starts_with("Deal ") && !s.instruction.contains("{x}"));
    }
}
