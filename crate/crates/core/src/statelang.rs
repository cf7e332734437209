//! Pipe-delimited text form of states and player inputs.
//!
//! ```text
//! |order|p1|p2|p3 (button)|p4 (small blind)|p5 (big blind)
//! |chip|p1: 10/990|p2: 0/1000|p3: 0/1000|p4: 5/995|p5: 10/990
//! |stack|C12|S1|H10|...
//! |hole|p1|H8|D1|p2|S6|C5|...
//! |community|D4|D12|C8
//! |start|blind|deal2
//! |message|engine|p2|It's your turn to bet.
//! ```
//!
//! Lines always come in that order. `hole` is left out while nobody holds
//! cards and `community` while the board is empty; `stack` is always present.
//! Discards are not written: they are whatever the script's deck has left.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::cards::{build_deck, sort_canonical, Card, Deck};
use crate::engine::{player_name, Action, GameState, Notice, PlayerId, PlayerInput, Seat, TurnKind};
use crate::evaluator::{WinnerKind, Winners};
use crate::script::{GameScript, PhaseKind};

pub const ENGINE: &str = "engine";
pub const EVERYONE: &str = "all";
pub const BET_PROMPT: &str = "It's your turn to bet.";
pub const SWITCH_PROMPT: &str = "It's your turn to switch.";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct StateParseError {
    pub line: usize,
    pub reason: String,
}

fn err(line: usize, reason: impl Into<String>) -> StateParseError {
    StateParseError {
        line,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown player {0}")]
pub struct UnknownPlayer(pub String);

fn push_cards(out: &mut String, cards: &[Card]) {
    for c in cards {
        out.push('|');
        out.push_str(&c.to_string());
    }
}

fn names(ids: &[PlayerId]) -> String {
    let v: Vec<String> = ids.iter().map(|&p| player_name(p)).collect();
    v.join(", ")
}

/// Chip entry for one seat, e.g. `p2: 1000/0 (all-in)`.
pub fn chip_entry(id: PlayerId, seat: &Seat) -> String {
    let mut s = format!("{}: {}/{}", player_name(id), seat.bet, seat.stack);
    if seat.all_in {
        s.push_str(" (all-in)");
    }
    if seat.folded {
        s.push_str(" (folded)");
    }
    s
}

pub fn showdown_text(w: &Winners) -> String {
    match w.kind {
        WinnerKind::Single => format!("Winners: {}.", names(&w.primary)),
        WinnerKind::HighLow => format!(
            "High winners: {}. Low winners: {}.",
            names(&w.primary),
            names(&w.secondary)
        ),
        WinnerKind::LowBadugi => format!(
            "Low winners: {}. Badugi winners: {}.",
            names(&w.primary),
            names(&w.secondary)
        ),
    }
}

/// Canonical text of a state, without a trailing newline.
pub fn serialize_state(state: &GameState) -> String {
    let mut lines: Vec<String> = Vec::new();

    let mut order = String::from("|order");
    for i in 0..state.seats.len() {
        order.push('|');
        order.push_str(&player_name(i));
        if i == state.button {
            order.push_str(" (button)");
        }
        if let Some((sb, bb)) = state.blinds {
            if i == sb {
                order.push_str(" (small blind)");
            }
            if i == bb {
                order.push_str(" (big blind)");
            }
        }
    }
    lines.push(order);

    let mut chip = String::from("|chip");
    for (i, seat) in state.seats.iter().enumerate() {
        chip.push('|');
        chip.push_str(&chip_entry(i, seat));
    }
    lines.push(chip);

    let mut stack = String::from("|stack");
    push_cards(&mut stack, state.deck.cards());
    lines.push(stack);

    if state.seats.iter().any(|s| !s.hole.is_empty()) {
        let mut hole = String::from("|hole");
        for (i, seat) in state.seats.iter().enumerate() {
            if seat.hole.is_empty() {
                continue;
            }
            hole.push('|');
            hole.push_str(&player_name(i));
            push_cards(&mut hole, &seat.hole);
        }
        lines.push(hole);
    }

    if !state.community.is_empty() {
        let mut community = String::from("|community");
        push_cards(&mut community, &state.community);
        lines.push(community);
    }

    let mut trace = String::new();
    for p in &state.trace {
        trace.push('|');
        trace.push_str(&p.label());
    }
    lines.push(trace);

    match &state.notice {
        Notice::None => {}
        Notice::Turn { player, kind } => {
            let text = match kind {
                TurnKind::Bet => BET_PROMPT,
                TurnKind::Switch => SWITCH_PROMPT,
            };
            lines.push(format!("|message|{ENGINE}|{}|{text}", player_name(*player)));
        }
        Notice::Showdown(w) => lines.push(format!("|message|{ENGINE}|{EVERYONE}|{}", showdown_text(w))),
        Notice::Payouts(paid) => {
            for (p, amount) in paid {
                lines.push(format!("|message|{ENGINE}|{EVERYONE}|{} wins {amount}.", player_name(*p)));
            }
        }
    }
    lines.join("\n")
}

/// Text of the action alone, e.g. `Raise to 40.`
pub fn action_text(action: &Action) -> String {
    match action {
        Action::Check => "Check.".into(),
        Action::Call => "Call.".into(),
        Action::RaiseTo(x) => format!("Raise to {x}."),
        Action::Fold => "Fold.".into(),
        Action::AllIn => "All-in.".into(),
        Action::Switch(cards) if cards.is_empty() => "Switch 0.".into(),
        Action::Switch(cards) => {
            let v: Vec<String> = cards.iter().map(|c| c.to_string()).collect();
            format!("Switch {}.", v.join(" "))
        }
    }
}

/// Player message line, e.g. `|message|p2|engine|All-in.`
pub fn serialize_input(input: &PlayerInput) -> String {
    format!("|message|{}|{ENGINE}|{}", player_name(input.player), action_text(&input.action))
}

pub fn parse_player(name: &str) -> Option<PlayerId> {
    let digits = name.strip_prefix('p')?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse::<usize>().ok().map(|n| n - 1)
}

/// Reads an action; the final period is optional.
pub fn parse_action(text: &str) -> Option<Action> {
    let t = text.trim();
    let t = t.strip_suffix('.').unwrap_or(t).trim();
    Some(match t {
        "Check" => Action::Check,
        "Call" => Action::Call,
        "Fold" => Action::Fold,
        "All-in" | "All-In" | "All in" => Action::AllIn,
        _ => {
            if let Some(x) = t.strip_prefix("Raise to ") {
                Action::RaiseTo(x.trim().parse().ok()?)
            } else if let Some(rest) = t.strip_prefix("Switch") {
                let rest = rest.trim();
                if rest == "0" || rest.is_empty() {
                    Action::Switch(Vec::new())
                } else {
                    let cards: Option<Vec<Card>> = rest
                        .split(|c: char| c == ' ' || c == ',')
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse().ok())
                        .collect();
                    Action::Switch(cards?)
                }
            } else {
                return None;
            }
        }
    })
}

/// Parses a single `|message|pN|engine|...` line.
pub fn parse_input(line: &str) -> Result<PlayerInput, StateParseError> {
    let fields: Vec<&str> = line.trim().split('|').collect();
    if fields.len() != 5 || !fields[0].is_empty() || fields[1] != "message" || fields[3] != ENGINE {
        return Err(err(1, "expected `|message|pN|engine|<action>`"));
    }
    let player = parse_player(fields[2]).ok_or_else(|| err(1, format!("bad player {:?}", fields[2])))?;
    let action = parse_action(fields[4]).ok_or_else(|| err(1, format!("unknown action {:?}", fields[4])))?;
    Ok(PlayerInput { player, action })
}

fn parse_cards(fields: &[&str], line: usize) -> Result<Vec<Card>, StateParseError> {
    fields
        .iter()
        .map(|f| f.parse::<Card>().map_err(|_| err(line, format!("bad card {f:?}"))))
        .collect()
}

fn parse_names(list: &str, line: usize) -> Result<Vec<PlayerId>, StateParseError> {
    list.split(',')
        .map(|s| parse_player(s.trim()).ok_or_else(|| err(line, format!("bad player {s:?}"))))
        .collect()
}

pub fn parse_showdown(text: &str, line: usize) -> Result<Winners, StateParseError> {
    let body = |s: &str| s.trim().trim_end_matches('.').to_string();
    if let Some(rest) = text.strip_prefix("Winners: ") {
        return Ok(Winners::single(parse_names(&body(rest), line)?));
    }
    for (kind, a, b) in [
        (WinnerKind::HighLow, "High winners: ", ". Low winners: "),
        (WinnerKind::LowBadugi, "Low winners: ", ". Badugi winners: "),
    ] {
        if let Some(rest) = text.strip_prefix(a) {
            let (first, second) = rest
                .split_once(b)
                .ok_or_else(|| err(line, "incomplete split-pot result"))?;
            return Ok(Winners {
                kind,
                primary: parse_names(&body(first), line)?,
                secondary: parse_names(&body(second), line)?,
            });
        }
    }
    Err(err(line, format!("unknown engine message {text:?}")))
}

pub fn parse_chip(entry: &str, line: usize) -> Result<(PlayerId, Seat), StateParseError> {
    let bad = || err(line, format!("malformed chip entry {entry:?}"));
    let (name, rest) = entry.split_once(": ").ok_or_else(bad)?;
    let id = parse_player(name).ok_or_else(bad)?;
    let mut rest = rest.trim();
    let mut seat = Seat::default();
    if let Some(r) = rest.strip_suffix(" (folded)") {
        seat.folded = true;
        rest = r;
    }
    if let Some(r) = rest.strip_suffix(" (all-in)") {
        seat.all_in = true;
        rest = r;
    }
    let (bet, stack) = rest.split_once('/').ok_or_else(bad)?;
    let num = |s: &str| -> Result<u64, StateParseError> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        s.parse().map_err(|_| bad())
    };
    seat.bet = num(bet)?;
    seat.stack = num(stack)?;
    Ok((id, seat))
}

/// Parses canonical state text back into a state for `script`.
///
/// Discards are rebuilt as the cards of the script's deck that appear nowhere else.
pub fn parse_state(text: &str, script: &GameScript) -> Result<GameState, StateParseError> {
    let mut button = None;
    let mut sb = None;
    let mut bb = None;
    let mut n_order = None;
    let mut seats: Option<Vec<Seat>> = None;
    let mut deck: Option<Vec<Card>> = None;
    let mut community = Vec::new();
    let mut trace: Option<Vec<PhaseKind>> = None;
    let mut notice = Notice::None;
    let mut holes: Vec<(PlayerId, Vec<Card>)> = Vec::new();
    // Section index each key must follow, to pin the line order.
    let mut last_section = 0usize;

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('|').collect();
        if !fields[0].is_empty() || fields.len() < 2 {
            return Err(err(ln, "lines start with `|key`"));
        }
        let key = fields[1];
        let rest = &fields[2..];
        let section = match key {
            "order" => 1,
            "chip" => 2,
            "stack" => 3,
            "hole" => 4,
            "community" => 5,
            "message" => 7,
            _ if PhaseKind::from_label(key).is_some() => 6,
            _ => return Err(err(ln, format!("unknown line key {key:?}"))),
        };
        if section < last_section || (section == last_section && section != 7) {
            return Err(err(ln, format!("`{key}` line out of order")));
        }
        last_section = section;
        match section {
            1 => {
                for (pos, f) in rest.iter().enumerate() {
                    let mut name = *f;
                    let mut flags = Vec::new();
                    while let Some(open) = name.rfind(" (") {
                        if !name.ends_with(')') {
                            break;
                        }
                        flags.push(&name[open + 2..name.len() - 1]);
                        name = &name[..open];
                    }
                    if parse_player(name) != Some(pos) {
                        return Err(err(ln, format!("expected {} in seat order", player_name(pos))));
                    }
                    for flag in flags {
                        let slot = match flag {
                            "button" => &mut button,
                            "small blind" => &mut sb,
                            "big blind" => &mut bb,
                            _ => return Err(err(ln, format!("unknown seat note {flag:?}"))),
                        };
                        if slot.replace(pos).is_some() {
                            return Err(err(ln, format!("{flag} given twice")));
                        }
                    }
                }
                n_order = Some(rest.len());
            }
            2 => {
                let mut v = Vec::new();
                for (pos, entry) in rest.iter().enumerate() {
                    let (id, seat) = parse_chip(entry, ln)?;
                    if id != pos {
                        return Err(err(ln, format!("chip entry for {} out of place", player_name(id))));
                    }
                    v.push(seat);
                }
                seats = Some(v);
            }
            3 => deck = Some(parse_cards(rest, ln)?),
            4 => {
                let mut current: Option<(PlayerId, Vec<Card>)> = None;
                for f in rest {
                    if let Some(p) = parse_player(f) {
                        if let Some(done) = current.take() {
                            holes.push(done);
                        }
                        current = Some((p, Vec::new()));
                    } else {
                        let c: Card = f.parse().map_err(|_| err(ln, format!("bad card {f:?}")))?;
                        match current.as_mut() {
                            Some((_, cards)) => cards.push(c),
                            None => return Err(err(ln, "card before any player")),
                        }
                    }
                }
                holes.extend(current);
            }
            5 => community = parse_cards(rest, ln)?,
            6 => {
                let labels: Option<Vec<PhaseKind>> = fields[1..].iter().map(|f| PhaseKind::from_label(f)).collect();
                trace = Some(labels.ok_or_else(|| err(ln, "unknown phase label"))?);
            }
            _ => {
                if rest.len() != 3 {
                    return Err(err(ln, "expected `|message|from|to|text`"));
                }
                if rest[0] != ENGINE {
                    return Err(err(ln, "player messages are inputs, not state"));
                }
                let text = rest[2];
                if rest[1] == EVERYONE {
                    if let Some(body) = text.strip_suffix('.').and_then(|t| t.split_once(" wins ")) {
                        let p = parse_player(body.0).ok_or_else(|| err(ln, "bad player in payout"))?;
                        let amount: u64 = body.1.parse().map_err(|_| err(ln, "bad payout"))?;
                        match &mut notice {
                            Notice::None => notice = Notice::Payouts(vec![(p, amount)]),
                            Notice::Payouts(v) => v.push((p, amount)),
                            _ => return Err(err(ln, "payout mixed with other messages")),
                        }
                        continue;
                    }
                    if notice != Notice::None {
                        return Err(err(ln, "more than one engine announcement"));
                    }
                    notice = Notice::Showdown(parse_showdown(text, ln)?);
                } else {
                    if notice != Notice::None {
                        return Err(err(ln, "more than one engine announcement"));
                    }
                    let player = parse_player(rest[1]).ok_or_else(|| err(ln, "bad recipient"))?;
                    let kind = match text {
                        BET_PROMPT => TurnKind::Bet,
                        SWITCH_PROMPT => TurnKind::Switch,
                        _ => return Err(err(ln, format!("unknown prompt {text:?}"))),
                    };
                    notice = Notice::Turn { player, kind };
                }
            }
        }
    }

    let end = text.lines().count().max(1);
    let n = n_order.ok_or_else(|| err(end, "missing order line"))?;
    let mut seats = seats.ok_or_else(|| err(end, "missing chip line"))?;
    if seats.len() != n {
        return Err(err(end, "order and chip lines list different players"));
    }
    if n != script.num_players as usize {
        return Err(err(end, format!("script seats {} players, state has {n}", script.num_players)));
    }
    let deck = deck.ok_or_else(|| err(end, "missing stack line"))?;
    let trace = trace.ok_or_else(|| err(end, "missing phase trace"))?;
    if trace.first() != Some(&PhaseKind::Start) {
        return Err(err(end, "phase trace must begin with start"));
    }
    for (p, cards) in holes {
        let seat = seats.get_mut(p).ok_or_else(|| err(end, format!("no seat {}", player_name(p))))?;
        if !seat.hole.is_empty() {
            return Err(err(end, format!("{} listed twice in hole line", player_name(p))));
        }
        seat.hole = cards;
    }
    if let Notice::Turn { player, .. } = notice {
        if player >= n {
            return Err(err(end, "prompt for a missing player"));
        }
    }
    let button = button.ok_or_else(|| err(end, "no button in order line"))?;
    let blinds = match (sb, bb) {
        (Some(s), Some(b)) => Some((s, b)),
        (None, None) => None,
        _ => return Err(err(end, "only one blind annotated")),
    };

    // Everything visible must come from the script's deck, once.
    let full = build_deck(script).into_cards();
    let mut seen: Vec<Card> = deck.clone();
    for s in &seats {
        seen.extend(&s.hole);
    }
    seen.extend(&community);
    let mut sorted = seen.clone();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(err(end, "a card appears twice"));
    }
    if let Some(c) = seen.iter().find(|c| !full.contains(c)) {
        return Err(err(end, format!("{c} is not in this game's deck")));
    }
    let mut discards: Vec<Card> = full.into_iter().filter(|c| !seen.contains(c)).collect();
    sort_canonical(script, &mut discards);

    Ok(GameState {
        seats,
        button,
        blinds,
        deck: Deck::from_cards(deck),
        discards,
        community,
        trace,
        notice,
    })
}

/// Text a viewer may see: no stack line, and hole cards only for `viewer`
/// until the showdown. `None` is a spectator.
///
/// Works on text so it also applies to model output; applying it twice is a no-op.
pub fn redact(text: &str, viewer: Option<PlayerId>) -> Result<String, UnknownPlayer> {
    let mut n_players = None;
    let mut showed = false;
    for line in text.lines() {
        let fields: Vec<&str> = line.split('|').collect();
        match fields.get(1) {
            Some(&"order") => n_players = Some(fields.len() - 2),
            Some(k) if PhaseKind::from_label(k).is_some() => {
                showed = fields[1..].iter().any(|f| PhaseKind::from_label(f) == Some(PhaseKind::Show));
            }
            _ => {}
        }
    }
    if let (Some(v), Some(n)) = (viewer, n_players) {
        if v >= n {
            return Err(UnknownPlayer(player_name(v)));
        }
    }
    let mut out: Vec<String> = Vec::new();
    for line in text.lines() {
        let fields: Vec<&str> = line.split('|').collect();
        match fields.get(1) {
            Some(&"stack") => continue,
            Some(&"hole") if !showed => {
                let mut kept = String::from("|hole");
                let mut keep = false;
                let mut any = false;
                for f in &fields[2..] {
                    if let Some(p) = parse_player(f) {
                        keep = Some(p) == viewer;
                    }
                    if keep {
                        kept.push('|');
                        kept.push_str(f);
                        any = true;
                    }
                }
                if any {
                    out.push(kept);
                }
            }
            _ => out.push(line.to_string()),
        }
    }
    Ok(out.join("\n"))
}

/// One mismatched line between two state texts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineDiff {
    /// Line key, e.g. `chip`, `stack`, `trace` or `message`.
    pub key: String,
    pub expected: Option<String>,
    pub actual: Option<String>,
}

/// Key of a state line; the phase trace is reported as `trace`.
pub fn line_key(line: &str) -> String {
    let key = line.split('|').nth(1).unwrap_or("");
    if PhaseKind::from_label(key).is_some() {
        "trace".into()
    } else if key.is_empty() {
        "?".into()
    } else {
        key.to_string()
    }
}

/// Positional line diff; empty exactly when the texts are equal line by line.
pub fn diff_states(expected: &str, actual: &str) -> Vec<LineDiff> {
    let e: Vec<&str> = expected.lines().collect();
    let a: Vec<&str> = actual.lines().collect();
    let mut out = Vec::new();
    for i in 0..e.len().max(a.len()) {
        let (x, y) = (e.get(i), a.get(i));
        if x != y {
            out.push(LineDiff {
                key: line_key(x.or(y).expect("one side has the line")),
                expected: x.map(|s| s.to_string()),
                actual: y.map(|s| s.to_string()),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::random_round;
    use crate::script::parse_script;

    fn script() -> GameScript {
        parse_script(
            "Number of players: 3\nSuit: H, D, C, S\nCard Rank: 2<3<4<5<6<7<8<9<10<11<12<13<1\n\
             Hand Rank: High Card<Pair<Two Pair<Three of a Kind<Straight<Flush<Full House<Four of a Kind<Straight Flush\n\
             Min / Max bet: 10 / 1000\nFlow: start->blind->deal2->bet->flop3->bet->flop1->bet->flop1->bet->show->prize\n",
        )
        .unwrap()
    }

    #[test]
    fn round_trip_over_random_rounds() {
        let s = script();
        for seed in 0..20 {
            for st in random_round(&s, seed, 1000).unwrap().states {
                let text = serialize_state(&st);
                let back = parse_state(&text, &s).unwrap();
                assert_eq!(back, st, "{text}");
                assert_eq!(serialize_state(&back), text);
            }
        }
    }

    #[test]
    fn malformed_chip_entry() {
        let s = script();
        let st = random_round(&s, 1, 1000).unwrap().states.remove(0);
        let text = serialize_state(&st).replace("p1: 0/1000", "p1: x/990");
        let e = parse_state(&text, &s).unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn inputs() {
        for a in [
            Action::Check,
            Action::Call,
            Action::RaiseTo(40),
            Action::Fold,
            Action::AllIn,
            Action::Switch(Vec::new()),
            Action::Switch(vec!["H8".parse().unwrap(), "D1".parse().unwrap()]),
        ] {
            let input = PlayerInput::new(1, a);
            assert_eq!(parse_input(&serialize_input(&input)).unwrap(), input);
        }
        assert_eq!(parse_input("|message|p5|engine|All-in").unwrap().action, Action::AllIn);
        assert!(parse_input("|message|p0|engine|Check.").is_err());
    }

    #[test]
    fn diff_is_positional() {
        assert!(diff_states("|a\n|b", "|a\n|b").is_empty());
        let d = diff_states("|stack|H1|H2\n|start", "|stack|H1|H3\n|start");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].key, "stack");
        let d = diff_states("|start|blind", "|start");
        assert_eq!(d[0].key, "trace");
    }

    #[test]
    fn redaction() {
        let text = "|order|p1|p2 (button) (small blind)\n|chip|p1: 0/1000|p2: 0/1000\n|stack|H3\n\
                    |hole|p1|H8|D1|p2|S6|C5\n|start|blind|deal2";
        let p1 = redact(text, Some(0)).unwrap();
        assert!(p1.contains("|hole|p1|H8|D1"));
        assert!(!p1.contains("S6"));
        assert!(!p1.contains("|stack"));
        assert_eq!(redact(&p1, Some(0)).unwrap(), p1);
        assert!(!redact(text, None).unwrap().contains("|hole"));
        assert!(redact(text, Some(2)).is_err());
        let shown = text.replace("deal2", "deal2|bet|show");
        assert!(redact(&shown, None).unwrap().contains("|hole|p1|H8|D1|p2|S6|C5"));
    }
}
