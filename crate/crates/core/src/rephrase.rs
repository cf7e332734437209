//! Segment rephrasing: swapping structured script lines for prose sentences.
//!
//! Each element line can be replaced by one sentence from the shipped
//! template bank. The sentences keep every value, so [`parse_rephrased`]
//! recovers the original script exactly.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::rng::SplitMix64;
use crate::rules::match_pattern;
use crate::script::{rules_block, structured_line, suit_name, Draft, Element, GameScript, PhaseKind, ScriptError};

const BANK: &str = include_str!("../data/templates.txt");

const NUMBER_WORDS: [&str; 21] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RephraseConfig {
    pub seed: u64,
    /// Chance that any one element is rephrased.
    pub element_prob: f64,
    /// Chance that every element is rephrased at once; at most 0.05.
    pub whole_prob: f64,
}

impl RephraseConfig {
    pub const MAX_WHOLE_PROB: f64 = 0.05;

    pub fn new(seed: u64, element_prob: f64, whole_prob: f64) -> Result<Self, ScriptError> {
        if !(0.0..=1.0).contains(&element_prob) {
            return Err(ScriptError::Validation("element probability must be in [0, 1]".into()));
        }
        if !(0.0..=Self::MAX_WHOLE_PROB).contains(&whole_prob) {
            return Err(ScriptError::Validation(format!(
                "whole-script probability must be in [0, {}]",
                Self::MAX_WHOLE_PROB
            )));
        }
        Ok(Self {
            seed,
            element_prob,
            whole_prob,
        })
    }
}

/// Templates of the shipped bank, grouped by element.
#[derive(Debug, Clone)]
pub struct TemplateBank {
    pub version: u32,
    entries: Vec<(Element, &'static str)>,
}

impl TemplateBank {
    pub fn shipped() -> Self {
        let mut version = 0;
        let mut entries = Vec::new();
        for line in BANK.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(v) = line.strip_prefix("version ") {
                version = v.trim().parse().expect("template bank version is a number");
                continue;
            }
            let (id, template) = line.split_once(' ').expect("template lines are `<element> <template>`");
            let e = Element::from_id(id).expect("template bank names a known element");
            entries.push((e, template));
        }
        Self { version, entries }
    }

    pub fn templates(&self, e: Element) -> Vec<&'static str> {
        self.entries.iter().filter(|(x, _)| *x == e).map(|(_, t)| *t).collect()
    }
}

pub fn number_word(n: u64) -> String {
    NUMBER_WORDS
        .get(n as usize)
        .map(|w| w.to_string())
        .unwrap_or_else(|| n.to_string())
}

fn parse_count(s: &str) -> Option<u64> {
    let s = s.trim();
    NUMBER_WORDS
        .iter()
        .position(|w| w.eq_ignore_ascii_case(s))
        .map(|i| i as u64)
        .or_else(|| s.parse().ok())
}

/// "A", "A and B", "A, B, and C".
pub fn english_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [a, b] => format!("{a} and {b}"),
        [init @ .., last] => format!("{}, and {last}", init.join(", ")),
    }
}

fn split_english_list(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        let part = part.strip_prefix("and ").unwrap_or(part);
        // Two-item lists have no comma.
        match part.split_once(" and ") {
            Some((a, b)) if !s.contains(',') => {
                out.push(a.trim().to_string());
                out.push(b.trim().to_string());
            }
            _ => out.push(part.trim().to_string()),
        }
    }
    out.retain(|x| !x.is_empty());
    out
}

fn plural(n: u8, word: &str) -> String {
    if n == 1 {
        format!("{n} {word}")
    } else {
        format!("{n} {word}s")
    }
}

/// Prose for one phase.
pub fn phase_phrase(p: PhaseKind) -> String {
    match p {
        PhaseKind::Start => "starting the game".into(),
        PhaseKind::Shuffle => "shuffling the cards".into(),
        PhaseKind::Blind => "placing the blinds".into(),
        PhaseKind::Deal(x) => format!("dealing {} to each player", plural(x, "card")),
        PhaseKind::Bet => "placing the bet for each player".into(),
        PhaseKind::Flop(x) => format!("revealing {}", plural(x, "community card")),
        PhaseKind::Switch => "switching cards".into(),
        PhaseKind::Show => "showing the hands".into(),
        PhaseKind::Prize => "distributing the prize".into(),
    }
}

fn parse_phase_phrase(s: &str) -> Option<PhaseKind> {
    let s = s.trim();
    let count = |rest: &str, unit: &str| -> Option<u8> {
        let (n, tail) = rest.split_once(' ')?;
        let n: u8 = n.parse().ok()?;
        let want = if n == 1 { unit.to_string() } else { format!("{unit}s") };
        (tail == want).then_some(n)
    };
    Some(match s {
        "starting the game" => PhaseKind::Start,
        "shuffling the cards" => PhaseKind::Shuffle,
        "placing the blinds" => PhaseKind::Blind,
        "placing the bet for each player" => PhaseKind::Bet,
        "switching cards" => PhaseKind::Switch,
        "showing the hands" => PhaseKind::Show,
        "distributing the prize" => PhaseKind::Prize,
        _ => {
            if let Some(rest) = s.strip_prefix("dealing ").and_then(|r| r.strip_suffix(" to each player")) {
                PhaseKind::Deal(count(rest, "card")?)
            } else if let Some(rest) = s.strip_prefix("revealing ") {
                PhaseKind::Flop(count(rest, "community card")?)
            } else {
                return None;
            }
        }
    })
}

/// "placing the blinds, followed by dealing 2 cards to each player, ..., and finally distributing the prize".
pub fn flow_prose(flow: &[PhaseKind]) -> String {
    let phrases: Vec<String> = flow
        .iter()
        .skip_while(|p| **p == PhaseKind::Start)
        .map(|p| phase_phrase(*p))
        .collect();
    let mut out = String::new();
    let n = phrases.len();
    for (i, p) in phrases.iter().enumerate() {
        match i {
            0 => {}
            1 if n > 2 => out.push_str(", followed by "),
            _ if i + 1 == n => out.push_str(", and finally "),
            _ => out.push_str(", "),
        }
        out.push_str(p);
    }
    out
}

fn parse_flow_prose(s: &str) -> Option<Vec<PhaseKind>> {
    let mut flow = alloc::vec![PhaseKind::Start];
    for part in s.split(", ") {
        let part = part
            .strip_prefix("followed by ")
            .or_else(|| part.strip_prefix("and finally "))
            .unwrap_or(part);
        flow.push(parse_phase_phrase(part)?);
    }
    Some(flow)
}

fn suit_item(s: char) -> String {
    match suit_name(s) {
        Some(name) => format!("{name} ({s})"),
        None => s.to_string(),
    }
}

fn render(template: &str, script: &GameScript) -> String {
    let mut out = template.to_string();
    let subs: [(&str, fn(&GameScript) -> String); 8] = [
        ("{name}", |s| s.name.clone()),
        ("{players}", |s| number_word(s.num_players as u64)),
        ("{suits}", |s| english_list(&s.suits.iter().map(|&c| suit_item(c)).collect::<Vec<_>>())),
        ("{ranks}", |s| {
            let v: Vec<String> = s.rank_order.iter().map(|r| r.to_string()).collect();
            v.join(", ")
        }),
        ("{combos}", |s| english_list(&s.hand_rank.iter().map(|c| c.name().to_string()).collect::<Vec<_>>())),
        ("{min}", |s| s.min_bet.to_string()),
        ("{max}", |s| s.max_bet.to_string()),
        ("{flow}", |s| flow_prose(&s.flow)),
    ];
    for (slot, f) in subs {
        if out.contains(slot) {
            out = out.replace(slot, &f(script));
        }
    }
    out
}

/// Script text with a seeded subset of element lines replaced by prose.
pub fn rephrase_script(script: &GameScript, cfg: &RephraseConfig) -> String {
    let bank = TemplateBank::shipped();
    let mut rng = SplitMix64::new(cfg.seed);
    let whole = rng.unit() < cfg.whole_prob;
    let mut out = String::new();
    for e in Element::ALL {
        let selected = rng.unit() < cfg.element_prob;
        let pick = rng.next_u64();
        let Some(line) = structured_line(script, e) else {
            continue;
        };
        let templates = bank.templates(e);
        if (whole || selected) && !templates.is_empty() {
            let t = templates[(pick % templates.len() as u64) as usize];
            out.push_str(&render(t, script));
        } else {
            out.push_str(&line);
        }
        out.push('\n');
    }
    rules_block(script, &mut out);
    out
}

fn apply_sentence(draft: &mut Draft, e: Element, slots: &[(String, String)]) -> Option<()> {
    let slot = |k: &str| slots.iter().find(|(n, _)| n == k).map(|(_, v)| v.as_str());
    // A name slot may appear in more than one element; the values must agree.
    if let Some(name) = slot("name") {
        match &draft.name {
            Some(n) if n != name => return None,
            Some(_) => {}
            None => draft.name = Some(name.to_string()),
        }
    }
    match e {
        Element::Name => {}
        Element::Players => {
            let n = parse_count(slot("players")?)?;
            draft.num_players = Some(u8::try_from(n).ok()?);
        }
        Element::Suits => {
            let mut suits = Vec::new();
            for item in split_english_list(slot("suits")?) {
                let letter = match (item.find('('), item.find(')')) {
                    (Some(a), Some(b)) if b > a => item[a + 1..b].trim().to_string(),
                    _ => item,
                };
                let mut chars = letter.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) if c.is_ascii_uppercase() => suits.push(c),
                    _ => return None,
                }
            }
            draft.suits = Some(suits);
        }
        Element::Ranks => {
            let ranks: Option<Vec<u16>> = slot("ranks")?.split(',').map(|r| r.trim().parse().ok()).collect();
            draft.rank_order = Some(ranks?);
        }
        Element::HandRank => draft.hand_rank = Some(split_english_list(slot("combos")?)),
        Element::Bets => {
            let min = slot("min")?.parse().ok()?;
            let max = slot("max")?.parse().ok()?;
            draft.bets = Some((min, max));
        }
        Element::Flow => draft.flow = Some(parse_flow_prose(slot("flow")?)?),
    }
    Some(())
}

/// Parses text made of structured lines, bank sentences and a rules block.
pub fn parse_rephrased(text: &str) -> Result<GameScript, ScriptError> {
    let bank = TemplateBank::shipped();
    let mut draft = Draft::default();
    let mut in_rules = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if in_rules {
            draft.push_rule(line)?;
            continue;
        }
        if let Some((key, value)) = line.split_once(':') {
            if key.trim().eq_ignore_ascii_case("specific rules") {
                in_rules = true;
                if !value.trim().is_empty() {
                    draft.push_rule(value)?;
                }
                continue;
            }
            if let Some(e) = Element::from_key(key) {
                draft.set_structured(e, value, line_no)?;
                continue;
            }
        }
        let matched = bank.entries.iter().any(|(e, t)| {
            if draft.seen(*e) {
                return false;
            }
            let Some(slots) = match_pattern(t, line) else {
                return false;
            };
            let mut trial = draft.clone();
            let ok = apply_sentence(&mut trial, *e, &slots).is_some();
            if ok {
                draft = trial;
            }
            ok
        });
        if !matched {
            return Err(ScriptError::UnrecognizedTemplate(line.to_string()));
        }
    }
    draft.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::{parse_script, serialize_script};
    use crate::variants::STANDARD;

    #[test]
    fn bank_has_three_templates_per_element() {
        let bank = TemplateBank::shipped();
        assert_eq!(bank.version, 1);
        for e in Element::ALL {
            assert!(bank.templates(e).len() >= 3, "{e:?}");
        }
    }

    #[test]
    fn zero_probability_is_identity() {
        for b in STANDARD {
            let s = b.script();
            let cfg = RephraseConfig::new(3, 0.0, 0.0).unwrap();
            assert_eq!(rephrase_script(&s, &cfg), serialize_script(&s));
        }
    }

    #[test]
    fn players_sentence() {
        let s = parse_script(&STANDARD[0].text.replace("Number of players: 5", "Number of players: 3")).unwrap();
        let t = render(TemplateBank::shipped().templates(Element::Players)[0], &s);
        assert_eq!(t, "In this game of Texas hold'em, there are three players.");
    }

    #[test]
    fn flow_sentence() {
        let s = STANDARD[0].script();
        let t = render(TemplateBank::shipped().templates(Element::Flow)[0], &s);
        assert!(t.starts_with(
            "The game begins with placing the blinds, followed by dealing 2 cards to each player, placing the bet for each player"
        ));
        assert!(t.ends_with("showing the hands, and finally distributing the prize."));
    }

    #[test]
    fn round_trip_every_variant() {
        for b in STANDARD {
            let s = b.script();
            for seed in 0..20 {
                let cfg = RephraseConfig::new(seed, 0.5, 0.05).unwrap();
                let text = rephrase_script(&s, &cfg);
                assert_eq!(parse_rephrased(&text).unwrap(), s, "{text}");
            }
            let all = RephraseConfig::new(1, 1.0, 0.0).unwrap();
            assert_eq!(parse_rephrased(&rephrase_script(&s, &all)).unwrap(), s);
        }
    }

    #[test]
    fn unknown_sentence() {
        let text = alloc::format!("Jokers are wild.\n{}", STANDARD[0].text);
        assert!(matches!(parse_rephrased(&text), Err(ScriptError::UnrecognizedTemplate(_))));
    }

    #[test]
    fn config_bounds() {
        assert!(RephraseConfig::new(0, 0.5, 0.2).is_err());
        assert!(RephraseConfig::new(0, 1.5, 0.0).is_err());
    }
}
