//! Specific-rule predicates and the sentence bank that names them.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::script::GameScript;

const BANK: &str = include_str!("../data/rule_bank.txt");

/// A rule outside the seven structured elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RulePredicate {
    LowWins,
    HighLowSplit,
    BadugiRanking,
    OmahaConstraint { holes: u8, community: u8 },
    SmallStraight,
    HandSize(u8),
    /// A combination detected by rank-group sizes, largest group first.
    NewCombination { name: String, shape: Vec<u8> },
    AllInAllowed,
}

impl RulePredicate {
    pub fn kind_name(&self) -> &'static str {
        match self {
            RulePredicate::LowWins => "low_wins",
            RulePredicate::HighLowSplit => "high_low",
            RulePredicate::BadugiRanking => "badugi",
            RulePredicate::OmahaConstraint { .. } => "omaha",
            RulePredicate::SmallStraight => "small_straight",
            RulePredicate::HandSize(_) => "hand_size",
            RulePredicate::NewCombination { .. } => "new_combination",
            RulePredicate::AllInAllowed => "all_in",
        }
    }

    /// Same predicate kind. Each new combination is its own kind, keyed by name.
    pub fn same_kind(&self, other: &RulePredicate) -> bool {
        match (self, other) {
            (
                RulePredicate::NewCombination { name: a, .. },
                RulePredicate::NewCombination { name: b, .. },
            ) => a.eq_ignore_ascii_case(b),
            _ => self.kind_name() == other.kind_name(),
        }
    }
}

/// Canonicalizes a sentence for matching: numbering, quote style, spacing,
/// repeated "the", example tails and the final period are dropped.
pub fn normalize_sentence(s: &str) -> String {
    let mut t = s.trim();
    let digits = t.bytes().take_while(|b| b.is_ascii_digit()).count();
    if digits > 0 && t[digits..].starts_with(". ") {
        t = &t[digits + 2..];
    }
    let mut q = t
        .replace("\\textasciigrave", "\"")
        .replace("``", "\"")
        .replace("''", "\"")
        .replace(['`', '\u{201c}', '\u{201d}'], "\"")
        .replace('\u{2019}', "'");
    if let Some(i) = q.find(", e.g.") {
        q.truncate(i);
    }
    let words: Vec<&str> = q.split_whitespace().collect();
    let mut out: Vec<&str> = Vec::with_capacity(words.len());
    for w in words {
        if let Some(prev) = out.last() {
            if prev.eq_ignore_ascii_case("the") && w.eq_ignore_ascii_case("the") {
                continue;
            }
        }
        out.push(w);
    }
    let mut joined = out.join(" ");
    // Tighten `" Badugi "` to `"Badugi"`.
    let mut tight = String::with_capacity(joined.len());
    let mut inside = false;
    for c in joined.chars() {
        if c == '"' {
            if inside && tight.ends_with(' ') {
                tight.pop();
            }
            inside = !inside;
            tight.push(c);
            continue;
        }
        if inside && c == ' ' && tight.ends_with('"') {
            continue;
        }
        tight.push(c);
    }
    joined = tight;
    while joined.ends_with('.') || joined.ends_with(' ') {
        joined.pop();
    }
    joined
}

/// Matches `text` against a pattern whose `{..}` slots capture free text.
///
/// Literals are compared ASCII case-insensitively. Each slot runs to the next
/// occurrence of the following literal; the last literal is anchored at the
/// end. Slots never capture an empty string.
pub fn match_pattern(pattern: &str, text: &str) -> Option<Vec<(String, String)>> {
    let mut literals: Vec<&str> = Vec::new();
    let mut slots: Vec<&str> = Vec::new();
    let mut rest = pattern;
    loop {
        match rest.find('{') {
            Some(open) => {
                let close = rest[open..].find('}')? + open;
                literals.push(&rest[..open]);
                slots.push(&rest[open + 1..close]);
                rest = &rest[close + 1..];
            }
            None => {
                literals.push(rest);
                break;
            }
        }
    }
    let lower = text.to_ascii_lowercase();
    let lit0 = literals[0].to_ascii_lowercase();
    if !lower.starts_with(&lit0) {
        return None;
    }
    let mut pos = lit0.len();
    let mut captured = Vec::with_capacity(slots.len());
    for (i, slot) in slots.iter().enumerate() {
        let lit = literals[i + 1].to_ascii_lowercase();
        let last = i + 1 == slots.len();
        let end = if last {
            if lit.is_empty() {
                lower.len()
            } else if lower.len() >= pos + lit.len() && lower.ends_with(&lit) {
                lower.len() - lit.len()
            } else {
                return None;
            }
        } else {
            if lit.is_empty() {
                return None;
            }
            pos + lower[pos..].find(&lit)?
        };
        if end <= pos {
            return None;
        }
        captured.push((slot.to_string(), text[pos..end].trim().to_string()));
        pos = end + lit.len();
    }
    if slots.is_empty() && lower.len() != lit0.len() {
        return None;
    }
    Some(captured)
}

fn bank() -> impl Iterator<Item = (&'static str, &'static str)> {
    BANK.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once(' '))
}

fn count_word(w: &str) -> Option<u8> {
    const WORDS: [&str; 11] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    ];
    let w = w.trim().to_ascii_lowercase();
    WORDS
        .iter()
        .position(|x| *x == w)
        .map(|i| i as u8)
        .or_else(|| w.parse().ok())
}

/// Reads a rank-group description into group sizes, largest first.
pub fn parse_shape(phrase: &str) -> Option<Vec<u8>> {
    let p = phrase.trim().to_ascii_lowercase();
    let p = p.as_str();
    if let Some(list) = p.strip_prefix("rank groups of sizes ") {
        let mut shape = Vec::new();
        for part in list.split(',') {
            let part = part.trim();
            let part = part.strip_prefix("and ").unwrap_or(part);
            shape.push(part.trim().parse().ok()?);
        }
        shape.sort_unstable_by(|a: &u8, b| b.cmp(a));
        return Some(shape);
    }
    let (count, tail) = p.split_once(' ')?;
    let count = count_word(count)? as usize;
    let size = match tail {
        "pairs of distinct numbers" => 2,
        "groups of three of a kind" | "pairs of three of one kind" => 3,
        "groups of four of a kind" => 4,
        _ => return None,
    };
    if count == 0 {
        return None;
    }
    Some(alloc::vec![size; count])
}

/// Canonical description of a rank-group shape.
pub fn shape_phrase(shape: &[u8]) -> String {
    let uniform = shape.first().filter(|&&g| shape.iter().all(|x| x == &g));
    let words = ["", "one", "two", "three", "four", "five", "six"];
    match uniform {
        Some(&g) if (2..=4).contains(&g) && shape.len() < words.len() && shape.len() > 1 => {
            let count = words[shape.len()];
            match g {
                2 => format!("{count} pairs of distinct numbers"),
                3 => format!("{count} groups of three of a kind"),
                _ => format!("{count} groups of four of a kind"),
            }
        }
        _ => {
            let sizes: Vec<String> = shape.iter().map(|g| g.to_string()).collect();
            format!("rank groups of sizes {}", sizes.join(", "))
        }
    }
}

fn build(kind: &str, slots: &[(String, String)]) -> Option<RulePredicate> {
    let slot = |key: &str| slots.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let int = |key: &str| slot(key).and_then(|v| v.parse::<u8>().ok());
    Some(match kind {
        "low_wins" => RulePredicate::LowWins,
        "high_low" | "high_low_badugi" => RulePredicate::HighLowSplit,
        "badugi" => RulePredicate::BadugiRanking,
        "omaha" => RulePredicate::OmahaConstraint {
            holes: int("n")?,
            community: int("m")?,
        },
        "small_straight" => RulePredicate::SmallStraight,
        "hand_size" => RulePredicate::HandSize(int("n")?),
        "new_combination" => {
            let name = slot("name")?;
            let name = name.strip_prefix('"')?.strip_suffix('"')?.trim();
            if name.is_empty() || name.contains('"') {
                return None;
            }
            RulePredicate::NewCombination {
                name: name.to_string(),
                shape: parse_shape(slot("shape")?)?,
            }
        }
        "all_in" => RulePredicate::AllInAllowed,
        _ => return None,
    })
}

/// Maps a sentence from the bank to its predicate; `None` for anything else.
pub fn parse_rule(sentence: &str) -> Option<RulePredicate> {
    let text = normalize_sentence(sentence);
    if text.is_empty() {
        return None;
    }
    bank().find_map(|(kind, pattern)| {
        let pattern = normalize_sentence(pattern);
        match_pattern(&pattern, &text).and_then(|slots| build(kind, &slots))
    })
}

fn canonical_pattern(kind: &str) -> &'static str {
    bank()
        .find(|(k, _)| *k == kind)
        .map(|(_, p)| p)
        .expect("every predicate kind has a bank entry")
}

/// Canonical sentence for a predicate in the context of its script.
pub fn rule_sentence(rule: &RulePredicate, script: &GameScript) -> String {
    let kind = match rule {
        RulePredicate::HighLowSplit if script.badugi() => "high_low_badugi",
        other => other.kind_name(),
    };
    let mut s = canonical_pattern(kind).to_string();
    match rule {
        RulePredicate::OmahaConstraint { holes, community } => {
            s = s.replace("{n}", &holes.to_string()).replace("{m}", &community.to_string());
        }
        RulePredicate::HandSize(k) => s = s.replace("{n}", &k.to_string()),
        RulePredicate::NewCombination { name, shape } => {
            s = s
                .replace("{name}", &format!("\"{name}\""))
                .replace("{shape}", &shape_phrase(shape));
        }
        _ => {}
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn normalization() {
        assert_eq!(
            normalize_sentence("1. Define ``Badugi'' for  the the  hand."),
            "Define \"Badugi\" for the hand"
        );
        assert_eq!(normalize_sentence("called \\textasciigrave Badugi \\textasciigrave."), "called \"Badugi\"");
        assert_eq!(normalize_sentence("\"X\": there are two, e.g. H1, H2."), "\"X\": there are two");
    }

    #[test]
    fn pattern_slots() {
        let m = match_pattern("use {n} hole and {m} board", "Use 2 hole and 3 board").unwrap();
        assert_eq!(m, vec![("n".into(), "2".into()), ("m".into(), "3".into())]);
        assert!(match_pattern("use {n} hole", "use  hole").is_none());
        assert!(match_pattern("exact", "exact and more").is_none());
    }

    #[test]
    fn recognizes_variant_sentences() {
        let cases = [
            ("In showdown, pick out the players with the lowest combination of cards as the winners.", RulePredicate::LowWins),
            ("In showdown, only a combination of 2 hole cards and 3 community cards can be used to form the optimal cards.", RulePredicate::OmahaConstraint { holes: 2, community: 3 }),
            ("In addition, define two new combinations with 3 cards in hand.", RulePredicate::HandSize(3)),
            ("``Three Pair'': there are three pairs of distinct numbers, e.g. R8, H8, C10, H10, H12, D12.", RulePredicate::NewCombination { name: "Three Pair".into(), shape: vec![2, 2, 2] }),
            ("\"Big House\": there are two pairs of three of one kind, e.g. R8, H8, C8, D12, H12, D12.", RulePredicate::NewCombination { name: "Big House".into(), shape: vec![3, 3] }),
        ];
        for (sentence, want) in cases {
            assert_eq!(parse_rule(sentence), Some(want), "{sentence}");
        }
        assert_eq!(parse_rule("Aces are wild."), None);
        assert_eq!(parse_rule(""), None);
    }

    #[test]
    fn shapes() {
        assert_eq!(parse_shape("rank groups of sizes 2, 3"), Some(vec![3, 2]));
        assert_eq!(shape_phrase(&[3, 2]), "rank groups of sizes 3, 2");
        assert_eq!(shape_phrase(&[2, 2, 2]), "three pairs of distinct numbers");
        for shape in [vec![2, 2, 2], vec![3, 3], vec![4, 2], vec![2, 2], vec![5]] {
            assert_eq!(parse_shape(&shape_phrase(&shape)), Some(shape));
        }
    }
}
