//! A slow reference evaluator that enumerates every card subset, used to
//! cross-check the engine's evaluator.
//!
//! A hand's value is the best category with any exact instance among its
//! cards, then the best instance key over all such instances, then the
//! leftover cards high to low. Nothing here shares code with the engine's
//! detectors.

use std::cmp::Ordering;

use idge_core::cards::Card;
use idge_core::evaluator::{badugi_select, best_hand_in, compare, evaluate, Direction};
use idge_core::rng::SplitMix64;
use idge_core::rules::RulePredicate;
use idge_core::script::{parse_script, CombinationId, GameScript};
use idge_core::variants;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RefValue {
    pub category: usize,
    pub key: Vec<i32>,
}

fn ord(s: &GameScript, c: &Card) -> i32 {
    s.ordinal(c.rank).map_or(-1, |o| o as i32)
}

/// Group sizes that define a combination, largest first; `None` for runs and flushes.
fn shape(s: &GameScript, combo: &CombinationId) -> Option<Vec<usize>> {
    Some(match combo {
        CombinationId::HighCard => vec![1],
        CombinationId::Pair => vec![2],
        CombinationId::TwoPair => vec![2, 2],
        CombinationId::ThreeOfAKind => vec![3],
        CombinationId::FullHouse => vec![3, 2],
        CombinationId::FourOfAKind => vec![4],
        CombinationId::Custom(name) => {
            let mut v: Vec<usize> = s.custom_shape(name)?.iter().map(|&x| x as usize).collect();
            v.sort_unstable_by(|a, b| b.cmp(a));
            v
        }
        _ => return None,
    })
}

/// Key of `sub` if it is exactly one instance of `combo`.
fn instance_key(s: &GameScript, combo: &CombinationId, sub: &[Card]) -> Option<Vec<i32>> {
    let run = s.hand_size().min(5);
    let is_flush = |cards: &[Card]| cards.len() == run && cards.iter().all(|c| c.suit == cards[0].suit);
    let straight_key = |cards: &[Card]| -> Option<Vec<i32>> {
        if cards.len() != run {
            return None;
        }
        let top = s.rank_order.len() as i32 - 1;
        let mut ords: Vec<i32> = cards.iter().map(|c| ord(s, c)).collect();
        ords.sort_unstable_by(|a, b| b.cmp(a));
        let consecutive = |v: &[i32]| v.windows(2).all(|w| w[0] == w[1] + 1);
        if consecutive(&ords) {
            return Some(ords);
        }
        if s.small_straight() && ords[0] == top {
            let mut low: Vec<i32> = ords.iter().map(|&o| if o == top { -1 } else { o }).collect();
            low.sort_unstable_by(|a, b| b.cmp(a));
            if consecutive(&low) {
                return Some(low);
            }
        }
        None
    };
    match combo {
        CombinationId::Straight => straight_key(sub),
        CombinationId::Flush => is_flush(sub).then(|| {
            let mut v: Vec<i32> = sub.iter().map(|c| ord(s, c)).collect();
            v.sort_unstable_by(|a, b| b.cmp(a));
            v
        }),
        CombinationId::StraightFlush => {
            if is_flush(sub) {
                straight_key(sub)
            } else {
                None
            }
        }
        _ => {
            let want = shape(s, combo)?;
            if sub.len() != want.iter().sum::<usize>() {
                return None;
            }
            let mut counts: Vec<(usize, i32)> = Vec::new();
            for c in sub {
                let o = ord(s, c);
                match counts.iter_mut().find(|(_, r)| *r == o) {
                    Some(e) => e.0 += 1,
                    None => counts.push((1, o)),
                }
            }
            let mut sizes: Vec<usize> = counts.iter().map(|(n, _)| *n).collect();
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            if sizes != want {
                return None;
            }
            counts.sort_unstable_by(|a, b| b.cmp(a));
            Some(counts.iter().flat_map(|&(n, r)| std::iter::repeat(r).take(n)).collect())
        }
    }
}

/// Value of exactly these cards, by enumerating all subsets.
pub fn reference_value(s: &GameScript, cards: &[Card]) -> RefValue {
    let n = cards.len();
    for (category, combo) in s.hand_rank.iter().enumerate().rev() {
        let mut best: Option<Vec<i32>> = None;
        for mask in 1u32..(1 << n) {
            let sub: Vec<Card> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| cards[i]).collect();
            let Some(mut key) = instance_key(s, combo, &sub) else {
                continue;
            };
            let mut rest: Vec<i32> = (0..n).filter(|i| mask & (1 << i) == 0).map(|i| ord(s, &cards[i])).collect();
            rest.sort_unstable_by(|a, b| b.cmp(a));
            key.extend(rest);
            if best.as_ref().map_or(true, |b| key > *b) {
                best = Some(key);
            }
        }
        if let Some(key) = best {
            return RefValue { category, key };
        }
    }
    let mut key: Vec<i32> = cards.iter().map(|c| ord(s, c)).collect();
    key.sort_unstable_by(|a, b| b.cmp(a));
    RefValue { category: 0, key }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n))
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect()
}

/// Best hand value in `dir` over every legal card choice.
pub fn reference_best(s: &GameScript, hole: &[Card], community: &[Card], dir: Direction) -> RefValue {
    let mut candidates: Vec<Vec<Card>> = Vec::new();
    match s.omaha() {
        Some((h, c)) => {
            for hs in subsets(hole.len(), h) {
                for cs in subsets(community.len(), c) {
                    let mut v: Vec<Card> = hs.iter().map(|&i| hole[i]).collect();
                    v.extend(cs.iter().map(|&i| community[i]));
                    candidates.push(v);
                }
            }
        }
        None => {
            let all: Vec<Card> = hole.iter().chain(community).copied().collect();
            for idx in subsets(all.len(), s.hand_size()) {
                candidates.push(idx.iter().map(|&i| all[i]).collect());
            }
        }
    }
    let values = candidates.iter().map(|c| reference_value(s, c));
    match dir {
        Direction::High => values.max(),
        Direction::Low => values.min(),
    }
    .expect("at least one candidate hand")
}

/// Badugi strength: more cards, then the smaller ascending ordinal vector.
/// Returns `(count, ascending ordinals)`.
pub fn reference_badugi(s: &GameScript, cards: &[Card]) -> (usize, Vec<i32>) {
    let n = cards.len();
    let mut best: Option<(usize, Vec<i32>)> = None;
    for mask in 0u32..(1 << n) {
        let sub: Vec<&Card> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| &cards[i]).collect();
        let distinct = sub.iter().enumerate().all(|(i, a)| {
            sub[..i]
                .iter()
                .all(|b| a.suit != b.suit && ord(s, a) != ord(s, b))
        });
        if !distinct {
            continue;
        }
        let mut ords: Vec<i32> = sub.iter().map(|c| ord(s, c)).collect();
        ords.sort_unstable();
        let cand = (sub.len(), ords);
        let better = match &best {
            None => true,
            Some((bn, bo)) => cand.0 > *bn || (cand.0 == *bn && cand.1 < *bo),
        };
        if better {
            best = Some(cand);
        }
    }
    best.unwrap_or((0, Vec::new()))
}

fn badugi_cmp(a: &(usize, Vec<i32>), b: &(usize, Vec<i32>)) -> Ordering {
    a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1))
}

/// Cases the equivalence check covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    /// Best five of seven on a reduced deck.
    HighSeven,
    /// Two hole cards and three community cards exactly.
    Omaha,
    /// Lowest hand wins.
    LowWins,
    /// Suit- and rank-distinct selection.
    Badugi,
    /// The top rank may play below the lowest.
    SmallStraight,
    /// Six-card hands with two invented combinations.
    CustomSix,
}

impl Case {
    pub const ALL: [Case; 6] = [
        Case::HighSeven,
        Case::Omaha,
        Case::LowWins,
        Case::Badugi,
        Case::SmallStraight,
        Case::CustomSix,
    ];

    pub fn script(self) -> GameScript {
        let base = |extra_ranks: &str, hand: &str, flow: &str, rules: &str| {
            parse_script(&format!(
                "Number of players: 2\nSuit: H, D, C, S\nCard Rank: {extra_ranks}\nHand Rank: {hand}\n\
                 Min / Max bet: 10 / 1000\nFlow: {flow}\n{rules}"
            ))
            .expect("reference scripts are valid")
        };
        const FULL: &str = "High Card<Pair<Two Pair<Three of a Kind<Straight<Flush<Full House<Four of a Kind<Straight Flush";
        match self {
            Case::HighSeven => base("2<3<4<5<6<7<8<1", FULL, "start->deal2->flop5->show->prize", ""),
            Case::Omaha => base(
                "2<3<4<5<6<7<8<1",
                FULL,
                "start->deal4->flop5->show->prize",
                "Specific Rules:\nIn showdown, a hand must use exactly 2 hole cards and 3 community cards.\n",
            ),
            Case::LowWins => {
                let mut s = variants::find("two_to_seven_single_draw").expect("bundled").script();
                s.rules.retain(|r| matches!(r, RulePredicate::LowWins));
                s.rank_order = vec![2, 3, 4, 5, 6, 7, 13, 1];
                s
            }
            Case::Badugi => variants::find("badugi").expect("bundled").script(),
            Case::SmallStraight => {
                let mut s = variants::find("short_deck_holdem").expect("bundled").script();
                s.rank_order = vec![6, 7, 8, 9, 10, 1];
                s
            }
            Case::CustomSix => {
                let mut s = variants::find("ood5_six_card_draw").expect("bundled").script();
                s.rank_order = vec![2, 3, 4, 5, 6, 7, 1];
                s
            }
        }
    }

    fn cards_per_hand(self, s: &GameScript) -> (usize, usize) {
        match self {
            Case::HighSeven | Case::SmallStraight => (2, 5),
            Case::Omaha => (4, 5),
            Case::Badugi => (4, 0),
            Case::LowWins => (5, 0),
            Case::CustomSix => (s.hand_size(), 0),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Mismatch {
    pub case: Case,
    pub hand: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct OracleReport {
    pub hands: usize,
    pub comparisons: usize,
    pub mismatches: Vec<Mismatch>,
}

fn text(cards: &[Card]) -> String {
    cards.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

/// Deals `hands` random hands per case on reduced decks and checks category,
/// chosen cards and every consecutive pairwise ordering against the reference.
pub fn check_equivalence(hands_per_case: usize, seed: u64) -> OracleReport {
    let mut report = OracleReport::default();
    for (ci, case) in Case::ALL.into_iter().enumerate() {
        let s = case.script();
        let (h, c) = case.cards_per_hand(&s);
        let mut rng = SplitMix64::new(seed).fork(ci as u64);
        let dir = if s.low_wins() { Direction::Low } else { Direction::High };
        let mut prev: Option<(Vec<Card>, Vec<Card>)> = None;
        for _ in 0..hands_per_case {
            let mut deck = idge_core::cards::build_deck(&s).into_cards();
            rng.shuffle(&mut deck);
            let hole = deck[..h].to_vec();
            let community = deck[h..h + c].to_vec();
            let label = format!("{} / {}", text(&hole), text(&community));
            report.hands += 1;
            let mut fail = |reason: String| {
                report.mismatches.push(Mismatch {
                    case,
                    hand: label.clone(),
                    reason,
                })
            };
            if case == Case::Badugi {
                let engine = badugi_select(&s, &hole);
                let reference = reference_badugi(&s, &hole);
                let mut chosen: Vec<i32> = engine.1.iter().map(|c| ord(&s, c)).collect();
                chosen.sort_unstable();
                if engine.0.count != reference.0 || chosen != reference.1 {
                    fail(format!("engine picked {} cards {:?}, reference {:?}", engine.0.count, chosen, reference));
                }
                if let Some((ph, _)) = &prev {
                    report.comparisons += 1;
                    let e = engine.0.strength_cmp(&badugi_select(&s, ph).0);
                    let r = badugi_cmp(&reference, &reference_badugi(&s, ph));
                    if e != r {
                        fail(format!("against {}: engine {e:?}, reference {r:?}", text(ph)));
                    }
                }
            } else {
                let engine = match best_hand_in(&s, &hole, &community, dir) {
                    Ok(b) => b,
                    Err(e) => {
                        fail(e.to_string());
                        continue;
                    }
                };
                let reference = reference_best(&s, &hole, &community, dir);
                if engine.value.category != reference.category {
                    fail(format!(
                        "category {} vs reference {}",
                        s.hand_rank[engine.value.category].name(),
                        s.hand_rank[reference.category].name()
                    ));
                }
                if reference_value(&s, &engine.cards) != reference {
                    fail(format!("engine chose {}, not a best hand", text(&engine.cards)));
                }
                if let Some((ph, pc)) = &prev {
                    report.comparisons += 1;
                    let other = best_hand_in(&s, ph, pc, dir).map(|b| b.value);
                    if let Ok(other) = other {
                        let e = compare(&s, &engine.value, &other);
                        let r = reference.cmp(&reference_best(&s, ph, pc, dir));
                        let r = if s.low_wins() { r.reverse() } else { r };
                        if e != r {
                            fail(format!("against {} / {}: engine {e:?}, reference {r:?}", text(ph), text(pc)));
                        }
                    }
                }
                // The full-hand value must agree too when the hand is exactly one hand.
                if c == 0 && hole.len() == s.hand_size() && evaluate(&s, &hole) != engine.value {
                    fail("whole-hand value differs from best subset".into());
                }
            }
            prev = Some((hole, community));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_scripts_parse() {
        for c in Case::ALL {
            c.script().validate().unwrap();
        }
    }

    #[test]
    fn small_sample_matches() {
        let r = check_equivalence(150, 3);
        assert!(r.mismatches.is_empty(), "{:#?}", &r.mismatches[..r.mismatches.len().min(5)]);
    }

    #[test]
    fn reference_knows_wheel_rule() {
        let s = Case::SmallStraight.script();
        let cards: Vec<Card> = "H1 D6 C7 S8 H9".split(' ').map(|c| c.parse().unwrap()).collect();
        let v = reference_value(&s, &cards);
        assert_eq!(s.hand_rank[v.category].name(), "Straight");
        assert_eq!(v.key, vec![3, 2, 1, 0, -1]);
    }
}
