//! Hand detection, best-hand search and comparison under a script's ranking.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::cards::Card;
use crate::script::{CombinationId, GameScript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("a hand needs {needed} cards, only {have} available")]
    InsufficientCards { needed: usize, have: usize },
}

/// Strength of a hand: combination index in the script's hand rank, then
/// ordinals of every card (combination cards first, then kickers high to low).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HandValue {
    pub category: usize,
    pub tiebreak: Vec<i32>,
}

/// Badugi strength: more cards is better, then the smaller ascending ordinals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BadugiValue {
    pub count: usize,
    pub ordinals: Vec<usize>,
}

impl BadugiValue {
    /// `Greater` means `self` is the stronger Badugi.
    pub fn strength_cmp(&self, other: &BadugiValue) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| other.ordinals.cmp(&self.ordinals))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    High,
    Low,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestHand {
    pub value: HandValue,
    pub cards: Vec<Card>,
}

/// How the pot is shared at showdown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WinnerKind {
    /// One winner set takes the whole pot.
    Single,
    /// Half to the best high hands, half to the best low hands.
    HighLow,
    /// Half to the lowest combinations, half to the best Badugi.
    LowBadugi,
}

/// Winning seats. `secondary` takes the second half of a split pot and is
/// empty for [`WinnerKind::Single`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Winners {
    pub kind: WinnerKind,
    pub primary: Vec<usize>,
    pub secondary: Vec<usize>,
}

impl Winners {
    pub fn single(primary: Vec<usize>) -> Self {
        Self {
            kind: WinnerKind::Single,
            primary,
            secondary: Vec::new(),
        }
    }
}

fn ordinal(script: &GameScript, card: &Card) -> i32 {
    script.ordinal(card.rank).map(|o| o as i32).unwrap_or(-1)
}

/// Cards in a straight or flush: five, or the whole hand when it is smaller.
pub fn run_length(script: &GameScript) -> usize {
    script.hand_size().min(5)
}

type Keyed = Vec<(i32, usize)>;

fn rank_groups(script: &GameScript, cards: &[Card]) -> BTreeMap<i32, Vec<usize>> {
    let mut groups: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (i, c) in cards.iter().enumerate() {
        groups.entry(ordinal(script, c)).or_default().push(i);
    }
    groups
}

fn highest_group(groups: &BTreeMap<i32, Vec<usize>>, size: usize, skip: &[i32]) -> Option<i32> {
    groups
        .iter()
        .rev()
        .find(|(r, idx)| idx.len() >= size && !skip.contains(r))
        .map(|(r, _)| *r)
}

fn take_groups(groups: &BTreeMap<i32, Vec<usize>>, sizes: &[usize]) -> Option<Keyed> {
    let mut used = Vec::new();
    let mut out = Vec::new();
    for &size in sizes {
        let r = highest_group(groups, size, &used)?;
        used.push(r);
        out.extend(groups[&r].iter().take(size).map(|&i| (r, i)));
    }
    Some(out)
}

/// Highest straight among `cards` (indices into the full hand).
fn find_straight(script: &GameScript, cards: &[Card], subset: &[usize], len: usize) -> Option<Keyed> {
    if len < 2 {
        return None;
    }
    let n = script.rank_order.len() as i32;
    let mut by_rank: BTreeMap<i32, usize> = BTreeMap::new();
    for &i in subset {
        by_rank.entry(ordinal(script, &cards[i])).or_insert(i);
    }
    let len = len as i32;
    for top in (len - 1..n).rev() {
        if (top - len + 1..=top).all(|r| by_rank.contains_key(&r)) {
            return Some((top - len + 1..=top).rev().map(|r| (r, by_rank[&r])).collect());
        }
    }
    if script.small_straight() && n - 1 > len - 2 {
        if let Some(&wrap) = by_rank.get(&(n - 1)) {
            if (0..=len - 2).all(|r| by_rank.contains_key(&r)) {
                let mut keyed: Keyed = (0..=len - 2).rev().map(|r| (r, by_rank[&r])).collect();
                keyed.push((-1, wrap));
                return Some(keyed);
            }
        }
    }
    None
}

fn keys_of(k: &Keyed) -> Vec<i32> {
    k.iter().map(|(r, _)| *r).collect()
}

fn by_suit(cards: &[Card]) -> BTreeMap<char, Vec<usize>> {
    let mut suits: BTreeMap<char, Vec<usize>> = BTreeMap::new();
    for (i, c) in cards.iter().enumerate() {
        suits.entry(c.suit).or_default().push(i);
    }
    suits
}

fn best_keyed(candidates: impl Iterator<Item = Keyed>) -> Option<Keyed> {
    candidates.fold(None, |best: Option<Keyed>, k| match best {
        Some(b) if keys_of(&b) >= keys_of(&k) => Some(b),
        _ => Some(k),
    })
}

fn detect_keyed(script: &GameScript, combo: &CombinationId, cards: &[Card]) -> Option<Keyed> {
    if cards.is_empty() {
        return None;
    }
    let groups = rank_groups(script, cards);
    let len = run_length(script);
    match combo {
        CombinationId::HighCard => {
            let r = *groups.keys().next_back()?;
            Some(vec![(r, groups[&r][0])])
        }
        CombinationId::Pair => take_groups(&groups, &[2]),
        CombinationId::TwoPair => take_groups(&groups, &[2, 2]),
        CombinationId::ThreeOfAKind => take_groups(&groups, &[3]),
        CombinationId::FourOfAKind => take_groups(&groups, &[4]),
        CombinationId::FullHouse => take_groups(&groups, &[3, 2]),
        CombinationId::Straight => {
            let all: Vec<usize> = (0..cards.len()).collect();
            find_straight(script, cards, &all, len)
        }
        CombinationId::Flush => {
            if len < 2 {
                return None;
            }
            best_keyed(by_suit(cards).into_values().filter(|v| v.len() >= len).map(|idx| {
                let mut keyed: Keyed = idx.iter().map(|&i| (ordinal(script, &cards[i]), i)).collect();
                keyed.sort_by(|a, b| b.cmp(a));
                keyed.truncate(len);
                keyed
            }))
        }
        CombinationId::StraightFlush => best_keyed(
            by_suit(cards)
                .into_values()
                .filter_map(|idx| find_straight(script, cards, &idx, len)),
        ),
        CombinationId::Custom(name) => {
            let shape = script.custom_shape(name)?;
            let mut sizes: Vec<usize> = shape.iter().map(|&g| g as usize).collect();
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            take_groups(&groups, &sizes)
        }
    }
}

/// Best instance of one combination within `cards`, or `None` when absent.
pub fn detect(script: &GameScript, combo: &CombinationId, cards: &[Card]) -> Option<Vec<Card>> {
    detect_keyed(script, combo, cards).map(|k| k.iter().map(|&(_, i)| cards[i]).collect())
}

/// Value of exactly these cards.
pub fn evaluate(script: &GameScript, cards: &[Card]) -> HandValue {
    for (category, combo) in script.hand_rank.iter().enumerate().rev() {
        if let Some(keyed) = detect_keyed(script, combo, cards) {
            let mut tiebreak = keys_of(&keyed);
            let mut used = vec![false; cards.len()];
            for &(_, i) in &keyed {
                used[i] = true;
            }
            let mut rest: Vec<i32> = cards
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(_, c)| ordinal(script, c))
                .collect();
            rest.sort_unstable_by(|a, b| b.cmp(a));
            tiebreak.extend(rest);
            return HandValue { category, tiebreak };
        }
    }
    // Only reachable for an empty hand rank; rank by cards alone.
    let mut tiebreak: Vec<i32> = cards.iter().map(|c| ordinal(script, c)).collect();
    tiebreak.sort_unstable_by(|a, b| b.cmp(a));
    HandValue { category: 0, tiebreak }
}

/// `Greater` when `a` is the better hand under the script's winning direction.
pub fn compare(script: &GameScript, a: &HandValue, b: &HandValue) -> Ordering {
    if script.low_wins() {
        b.cmp(a)
    } else {
        a.cmp(b)
    }
}

/// Calls `f` with every `k`-subset of `0..n`, in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Best `k`-card hand in the given direction, respecting any hole/community split.
pub fn best_hand_in(
    script: &GameScript,
    hole: &[Card],
    community: &[Card],
    dir: Direction,
) -> Result<BestHand, EvalError> {
    let k = script.hand_size();
    let have = hole.len() + community.len();
    let mut best: Option<BestHand> = None;
    let mut consider = |cards: Vec<Card>| {
        let value = evaluate(script, &cards);
        let better = match &best {
            None => true,
            Some(b) => match dir {
                Direction::High => value > b.value,
                Direction::Low => value < b.value,
            },
        };
        if better {
            best = Some(BestHand { value, cards });
        }
    };
    match script.omaha() {
        Some((h, c)) => {
            if hole.len() < h || community.len() < c {
                return Err(EvalError::InsufficientCards { needed: k, have });
            }
            for_each_subset(hole.len(), h, |hs| {
                for_each_subset(community.len(), c, |cs| {
                    let mut cards: Vec<Card> = hs.iter().map(|&i| hole[i]).collect();
                    cards.extend(cs.iter().map(|&i| community[i]));
                    consider(cards);
                });
            });
        }
        None => {
            if have < k {
                return Err(EvalError::InsufficientCards { needed: k, have });
            }
            let all: Vec<Card> = hole.iter().chain(community).copied().collect();
            for_each_subset(all.len(), k, |s| consider(s.iter().map(|&i| all[i]).collect()));
        }
    }
    best.ok_or(EvalError::InsufficientCards { needed: k, have })
}

/// Best hand in the script's winning direction.
pub fn best_hand(script: &GameScript, hole: &[Card], community: &[Card]) -> Result<BestHand, EvalError> {
    let dir = if script.low_wins() { Direction::Low } else { Direction::High };
    best_hand_in(script, hole, community, dir)
}

/// Largest set of cards with distinct suits and distinct ranks, preferring low cards.
pub fn badugi_select(script: &GameScript, cards: &[Card]) -> (BadugiValue, Vec<Card>) {
    let mut sorted: Vec<Card> = cards.to_vec();
    sorted.sort_by_key(|c| (ordinal(script, c), c.suit));

    fn search(
        script: &GameScript,
        cards: &[Card],
        at: usize,
        chosen: &mut Vec<Card>,
        best: &mut (BadugiValue, Vec<Card>),
    ) {
        if at == cards.len() {
            let value = BadugiValue {
                count: chosen.len(),
                ordinals: chosen.iter().map(|c| ordinal(script, c) as usize).collect(),
            };
            if value.strength_cmp(&best.0) == Ordering::Greater {
                *best = (value, chosen.clone());
            }
            return;
        }
        // Even taking every remaining card cannot beat a larger set.
        if chosen.len() + (cards.len() - at) < best.0.count {
            return;
        }
        let c = cards[at];
        if chosen.iter().all(|x| x.suit != c.suit && x.rank != c.rank) {
            chosen.push(c);
            search(script, cards, at + 1, chosen, best);
            chosen.pop();
        }
        search(script, cards, at + 1, chosen, best);
    }

    let mut best = (BadugiValue { count: 0, ordinals: Vec::new() }, Vec::new());
    search(script, &sorted, 0, &mut Vec::new(), &mut best);
    best
}

fn extreme_seats<T, F>(values: &[(usize, T)], better: F) -> Vec<usize>
where
    F: Fn(&T, &T) -> Ordering,
{
    let mut out: Vec<usize> = Vec::new();
    let mut top: Option<&T> = None;
    for (seat, v) in values {
        match top.map(|t| better(v, t)) {
            None | Some(Ordering::Greater) => {
                top = Some(v);
                out.clear();
                out.push(*seat);
            }
            Some(Ordering::Equal) => out.push(*seat),
            Some(Ordering::Less) => {}
        }
    }
    out
}

/// Winning seats among `hands` (seat, hole cards) sharing `community`.
pub fn winners(
    script: &GameScript,
    hands: &[(usize, Vec<Card>)],
    community: &[Card],
) -> Result<Winners, EvalError> {
    if hands.len() == 1 {
        return Ok(Winners::single(vec![hands[0].0]));
    }
    let valued = |dir: Direction| -> Result<Vec<(usize, HandValue)>, EvalError> {
        hands
            .iter()
            .map(|(s, h)| best_hand_in(script, h, community, dir).map(|b| (*s, b.value)))
            .collect()
    };
    let badugi = || -> Vec<usize> {
        let vals: Vec<(usize, BadugiValue)> = hands
            .iter()
            .map(|(s, h)| {
                let all: Vec<Card> = h.iter().chain(community).copied().collect();
                (*s, badugi_select(script, &all).0)
            })
            .collect();
        extreme_seats(&vals, |a, b| a.strength_cmp(b))
    };
    let high = |v: &[(usize, HandValue)]| extreme_seats(v, |a, b| a.cmp(b));
    let low = |v: &[(usize, HandValue)]| extreme_seats(v, |a, b| b.cmp(a));

    Ok(if script.badugi() && script.high_low_split() {
        Winners {
            kind: WinnerKind::LowBadugi,
            primary: low(&valued(Direction::Low)?),
            secondary: badugi(),
        }
    } else if script.badugi() {
        Winners::single(badugi())
    } else if script.high_low_split() {
        Winners {
            kind: WinnerKind::HighLow,
            primary: high(&valued(Direction::High)?),
            secondary: low(&valued(Direction::Low)?),
        }
    } else if script.low_wins() {
        Winners::single(low(&valued(Direction::Low)?))
    } else {
        Winners::single(high(&valued(Direction::High)?))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::parse_script;
    use alloc::string::{String, ToString};

    fn cards(s: &str) -> Vec<Card> {
        s.split_whitespace().map(|c| c.parse().unwrap()).collect()
    }

    fn script(extra: &str) -> GameScript {
        let text = String::from(
            "Number of players: 2\nSuit: H, D, C, S\nCard Rank: 2<3<4<5<6<7<8<9<10<11<12<13<1\n\
             Hand Rank: High Card<Pair<Two Pair<Three of a Kind<Straight<Flush<Full House<Four of a Kind<Straight Flush\n\
             Min / Max bet: 10 / 1000\nFlow: start->blind->deal2->bet->flop3->bet->flop1->bet->flop1->bet->show->prize\n",
        ) + extra;
        parse_script(&text).unwrap()
    }

    #[test]
    fn categories() {
        let s = script("");
        let name = |h: &str| s.hand_rank[evaluate(&s, &cards(h)).category].name().to_string();
        assert_eq!(name("H2 D5 C7 S9 H11"), "High Card");
        assert_eq!(name("H2 D2 C7 S9 H11"), "Pair");
        assert_eq!(name("H2 D2 C7 S7 H11"), "Two Pair");
        assert_eq!(name("H2 D2 C2 S7 H11"), "Three of a Kind");
        assert_eq!(name("H9 D10 C11 S12 H13"), "Straight");
        assert_eq!(name("H2 H5 H7 H9 H11"), "Flush");
        assert_eq!(name("H2 D2 C2 S7 H7"), "Full House");
        assert_eq!(name("H2 D2 C2 S2 H7"), "Four of a Kind");
        assert_eq!(name("H9 H10 H11 H12 H13"), "Straight Flush");
    }

    #[test]
    fn no_implicit_wrap() {
        let s = script("");
        let v = evaluate(&s, &cards("H1 D2 C3 S4 H5"));
        assert_eq!(v.category, 0);
    }

    #[test]
    fn small_straight_ranks_below_every_straight() {
        let s = script("Specific Rules:\nEach hand is formed by 5 cards.\n");
        assert_eq!(evaluate(&s, &cards("H1 D2 C3 S4 H5")).category, 0);
        let s = script(
            "Specific Rules:\nA Small Straight lets the highest-ranking card play as the lowest-ranking one and ranks below every standard straight.\n",
        );
        let wheel = evaluate(&s, &cards("H1 D2 C3 S4 H5"));
        let six_high = evaluate(&s, &cards("H2 D3 C4 S5 H6"));
        assert_eq!(wheel.category, 4);
        assert!(wheel < six_high);
    }

    #[test]
    fn kickers_break_ties() {
        let s = script("");
        let a = evaluate(&s, &cards("H2 D2 C7 S9 H13"));
        let b = evaluate(&s, &cards("C2 S2 D7 H9 D12"));
        assert_eq!(compare(&s, &a, &b), Ordering::Greater);
    }

    #[test]
    fn best_of_seven() {
        let s = script("");
        let best = best_hand(&s, &cards("H8 D1"), &cards("C8 S8 H3 D3 C11")).unwrap();
        assert_eq!(s.hand_rank[best.value.category], CombinationId::FullHouse);
        assert_eq!(best.value.tiebreak, vec![6, 6, 6, 1, 1]);
    }

    #[test]
    fn insufficient_cards() {
        let s = script("");
        assert_eq!(
            best_hand(&s, &cards("H8 D1"), &cards("C8")),
            Err(EvalError::InsufficientCards { needed: 5, have: 3 })
        );
    }

    #[test]
    fn badugi_prefers_more_then_lower() {
        let s = script("");
        let (v, chosen) = badugi_select(&s, &cards("H13 D2 C3 S4"));
        assert_eq!(v.count, 4);
        assert_eq!(chosen.len(), 4);
        let (v, _) = badugi_select(&s, &cards("H2 H3 D3 C5"));
        // H2, D3, C5 in ordinals.
        assert_eq!(v, BadugiValue { count: 3, ordinals: vec![0, 1, 3] });
    }

    #[test]
    fn subsets_enumerated_once() {
        let mut seen = Vec::new();
        for_each_subset(5, 3, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 10);
        assert_eq!(seen[0], vec![0, 1, 2]);
        assert_eq!(seen[9], vec![2, 3, 4]);
        let mut count = 0;
        for_each_subset(3, 0, |_| count += 1);
        assert_eq!(count, 1);
        for_each_subset(2, 3, |_| count += 1);
        assert_eq!(count, 1);
    }
}
