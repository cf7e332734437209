use std::cmp::Ordering;
use std::collections::BTreeSet;

use idge_core::cards::{build_deck, Card, Deck};
use idge_core::engine::{
    legal_actions, next_state, random_agents, Action, GameState, LegalAction, Notice, PlayerInput, Round,
};
use idge_core::evaluator::{best_hand, compare, detect, evaluate};
use idge_core::rephrase::{parse_rephrased, rephrase_script, RephraseConfig};
use idge_core::rng::SplitMix64;
use idge_core::script::{parse_script, serialize_script, GameScript};
use idge_core::statelang::{parse_state, redact, serialize_state};
use idge_core::variants::{OUT_OF_DOMAIN, STANDARD};
use idge_core::{init_round, PhaseKind};
use proptest::prelude::*;

const BUILTIN: [&str; 9] = [
    "High Card",
    "Pair",
    "Two Pair",
    "Three of a Kind",
    "Straight",
    "Flush",
    "Full House",
    "Four of a Kind",
    "Straight Flush",
];

/// A random valid script built from a seed.
fn random_script_text(seed: u64) -> String {
    let mut r = SplitMix64::new(seed);
    let mut suits = vec!['H', 'D', 'C', 'S'];
    r.shuffle(&mut suits);
    suits.truncate(1 + r.below(4) as usize);
    let mut ranks: Vec<u16> = (1..=13).collect();
    r.shuffle(&mut ranks);
    // A single-suit deck needs enough ranks to deal two players.
    let floor = if suits.len() == 1 { 10 } else { 5 };
    ranks.truncate((5 + r.below(9) as usize).max(floor));
    let deck = suits.len() * ranks.len();

    // Redraw the deal shape until two players fit in the deck.
    let (hole, flops, fixed) = loop {
        let hole = 1 + r.below(5) as usize;
        let community = 5usize.saturating_sub(hole) + r.below(2) as usize;
        let mut flops = Vec::new();
        let mut left = community;
        while left > 0 {
            let f = 1 + r.below(left as u64) as usize;
            flops.push(f);
            left -= f;
        }
        let fixed = community + flops.len();
        if fixed + 2 * hole <= deck {
            break (hole, flops, fixed);
        }
    };
    let max_players = ((deck - fixed) / hole).min(6);
    let players = 2 + r.below(max_players as u64 - 1) as usize;

    let mut hand: Vec<&str> = BUILTIN.iter().copied().filter(|_| r.below(3) > 0).collect();
    if !hand.contains(&"High Card") {
        hand.push("High Card");
    }
    r.shuffle(&mut hand);

    let min = 2 * (1 + r.below(25));
    let max = min * (1 + r.below(100));
    let mut flow = vec!["start".to_string()];
    if r.below(2) == 0 {
        flow.push("blind".into());
    }
    flow.push(format!("deal{hole}"));
    flow.push("bet".into());
    for f in flops {
        flow.push(format!("flop{f}"));
        flow.push("bet".into());
    }
    flow.extend(["show".into(), "prize".into()]);

    let mut text = format!(
        "Game: random {seed}\nNumber of players: {players}\nSuit: {}\nCard Rank: {}\nHand Rank: {}\n\
         Min / Max bet: {min} / {max}\nFlow: {}\n",
        suits.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "),
        ranks.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("<"),
        hand.join("<"),
        flow.join("->"),
    );
    let mut rules = Vec::new();
    if r.below(3) == 0 {
        rules.push("In showdown, the players with the lowest combination of cards win.");
    }
    if r.below(2) == 0 {
        rules.push("During a bet, a player may go All-in, putting all remaining chips into the pot and making no further bets.");
    }
    if !rules.is_empty() {
        text.push_str("Specific Rules:\n");
        for rule in rules {
            text.push_str(rule);
            text.push('\n');
        }
    }
    text
}

fn bundled() -> Vec<GameScript> {
    STANDARD.iter().chain(OUT_OF_DOMAIN.iter()).map(|b| b.script()).collect()
}

fn random_cards(script: &GameScript, n: usize, seed: u64) -> Vec<Card> {
    let mut deck = build_deck(script);
    deck.shuffle(&mut SplitMix64::new(seed));
    deck.draw(n).expect("deck is large enough")
}

fn play(script: &GameScript, seed: u64) -> Round {
    let stacks = vec![script.min_bet * 100; script.num_players as usize];
    let first = init_round(script, seed, &stacks).expect("valid stacks");
    let mut agents = random_agents(script, seed);
    idge_core::engine::play_from(first, script, &mut agents).expect("round completes")
}

fn sorted(mut v: Vec<Card>) -> Vec<Card> {
    v.sort();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn shuffle_is_a_bijection(seed: u64, suits in 1usize..=4, ranks in 1usize..=13) {
        let s: Vec<char> = "HDCS".chars().take(suits).collect();
        let r: Vec<u16> = (1..=ranks as u16).collect();
        let deck = Deck::build(&s, &r);
        let mut shuffled = deck.clone();
        shuffled.shuffle(&mut SplitMix64::new(seed));
        prop_assert_eq!(sorted(shuffled.into_cards()), sorted(deck.into_cards()));
    }

    #[test]
    fn draws_compose(seed: u64, n in 0usize..20, m in 0usize..20) {
        let mut deck = Deck::build(&['H', 'D', 'C', 'S'], &(1..=13).collect::<Vec<_>>());
        deck.shuffle(&mut SplitMix64::new(seed));
        let mut a = deck.clone();
        let mut first = a.draw(n).unwrap();
        first.extend(a.draw(m).unwrap());
        let mut b = deck;
        prop_assert_eq!(first, b.draw(n + m).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn generated_scripts_round_trip(seed: u64) {
        let text = random_script_text(seed);
        let script = parse_script(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        let canon = serialize_script(&script);
        let again = parse_script(&canon).unwrap();
        prop_assert_eq!(&again, &script);
        prop_assert_eq!(serialize_script(&again), canon);
    }

    #[test]
    fn rephrasing_round_trips(seed: u64, which in 0usize..15, p in 0.0f64..=1.0, whole in 0.0f64..=0.05) {
        let script = &bundled()[which];
        let cfg = RephraseConfig::new(seed, p, whole).unwrap();
        let text = rephrase_script(script, &cfg);
        let back = parse_rephrased(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, script);
    }

    #[test]
    fn generated_script_rephrasing_round_trips(seed: u64, p in 0.0f64..=1.0) {
        let script = parse_script(&random_script_text(seed)).unwrap();
        let text = rephrase_script(&script, &RephraseConfig::new(seed ^ 1, p, 0.0).unwrap());
        let back = parse_rephrased(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, script);
    }

    #[test]
    fn compare_is_a_total_preorder(seed: u64, which in 0usize..15) {
        let script = &bundled()[which];
        let k = script.hand_size();
        let v: Vec<_> = (0..3).map(|i| evaluate(script, &random_cards(script, k, seed.wrapping_add(i)))).collect();
        let c = |a: usize, b: usize| compare(script, &v[a], &v[b]);
        for a in 0..3 {
            prop_assert_eq!(c(a, a), Ordering::Equal);
            for b in 0..3 {
                prop_assert_eq!(c(a, b), c(b, a).reverse());
                for d in 0..3 {
                    if c(a, b) != Ordering::Less && c(b, d) != Ordering::Less {
                        prop_assert_ne!(c(a, d), Ordering::Less);
                    }
                }
            }
        }
    }

    #[test]
    fn low_wins_only_flips_the_comparison(seed: u64) {
        let high = STANDARD[0].script();
        let mut low = high.clone();
        low.rules.push(idge_core::rules::RulePredicate::LowWins);
        let hole = random_cards(&high, 7, seed);
        let (h, l) = (best_hand(&high, &hole, &[]).unwrap(), best_hand(&low, &hole, &[]).unwrap());
        prop_assert_eq!(evaluate(&high, &l.cards), evaluate(&low, &l.cards));
        let mut all = Vec::new();
        idge_core::evaluator::for_each_subset(7, 5, |s| all.push(evaluate(&high, &s.iter().map(|&i| hole[i]).collect::<Vec<_>>())));
        prop_assert_eq!(&h.value, all.iter().max().unwrap());
        prop_assert_eq!(&l.value, all.iter().min().unwrap());
    }

    #[test]
    fn detect_uses_only_input_cards(seed: u64, which in 0usize..15, n in 1usize..9) {
        let script = &bundled()[which];
        let n = n.min(script.deck_size());
        let cards = random_cards(script, n, seed);
        let have: BTreeSet<Card> = cards.iter().copied().collect();
        for combo in &script.hand_rank {
            if let Some(found) = detect(script, combo, &cards) {
                let used: BTreeSet<Card> = found.iter().copied().collect();
                prop_assert_eq!(used.len(), found.len());
                prop_assert!(used.is_subset(&have));
            }
        }
    }

    #[test]
    fn small_straight_ranks_below_every_straight(seed: u64, top in 4usize..9) {
        let script = STANDARD[3].script();
        prop_assert!(script.small_straight());
        let n = script.rank_order.len();
        let mut r = SplitMix64::new(seed);
        let mut hand = |ords: &[usize]| -> Vec<Card> {
            ords.iter()
                .enumerate()
                .map(|(i, &o)| {
                    // The first two cards differ in suit, so no hand is a flush.
                    let suit = if i < 2 { ['H', 'D'][i] } else { script.suits[r.below(4) as usize] };
                    Card { suit, rank: script.rank_order[o] }
                })
                .collect()
        };
        let wheel = evaluate(&script, &hand(&[n - 1, 0, 1, 2, 3]));
        let straight = evaluate(&script, &hand(&[top - 4, top - 3, top - 2, top - 1, top]));
        prop_assert_eq!(wheel.category, straight.category);
        prop_assert_eq!(compare(&script, &wheel, &straight), Ordering::Less);
    }
}

fn check_round(script: &GameScript, round: &Round) -> Result<(), TestCaseError> {
    let chips = round.states[0].total_chips();
    let full = sorted(build_deck(script).into_cards());
    for (i, s) in round.states.iter().enumerate() {
        prop_assert_eq!(s.total_chips(), chips, "chips at state {}", i);
        prop_assert_eq!(sorted(s.all_cards()), full.clone(), "cards at state {}", i);
        let text = serialize_state(s);
        let back = parse_state(&text, script).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(serialize_state(&back), text.clone());
        for viewer in [None, Some(0)] {
            let once = redact(&text, viewer).unwrap();
            prop_assert_eq!(redact(&once, viewer).unwrap(), once);
        }
        if i > 0 {
            let prev = &round.states[i - 1];
            prop_assert!(s.trace.len() <= prev.trace.len() + 1);
            prop_assert_eq!(&s.trace[..prev.trace.len()], &prev.trace[..]);
            let again = next_state(prev, round.inputs[i - 1].as_ref(), script).unwrap();
            prop_assert_eq!(serialize_state(&again), text);
        }
    }
    let texts: BTreeSet<String> = round.states.iter().map(serialize_state).collect();
    prop_assert_eq!(texts.len(), round.states.len(), "distinct states serialize distinctly");
    let last = round.states.last().unwrap();
    prop_assert!(last.finished());
    let before_prize = &round.states[round.states.len() - 2];
    if let Notice::Payouts(paid) = &last.notice {
        let total: u64 = paid.iter().map(|(_, x)| x).sum();
        prop_assert_eq!(total, before_prize.pot());
    } else {
        return Err(TestCaseError::fail("final state announces no payouts"));
    }
    Ok(())
}

fn sample_illegal(state: &GameState, legal: &[LegalAction]) -> Vec<Action> {
    let mut out = Vec::new();
    for a in [Action::Check, Action::Call, Action::Fold, Action::AllIn, Action::Switch(Vec::new())] {
        if !legal.iter().any(|l| l.permits(&a)) {
            out.push(a);
        }
    }
    if let Some(LegalAction::RaiseTo { min, max }) = legal.iter().find(|l| matches!(l, LegalAction::RaiseTo { .. })) {
        out.push(Action::RaiseTo(min - 1));
        out.push(Action::RaiseTo(max + 1));
    } else {
        out.push(Action::RaiseTo(state.high_bet() + 1));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rounds_conserve_and_reparse(seed: u64, which in 0usize..15) {
        let script = &bundled()[which];
        check_round(script, &play(script, seed))?;
    }

    #[test]
    fn generated_scripts_play_cleanly(seed: u64) {
        let script = parse_script(&random_script_text(seed)).unwrap();
        check_round(&script, &play(&script, seed))?;
    }

    #[test]
    fn legal_actions_are_closed(seed: u64, which in 0usize..10) {
        let script = &bundled()[which];
        let round = play(script, seed);
        for state in &round.states[..round.states.len() - 1] {
            let Some((p, _)) = state.prompted() else {
                prop_assert!(next_state(state, None, script).is_ok());
                continue;
            };
            let legal = legal_actions(state, script);
            prop_assert!(!legal.is_empty());
            for l in &legal {
                let action = match l {
                    LegalAction::Check => Action::Check,
                    LegalAction::Call { .. } => Action::Call,
                    LegalAction::RaiseTo { min, .. } => Action::RaiseTo(*min),
                    LegalAction::Fold => Action::Fold,
                    LegalAction::AllIn => Action::AllIn,
                    LegalAction::Switch { max_cards } => {
                        Action::Switch(state.seats[p].hole.iter().take(*max_cards).copied().collect())
                    }
                };
                let r = next_state(state, Some(&PlayerInput::new(p, action.clone())), script);
                prop_assert!(r.is_ok(), "{:?} {:?} {}", action, r.err(), script.name);
            }
            if let Some(LegalAction::RaiseTo { max, .. }) = legal.iter().find(|l| matches!(l, LegalAction::RaiseTo { .. })) {
                prop_assert!(next_state(state, Some(&PlayerInput::new(p, Action::RaiseTo(*max))), script).is_ok());
            }
            for bad in sample_illegal(state, &legal) {
                prop_assert!(next_state(state, Some(&PlayerInput::new(p, bad.clone())), script).is_err(), "{:?}", bad);
            }
            let other = (p + 1) % state.seats.len();
            prop_assert!(next_state(state, Some(&PlayerInput::new(other, Action::Fold)), script).is_err());
        }
    }
}

#[test]
fn shuffle_positions_are_uniform() {
    // Chi-square on where card 0 lands, 52 bins.
    let deck = Deck::build(&['H', 'D', 'C', 'S'], &(1..=13).collect::<Vec<_>>());
    let target = deck.cards()[0];
    let trials = 52_000;
    let mut bins = [0u32; 52];
    for seed in 0..trials {
        let mut d = deck.clone();
        d.shuffle(&mut SplitMix64::new(seed));
        bins[d.cards().iter().position(|&c| c == target).unwrap()] += 1;
    }
    let expect = trials as f64 / 52.0;
    let chi: f64 = bins.iter().map(|&o| (o as f64 - expect).powi(2) / expect).sum();
    // 51 degrees of freedom; 0.999 quantile is about 87.0.
    assert!(chi < 87.0, "chi-square {chi}");
}

#[test]
fn phase_labels_round_trip() {
    for s in bundled() {
        for p in &s.flow {
            assert_eq!(PhaseKind::from_label(&p.label()), Some(*p));
        }
    }
}
