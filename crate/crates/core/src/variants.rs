//! Bundled game scripts.

use alloc::vec::Vec;

use crate::script::{parse_script, GameScript};

/// A bundled script by id.
#[derive(Debug, Clone, Copy)]
pub struct Bundled {
    pub id: &'static str,
    pub text: &'static str,
}

impl Bundled {
    pub fn script(&self) -> GameScript {
        parse_script(self.text).expect("bundled scripts are valid")
    }
}

macro_rules! bundled {
    ($($id:literal),* $(,)?) => {
        [$(Bundled { id: $id, text: include_str!(concat!("../data/scripts/", $id, ".script")) }),*]
    };
}

/// The ten standard variants.
pub const STANDARD: [Bundled; 10] = bundled![
    "texas_holdem",
    "five_card_draw",
    "omaha",
    "short_deck_holdem",
    "two_to_seven_triple_draw",
    "a_to_five_triple_draw",
    "two_to_seven_single_draw",
    "badugi",
    "badeucey",
    "badacey",
];

/// Scripts outside the standard set: other deck shapes, flows, moves and hand sizes.
pub const OUT_OF_DOMAIN: [Bundled; 5] = bundled![
    "ood1_reverse_ranking",
    "ood2_extra_deal",
    "ood3_all_in",
    "ood4_three_card_draw",
    "ood5_six_card_draw",
];

/// Five-handed hold'em with all-in, plus one input/response pair in it.
pub mod golden {
    pub const SCRIPT: &str = include_str!("../data/golden/script.script");
    /// Prior state followed by the player's message line.
    pub const INPUT: &str = include_str!("../data/golden/input.txt");
    pub const RESPONSE: &str = include_str!("../data/golden/response.txt");
}

pub fn find(id: &str) -> Option<Bundled> {
    STANDARD.iter().chain(OUT_OF_DOMAIN.iter()).find(|b| b.id == id).copied()
}

pub fn standard_scripts() -> Vec<(&'static str, GameScript)> {
    STANDARD.iter().map(|b| (b.id, b.script())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::RulePredicate;
    use crate::script::{serialize_script, CombinationId, PhaseKind};

    #[test]
    fn every_bundled_script_parses_and_round_trips() {
        for b in STANDARD.iter().chain(OUT_OF_DOMAIN.iter()) {
            let s = parse_script(b.text).unwrap_or_else(|e| panic!("{}: {e}", b.id));
            assert_eq!(parse_script(&serialize_script(&s)).unwrap(), s, "{}", b.id);
        }
        parse_script(golden::SCRIPT).unwrap();
    }

    #[test]
    fn predicates_are_recognized() {
        let s = find("badeucey").unwrap().script();
        assert!(s.badugi() && s.high_low_split());
        assert_eq!(s.flow[2], PhaseKind::Deal(5));
        let s = find("short_deck_holdem").unwrap().script();
        assert!(s.small_straight());
        assert_eq!(s.flow[1], PhaseKind::Shuffle);
        let s = find("ood5_six_card_draw").unwrap().script();
        assert_eq!(s.hand_size(), 6);
        assert_eq!(s.custom_shape("Big House"), Some(&[3u8, 3][..]));
        assert!(s.hand_rank.contains(&CombinationId::Custom("Three Pair".into())));
        let s = find("ood4_three_card_draw").unwrap().script();
        assert!(s.has_rule(&RulePredicate::HandSize(3)));
        assert_eq!(s.deck_size(), 39);
        let s = parse_script(golden::SCRIPT).unwrap();
        assert!(s.all_in_allowed());
        assert_eq!(s.rank_order.len(), 12);
    }
}
