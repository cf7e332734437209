//! Simulated rounds, showdown-category balancing and next-state samples.

use std::collections::BTreeMap;

use idge_core::engine::{init_round, play_from, random_agents, GameState, Notice, Round};
use idge_core::evaluator::{badugi_select, best_hand_in, Direction, WinnerKind};
use idge_core::rng::SplitMix64;
use idge_core::script::{serialize_script, GameScript, PhaseKind};
use idge_core::statelang::{serialize_input, serialize_state};
use idge_core::variants;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::DataError;
use crate::harness::{attribute_function, transcript_of};
use crate::records::{NspMeta, NspRecord, TranscriptRecord};

/// Category label for rounds that end without a showdown.
pub const NO_SHOWDOWN: &str = "no showdown";

#[derive(Debug, Clone)]
pub struct Variant {
    pub id: String,
    pub script: GameScript,
}

impl Variant {
    pub fn new(id: impl Into<String>, script: GameScript) -> Self {
        Self { id: id.into(), script }
    }

    /// A bundled script by id.
    pub fn bundled(id: &str) -> Result<Self, DataError> {
        let b = variants::find(id).ok_or_else(|| DataError::Config(format!("no bundled script {id:?}")))?;
        Ok(Self::new(id, b.script()))
    }

    pub fn standard() -> Vec<Variant> {
        variants::STANDARD.iter().map(|b| Variant::new(b.id, b.script())).collect()
    }
}

/// Target share of each showdown category in a balanced corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceSpec {
    /// `(category, weight)`; weights are positive and sum to 1.
    pub weights: Vec<(String, f64)>,
    /// Drawing stops once every category is within this relative shortfall of
    /// its quota; the remainder is filled by repeating accepted rounds.
    pub tolerance: f64,
    /// Share of the corpus given to rounds without a showdown. Those rounds
    /// are outside the category quotas.
    pub walkover_share: f64,
    /// Rounds drawn per requested round before giving up on a quota.
    pub budget: usize,
}

impl BalanceSpec {
    /// Equal weight for every combination the script can produce.
    pub fn uniform(script: &GameScript) -> Self {
        let cats = categories(script);
        let w = 1.0 / cats.len() as f64;
        Self {
            weights: cats.into_iter().map(|c| (c, w)).collect(),
            tolerance: 0.0,
            walkover_share: 0.15,
            budget: 40,
        }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |m: String| Err(DataError::BalanceSpec(m));
        if self.weights.is_empty() {
            return bad("no categories".into());
        }
        if let Some((c, w)) = self.weights.iter().find(|(_, w)| !(*w > 0.0)) {
            return bad(format!("weight {w} for {c:?} is not positive"));
        }
        let sum: f64 = self.weights.iter().map(|(_, w)| w).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return bad(format!("weights sum to {sum}"));
        }
        if !(0.0..1.0).contains(&self.walkover_share) || !(0.0..=1.0).contains(&self.tolerance) {
            return bad("walkover share and tolerance must lie in [0, 1)".into());
        }
        if self.budget == 0 {
            return bad("budget must be positive".into());
        }
        Ok(())
    }
}

/// Categories a script's showdowns can fall into.
pub fn categories(script: &GameScript) -> Vec<String> {
    if script.badugi() && !script.high_low_split() {
        let n = script.hole_cards_per_player().min(script.suits.len()).max(1);
        (1..=n).map(|k| format!("Badugi {k}")).collect()
    } else {
        script.hand_rank.iter().map(|c| c.name().to_string()).collect()
    }
}

fn showdown_category(state: &GameState, script: &GameScript) -> Option<String> {
    let Notice::Showdown(w) = &state.notice else {
        return None;
    };
    if script.badugi() && w.kind == WinnerKind::Single {
        let p = *w.primary.first()?;
        let all: Vec<_> = state.seats[p].hole.iter().chain(&state.community).copied().collect();
        return Some(format!("Badugi {}", badugi_select(script, &all).0.count));
    }
    let dir = match w.kind {
        WinnerKind::LowBadugi => Direction::Low,
        WinnerKind::HighLow => Direction::High,
        WinnerKind::Single if script.low_wins() => Direction::Low,
        WinnerKind::Single => Direction::High,
    };
    // Winners tie, so any of them gives the category; the maximum guards ties across kinds.
    w.primary
        .iter()
        .filter_map(|&p| best_hand_in(script, &state.seats[p].hole, &state.community, dir).ok())
        .map(|b| b.value.category)
        .max()
        .and_then(|c| script.hand_rank.get(c))
        .map(|c| c.name().to_string())
}

/// Showdown category of a finished round.
pub fn round_category(round: &Round, script: &GameScript) -> String {
    round
        .states
        .iter()
        .find_map(|s| showdown_category(s, script))
        .unwrap_or_else(|| NO_SHOWDOWN.to_string())
}

/// Largest table the deck can serve, capped at `cap`.
fn max_players(script: &GameScript, cap: u8) -> u8 {
    let burns = script.flow.iter().filter(|p| matches!(p, PhaseKind::Flop(_))).count();
    let fixed = script.community_cards() + burns;
    let hole = script.hole_cards_per_player().max(1);
    let fit = script.deck_size().saturating_sub(fixed) / hole;
    (fit.min(cap as usize) as u8).max(2)
}

/// A per-round variation of `script`: table size and bet limits change, everything else stays.
pub fn jitter(script: &GameScript, rng: &mut SplitMix64) -> GameScript {
    let mut s = script.clone();
    let hi = max_players(script, 6);
    s.num_players = rng.range_inclusive(2, hi as u64) as u8;
    let min = [2u64, 4, 10, 20][rng.below(4) as usize];
    s.min_bet = min;
    s.max_bet = min * [50u64, 100][rng.below(2) as usize];
    if s.validate().is_ok() {
        s
    } else {
        script.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub rounds: usize,
    pub seed: u64,
    /// Vary table size and bet limits per round.
    pub jitter: bool,
    /// Starting stack as a multiple of the minimum bet.
    pub stack_in_min_bets: u64,
}

impl GenConfig {
    pub fn new(rounds: usize, seed: u64) -> Self {
        Self {
            rounds,
            seed,
            jitter: true,
            stack_in_min_bets: 100,
        }
    }
}

/// One simulated round and everything needed to reproduce it.
#[derive(Debug, Clone)]
pub struct RoundLog {
    /// Draw index; round `i` uses variant `i mod len` and a seed derived from `i`.
    pub index: u64,
    pub copy: u32,
    pub variant: String,
    pub script: GameScript,
    pub seed: u64,
    pub stacks: Vec<u64>,
    pub round: Round,
    pub category: String,
}

impl RoundLog {
    pub fn script_text(&self) -> String {
        serialize_script(&self.script)
    }

    pub fn id(&self) -> String {
        if self.copy == 0 {
            format!("{}-{}", self.variant, self.index)
        } else {
            format!("{}-{}.{}", self.variant, self.index, self.copy)
        }
    }

    /// One sample per transition, all sharing `script_text`.
    pub fn samples_with(&self, script_text: &str, form: &str) -> Vec<NspRecord> {
        let states = &self.round.states;
        (1..states.len())
            .map(|t| NspRecord {
                stage: None,
                script_text: script_text.to_string(),
                prev_state: serialize_state(&states[t - 1]),
                input: self.round.inputs[t - 1].as_ref().map(serialize_input).unwrap_or_default(),
                next_state: serialize_state(&states[t]),
                meta: NspMeta {
                    variant: self.variant.clone(),
                    function: attribute_function(Some(&states[t - 1]), &states[t]).to_string(),
                    category: self.category.clone(),
                    seed: self.seed,
                    round: self.index,
                    step: t as u64,
                    copy: self.copy,
                    script_form: form.to_string(),
                },
            })
            .collect()
    }

    pub fn samples(&self) -> Vec<NspRecord> {
        self.samples_with(&self.script_text(), "structured")
    }

    pub fn transcript(&self) -> TranscriptRecord {
        transcript_of(
            self.id(),
            &self.variant,
            self.script_text(),
            self.seed,
            self.stacks.clone(),
            &self.round,
        )
    }
}

pub fn round_seed(seed: u64, index: u64) -> u64 {
    SplitMix64::new(seed ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03)).next_u64()
}

/// Plays draw `index` of a corpus.
pub fn play(variants: &[Variant], cfg: &GenConfig, index: u64) -> Result<RoundLog, DataError> {
    let v = &variants[(index % variants.len() as u64) as usize];
    let seed = round_seed(cfg.seed, index);
    let mut rng = SplitMix64::new(seed);
    let script = if cfg.jitter { jitter(&v.script, &mut rng) } else { v.script.clone() };
    let stacks = vec![script.min_bet * cfg.stack_in_min_bets.max(1); script.num_players as usize];
    let engine = |source| DataError::Engine {
        variant: v.id.clone(),
        seed,
        source,
    };
    let first = init_round(&script, seed, &stacks).map_err(engine)?;
    let mut agents = random_agents(&script, seed);
    let round = play_from(first, &script, &mut agents).map_err(engine)?;
    Ok(RoundLog {
        index,
        copy: 0,
        variant: v.id.clone(),
        category: round_category(&round, &script),
        script,
        seed,
        stacks,
        round,
    })
}

fn play_range(variants: &[Variant], cfg: &GenConfig, from: u64, to: u64) -> Result<Vec<RoundLog>, DataError> {
    (from..to).into_par_iter().map(|i| play(variants, cfg, i)).collect()
}

/// Largest-remainder apportionment of `n` by `weights`.
fn apportion(n: usize, weights: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = weights.iter().map(|w| w * n as f64).collect();
    let mut out: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut rest = n - out.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for i in order {
        if rest == 0 {
            break;
        }
        out[i] += 1;
        rest -= 1;
    }
    out
}

const BATCH: u64 = 2048;

/// Simulated rounds, optionally balanced by showdown category.
///
/// Unbalanced, the corpus is draws `0..rounds`. Balanced, draws are accepted
/// in index order while their category still has quota; short categories are
/// then topped up by repeating their accepted rounds.
pub fn generate_rounds(
    variants: &[Variant],
    cfg: &GenConfig,
    balance: Option<&BalanceSpec>,
) -> Result<Vec<RoundLog>, DataError> {
    if variants.is_empty() {
        return Err(DataError::Config("no scripts".into()));
    }
    if cfg.rounds == 0 {
        return Err(DataError::Config("rounds must be at least 1".into()));
    }
    let Some(spec) = balance else {
        return play_range(variants, cfg, 0, cfg.rounds as u64);
    };
    spec.validate()?;
    let walk_quota = (cfg.rounds as f64 * spec.walkover_share).round() as usize;
    let weights: Vec<f64> = spec.weights.iter().map(|(_, w)| *w).collect();
    let quotas = apportion(cfg.rounds - walk_quota, &weights);
    let slot: BTreeMap<&str, usize> = spec.weights.iter().enumerate().map(|(i, (c, _))| (c.as_str(), i)).collect();
    let mut accepted: Vec<Vec<RoundLog>> = vec![Vec::new(); quotas.len()];
    let mut walkovers = Vec::new();
    let done = |acc: &[Vec<RoundLog>], walk: usize| {
        walk >= walk_quota
            && acc
                .iter()
                .zip(&quotas)
                .all(|(a, &q)| a.len() as f64 >= q as f64 * (1.0 - spec.tolerance))
    };
    let limit = (cfg.rounds * spec.budget) as u64;
    let mut next = 0u64;
    while next < limit && !done(&accepted, walkovers.len()) {
        let end = (next + BATCH).min(limit);
        for log in play_range(variants, cfg, next, end)? {
            if log.category == NO_SHOWDOWN {
                if walkovers.len() < walk_quota {
                    walkovers.push(log);
                }
            } else if let Some(&i) = slot.get(log.category.as_str()) {
                if accepted[i].len() < quotas[i] {
                    accepted[i].push(log);
                }
            }
        }
        next = end;
    }
    let mut out = walkovers;
    for ((name, _), (mut got, &quota)) in spec.weights.iter().zip(accepted.into_iter().zip(&quotas)) {
        if got.is_empty() && quota > 0 {
            return Err(DataError::QuotaUnreachable(name.clone()));
        }
        let originals = got.len();
        let mut k = 0;
        while got.len() < quota {
            let mut copy = got[k % originals].clone();
            copy.copy = (k / originals) as u32 + 1;
            got.push(copy);
            k += 1;
        }
        out.extend(got);
    }
    if out.len() < cfg.rounds {
        // Too few walkovers within budget; the share is a target, not a guarantee.
        return Err(DataError::QuotaUnreachable(NO_SHOWDOWN.into()));
    }
    out.sort_by_key(|l| (l.index, l.copy));
    Ok(out)
}

/// Per-category round counts.
pub fn histogram(logs: &[RoundLog]) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for l in logs {
        *h.entry(l.category.clone()).or_default() += 1;
    }
    h
}

/// Max/min frequency over `cats` (showdowns only); infinite when a category is missing.
pub fn frequency_ratio(hist: &BTreeMap<String, usize>, cats: &[String]) -> f64 {
    let counts: Vec<usize> = cats.iter().map(|c| hist.get(c).copied().unwrap_or(0)).collect();
    let max = counts.iter().copied().max().unwrap_or(0);
    let min = counts.iter().copied().min().unwrap_or(0);
    if min == 0 {
        f64::INFINITY
    } else {
        max as f64 / min as f64
    }
}

/// Samples of a whole corpus, in round order.
pub fn generate_corpus(
    variants: &[Variant],
    cfg: &GenConfig,
    balance: Option<&BalanceSpec>,
) -> Result<Vec<NspRecord>, DataError> {
    Ok(generate_rounds(variants, cfg, balance)?
        .iter()
        .flat_map(RoundLog::samples)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn holdem() -> Vec<Variant> {
        vec![Variant::bundled("texas_holdem").unwrap()]
    }

    #[test]
    fn one_round_gives_states_minus_one_samples() {
        let cfg = GenConfig::new(1, 3);
        let logs = generate_rounds(&holdem(), &cfg, None).unwrap();
        assert_eq!(logs[0].samples().len(), logs[0].round.states.len() - 1);
    }

    #[test]
    fn regeneration_is_identical() {
        let cfg = GenConfig::new(30, 5);
        let a = generate_corpus(&Variant::standard(), &cfg, None).unwrap();
        let b = generate_corpus(&Variant::standard(), &cfg, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn apportionment_is_exact() {
        assert_eq!(apportion(10, &[0.5, 0.25, 0.25]), vec![5, 3, 2]);
        assert_eq!(apportion(7, &[1.0 / 3.0; 3]).iter().sum::<usize>(), 7);
    }

    #[test]
    fn balance_spec_validation() {
        let s = holdem()[0].script.clone();
        let mut spec = BalanceSpec::uniform(&s);
        spec.validate().unwrap();
        assert_eq!(spec.weights.len(), 8);
        spec.weights[0].1 = 0.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn missing_category_is_unreachable() {
        let v = holdem();
        let mut spec = BalanceSpec::uniform(&v[0].script);
        spec.weights = vec![("Six of a Kind".into(), 1.0)];
        spec.budget = 2;
        let err = generate_rounds(&v, &GenConfig::new(20, 1), Some(&spec)).unwrap_err();
        assert!(matches!(err, DataError::QuotaUnreachable(c) if c == "Six of a Kind"));
    }

    #[test]
    fn balanced_small_corpus_meets_quotas() {
        let v = holdem();
        let spec = BalanceSpec::uniform(&v[0].script);
        let logs = generate_rounds(&v, &GenConfig::new(200, 2), Some(&spec)).unwrap();
        assert_eq!(logs.len(), 200);
        let h = histogram(&logs);
        assert!(frequency_ratio(&h, &categories(&v[0].script)) <= 2.0, "{h:?}");
    }

    #[test]
    fn jitter_stays_valid() {
        let mut rng = SplitMix64::new(1);
        for v in Variant::standard() {
            for _ in 0..20 {
                jitter(&v.script, &mut rng).validate().unwrap();
            }
        }
    }
}
