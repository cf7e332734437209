//! Scoring predicted next states against the engine.
//!
//! A state counts as correct when its text equals the engine's serialization
//! byte for byte, after newline normalization. Every state is bucketed by the
//! flow function that produced it, and a round succeeds only if all of its
//! states are correct.

use std::collections::BTreeMap;

use idge_core::engine::{init_round_at, next_state, GameState, Round, TurnKind};
use idge_core::rephrase::parse_rephrased;
use idge_core::rng::SplitMix64;
use idge_core::script::{GameScript, PhaseKind, ScriptError};
use idge_core::statelang::{diff_states, parse_input, parse_state, serialize_input, serialize_state};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::records::{PredictionRecord, Step, TranscriptRecord};

/// Column labels, in report order.
pub const FUNCTIONS: [&str; 8] = ["start", "blind", "deal", "flop", "switch", "bet", "show", "prize"];

pub fn phase_function(p: PhaseKind) -> &'static str {
    match p {
        PhaseKind::Start | PhaseKind::Shuffle => "start",
        PhaseKind::Blind => "blind",
        PhaseKind::Deal(_) => "deal",
        PhaseKind::Flop(_) => "flop",
        PhaseKind::Bet => "bet",
        PhaseKind::Switch => "switch",
        PhaseKind::Show => "show",
        PhaseKind::Prize => "prize",
    }
}

/// Flow function that produced `next` from `prev`; `None` means the initial state.
///
/// A transition that appends a phase label belongs to that phase. One that
/// does not is a player turn inside a bet or switch phase.
pub fn attribute_function(prev: Option<&GameState>, next: &GameState) -> &'static str {
    let Some(prev) = prev else {
        return "start";
    };
    if next.trace.len() > prev.trace.len() {
        return next.trace.last().map_or("start", |p| phase_function(*p));
    }
    match prev.prompted() {
        Some((_, TurnKind::Switch)) => "switch",
        _ => "bet",
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Each step's reference comes from the transcript's own previous state.
    #[default]
    TeacherForced,
    /// References are chained from the initial state through the inputs only.
    FreeRunning,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub correct: u64,
    pub total: u64,
}

impl Cell {
    pub fn accuracy(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffLine {
    pub key: String,
    pub expected: Option<String>,
    pub actual: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFailure {
    pub id: String,
    pub step: usize,
    pub function: String,
    pub diff: Vec<DiffLine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: Mode,
    pub cells: BTreeMap<String, Cell>,
    pub macro_accuracy: Option<f64>,
    pub rounds_success: u64,
    pub rounds_total: u64,
    pub failures: Vec<StateFailure>,
}

impl EvalReport {
    pub fn cell(&self, function: &str) -> Cell {
        self.cells.get(function).copied().unwrap_or_default()
    }

    pub fn round_success_rate(&self) -> Option<f64> {
        (self.rounds_total > 0).then(|| self.rounds_success as f64 / self.rounds_total as f64)
    }

    /// Fixed-width table with one row per function.
    pub fn table(&self) -> String {
        let pct = |a: Option<f64>| a.map_or("-".to_string(), |a| format!("{:.1}", a * 100.0));
        let mut out = format!("{:<8} {:>8} {:>8} {:>7}\n", "function", "correct", "total", "acc%");
        for f in FUNCTIONS {
            let c = self.cell(f);
            out.push_str(&format!("{:<8} {:>8} {:>8} {:>7}\n", f, c.correct, c.total, pct(c.accuracy())));
        }
        out.push_str(&format!("macro average: {}\n", pct(self.macro_accuracy)));
        out.push_str(&format!(
            "round success: {}/{} ({})\n",
            self.rounds_success,
            self.rounds_total,
            pct(self.round_success_rate())
        ));
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScoreError {
    #[error("transcript {id}: script: {source}")]
    Script {
        id: String,
        #[source]
        source: ScriptError,
    },
    #[error("transcript {id} step {step}: reference cannot be computed: {reason}")]
    Gold { id: String, step: usize, reason: String },
}

fn normalize(text: &str) -> String {
    text.replace("\r\n", "\n").trim_end_matches('\n').to_string()
}

pub fn transcript_script(t: &TranscriptRecord) -> Result<GameScript, ScoreError> {
    parse_rephrased(&t.script_text).map_err(|source| ScoreError::Script {
        id: t.id.clone(),
        source,
    })
}

struct RoundScore {
    cells: BTreeMap<&'static str, Cell>,
    success: bool,
    failures: Vec<StateFailure>,
}

/// Reference states: `refs[i]` is the engine's state for step `i`.
fn references(t: &TranscriptRecord, script: &GameScript, mode: Mode) -> Result<Vec<GameState>, ScoreError> {
    let gold = |step: usize, reason: String| ScoreError::Gold {
        id: t.id.clone(),
        step,
        reason,
    };
    let mut refs: Vec<GameState> = Vec::with_capacity(t.steps.len());
    for (i, step) in t.steps.iter().enumerate() {
        let state = if i == 0 && step.prev_state.is_empty() {
            init_round_at(script, t.seed, &t.stacks, t.button).map_err(|e| gold(i, e.to_string()))?
        } else {
            let prev = match mode {
                Mode::FreeRunning if i > 0 => refs[i - 1].clone(),
                _ => parse_state(&normalize(&step.prev_state), script).map_err(|e| gold(i, e.to_string()))?,
            };
            let input = if step.input.trim().is_empty() {
                None
            } else {
                Some(parse_input(step.input.trim()).map_err(|e| gold(i, e.to_string()))?)
            };
            next_state(&prev, input.as_ref(), script).map_err(|e| gold(i, e.to_string()))?
        };
        refs.push(state);
    }
    Ok(refs)
}

fn score_one(t: &TranscriptRecord, mode: Mode) -> Result<RoundScore, ScoreError> {
    let script = transcript_script(t)?;
    let refs = references(t, &script, mode)?;
    let mut cells: BTreeMap<&'static str, Cell> = BTreeMap::new();
    let mut failures = Vec::new();
    for (i, step) in t.steps.iter().enumerate() {
        let prev = if i == 0 && step.prev_state.is_empty() {
            None
        } else if mode == Mode::FreeRunning && i > 0 {
            Some(refs[i - 1].clone())
        } else {
            parse_state(&normalize(&step.prev_state), &script).ok()
        };
        let function = attribute_function(prev.as_ref(), &refs[i]);
        let expected = serialize_state(&refs[i]);
        let actual = normalize(&step.predicted);
        let cell = cells.entry(function).or_default();
        cell.total += 1;
        if expected == actual {
            cell.correct += 1;
        } else {
            failures.push(StateFailure {
                id: t.id.clone(),
                step: i,
                function: function.to_string(),
                diff: diff_states(&expected, &actual)
                    .into_iter()
                    .map(|d| DiffLine {
                        key: d.key,
                        expected: d.expected,
                        actual: d.actual,
                    })
                    .collect(),
            });
        }
    }
    Ok(RoundScore {
        success: failures.is_empty(),
        cells,
        failures,
    })
}

/// Scores every transcript; a pure function of its input.
pub fn score(transcripts: &[TranscriptRecord], mode: Mode) -> Result<EvalReport, ScoreError> {
    let rounds: Vec<RoundScore> = transcripts
        .par_iter()
        .map(|t| score_one(t, mode))
        .collect::<Result<_, _>>()?;
    let mut cells: BTreeMap<String, Cell> = FUNCTIONS.iter().map(|f| (f.to_string(), Cell::default())).collect();
    let mut failures = Vec::new();
    let mut success = 0;
    for r in rounds {
        for (f, c) in r.cells {
            let cell = cells.entry(f.to_string()).or_default();
            cell.correct += c.correct;
            cell.total += c.total;
        }
        success += r.success as u64;
        failures.extend(r.failures);
    }
    let accs: Vec<f64> = cells.values().filter_map(Cell::accuracy).collect();
    Ok(EvalReport {
        mode,
        macro_accuracy: (!accs.is_empty()).then(|| accs.iter().sum::<f64>() / accs.len() as f64),
        cells,
        rounds_success: success,
        rounds_total: transcripts.len() as u64,
        failures,
    })
}

/// Replaces each transcript's predictions with those in `preds`; missing steps become empty.
pub fn apply_predictions(gold: &[TranscriptRecord], preds: &[PredictionRecord]) -> Vec<TranscriptRecord> {
    let mut by_key: BTreeMap<(&str, usize), &str> = BTreeMap::new();
    for p in preds {
        by_key.insert((p.id.as_str(), p.step), p.predicted.as_str());
    }
    gold.iter()
        .map(|t| {
            let mut t = t.clone();
            for (i, s) in t.steps.iter_mut().enumerate() {
                s.predicted = by_key.get(&(t.id.as_str(), i)).map(|p| p.to_string()).unwrap_or_default();
            }
            t
        })
        .collect()
}

/// Oracle transcript of a finished round: every prediction is the engine's state.
pub fn transcript_of(
    id: String,
    variant: &str,
    script_text: String,
    seed: u64,
    stacks: Vec<u64>,
    round: &Round,
) -> TranscriptRecord {
    let first = &round.states[0];
    let mut steps = vec![Step {
        prev_state: String::new(),
        input: String::new(),
        predicted: serialize_state(first),
    }];
    for (i, input) in round.inputs.iter().enumerate() {
        steps.push(Step {
            prev_state: serialize_state(&round.states[i]),
            input: input.as_ref().map(serialize_input).unwrap_or_default(),
            predicted: serialize_state(&round.states[i + 1]),
        });
    }
    TranscriptRecord {
        id,
        variant: variant.to_string(),
        script_text,
        seed,
        stacks,
        button: first.button,
        steps,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationKind {
    /// A visible card replaced by one that is not in the deck.
    CardHallucination,
    /// A card dropped from a hole, community or stack line.
    CardOmission,
    /// One chip added to a player's committed bet.
    ChipOffByOne,
    /// A prompt sent to the wrong player.
    MessageMisaddress,
}

impl MutationKind {
    pub const ALL: [MutationKind; 4] = [
        MutationKind::CardHallucination,
        MutationKind::CardOmission,
        MutationKind::ChipOffByOne,
        MutationKind::MessageMisaddress,
    ];

    /// Functions whose states this kind may corrupt; `None` means any.
    pub fn targets(self) -> Option<&'static [&'static str]> {
        match self {
            MutationKind::CardHallucination | MutationKind::CardOmission => Some(&["deal", "flop", "switch"]),
            MutationKind::ChipOffByOne => Some(&["blind", "bet", "prize"]),
            MutationKind::MessageMisaddress => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MutationKind::CardHallucination => "card-hallucination",
            MutationKind::CardOmission => "card-omission",
            MutationKind::ChipOffByOne => "chip-off-by-one",
            MutationKind::MessageMisaddress => "message-misaddress",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Where a defect was injected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Defect {
    pub id: String,
    pub step: usize,
    pub kind: MutationKind,
    pub function: String,
}

fn card_tokens(text: &str, prefixes: &[&str]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (li, line) in text.split('\n').enumerate() {
        if !prefixes.iter().any(|p| line.starts_with(p)) {
            continue;
        }
        let fields: Vec<&str> = line.split('|').collect();
        let skip = if line.starts_with("|hole|") { 3 } else { 2 };
        for fi in skip..fields.len() {
            if fields[fi].parse::<idge_core::Card>().is_ok() {
                out.push((li, fi));
            }
        }
    }
    out
}

fn edit_line(text: &str, li: usize, f: impl FnOnce(&mut Vec<String>)) -> String {
    let mut lines: Vec<String> = text.split('\n').map(String::from).collect();
    let mut fields: Vec<String> = lines[li].split('|').map(String::from).collect();
    f(&mut fields);
    lines[li] = fields.join("|");
    lines.join("\n")
}

/// Applies `kind` to one state text; `None` when the state offers no target.
pub fn mutate(text: &str, kind: MutationKind, rng: &mut SplitMix64) -> Option<String> {
    let pick = |rng: &mut SplitMix64, n: usize| rng.below(n as u64) as usize;
    match kind {
        MutationKind::CardHallucination | MutationKind::CardOmission => {
            let prefixes: &[&str] = if kind == MutationKind::CardOmission {
                &["|hole|", "|community|", "|stack|"]
            } else {
                &["|hole|", "|community|"]
            };
            let tokens = card_tokens(text, prefixes);
            if tokens.is_empty() {
                return None;
            }
            let (li, fi) = tokens[pick(rng, tokens.len())];
            Some(edit_line(text, li, |fields| {
                if kind == MutationKind::CardOmission {
                    fields.remove(fi);
                } else {
                    let suit = fields[fi].chars().next().unwrap_or('H');
                    fields[fi] = format!("{suit}{}", 90 + rng.below(9));
                }
            }))
        }
        MutationKind::ChipOffByOne => {
            let li = text.split('\n').position(|l| l.starts_with("|chip|"))?;
            let line = text.split('\n').nth(li)?;
            let entries = line.split('|').count() - 2;
            if entries == 0 {
                return None;
            }
            let fi = 2 + pick(rng, entries);
            Some(edit_line(text, li, |fields| {
                let entry = &fields[fi];
                if let Some((name, rest)) = entry.split_once(": ") {
                    if let Some((bet, tail)) = rest.split_once('/') {
                        if let Ok(b) = bet.parse::<u64>() {
                            fields[fi] = format!("{name}: {}/{tail}", b + 1);
                        }
                    }
                }
            }))
        }
        MutationKind::MessageMisaddress => {
            let players = text
                .split('\n')
                .find(|l| l.starts_with("|chip|"))
                .map_or(0, |l| l.split('|').count() - 2);
            let li = text
                .split('\n')
                .position(|l| l.starts_with("|message|engine|p"))?;
            if players < 2 {
                return None;
            }
            Some(edit_line(text, li, |fields| {
                let current: usize = fields[3][1..].parse().unwrap_or(1);
                let shift = 1 + pick(rng, players - 1);
                fields[3] = format!("p{}", (current - 1 + shift) % players + 1);
            }))
        }
    }
}

/// Copies of `transcripts` with `per_round` injected defects each, plus their positions.
///
/// Kinds cycle across rounds. Only steps whose function is a target of the
/// kind are eligible; a round without an eligible step stays clean.
pub fn make_mutation_suite(
    transcripts: &[TranscriptRecord],
    kinds: &[MutationKind],
    per_round: usize,
    seed: u64,
) -> Result<(Vec<TranscriptRecord>, Vec<Defect>), ScoreError> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(transcripts.len());
    let mut defects = Vec::new();
    for (ti, t) in transcripts.iter().enumerate() {
        let mut t = t.clone();
        if per_round == 0 || kinds.is_empty() {
            out.push(t);
            continue;
        }
        let script = transcript_script(&t)?;
        let refs = references(&t, &script, Mode::TeacherForced)?;
        let functions: Vec<&'static str> = (0..refs.len())
            .map(|i| attribute_function(if i == 0 { None } else { Some(&refs[i - 1]) }, &refs[i]))
            .collect();
        let mut rr = rng.fork(ti as u64);
        let mut used = vec![false; t.steps.len()];
        for k in 0..per_round {
            let kind = kinds[(ti + k) % kinds.len()];
            let eligible: Vec<usize> = (0..t.steps.len())
                .filter(|&i| !used[i])
                .filter(|&i| kind.targets().map_or(true, |ts| ts.contains(&functions[i])))
                .collect();
            let mut order = eligible;
            rr.shuffle(&mut order);
            for i in order {
                if let Some(m) = mutate(&t.steps[i].predicted, kind, &mut rr) {
                    if m != t.steps[i].predicted {
                        t.steps[i].predicted = m;
                        used[i] = true;
                        defects.push(Defect {
                            id: t.id.clone(),
                            step: i,
                            kind,
                            function: functions[i].to_string(),
                        });
                        break;
                    }
                }
            }
        }
        out.push(t);
    }
    Ok((out, defects))
}

#[cfg(test)]
mod tests {
    use super::*;
    use idge_core::engine::random_round;
    use idge_core::script::serialize_script;
    use idge_core::variants::STANDARD;

    fn oracle_transcripts(n: u64) -> Vec<TranscriptRecord> {
        let mut out = Vec::new();
        for b in STANDARD {
            let s = b.script();
            for seed in 0..n {
                let r = random_round(&s, seed, 1000).unwrap();
                let stacks = vec![1000; s.num_players as usize];
                out.push(transcript_of(format!("{}-{seed}", b.id), b.id, serialize_script(&s), seed, stacks, &r));
            }
        }
        out
    }

    #[test]
    fn oracle_scores_perfectly() {
        let ts = oracle_transcripts(3);
        let r = score(&ts, Mode::TeacherForced).unwrap();
        assert_eq!(r.rounds_success, r.rounds_total);
        for f in FUNCTIONS {
            let c = r.cell(f);
            assert_eq!(c.correct, c.total, "{f}");
            assert!(c.total > 0, "{f} never seen");
        }
        assert_eq!(score(&ts, Mode::FreeRunning).unwrap().cells, r.cells);
    }

    #[test]
    fn mutations_hit_only_their_targets() {
        let ts = oracle_transcripts(2);
        for kind in MutationKind::ALL {
            let (m, defects) = make_mutation_suite(&ts, &[kind], 1, 9).unwrap();
            assert_eq!(defects.len(), ts.len(), "{kind:?}");
            let r = score(&m, Mode::TeacherForced).unwrap();
            assert_eq!(r.rounds_success, 0);
            let hit: std::collections::BTreeSet<&str> = defects.iter().map(|d| d.function.as_str()).collect();
            for f in FUNCTIONS {
                let c = r.cell(f);
                if !hit.contains(f) {
                    assert_eq!(c.correct, c.total, "{kind:?} touched {f}");
                }
            }
            assert_eq!(r.failures.len(), defects.len());
        }
    }

    #[test]
    fn zero_rate_is_identity() {
        let ts = oracle_transcripts(1);
        let (m, d) = make_mutation_suite(&ts, &MutationKind::ALL, 0, 1).unwrap();
        assert_eq!(m, ts);
        assert!(d.is_empty());
    }

    #[test]
    fn attribution_labels() {
        let ts = oracle_transcripts(1);
        let s = STANDARD[0].script();
        let r = random_round(&s, 0, 1000).unwrap();
        assert_eq!(attribute_function(None, &r.states[0]), "start");
        assert_eq!(attribute_function(Some(&r.states[0]), &r.states[1]), "blind");
        assert_eq!(attribute_function(Some(&r.states[r.states.len() - 2]), r.states.last().unwrap()), "prize");
        assert!(!ts.is_empty());
    }

    #[test]
    fn shuffled_stack_blames_only_that_state() {
        let mut ts = oracle_transcripts(1);
        let t = &mut ts[0];
        // Break the deal step's stack order the way a language model might.
        let i = 2;
        let lines: Vec<String> = t.steps[i]
            .predicted
            .split('\n')
            .map(|l| {
                if let Some(rest) = l.strip_prefix("|stack|") {
                    let mut cards: Vec<&str> = rest.split('|').collect();
                    cards.reverse();
                    format!("|stack|{}", cards.join("|"))
                } else {
                    l.to_string()
                }
            })
            .collect();
        t.steps[i].predicted = lines.join("\n");
        let r = score(&ts, Mode::TeacherForced).unwrap();
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.failures[0].step, i);
        assert_eq!(r.failures[0].function, "deal");
        assert_eq!(r.failures[0].diff.len(), 1);
        assert_eq!(r.failures[0].diff[0].key, "stack");
    }
}
