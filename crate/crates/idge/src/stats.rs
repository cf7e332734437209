//! Corpus summary numbers.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use crate::error::IoError;
use crate::records::{read_values, NspRecord};
use crate::verify::{kind_of, RecordKind};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StatsReport {
    /// Next-state samples.
    pub samples: usize,
    /// Records of other kinds (core functions, transcripts).
    pub other_records: usize,
    pub rounds: usize,
    pub variants: BTreeMap<String, usize>,
    pub functions: BTreeMap<String, usize>,
    pub script_forms: BTreeMap<String, usize>,
    /// Whitespace tokens.
    pub mean_script_tokens: f64,
    pub mean_state_tokens: f64,
    /// Samples per round plus the initial state.
    pub mean_states_per_round: f64,
    /// Rounds per showdown category.
    pub categories: BTreeMap<String, usize>,
    /// Distinct whitespace tokens over scripts, states and inputs.
    pub vocab_size: usize,
}

fn tokens(s: &str) -> impl Iterator<Item = &str> {
    s.split_whitespace()
}

pub fn corpus_stats(records: &[NspRecord]) -> StatsReport {
    let mut r = StatsReport {
        samples: records.len(),
        ..Default::default()
    };
    if records.is_empty() {
        return r;
    }
    let mut per_round: BTreeMap<(&str, u64, u32), (usize, &str)> = BTreeMap::new();
    let mut vocab: BTreeSet<&str> = BTreeSet::new();
    let (mut script_tokens, mut state_tokens) = (0usize, 0usize);
    for rec in records {
        *r.variants.entry(rec.meta.variant.clone()).or_default() += 1;
        *r.functions.entry(rec.meta.function.clone()).or_default() += 1;
        *r.script_forms.entry(rec.meta.script_form.clone()).or_default() += 1;
        let e = per_round
            .entry((rec.meta.variant.as_str(), rec.meta.round, rec.meta.copy))
            .or_insert((0, rec.meta.category.as_str()));
        e.0 += 1;
        script_tokens += tokens(&rec.script_text).count();
        state_tokens += tokens(&rec.next_state).count();
        for t in tokens(&rec.script_text)
            .chain(tokens(&rec.prev_state))
            .chain(tokens(&rec.input))
            .chain(tokens(&rec.next_state))
        {
            vocab.insert(t);
        }
    }
    r.rounds = per_round.len();
    r.mean_script_tokens = script_tokens as f64 / records.len() as f64;
    r.mean_state_tokens = state_tokens as f64 / records.len() as f64;
    r.mean_states_per_round = per_round.values().map(|(n, _)| n + 1).sum::<usize>() as f64 / r.rounds as f64;
    for (_, cat) in per_round.values() {
        *r.categories.entry(cat.to_string()).or_default() += 1;
    }
    r.vocab_size = vocab.len();
    r
}

pub fn stats_file(path: &Path) -> Result<StatsReport, IoError> {
    let values = read_values(path)?;
    let mut nsp = Vec::new();
    let mut other = 0;
    for (i, v) in values.into_iter().enumerate() {
        if kind_of(&v) == RecordKind::Nsp {
            nsp.push(serde_json::from_value(v).map_err(|e| IoError::line(path, i + 1, e))?);
        } else {
            other += 1;
        }
    }
    let mut r = corpus_stats(&nsp);
    r.other_records = other;
    Ok(r)
}
