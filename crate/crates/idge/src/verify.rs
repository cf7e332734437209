//! Oracle-consistency checks for stored records.

use std::collections::BTreeMap;
use std::path::Path;

use idge_core::coreset;
use idge_core::engine::next_state;
use idge_core::rephrase::parse_rephrased;
use idge_core::statelang::{parse_input, parse_state, serialize_state};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::error::IoError;
use crate::harness::{score, Mode};
use crate::records::{read_values, CoreRecord, NspRecord, TranscriptRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Nsp,
    Core,
    Transcript,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyFailure {
    /// 1-based line number.
    pub line: usize,
    pub kind: RecordKind,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub records: usize,
    pub by_kind: BTreeMap<String, usize>,
    pub failures: Vec<VerifyFailure>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Recomputes a sample's next state from its script, previous state and input.
pub fn verify_nsp(r: &NspRecord) -> Result<(), String> {
    let script = parse_rephrased(&r.script_text).map_err(|e| format!("script: {e}"))?;
    let prev = parse_state(&r.prev_state, &script).map_err(|e| format!("prev state: {e}"))?;
    if serialize_state(&prev) != r.prev_state {
        return Err("prev state is not canonical".into());
    }
    let input = if r.input.is_empty() {
        None
    } else {
        Some(parse_input(&r.input).map_err(|e| format!("input: {e}"))?)
    };
    let next = next_state(&prev, input.as_ref(), &script).map_err(|e| format!("engine: {e}"))?;
    let text = serialize_state(&next);
    if text != r.next_state {
        return Err(format!("next state differs from the engine's:\n{text}"));
    }
    Ok(())
}

pub fn verify_core(r: &CoreRecord) -> Result<(), String> {
    coreset::verify(&coreset::CoreSample {
        function: r.function.clone(),
        instruction: r.instruction.clone(),
        input: r.input.clone(),
        output: r.output.clone(),
    })
    .map_err(|e| e.to_string())
}

/// A transcript whose predictions all match the engine.
pub fn verify_transcript(t: &TranscriptRecord) -> Result<(), String> {
    let r = score(std::slice::from_ref(t), Mode::TeacherForced).map_err(|e| e.to_string())?;
    match r.failures.first() {
        None => Ok(()),
        Some(f) => Err(format!("step {} ({}) differs from the engine", f.step, f.function)),
    }
}

pub fn kind_of(v: &Value) -> RecordKind {
    let has = |k: &str| v.get(k).is_some();
    if has("steps") {
        RecordKind::Transcript
    } else if has("instruction") {
        RecordKind::Core
    } else if has("next_state") {
        RecordKind::Nsp
    } else {
        RecordKind::Unknown
    }
}

fn check(v: Value) -> (RecordKind, Result<(), String>) {
    let kind = kind_of(&v);
    let result = match kind {
        RecordKind::Nsp => serde_json::from_value::<NspRecord>(v)
            .map_err(|e| e.to_string())
            .and_then(|r| verify_nsp(&r)),
        RecordKind::Core => serde_json::from_value::<CoreRecord>(v)
            .map_err(|e| e.to_string())
            .and_then(|r| verify_core(&r)),
        RecordKind::Transcript => serde_json::from_value::<TranscriptRecord>(v)
            .map_err(|e| e.to_string())
            .and_then(|r| verify_transcript(&r)),
        RecordKind::Unknown => Err("unrecognized record".into()),
    };
    (kind, result)
}

pub fn verify_values(values: Vec<Value>) -> VerifyReport {
    let results: Vec<(RecordKind, Result<(), String>)> = values.into_par_iter().map(check).collect();
    let mut report = VerifyReport {
        records: results.len(),
        ..Default::default()
    };
    for (i, (kind, r)) in results.into_iter().enumerate() {
        let name = serde_json::to_value(kind)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        *report.by_kind.entry(name).or_default() += 1;
        if let Err(reason) = r {
            report.failures.push(VerifyFailure {
                line: i + 1,
                kind,
                reason,
            });
        }
    }
    report
}

/// Checks every record of a JSONL file. Blank lines are skipped and not counted.
pub fn verify_file(path: &Path) -> Result<VerifyReport, IoError> {
    Ok(verify_values(read_values(path)?))
}
