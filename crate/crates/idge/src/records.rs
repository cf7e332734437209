//! JSONL record types shared by the generators, the verifier, the harness and the service.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::IoError;

/// One next-state prediction sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NspRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    pub script_text: String,
    pub prev_state: String,
    /// Serialized player input, empty for engine-driven transitions.
    pub input: String,
    pub next_state: String,
    pub meta: NspMeta,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NspMeta {
    pub variant: String,
    /// Flow function that produced `next_state`.
    pub function: String,
    /// Showdown category of the whole round.
    pub category: String,
    pub seed: u64,
    /// Position of the round in its corpus.
    pub round: u64,
    pub step: u64,
    /// Up-sampled copies of a round count from 1.
    #[serde(default)]
    pub copy: u32,
    /// `structured`, `natural` or `rephrased`.
    #[serde(default = "structured")]
    pub script_form: String,
}

fn structured() -> String {
    "structured".into()
}

/// One core-function sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    pub function: String,
    pub instruction: String,
    pub input: String,
    pub output: String,
}

/// A whole round as (previous state, input, predicted next state) steps.
///
/// Step 0 has an empty `prev_state` and stands for the initial state, which
/// is rebuilt from `seed`, `stacks` and `button`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub id: String,
    pub variant: String,
    pub script_text: String,
    pub seed: u64,
    pub stacks: Vec<u64>,
    pub button: usize,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub prev_state: String,
    pub input: String,
    pub predicted: String,
}

/// A model's prediction for one transcript step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub step: usize,
    pub predicted: String,
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> Result<usize, IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| IoError::new(dir, e))?;
    }
    let file = File::create(path).map_err(|e| IoError::new(path, e))?;
    let mut w = BufWriter::new(file);
    let mut n = 0;
    for r in records {
        serde_json::to_writer(&mut w, &r).map_err(|e| IoError::new(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| IoError::new(path, e))?;
        n += 1;
    }
    w.flush().map_err(|e| IoError::new(path, e))?;
    Ok(n)
}

/// Raw JSON values, one per non-empty line.
pub fn read_values(path: &Path) -> Result<Vec<serde_json::Value>, IoError> {
    read_jsonl(path)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, IoError> {
    let file = File::open(path).map_err(|e| IoError::new(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| IoError::new(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(&line).map_err(|e| IoError::line(path, i + 1, e))?;
        out.push(v);
    }
    Ok(out)
}
