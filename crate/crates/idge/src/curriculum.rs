//! Three-stage training corpus: core functions, standard samples, rephrased samples.

use std::path::{Path, PathBuf};

use idge_core::coreset;
use idge_core::rephrase::{rephrase_script, RephraseConfig};
use idge_core::rng::SplitMix64;
use rayon::prelude::*;
use serde::Serialize;

use crate::datagen::{play, round_seed, GenConfig, RoundLog, Variant};
use crate::error::DataError;
use crate::records::{write_jsonl, CoreRecord, NspRecord};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurriculumConfig {
    pub warmup: usize,
    pub standard: usize,
    pub diverse_rephrased: usize,
    pub diverse_structured: usize,
    pub seed: u64,
    /// Share of standard-stage records whose script is written fully in template sentences.
    pub natural_fraction: f64,
    /// Per-element rephrasing probability in the diverse stage.
    pub element_prob: f64,
    /// Probability of rephrasing every element of a diverse-stage script.
    pub whole_prob: f64,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        Self {
            warmup: 1_000,
            standard: 10_000,
            diverse_rephrased: 1_000,
            diverse_structured: 1_000,
            seed: 0,
            natural_fraction: 0.5,
            element_prob: 0.5,
            whole_prob: 0.05,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Curriculum {
    pub warmup: Vec<CoreRecord>,
    pub standard: Vec<NspRecord>,
    pub diverse: Vec<NspRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurriculumFiles {
    pub warmup: PathBuf,
    pub standard: PathBuf,
    pub diverse: PathBuf,
}

/// True for the positions `i` that a Bresenham walk at rate `f` marks.
fn marked(i: usize, f: f64) -> bool {
    ((i + 1) as f64 * f).floor() > (i as f64 * f).floor()
}

fn warmup(n: usize, seed: u64) -> Result<Vec<CoreRecord>, DataError> {
    let ids: Vec<&str> = coreset::functions().into_iter().map(|(id, _)| id).collect();
    let mut base = SplitMix64::new(seed);
    let mut rngs: Vec<SplitMix64> = (0..ids.len() as u64).map(|i| base.fork(i)).collect();
    (0..n)
        .map(|i| {
            let f = i % ids.len();
            let s = coreset::generate(ids[f], &mut rngs[f])?;
            Ok(CoreRecord {
                stage: Some("warmup".into()),
                function: s.function,
                instruction: s.instruction,
                input: s.input,
                output: s.output,
            })
        })
        .collect()
}

/// Plays rounds in index order until `n` samples exist; `form` turns a round into samples.
fn samples_from_rounds<F>(
    variants: &[Variant],
    seed: u64,
    n: usize,
    mut form: F,
) -> Result<Vec<NspRecord>, DataError>
where
    F: FnMut(&RoundLog) -> Result<Vec<NspRecord>, DataError>,
{
    const BATCH: u64 = 256;
    let cfg = GenConfig::new(0, seed);
    let mut out = Vec::with_capacity(n);
    let mut next = 0u64;
    while out.len() < n {
        let logs: Vec<RoundLog> = (next..next + BATCH)
            .into_par_iter()
            .map(|i| play(variants, &cfg, i))
            .collect::<Result<_, _>>()?;
        next += BATCH;
        for log in &logs {
            out.extend(form(log)?);
            if out.len() >= n {
                break;
            }
        }
    }
    out.truncate(n);
    Ok(out)
}

fn rephrased(log: &RoundLog, element_prob: f64, whole_prob: f64, form: &str) -> Result<Vec<NspRecord>, DataError> {
    let cfg = RephraseConfig::new(round_seed(log.seed, 1), element_prob, whole_prob).map_err(|e| DataError::Script {
        id: log.variant.clone(),
        source: e,
    })?;
    Ok(log.samples_with(&rephrase_script(&log.script, &cfg), form))
}

fn tag(mut v: Vec<NspRecord>, stage: &str) -> Vec<NspRecord> {
    for r in &mut v {
        r.stage = Some(stage.to_string());
    }
    v
}

pub fn build_curriculum(variants: &[Variant], cfg: &CurriculumConfig) -> Result<Curriculum, DataError> {
    if variants.is_empty() {
        return Err(DataError::Config("no scripts".into()));
    }
    if !(0.0..=1.0).contains(&cfg.natural_fraction) {
        return Err(DataError::Config(format!("natural fraction {} outside [0, 1]", cfg.natural_fraction)));
    }
    RephraseConfig::new(0, cfg.element_prob, cfg.whole_prob).map_err(|e| DataError::Config(e.to_string()))?;

    let warmup = warmup(cfg.warmup, cfg.seed)?;

    // Natural scripts are decided per round, so the record-level ratio is
    // enforced by walking the structured and natural streams side by side.
    let n_natural = (0..cfg.standard).filter(|&i| marked(i, cfg.natural_fraction)).count();
    let s_seed = round_seed(cfg.seed, 0x5354);
    let natural = samples_from_rounds(variants, round_seed(s_seed, 1), n_natural, |l| {
        rephrased(l, 1.0, 0.0, "natural")
    })?;
    let structured = samples_from_rounds(variants, round_seed(s_seed, 2), cfg.standard - n_natural, |l| {
        Ok(l.samples())
    })?;
    let (mut nat, mut st) = (natural.into_iter(), structured.into_iter());
    let standard = (0..cfg.standard)
        .map(|i| {
            if marked(i, cfg.natural_fraction) {
                nat.next()
            } else {
                st.next()
            }
        })
        .map(|r| r.expect("stream sized by the same walk"))
        .collect();

    let d_seed = round_seed(cfg.seed, 0x4456);
    let reph = samples_from_rounds(variants, round_seed(d_seed, 1), cfg.diverse_rephrased, |l| {
        rephrased(l, cfg.element_prob, cfg.whole_prob, "rephrased")
    })?;
    let plain = samples_from_rounds(variants, round_seed(d_seed, 2), cfg.diverse_structured, |l| Ok(l.samples()))?;
    let total = cfg.diverse_rephrased + cfg.diverse_structured;
    let rate = if total == 0 { 0.0 } else { cfg.diverse_rephrased as f64 / total as f64 };
    let (mut a, mut b) = (reph.into_iter(), plain.into_iter());
    let diverse = (0..total)
        .map(|i| if marked(i, rate) { a.next() } else { b.next() })
        .map(|r| r.expect("stream sized by the same walk"))
        .collect();

    Ok(Curriculum {
        warmup,
        standard: tag(standard, "standard"),
        diverse: tag(diverse, "diverse"),
    })
}

/// Builds and writes `warmup.jsonl`, `standard.jsonl` and `diverse.jsonl` under `dir`.
pub fn emit_curriculum(variants: &[Variant], cfg: &CurriculumConfig, dir: &Path) -> Result<CurriculumFiles, DataError> {
    let c = build_curriculum(variants, cfg)?;
    let files = CurriculumFiles {
        warmup: dir.join("warmup.jsonl"),
        standard: dir.join("standard.jsonl"),
        diverse: dir.join("diverse.jsonl"),
    };
    write_jsonl(&files.warmup, &c.warmup)?;
    write_jsonl(&files.standard, &c.standard)?;
    write_jsonl(&files.diverse, &c.diverse)?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{verify_core, verify_nsp};

    fn small() -> CurriculumConfig {
        CurriculumConfig {
            warmup: 80,
            standard: 300,
            diverse_rephrased: 60,
            diverse_structured: 40,
            seed: 9,
            ..Default::default()
        }
    }

    #[test]
    fn sizes_tags_and_forms() {
        let c = build_curriculum(&Variant::standard(), &small()).unwrap();
        assert_eq!((c.warmup.len(), c.standard.len(), c.diverse.len()), (80, 300, 100));
        assert!(c.warmup.iter().all(|r| r.stage.as_deref() == Some("warmup")));
        assert!(c.standard.iter().all(|r| r.stage.as_deref() == Some("standard")));
        let natural = c.standard.iter().filter(|r| r.meta.script_form == "natural").count();
        assert_eq!(natural, 150);
        let reph = c.diverse.iter().filter(|r| r.meta.script_form == "rephrased").count();
        assert_eq!(reph, 60);
    }

    #[test]
    fn every_record_verifies() {
        let c = build_curriculum(&Variant::standard(), &small()).unwrap();
        for r in &c.warmup {
            verify_core(r).unwrap();
        }
        for r in c.standard.iter().chain(&c.diverse) {
            verify_nsp(r).unwrap_or_else(|e| panic!("{e}\n{}", r.script_text));
        }
    }

    #[test]
    fn natural_scripts_have_no_structured_lines() {
        let c = build_curriculum(&Variant::standard(), &small()).unwrap();
        let r = c.standard.iter().find(|r| r.meta.script_form == "natural").unwrap();
        assert!(!r.script_text.contains("Number of players:"), "{}", r.script_text);
    }

    #[test]
    fn bresenham_marks_the_exact_share() {
        assert_eq!((0..10_000).filter(|&i| marked(i, 0.5)).count(), 5_000);
        assert_eq!((0..7).filter(|&i| marked(i, 0.0)).count(), 0);
        assert_eq!((0..7).filter(|&i| marked(i, 1.0)).count(), 7);
    }
}
