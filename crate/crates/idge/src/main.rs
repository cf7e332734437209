use std::error::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use idge::curriculum::{emit_curriculum, CurriculumConfig};
use idge::datagen::{categories, frequency_ratio, generate_rounds, histogram, BalanceSpec, GenConfig, RoundLog, Variant};
use idge::harness::{apply_predictions, make_mutation_suite, score, EvalReport, Mode, MutationKind};
use idge::records::{read_jsonl, write_jsonl, CoreRecord, PredictionRecord, TranscriptRecord};
use idge::service::{self, AppState};
use idge::{oracle, stats, verify};
use idge_core::coreset::generate_core_set;
use idge_core::rephrase::parse_rephrased;
use idge_core::variants;

type Res<T> = Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "idge", version, about = "Scriptable poker engine: corpora, verification, scoring and a game server")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate rounds and write next-state samples.
    Generate {
        /// Comma-separated bundled script ids or script files; all ten standard variants by default.
        #[arg(long, value_delimiter = ',')]
        scripts: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        rounds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `uniform`, or a JSON balance spec file.
        #[arg(long)]
        balance: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the rounds as transcripts.
        #[arg(long)]
        transcripts: Option<PathBuf>,
        /// Keep every script exactly as written.
        #[arg(long)]
        no_jitter: bool,
    },
    /// Write core-function samples for all 40 functions.
    Coreset {
        #[arg(long, default_value_t = 25)]
        per_function: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the warmup, standard and diverse training stages.
    Curriculum {
        #[arg(long, value_delimiter = ',')]
        scripts: Vec<String>,
        #[arg(long, default_value_t = 1_000)]
        warmup: usize,
        #[arg(long, default_value_t = 10_000)]
        standard: usize,
        #[arg(long, default_value_t = 1_000)]
        diverse_rephrased: usize,
        #[arg(long, default_value_t = 1_000)]
        diverse_structured: usize,
        #[arg(long, default_value_t = 0.5)]
        natural_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a sample file.
    Stats {
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Re-derive every record with the engine; exits 1 on any mismatch.
    Verify {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Simulate rounds and write them as gold transcripts.
    Transcripts {
        #[arg(long, value_delimiter = ',')]
        scripts: Vec<String>,
        #[arg(long, default_value_t = 100)]
        rounds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predicted states against the engine.
    Score {
        /// Transcript file; its `predicted` fields are scored unless --pred is given.
        #[arg(long)]
        gold: PathBuf,
        /// Prediction records (`id`, `step`, `predicted`) or transcripts whose
        /// `predicted` fields replace the gold ones.
        #[arg(long)]
        pred: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        report: ReportFormat,
        /// Chain references from the engine's own states instead of the recorded ones.
        #[arg(long)]
        free_running: bool,
        /// Failed states to dump in table mode.
        #[arg(long, default_value_t = 10)]
        diffs: usize,
    },
    /// Inject known defects into transcripts.
    Mutate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Defect positions as JSONL.
        #[arg(long)]
        defects: Option<PathBuf>,
        /// Comma-separated kinds; all by default.
        #[arg(long, value_delimiter = ',')]
        kinds: Vec<String>,
        #[arg(long, default_value_t = 1)]
        per_round: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare the evaluator with a brute-force reference.
    Oracle {
        #[arg(long, default_value_t = 1667)]
        hands_per_case: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the game server.
    Serve {
        #[arg(long, env = service::BIND_ENV, default_value = service::DEFAULT_BIND)]
        bind: String,
        /// Session logs live here; in-memory only when unset.
        #[arg(long, env = service::DATA_DIR_ENV)]
        data_dir: Option<PathBuf>,
    },
}

fn load_variants(specs: &[String]) -> Res<Vec<Variant>> {
    if specs.is_empty() {
        return Ok(Variant::standard());
    }
    specs
        .iter()
        .map(|s| {
            if variants::find(s).is_some() {
                return Ok(Variant::bundled(s)?);
            }
            let path = Path::new(s);
            let text = std::fs::read_to_string(path).map_err(|e| format!("{s}: not a bundled script id and {e}"))?;
            let script = parse_rephrased(&text).map_err(|e| format!("{s}: {e}"))?;
            let id = path.file_stem().map_or(s.clone(), |x| x.to_string_lossy().into_owned());
            Ok(Variant::new(id, script))
        })
        .collect()
}

fn balance_spec(arg: &str, variants: &[Variant]) -> Res<BalanceSpec> {
    if arg != "uniform" {
        let text = std::fs::read_to_string(arg).map_err(|e| format!("{arg}: {e}"))?;
        return Ok(serde_json::from_str(&text).map_err(|e| format!("{arg}: {e}"))?);
    }
    let mut cats: Vec<String> = Vec::new();
    for v in variants {
        for c in categories(&v.script) {
            if !cats.contains(&c) {
                cats.push(c);
            }
        }
    }
    let mut spec = BalanceSpec::uniform(&variants[0].script);
    let w = 1.0 / cats.len() as f64;
    spec.weights = cats.into_iter().map(|c| (c, w)).collect();
    Ok(spec)
}

fn print_report(r: &EvalReport, format: ReportFormat, diffs: usize) -> Res<()> {
    match format {
        ReportFormat::Json => println!("{}", serde_json::to_string_pretty(r)?),
        ReportFormat::Table => {
            print!("{}", r.table());
            for f in r.failures.iter().take(diffs) {
                println!("\n{} step {} ({})", f.id, f.step, f.function);
                for d in &f.diff {
                    println!("  - {}", d.expected.as_deref().unwrap_or("(missing)"));
                    println!("  + {}", d.actual.as_deref().unwrap_or("(missing)"));
                }
            }
            if r.failures.len() > diffs {
                println!("\n... {} more failed states", r.failures.len() - diffs);
            }
        }
    }
    Ok(())
}

fn run(cmd: Cmd) -> Res<ExitCode> {
    match cmd {
        Cmd::Generate {
            scripts,
            rounds,
            seed,
            balance,
            out,
            transcripts,
            no_jitter,
        } => {
            let variants = load_variants(&scripts)?;
            let mut cfg = GenConfig::new(rounds, seed);
            cfg.jitter = !no_jitter;
            let spec = balance.as_deref().map(|b| balance_spec(b, &variants)).transpose()?;
            let logs = generate_rounds(&variants, &cfg, spec.as_ref())?;
            let n = write_jsonl(&out, logs.iter().flat_map(RoundLog::samples))?;
            if let Some(t) = transcripts {
                write_jsonl(&t, logs.iter().map(RoundLog::transcript))?;
            }
            let hist = histogram(&logs);
            eprintln!("{} rounds, {n} samples -> {}", logs.len(), out.display());
            for (c, k) in &hist {
                eprintln!("  {c}: {k}");
            }
            if let Some(spec) = &spec {
                let cats: Vec<String> = spec.weights.iter().map(|(c, _)| c.clone()).collect();
                eprintln!("max/min category ratio: {:.2}", frequency_ratio(&hist, &cats));
            }
        }
        Cmd::Coreset { per_function, seed, out } => {
            let samples = generate_core_set(per_function, seed)?;
            let n = write_jsonl(
                &out,
                samples.into_iter().map(|s| CoreRecord {
                    stage: None,
                    function: s.function,
                    instruction: s.instruction,
                    input: s.input,
                    output: s.output,
                }),
            )?;
            eprintln!("{n} core samples -> {}", out.display());
        }
        Cmd::Curriculum {
            scripts,
            warmup,
            standard,
            diverse_rephrased,
            diverse_structured,
            natural_fraction,
            seed,
            out,
        } => {
            let cfg = CurriculumConfig {
                warmup,
                standard,
                diverse_rephrased,
                diverse_structured,
                natural_fraction,
                seed,
                ..Default::default()
            };
            let files = emit_curriculum(&load_variants(&scripts)?, &cfg, &out)?;
            println!("{}", serde_json::to_string_pretty(&files)?);
        }
        Cmd::Stats { path, json } => {
            let r = stats::stats_file(&path)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                println!("samples: {}", r.samples);
                if r.other_records > 0 {
                    println!("other records: {}", r.other_records);
                }
                println!("rounds: {}", r.rounds);
                println!("mean script tokens: {:.1}", r.mean_script_tokens);
                println!("mean state tokens: {:.1}", r.mean_state_tokens);
                println!("mean states per round: {:.2}", r.mean_states_per_round);
                println!("vocabulary: {}", r.vocab_size);
                for (title, map) in [("variants", &r.variants), ("script forms", &r.script_forms), ("categories", &r.categories)] {
                    println!("{title}:");
                    for (k, v) in map {
                        println!("  {k}: {v}");
                    }
                }
            }
        }
        Cmd::Verify { paths } => {
            let mut ok = true;
            for p in paths {
                let r = verify::verify_file(&p)?;
                println!("{}: {} records, {} failures", p.display(), r.records, r.failures.len());
                for f in r.failures.iter().take(20) {
                    println!("  line {} ({:?}): {}", f.line, f.kind, f.reason);
                }
                ok &= r.ok();
            }
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Cmd::Transcripts { scripts, rounds, seed, out } => {
            let logs = generate_rounds(&load_variants(&scripts)?, &GenConfig::new(rounds, seed), None)?;
            let n = write_jsonl(&out, logs.iter().map(RoundLog::transcript))?;
            eprintln!("{n} transcripts -> {}", out.display());
        }
        Cmd::Score {
            gold,
            pred,
            report,
            free_running,
            diffs,
        } => {
            let mut transcripts: Vec<TranscriptRecord> = read_jsonl(&gold)?;
            if let Some(p) = pred {
                transcripts = apply_predictions(&transcripts, &load_predictions(&p)?);
            }
            let mode = if free_running { Mode::FreeRunning } else { Mode::TeacherForced };
            print_report(&score(&transcripts, mode)?, report, diffs)?;
        }
        Cmd::Mutate {
            gold,
            out,
            defects,
            kinds,
            per_round,
            seed,
        } => {
            let kinds: Vec<MutationKind> = if kinds.is_empty() {
                MutationKind::ALL.to_vec()
            } else {
                kinds
                    .iter()
                    .map(|k| MutationKind::from_name(k).ok_or_else(|| format!("unknown mutation kind {k:?}")))
                    .collect::<Result<_, _>>()?
            };
            let transcripts: Vec<TranscriptRecord> = read_jsonl(&gold)?;
            let (mutated, found) = make_mutation_suite(&transcripts, &kinds, per_round, seed)?;
            write_jsonl(&out, &mutated)?;
            if let Some(d) = defects {
                write_jsonl(&d, &found)?;
            }
            eprintln!("{} defects in {} transcripts -> {}", found.len(), mutated.len(), out.display());
        }
        Cmd::Oracle { hands_per_case, seed } => {
            let r = oracle::check_equivalence(hands_per_case, seed);
            println!("{}", serde_json::to_string_pretty(&r)?);
            if !r.mismatches.is_empty() {
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::Serve { bind, data_dir } => {
            tracing_subscriber::fmt()
                .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
                .init();
            let app = match data_dir {
                Some(d) => AppState::open(d)?,
                None => AppState::in_memory(),
            };
            tokio::runtime::Runtime::new()?.block_on(service::serve(&bind, app))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_predictions(path: &Path) -> Result<Vec<PredictionRecord>, Box<dyn Error>> {
    let values = idge::records::read_values(path)?;
    if !values.first().is_some_and(|v| v.get("steps").is_some()) {
        return Ok(read_jsonl(path)?);
    }
    let mut out = Vec::new();
    for v in values {
        let t: TranscriptRecord = serde_json::from_value(v)?;
        out.extend(t.steps.into_iter().enumerate().map(|(step, s)| PredictionRecord {
            id: t.id.clone(),
            step,
            predicted: s.predicted,
        }));
    }
    Ok(out)
}
