//! `foxcover` command line: one verb per report, JSON on stdout.
//!
//! Every run prints a single JSON document embedding the mode, library
//! version, seed, and the verbatim input configuration, followed by the
//! mode's payload fields.  Diagnostics go to stderr (level set by the
//! `FOXCOVER_LOG` environment variable).  Exit codes: 0 on success, 2 on
//! any input or configuration violation, 1 on an internal invariant
//! failure.

use std::fs;
use std::io::{self, Write};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::debug;
use serde::Serialize;
use serde_json::Value;

use foxcover::btz::{self, VerificationConfig};
use foxcover::cover::{parse_config, ConfigError};
use foxcover::fiber::classify_fiber;
use foxcover::homotopy::{almost_homotopic, HomotopyError, PathWord};
use foxcover::{CapSettings, CoverError, CoverSpec, CoverSystem, FiberSize, FiberVerdict, PunctureConfig, Word};

#[derive(Parser)]
#[command(name = "foxcover", version = foxcover::VERSION, about = "Fibers, deck actions, and Galois verdicts of branched coverings; BTZ developing-map verification")]
struct Cli {
    #[command(subcommand)]
    mode: Mode,
}

#[derive(Subcommand)]
enum Mode {
    /// Fiber report: level sizes, bonding-fiber sequence, verdict, threads.
    Fiber(CoverArgs),
    /// Classification only: the bonding-fiber sequence and its verdict.
    Classify(CoverArgs),
    /// Fiber report extended with the Galois verdict and deck-orbit counts.
    GaloisCheck(CoverArgs),
    /// Compare two paths into the distinguished point at every level.
    AlmostHomotopic(AlmostArgs),
    /// Seeded numeric verification of the developing-map geometry.
    BtzVerify(BtzArgs),
}

#[derive(Args)]
struct CoverArgs {
    /// Configuration JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Truncation depth (number of disc levels).
    #[arg(long, default_value_t = 6)]
    depth: usize,
    /// Word-length cap for universal-cover levels.
    #[arg(long, default_value_t = CapSettings::default().word_length_cap)]
    cap: usize,
    /// Seed recorded in the report (these verbs are deterministic).
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Pretty-print the report.
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct AlmostArgs {
    /// Configuration JSON file.
    #[arg(long)]
    config: PathBuf,
    /// First word, a JSON array of nonzero signed generator indices, e.g. [3].
    #[arg(long)]
    w1: String,
    /// Second word, same format, e.g. [3,7].
    #[arg(long)]
    w2: String,
    /// Truncation depth (number of disc levels).
    #[arg(long, default_value_t = 6)]
    depth: usize,
    /// Seed recorded in the report (this verb is deterministic).
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Pretty-print the report.
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct BtzArgs {
    /// Number of sample points for the round-trip and equivariance sweeps.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// PRNG seed for the sample sweep.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Pretty-print the report.
    #[arg(long)]
    pretty: bool,
}

/// Input-side failures; every variant maps to exit code 2.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error("--{flag}: {source}")]
    WordFlag {
        flag: &'static str,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FOXCOVER_LOG")).init();
    let cli = Cli::parse();
    // Input violations exit 2 with a diagnostic; a panic past input
    // validation is an internal invariant failure and exits 1.
    match panic::catch_unwind(AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
        Err(_) => {
            eprintln!("error: internal invariant failure (panic message above)");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.mode {
        Mode::Fiber(args) => {
            let (cfg, spec, raw) = load_config(&args.config)?;
            let (sys, caps) = build(&cfg, &spec, &args)?;
            let report = sys.fiber_report(&caps)?;
            emit("fiber", args.seed, Some(raw), &report, args.pretty);
        }
        Mode::Classify(args) => {
            let (cfg, spec, raw) = load_config(&args.config)?;
            let (sys, caps) = build(&cfg, &spec, &args)?;
            let n_sequence = sys.bond_sizes(&caps)?;
            let classification = classify_fiber(&n_sequence);
            let report = ClassifyPayload {
                depth: sys.depth(),
                n_sequence,
                verdict: classification.verdict,
                stationary_from: classification.stationary_from,
            };
            emit("classify", args.seed, Some(raw), &report, args.pretty);
        }
        Mode::GaloisCheck(args) => {
            let (cfg, spec, raw) = load_config(&args.config)?;
            let (sys, caps) = build(&cfg, &spec, &args)?;
            let report = sys.galois_report(&caps)?;
            emit("galois-check", args.seed, Some(raw), &report, args.pretty);
        }
        Mode::AlmostHomotopic(args) => {
            let (cfg, _, raw) = load_config(&args.config)?;
            let w1 = parse_word("w1", &args.w1)?;
            let w2 = parse_word("w2", &args.w2)?;
            let verdict = almost_homotopic(
                &PathWord::to_limit(w1.clone()),
                &PathWord::to_limit(w2.clone()),
                &cfg,
                args.depth,
            )?;
            debug!(
                "almost-homotopy at depth {}: separating level {:?}",
                verdict.checked_depth, verdict.separating_level
            );
            let report = AlmostPayload {
                w1,
                w2,
                // Words agreeing through every checked level are equivalent
                // up to the full depth; a separation at level n leaves
                // agreement on the n−1 levels before it.
                equivalent_up_to_depth: match verdict.separating_level {
                    None => verdict.checked_depth,
                    Some(level) => level - 1,
                },
                separating_level: verdict.separating_level,
            };
            emit("almost-homotopic", args.seed, Some(raw), &report, args.pretty);
        }
        Mode::BtzVerify(args) => {
            let config = VerificationConfig {
                samples: args.samples,
                seed: args.seed,
                ..VerificationConfig::default()
            };
            debug!("running developing-map suite: {} samples", args.samples);
            let report = btz::run_verification(&config);
            emit("btz-verify", args.seed, None, &report, args.pretty);
        }
    }
    Ok(())
}

fn load_config(path: &Path) -> Result<(PunctureConfig, CoverSpec, Value), CliError> {
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: shown.clone(),
        source,
    })?;
    let (cfg, spec) = parse_config(&text).map_err(|source| CliError::Config {
        path: shown,
        source,
    })?;
    debug!(
        "parsed config: {} punctures, accumulating = {}",
        cfg.puncture_count(),
        cfg.accumulating()
    );
    let raw = serde_json::from_str(&text).expect("parse_config accepted this text");
    Ok((cfg, spec, raw))
}

fn build(
    cfg: &PunctureConfig,
    spec: &CoverSpec,
    args: &CoverArgs,
) -> Result<(CoverSystem, CapSettings), CliError> {
    let caps = CapSettings {
        word_length_cap: args.cap,
        ..CapSettings::default()
    };
    let sys = CoverSystem::build(cfg, spec, args.depth, caps.word_length_cap)?;
    debug!("built system: depth {}, level sizes {:?}", sys.depth(), sys.level_sizes());
    Ok((sys, caps))
}

fn parse_word(flag: &'static str, text: &str) -> Result<Word, CliError> {
    serde_json::from_str(text).map_err(|source| CliError::WordFlag { flag, source })
}

#[derive(Serialize)]
struct ClassifyPayload {
    depth: usize,
    n_sequence: Vec<FiberSize>,
    verdict: FiberVerdict,
    stationary_from: Option<usize>,
}

#[derive(Serialize)]
struct AlmostPayload {
    w1: Word,
    w2: Word,
    equivalent_up_to_depth: usize,
    separating_level: Option<usize>,
}

/// Prints the report envelope: mode, version, seed, and verbatim config,
/// merged with the payload's own fields at the top level.
fn emit<T: Serialize>(mode: &str, seed: u64, config: Option<Value>, payload: &T, pretty: bool) {
    let mut doc = serde_json::Map::new();
    doc.insert("mode".into(), mode.into());
    doc.insert("version".into(), foxcover::VERSION.into());
    doc.insert("seed".into(), seed.into());
    doc.insert("config".into(), config.unwrap_or(Value::Null));
    let Value::Object(fields) = serde_json::to_value(payload).expect("payloads serialize") else {
        unreachable!("every payload is a JSON object");
    };
    // A payload field of the same name (the suite's own seed) replaces the
    // envelope's copy; the two always agree.
    doc.extend(fields);
    let doc = Value::Object(doc);
    let text = if pretty {
        serde_json::to_string_pretty(&doc)
    } else {
        serde_json::to_string(&doc)
    }
    .expect("JSON reports serialize");
    if let Err(err) = writeln!(io::stdout().lock(), "{text}") {
        // A reader that closes the pipe early (`… | head`) is not a failure;
        // exit quietly like any filter.  Anything else on stdout is.
        if err.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        panic!("cannot write the report to stdout: {err}");
    }
}
