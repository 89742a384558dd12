//! Command-line front end. Exit codes: 0 success, 1 usage or config error,
//! 2 data error, 3 internal error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::pipeline::config::{load_config, PipelineConfig};
use crate::pipeline::ingest::ingest;
use crate::pipeline::report::run_report;
use crate::pipeline::{run_all, run_plots, run_stage1, run_stage2, PipelineError, RunControl};
use crate::series::{resample, Granularity};
use crate::synth::{generate, write_fixture, SynthError, SynthSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "leadlag", version, about = "Two-stage lead-lag detection: daily coupling screen, then intraday lag verification")]
pub struct Cli {
    /// Pipeline config (TOML).
    #[arg(long, global = true, env = "LEADLAG_CONFIG")]
    pub config: Option<PathBuf>,
    /// Continue from the run's checkpoint logs.
    #[arg(long, global = true)]
    pub resume: bool,
    /// Worker threads (overrides the config; 0 = all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Seed: overrides the synth spec seed; echoed into run metadata.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Stop after this many checkpointed units (simulates a crash).
    #[arg(long, global = true, hide = true)]
    pub halt_after: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic fixture from a spec file.
    Synth {
        /// Synth spec (TOML).
        #[arg(long)]
        spec: PathBuf,
        /// Fixture root; data_<granularity>_fixed/ directories go here.
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and filter the data directories, reporting exclusions.
    Ingest {
        /// Exit with status 2 if any file is malformed.
        #[arg(long)]
        validate: bool,
        /// Granularities to check (default: daily plus the configured ones).
        #[arg(long = "granularity")]
        granularities: Vec<Granularity>,
    },
    /// Coupling screen on daily bars.
    Stage1,
    /// Lead-lag analysis of the stage-1 passed pairs.
    Stage2,
    /// Stage 1 then stage 2.
    Run,
    /// Rankings, cascades, industry groups and comparison tables.
    Report,
    /// Plot data for the top confirmed pairs.
    Plots {
        /// Pairs per granularity (default: report.top_n).
        #[arg(long)]
        limit: Option<usize>,
    },
}

/// Synth spec file: the generator spec plus extra granularities to derive
/// from the generated bars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthFile {
    #[serde(default)]
    pub aggregate: Vec<Granularity>,
    pub spec: SynthSpec,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure {
            code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        let code = match e {
            SynthError::IoFailure { .. } => EXIT_INTERNAL,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn config(cli: &Cli) -> Result<PipelineConfig, Failure> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| usage("no config given: pass --config <file> or set LEADLAG_CONFIG"))?;
    let mut cfg = load_config(path).map_err(|e| Failure::from(PipelineError::from(e)))?;
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    Ok(cfg)
}

fn control(cli: &Cli) -> RunControl {
    RunControl {
        resume: cli.resume,
        halt_after: cli.halt_after,
        seed: cli.seed,
    }
}

fn synth(cli: &Cli, spec_path: &Path, out: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(spec_path).map_err(|e| usage(format!("{}: {e}", spec_path.display())))?;
    let mut file: SynthFile = toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", spec_path.display())))?;
    if let Some(seed) = cli.seed {
        file.spec.seed = seed;
    }
    let market = generate(&file.spec)?;
    let mut manifest = write_fixture(&market.bars, out, Some(file.spec.seed))?;
    for &g in &file.aggregate {
        let bars = market
            .bars
            .iter()
            .map(|b| resample(b, g))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| usage(format!("aggregate {g}: {e}")))?;
        manifest = write_fixture(&bars, out, Some(file.spec.seed))?;
    }
    let truth = serde_json::to_string_pretty(&market.truth).expect("truth serializes");
    let truth_path = out.join("truth.json");
    std::fs::write(&truth_path, truth).map_err(|e| Failure::from(PipelineError::io(&truth_path, e)))?;
    println!(
        "wrote {} files under {} (seed {}, {} planted links)",
        manifest.files.len(),
        out.display(),
        file.spec.seed,
        market.truth.len()
    );
    Ok(())
}

fn ingest_cmd(cli: &Cli, validate: bool, grans: &[Granularity]) -> Result<(), Failure> {
    let cfg = config(cli)?;
    let mut list = grans.to_vec();
    if list.is_empty() {
        list.push(Granularity::Daily);
        list.extend(&cfg.granularities);
    }
    let mut malformed = 0;
    for g in list {
        let r = ingest(&cfg.data_root, g, &cfg.universe)?;
        println!("{}: {} ingested, {} excluded", g, r.series.len(), r.excluded.len());
        for e in &r.excluded {
            println!("  {} {}: {}", e.symbol, e.reason.label(), e.detail);
        }
        for w in &r.warnings {
            println!("  warning: {w}");
        }
        malformed += r
            .excluded
            .iter()
            .filter(|e| e.reason == crate::pipeline::ingest::ExclusionReason::Malformed)
            .count();
    }
    if validate && malformed > 0 {
        return Err(Failure {
            code: EXIT_DATA,
            message: format!("{malformed} malformed file(s)"),
        });
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Synth { spec, out } => synth(cli, spec, out),
        Command::Ingest { validate, granularities } => ingest_cmd(cli, *validate, granularities),
        Command::Stage1 => {
            let cfg = config(cli)?;
            let s = run_stage1(&cfg, &control(cli))?;
            println!(
                "stage 1: {} pairs scored, {} skipped, {} passed -> {}",
                s.results.len(),
                s.skips.len(),
                s.passed().count(),
                cfg.run_dir().display()
            );
            Ok(())
        }
        Command::Stage2 => {
            let cfg = config(cli)?;
            let s = run_stage2(&cfg, &control(cli))?;
            println!("stage 2: {} rows, {} skips -> {}", s.rows.len(), s.skips.len(), cfg.run_dir().display());
            Ok(())
        }
        Command::Run => {
            let cfg = config(cli)?;
            let (s1, s2) = run_all(&cfg, &control(cli))?;
            println!(
                "stage 1: {} passed of {}; stage 2: {} rows, {} skips -> {}",
                s1.passed().count(),
                s1.results.len() + s1.skips.len(),
                s2.rows.len(),
                s2.skips.len(),
                cfg.run_dir().display()
            );
            Ok(())
        }
        Command::Report => {
            let cfg = config(cli)?;
            for f in run_report(&cfg)? {
                println!("{}", f.display());
            }
            Ok(())
        }
        Command::Plots { limit } => {
            let cfg = config(cli)?;
            let files = run_plots(&cfg, limit.unwrap_or(cfg.report.top_n))?;
            println!("{} plot files under {}", files.len(), cfg.run_dir().join("plots").display());
            Ok(())
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_and_version_succeed() {
        assert_eq!(main_with_args(["leadlag", "--help"]), EXIT_OK);
        assert_eq!(main_with_args(["leadlag", "--version"]), EXIT_OK);
    }

    #[test]
    fn bad_usage_is_one() {
        assert_eq!(main_with_args(["leadlag", "frobnicate"]), EXIT_USAGE);
        assert_eq!(main_with_args(["leadlag"]), EXIT_USAGE);
    }

    #[test]
    fn missing_config_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nope.toml");
        assert_eq!(main_with_args(["leadlag", "stage1", "--config", p.to_str().unwrap()]), EXIT_USAGE);
    }
}
