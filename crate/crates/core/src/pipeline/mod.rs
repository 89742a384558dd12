//! Two-stage orchestration: ingest, coupling screen on daily bars, lead-lag
//! analysis of the passed pairs on intraday bars, reports and plot data.
//!
//! Every run lives in `output_dir/run_id/`:
//!
//! | file | contents |
//! |------|----------|
//! | `stage1.csv` | coupling results, then skip rows |
//! | `stage2.csv` | ranked lead-lag rows for every granularity |
//! | `stage2_skips.csv` | pairs that could not be analyzed |
//! | `exclusions_<g>.csv` | symbols dropped at ingestion |
//! | `run_metadata.json` | config echo, digest, timing, analyzed pairs |
//! | `checkpoint_stage{1,2}.log` | resume logs |
//! | `top<N>_<g>.csv`, `cascades_<g>.csv`, `industry_<g>.csv`, ... | reports |
//! | `plots/` | plot data |

pub mod cascade;
pub mod checkpoint;
pub mod config;
pub mod industry;
pub mod ingest;
pub mod plots;
pub mod report;
pub mod stage2;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use self::checkpoint::{CheckpointHeader, CheckpointLog, RunLock, Stage};
use self::config::{ConfigError, MarketMode, PipelineConfig};
use self::ingest::{ingest, write_exclusions};
use self::stage2::{
    analyze_pair, rank_rows, read_stage2_csv, write_stage2_csv, write_stage2_skips, AnalysisParams, PairAnalysis,
    PairOutcome, PairReportRow, Stage2Skip,
};
use crate::coupling::{self, finalize, pair_keys, read_stage1_csv, write_stage1_csv, PairEvaluation, Screening, SkipRecord};
use crate::series::barcsv::read_bars;
use crate::series::{
    compute_returns_with, BarSeries, Granularity, ReturnSeries, SeriesError, SessionPolicy,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("data directory {0} does not exist")]
    MissingDirectory(String),
    #[error("stage-1 output {0} not found; run `stage1` (or `run`) first")]
    Stage1Missing(String),
    #[error("checkpoint was written under config digest {checkpoint}, live config has {live}; rerun without --resume or restore the original config")]
    DigestMismatch { checkpoint: String, live: String },
    #[error("run directory is locked by process {pid} ({path})")]
    Locked { path: String, pid: u32 },
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("malformed industry map: {0}")]
    MalformedMap(String),
    #[error("bad input data: {0}")]
    Data(String),
    #[error("run halted after {completed} units at the requested stopping point")]
    Interrupted { completed: usize },
    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl PipelineError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn csv(e: csv::Error) -> Self {
        PipelineError::Csv(e.to_string())
    }

    /// 1 usage or config, 2 data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::DigestMismatch { .. } => 1,
            PipelineError::MissingDirectory(_)
            | PipelineError::Stage1Missing(_)
            | PipelineError::Locked { .. }
            | PipelineError::CorruptCheckpoint(_)
            | PipelineError::MalformedMap(_)
            | PipelineError::Data(_) => 2,
            PipelineError::Interrupted { .. }
            | PipelineError::Io { .. }
            | PipelineError::Csv(_)
            | PipelineError::Internal(_) => 3,
        }
    }
}

impl From<SeriesError> for PipelineError {
    fn from(e: SeriesError) -> Self {
        PipelineError::Data(e.to_string())
    }
}

/// Writes through a temporary sibling and renames, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| PipelineError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| PipelineError::io(path, e))
}

pub const STAGE1_FILE: &str = "stage1.csv";
pub const STAGE2_FILE: &str = "stage2.csv";
pub const STAGE2_SKIPS_FILE: &str = "stage2_skips.csv";
pub const METADATA_FILE: &str = "run_metadata.json";

/// Per-invocation controls that are not part of the config digest.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunControl {
    /// Continue from the checkpoint log instead of starting over.
    pub resume: bool,
    /// Stop (as if killed) once this many units have completed in this
    /// invocation, after checkpointing them.
    pub halt_after: Option<usize>,
    /// Seed of the synthetic fixture, echoed into metadata.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage1Meta {
    pub symbols: usize,
    pub excluded: usize,
    pub pairs_total: usize,
    pub evaluated: usize,
    pub skipped: usize,
    pub passed: usize,
    pub dtw_max: f64,
    pub resumed_units: usize,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GranularityMeta {
    pub granularity: Granularity,
    pub symbols: usize,
    pub excluded: usize,
    pub rows: usize,
    pub skips: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage2Meta {
    /// Distinct `(a, b)` pairs for which analysis units ran.
    pub analyzed_pairs: Vec<(String, String)>,
    pub units: usize,
    pub resumed_units: usize,
    pub granularities: Vec<GranularityMeta>,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub run_id: String,
    pub config_digest: String,
    pub config: PipelineConfig,
    pub seed: Option<u64>,
    pub dtw_max: Option<f64>,
    pub stage1: Option<Stage1Meta>,
    pub stage2: Option<Stage2Meta>,
}

impl RunMetadata {
    fn load_or_new(cfg: &PipelineConfig, ctl: &RunControl) -> Self {
        let path = cfg.run_dir().join(METADATA_FILE);
        let fresh = || RunMetadata {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            run_id: cfg.run_id.clone(),
            config_digest: cfg.digest(),
            config: cfg.clone(),
            seed: ctl.seed,
            dtw_max: None,
            stage1: None,
            stage2: None,
        };
        let mut meta = fs::read_to_string(&path)
            .ok()
            .and_then(|t| serde_json::from_str::<RunMetadata>(&t).ok())
            .filter(|m| m.config_digest == cfg.digest())
            .unwrap_or_else(fresh);
        meta.config = cfg.clone();
        if ctl.seed.is_some() {
            meta.seed = ctl.seed;
        }
        meta
    }

    fn save(&self, run_dir: &Path) -> Result<(), PipelineError> {
        let text = serde_json::to_string_pretty(self).expect("metadata serializes");
        write_atomic(&run_dir.join(METADATA_FILE), text.as_bytes())
    }
}

pub fn read_metadata(run_dir: &Path) -> Result<RunMetadata, PipelineError> {
    let path = run_dir.join(METADATA_FILE);
    let text = fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, PipelineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PipelineError::Internal(e.to_string()))
}

fn prepare_run_dir(cfg: &PipelineConfig) -> Result<(PathBuf, RunLock), PipelineError> {
    let dir = cfg.run_dir();
    fs::create_dir_all(&dir).map_err(|e| PipelineError::io(&dir, e))?;
    let lock = RunLock::acquire(&dir)?;
    Ok((dir, lock))
}

fn session_policy(cfg: &PipelineConfig, g: Granularity) -> SessionPolicy {
    if g.is_intraday() && cfg.drop_session_gaps {
        SessionPolicy::DropBoundary
    } else {
        SessionPolicy::Include
    }
}

/// Returns per ingested symbol, or the reason they could not be computed.
pub fn universe_returns(
    cfg: &PipelineConfig,
    g: Granularity,
    series: &[BarSeries],
) -> BTreeMap<String, Result<ReturnSeries, String>> {
    let policy = session_policy(cfg, g);
    series
        .par_iter()
        .map(|s| {
            (
                s.symbol().to_string(),
                compute_returns_with(s, cfg.return_kind, policy).map_err(|e| e.to_string()),
            )
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

fn open_log<T: serde::de::DeserializeOwned>(
    cfg: &PipelineConfig,
    stage: Stage,
    ctl: &RunControl,
) -> Result<(CheckpointLog, Vec<T>), PipelineError> {
    let header = CheckpointHeader {
        run_id: cfg.run_id.clone(),
        stage,
        config_digest: cfg.digest(),
    };
    let path = cfg.run_dir().join(stage.file_name());
    if ctl.resume {
        CheckpointLog::resume(&path, &header)
    } else {
        Ok((CheckpointLog::create(&path, &header)?, Vec::new()))
    }
}

/// Runs `work` over `todo` in checkpointed batches on the current pool.
fn run_batches<K: Sync, R: Send + Serialize>(
    todo: &[K],
    batch: usize,
    log: &mut CheckpointLog,
    ctl: &RunControl,
    work: impl Fn(&K) -> R + Sync,
) -> Result<Vec<R>, PipelineError> {
    let mut out = Vec::with_capacity(todo.len());
    for chunk in todo.chunks(batch) {
        let results: Vec<R> = chunk.par_iter().map(&work).collect();
        log.append(&results)?;
        out.extend(results);
        if let Some(limit) = ctl.halt_after {
            if out.len() >= limit && out.len() < todo.len() {
                return Err(PipelineError::Interrupted { completed: out.len() });
            }
        }
    }
    Ok(out)
}

/// Stage 1: coupling screen over every pair of the daily universe.
pub fn run_stage1(cfg: &PipelineConfig, ctl: &RunControl) -> Result<Screening, PipelineError> {
    let started = Instant::now();
    let (dir, _lock) = prepare_run_dir(cfg)?;
    let report = ingest(&cfg.data_root, Granularity::Daily, &cfg.universe)?;
    write_exclusions(&dir.join("exclusions_daily.csv"), &report.excluded)?;
    let returns = universe_returns(cfg, Granularity::Daily, &report.series);
    let keys = pair_keys(&report.symbols());
    if keys.is_empty() {
        log::warn!("daily universe has {} symbols; stage 1 has no pairs", report.series.len());
    }
    let params = cfg.screen_params();

    let (mut log, previous): (_, Vec<PairEvaluation>) = open_log(cfg, Stage::Coupling, ctl)?;
    let mut done: BTreeMap<(String, String), PairEvaluation> = BTreeMap::new();
    for e in previous {
        let (a, b) = e.symbols();
        done.insert((a.to_string(), b.to_string()), e);
    }
    let resumed = done.len();
    let todo: Vec<&(String, String)> = keys.iter().filter(|k| !done.contains_key(*k)).collect();
    let evaluate = |(a, b): &&(String, String)| match (&returns[a], &returns[b]) {
        (Ok(ra), Ok(rb)) => coupling::evaluate_pair(ra, rb, &params),
        (Err(e), _) | (_, Err(e)) => PairEvaluation::Skipped(SkipRecord {
            symbol_a: a.clone(),
            symbol_b: b.clone(),
            reason: format!("{}: {e}", if returns[a].is_err() { a } else { b }),
        }),
    };
    let fresh = pool(cfg.workers)?.install(|| run_batches(&todo, cfg.checkpoint_batch, &mut log, ctl, evaluate))?;
    for e in fresh {
        let (a, b) = e.symbols();
        done.insert((a.to_string(), b.to_string()), e);
    }
    let evaluations: Vec<PairEvaluation> = keys.iter().filter_map(|k| done.remove(k)).collect();
    let screening = finalize(evaluations, &params.weights, params.threshold);

    let mut buf = Vec::new();
    write_stage1_csv(&screening, &mut buf).map_err(|e| PipelineError::Csv(e.to_string()))?;
    write_atomic(&dir.join(STAGE1_FILE), &buf)?;

    let mut meta = RunMetadata::load_or_new(cfg, ctl);
    meta.dtw_max = Some(screening.dtw_max);
    meta.stage1 = Some(Stage1Meta {
        symbols: report.series.len(),
        excluded: report.excluded.len(),
        pairs_total: keys.len(),
        evaluated: screening.results.len(),
        skipped: screening.skips.len(),
        passed: screening.passed().count(),
        dtw_max: screening.dtw_max,
        resumed_units: resumed,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    });
    meta.stage2 = None;
    meta.save(&dir)?;
    Ok(screening)
}

pub fn read_stage1(cfg: &PipelineConfig) -> Result<Screening, PipelineError> {
    let path = cfg.run_dir().join(STAGE1_FILE);
    let bytes = fs::read(&path).map_err(|_| PipelineError::Stage1Missing(path.display().to_string()))?;
    read_stage1_csv(bytes.as_slice()).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))
}

/// Equal-weighted cross-sectional mean return at every timestamp where at
/// least one member has a return.
pub fn equal_weight_market(g: Granularity, members: &[&ReturnSeries]) -> Result<ReturnSeries, PipelineError> {
    let mut acc: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
    for r in members {
        for (&t, &v) in r.timestamps().iter().zip(r.values()) {
            let e = acc.entry(t).or_default();
            e.0 += v;
            e.1 += 1;
        }
    }
    let kind = members.first().map(|r| r.kind()).unwrap_or_default();
    let (ts, vals): (Vec<i64>, Vec<f64>) = acc.into_iter().map(|(t, (s, c))| (t, s / c as f64)).unzip();
    Ok(ReturnSeries::new("MARKET", g, kind, ts, vals)?)
}

fn market_series(
    cfg: &PipelineConfig,
    g: Granularity,
    returns: &BTreeMap<String, Result<ReturnSeries, String>>,
) -> Result<ReturnSeries, PipelineError> {
    match &cfg.market {
        MarketMode::EqualWeight => {
            let members: Vec<&ReturnSeries> = returns.values().filter_map(|r| r.as_ref().ok()).collect();
            equal_weight_market(g, &members)
        }
        MarketMode::IndexFile { path } => {
            let path = PathBuf::from(path.to_string_lossy().replace("{granularity}", g.label()));
            let bytes = fs::read(&path).map_err(|e| PipelineError::io(&path, e))?;
            let bars = read_bars("MARKET", g, bytes.as_slice())
                .map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
            Ok(compute_returns_with(&bars, cfg.return_kind, session_policy(cfg, g))?)
        }
    }
}

pub fn analysis_params(cfg: &PipelineConfig, g: Granularity) -> AnalysisParams {
    AnalysisParams {
        granularity: g,
        max_lag: cfg.lag.max_lag.get(g),
        search: cfg.lag.search,
        max_order: cfg.granger.max_order,
        significance: cfg.granger.significance,
        min_obs: cfg.min_obs.for_granularity(g),
    }
}

/// Ingested returns and market series of one granularity.
pub struct GranularityData {
    pub granularity: Granularity,
    pub returns: BTreeMap<String, Result<ReturnSeries, String>>,
    pub market: ReturnSeries,
    pub excluded: usize,
}

pub fn load_granularity(cfg: &PipelineConfig, g: Granularity, exclusions_dir: Option<&Path>) -> Result<GranularityData, PipelineError> {
    let report = ingest(&cfg.data_root, g, &cfg.universe)?;
    if let Some(dir) = exclusions_dir {
        write_exclusions(&dir.join(format!("exclusions_{}.csv", g.label())), &report.excluded)?;
    }
    let returns = universe_returns(cfg, g, &report.series);
    let market = market_series(cfg, g, &returns)?;
    Ok(GranularityData {
        granularity: g,
        returns,
        market,
        excluded: report.excluded.len(),
    })
}

impl GranularityData {
    /// Analysis of the unordered pair `(a, b)`, or the reason it was skipped.
    pub fn analyze(&self, cfg: &PipelineConfig, a: &str, b: &str) -> Result<PairAnalysis, String> {
        let get = |s: &str| match self.returns.get(s) {
            Some(Ok(r)) => Ok(r),
            Some(Err(e)) => Err(format!("{s}: {e}")),
            None => Err(format!("{s} is not in the {} universe", self.granularity.label())),
        };
        let (ra, rb) = (get(a)?, get(b)?);
        analyze_pair(ra, rb, &self.market, &analysis_params(cfg, self.granularity)).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Stage2Record {
    granularity: Granularity,
    symbol_a: String,
    symbol_b: String,
    outcome: PairOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage2Output {
    pub rows: Vec<PairReportRow>,
    pub skips: Vec<Stage2Skip>,
}

/// Stage 2: lead-lag analysis of every stage-1 passed pair at each
/// configured intraday granularity.
pub fn run_stage2(cfg: &PipelineConfig, ctl: &RunControl) -> Result<Stage2Output, PipelineError> {
    let started = Instant::now();
    let screening = read_stage1(cfg)?;
    let (dir, _lock) = prepare_run_dir(cfg)?;
    let mut passed: Vec<(String, String)> = screening
        .passed()
        .map(|r| (r.symbol_a.clone(), r.symbol_b.clone()))
        .collect();
    passed.sort();

    let data: Vec<GranularityData> = cfg
        .granularities
        .iter()
        .map(|&g| load_granularity(cfg, g, Some(&dir)))
        .collect::<Result<_, _>>()?;

    let (mut log, previous): (_, Vec<Stage2Record>) = open_log(cfg, Stage::Lag, ctl)?;
    let key = |r: &Stage2Record| (r.granularity, r.symbol_a.clone(), r.symbol_b.clone());
    let mut done: BTreeMap<(Granularity, String, String), Stage2Record> =
        previous.into_iter().map(|r| (key(&r), r)).collect();
    let resumed = done.len();
    let units: Vec<(usize, &(String, String))> =
        (0..data.len()).flat_map(|gi| passed.iter().map(move |p| (gi, p))).collect();
    let todo: Vec<&(usize, &(String, String))> = units
        .iter()
        .filter(|(gi, (a, b))| !done.contains_key(&(data[*gi].granularity, a.clone(), b.clone())))
        .collect();
    let work = |&&(gi, (a, b)): &&(usize, &(String, String))| {
        let d = &data[gi];
        let outcome = match d.analyze(cfg, a, b) {
            Ok(analysis) => PairOutcome::Row(Box::new(analysis.row)),
            Err(reason) => PairOutcome::Skipped(Stage2Skip {
                granularity: d.granularity,
                symbol_a: a.clone(),
                symbol_b: b.clone(),
                reason,
            }),
        };
        Stage2Record {
            granularity: d.granularity,
            symbol_a: a.clone(),
            symbol_b: b.clone(),
            outcome,
        }
    };
    let fresh = pool(cfg.workers)?.install(|| run_batches(&todo, cfg.checkpoint_batch, &mut log, ctl, work))?;
    for r in fresh {
        done.insert(key(&r), r);
    }

    let mut rows = Vec::new();
    let mut skips = Vec::new();
    let mut analyzed: BTreeSet<(String, String)> = BTreeSet::new();
    for (gi, (a, b)) in &units {
        let k = (data[*gi].granularity, a.clone(), b.clone());
        let rec = done.remove(&k).ok_or_else(|| PipelineError::Internal(format!("unit {k:?} missing")))?;
        analyzed.insert((a.clone(), b.clone()));
        match rec.outcome {
            PairOutcome::Row(r) => rows.push(*r),
            PairOutcome::Skipped(s) => skips.push(s),
        }
    }
    rank_rows(&mut rows, cfg.granger.significance);

    let mut buf = Vec::new();
    write_stage2_csv(&rows, &mut buf)?;
    write_atomic(&dir.join(STAGE2_FILE), &buf)?;
    let mut buf = Vec::new();
    write_stage2_skips(&skips, &mut buf)?;
    write_atomic(&dir.join(STAGE2_SKIPS_FILE), &buf)?;

    let mut meta = RunMetadata::load_or_new(cfg, ctl);
    meta.dtw_max = Some(screening.dtw_max);
    meta.stage2 = Some(Stage2Meta {
        analyzed_pairs: analyzed.into_iter().collect(),
        units: units.len(),
        resumed_units: resumed,
        granularities: data
            .iter()
            .map(|d| GranularityMeta {
                granularity: d.granularity,
                symbols: d.returns.len(),
                excluded: d.excluded,
                rows: rows.iter().filter(|r| r.granularity == d.granularity).count(),
                skips: skips.iter().filter(|s| s.granularity == d.granularity).count(),
            })
            .collect(),
        elapsed_seconds: started.elapsed().as_secs_f64(),
    });
    meta.save(&dir)?;
    Ok(Stage2Output { rows, skips })
}

/// Both stages back to back.
pub fn run_all(cfg: &PipelineConfig, ctl: &RunControl) -> Result<(Screening, Stage2Output), PipelineError> {
    let s1 = run_stage1(cfg, ctl)?;
    let s2 = run_stage2(cfg, ctl)?;
    Ok((s1, s2))
}

pub fn read_stage2(cfg: &PipelineConfig) -> Result<Vec<PairReportRow>, PipelineError> {
    let path = cfg.run_dir().join(STAGE2_FILE);
    let bytes = fs::read(&path).map_err(|e| PipelineError::io(&path, e))?;
    read_stage2_csv(bytes.as_slice())
}

/// Re-analyzes the top `limit` confirmed rows of each granularity and
/// writes their plot data under `run_dir/plots/`.
pub fn run_plots(cfg: &PipelineConfig, limit: usize) -> Result<Vec<PathBuf>, PipelineError> {
    let rows = read_stage2(cfg)?;
    let out_dir = cfg.run_dir().join("plots");
    let mut files = Vec::new();
    for &g in &cfg.granularities {
        let chosen = report::top_rows(&rows, g, limit);
        if chosen.is_empty() {
            continue;
        }
        let data = load_granularity(cfg, g, None)?;
        for row in chosen {
            let (a, b) = if row.leader < row.follower {
                (&row.leader, &row.follower)
            } else {
                (&row.follower, &row.leader)
            };
            let analysis = data.analyze(cfg, a, b).map_err(PipelineError::Data)?;
            if analysis.row.leader != row.leader || analysis.row.optimal_lag != row.optimal_lag {
                return Err(PipelineError::Data(format!(
                    "{} -> {}: data changed since stage 2 ran",
                    row.leader, row.follower
                )));
            }
            files.extend(plots::emit_plot_data(&analysis, cfg.report.rolling_window, &out_dir)?);
        }
    }
    Ok(files)
}
