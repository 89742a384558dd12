//! Run configuration, stored as TOML.
//!
//! ```toml
//! data_root = "fixtures"            # required
//! output_dir = "out"
//! run_id = "default"
//! granularities = ["1min", "5min", "15min"]   # stage-2 granularities
//! return_kind = "log"               # or "simple"
//! drop_session_gaps = false
//! workers = 0                       # 0 = all cores
//! checkpoint_batch = 256
//!
//! [min_obs]
//! intraday = 100
//! daily = 60
//!
//! [coupling]
//! weights = [0.4, 0.3, 0.3]
//! threshold = 0.6
//! dtw_band_fraction = 0.1           # or dtw_band = 5 for a fixed width
//!
//! [lag]
//! search = "full_range"             # or "positive_only"
//! max_lag = { "1min" = 30, "5min" = 12, "15min" = 8, "daily" = 10 }
//!
//! [granger]
//! max_order = 5
//! significance = 0.05
//!
//! [market]
//! mode = "equal_weight"             # or mode = "index_file", path = "idx_{granularity}.csv"
//!
//! [universe]
//! min_listing_date = "2019-01-01"   # optional
//! max_halt_run = 20
//!
//! [report]
//! rolling_window = 60
//! top_n = 10
//! industry_map = "industries.csv"   # optional
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::coupling::{CouplingWeights, DtwBand, ScreenParams};
use crate::lagdetect::{default_max_lag, LagSearch};
use crate::series::{Granularity, ReturnKind};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid value for {key}: {message}")]
    Domain { key: String, message: String },
}

fn domain(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Domain {
        key: key.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinObs {
    #[serde(default = "d_min_obs_intraday")]
    pub intraday: usize,
    #[serde(default = "d_min_obs_daily")]
    pub daily: usize,
}

impl Default for MinObs {
    fn default() -> Self {
        Self {
            intraday: d_min_obs_intraday(),
            daily: d_min_obs_daily(),
        }
    }
}

impl MinObs {
    pub fn for_granularity(&self, g: Granularity) -> usize {
        if g.is_intraday() {
            self.intraday
        } else {
            self.daily
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    #[serde(default)]
    pub weights: CouplingWeights,
    #[serde(default = "d_threshold")]
    pub threshold: f64,
    #[serde(default = "d_band_fraction")]
    pub dtw_band_fraction: f64,
    /// Fixed band half-width; overrides the fraction when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dtw_band: Option<usize>,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            weights: CouplingWeights::default(),
            threshold: d_threshold(),
            dtw_band_fraction: d_band_fraction(),
            dtw_band: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxLag {
    #[serde(rename = "1min", default = "d_lag_1")]
    pub min1: usize,
    #[serde(rename = "5min", default = "d_lag_5")]
    pub min5: usize,
    #[serde(rename = "15min", default = "d_lag_15")]
    pub min15: usize,
    #[serde(default = "d_lag_daily")]
    pub daily: usize,
}

impl Default for MaxLag {
    fn default() -> Self {
        Self {
            min1: d_lag_1(),
            min5: d_lag_5(),
            min15: d_lag_15(),
            daily: d_lag_daily(),
        }
    }
}

impl MaxLag {
    pub fn get(&self, g: Granularity) -> usize {
        match g {
            Granularity::Min1 => self.min1,
            Granularity::Min5 => self.min5,
            Granularity::Min15 => self.min15,
            Granularity::Daily => self.daily,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagConfig {
    #[serde(default)]
    pub search: LagSearch,
    #[serde(default)]
    pub max_lag: MaxLag,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrangerConfig {
    #[serde(default = "d_max_order")]
    pub max_order: usize,
    #[serde(default = "d_significance")]
    pub significance: f64,
}

impl Default for GrangerConfig {
    fn default() -> Self {
        Self {
            max_order: d_max_order(),
            significance: d_significance(),
        }
    }
}

/// Source of the market return used as a control in the extended lag
/// regression.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarketMode {
    /// Cross-sectional mean return of the ingested universe per timestamp.
    #[default]
    EqualWeight,
    /// Bar file; `{granularity}` in the path is replaced by the label
    /// (`1min`, `5min`, ...).
    IndexFile { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniverseFilters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_listing_date: Option<NaiveDate>,
    #[serde(default = "d_halt_run")]
    pub max_halt_run: usize,
}

impl Default for UniverseFilters {
    fn default() -> Self {
        Self {
            min_listing_date: None,
            max_halt_run: d_halt_run(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    #[serde(default = "d_rolling")]
    pub rolling_window: usize,
    #[serde(default = "d_top_n")]
    pub top_n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub industry_map: Option<PathBuf>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            rolling_window: d_rolling(),
            top_n: d_top_n(),
            industry_map: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub data_root: PathBuf,
    #[serde(default = "d_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "d_run_id")]
    pub run_id: String,
    #[serde(default = "d_granularities")]
    pub granularities: Vec<Granularity>,
    #[serde(default)]
    pub return_kind: ReturnKind,
    #[serde(default)]
    pub drop_session_gaps: bool,
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "d_batch")]
    pub checkpoint_batch: usize,
    #[serde(default)]
    pub min_obs: MinObs,
    #[serde(default)]
    pub coupling: CouplingConfig,
    #[serde(default)]
    pub lag: LagConfig,
    #[serde(default)]
    pub granger: GrangerConfig,
    #[serde(default)]
    pub market: MarketMode,
    #[serde(default)]
    pub universe: UniverseFilters,
    #[serde(default)]
    pub report: ReportConfig,
}

fn d_min_obs_intraday() -> usize {
    100
}
fn d_min_obs_daily() -> usize {
    60
}
fn d_threshold() -> f64 {
    0.6
}
fn d_band_fraction() -> f64 {
    0.1
}
fn d_lag_1() -> usize {
    default_max_lag(Granularity::Min1)
}
fn d_lag_5() -> usize {
    default_max_lag(Granularity::Min5)
}
fn d_lag_15() -> usize {
    default_max_lag(Granularity::Min15)
}
fn d_lag_daily() -> usize {
    default_max_lag(Granularity::Daily)
}
fn d_max_order() -> usize {
    5
}
fn d_significance() -> f64 {
    0.05
}
fn d_halt_run() -> usize {
    20
}
fn d_rolling() -> usize {
    60
}
fn d_top_n() -> usize {
    10
}
fn d_output_dir() -> PathBuf {
    "output".into()
}
fn d_run_id() -> String {
    "default".into()
}
fn d_granularities() -> Vec<Granularity> {
    vec![Granularity::Min1, Granularity::Min5, Granularity::Min15]
}
fn d_batch() -> usize {
    256
}

impl PipelineConfig {
    /// All defaults around the given data root.
    pub fn new(data_root: impl Into<PathBuf>) -> Self {
        toml::from_str::<Self>(&format!("data_root = {:?}", "."))
            .map(|mut c| {
                c.data_root = data_root.into();
                c
            })
            .expect("defaults deserialize")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.run_id.is_empty() || self.run_id.contains(['/', '\\']) || self.run_id == ".." {
            return Err(domain("run_id", "must be a non-empty plain directory name"));
        }
        if self.granularities.is_empty() {
            return Err(domain("granularities", "at least one granularity is required"));
        }
        if self.granularities.contains(&Granularity::Daily) {
            return Err(domain("granularities", "stage-2 granularities must be intraday"));
        }
        let mut seen = self.granularities.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.granularities.len() {
            return Err(domain("granularities", "duplicate entry"));
        }
        if self.checkpoint_batch == 0 {
            return Err(domain("checkpoint_batch", "must be positive"));
        }
        if self.min_obs.intraday < 3 {
            return Err(domain("min_obs.intraday", "must be at least 3"));
        }
        if self.min_obs.daily < 3 {
            return Err(domain("min_obs.daily", "must be at least 3"));
        }
        let w = self.coupling.weights.as_array();
        CouplingWeights::new(w[0], w[1], w[2]).map_err(|e| domain("coupling.weights", e.to_string()))?;
        let t = self.coupling.threshold;
        if !(t.is_finite() && (-1.0..=1.0).contains(&t)) {
            return Err(domain("coupling.threshold", format!("{t} is outside [-1, 1]")));
        }
        let f = self.coupling.dtw_band_fraction;
        if !(f.is_finite() && f > 0.0 && f <= 1.0) {
            return Err(domain("coupling.dtw_band_fraction", format!("{f} is outside (0, 1]")));
        }
        for g in Granularity::ALL {
            if self.lag.max_lag.get(g) == 0 {
                return Err(domain(&format!("lag.max_lag.{}", g.label()), "must be at least 1"));
            }
        }
        if self.granger.max_order == 0 {
            return Err(domain("granger.max_order", "must be at least 1"));
        }
        let s = self.granger.significance;
        if !(s > 0.0 && s < 1.0) {
            return Err(domain("granger.significance", format!("{s} is outside (0, 1)")));
        }
        if self.universe.max_halt_run == 0 {
            return Err(domain("universe.max_halt_run", "must be at least 1"));
        }
        if self.report.rolling_window < 3 {
            return Err(domain("report.rolling_window", "must be at least 3"));
        }
        if self.report.top_n == 0 {
            return Err(domain("report.top_n", "must be at least 1"));
        }
        Ok(())
    }

    pub fn screen_params(&self) -> ScreenParams {
        ScreenParams {
            weights: self.coupling.weights,
            threshold: self.coupling.threshold,
            dtw_band: match self.coupling.dtw_band {
                Some(w) => DtwBand::Fixed(w),
                None => DtwBand::Fraction(self.coupling.dtw_band_fraction),
            },
            min_obs: self.min_obs.daily,
        }
    }

    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.join(&self.run_id)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Digest of every setting that can change results (all but `workers`).
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.workers = 0;
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data_root);
        fix(&mut self.output_dir);
        if let MarketMode::IndexFile { path } = &mut self.market {
            fix(path);
        }
        if let Some(p) = &mut self.report.industry_map {
            fix(p);
        }
    }
}

/// Parses and validates config text; relative paths stay as written.
pub fn parse_config(text: &str) -> Result<PipelineConfig, ConfigError> {
    let cfg: PipelineConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<PipelineConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let mut cfg = parse_config(&text)?;
    let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    cfg.resolve_paths(base);
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let c = parse_config("data_root = \"d\"").unwrap();
        assert_eq!(c, PipelineConfig::new("d"));
        assert_eq!(c.coupling.threshold, 0.6);
        assert_eq!(c.coupling.weights.as_array(), [0.4, 0.3, 0.3]);
        assert_eq!(c.lag.max_lag.get(Granularity::Min5), 12);
        assert_eq!(c.granger.max_order, 5);
        assert_eq!(c.universe.max_halt_run, 20);
        assert_eq!(c.universe.min_listing_date, None);
        assert_eq!(c.market, MarketMode::EqualWeight);
        assert_eq!(c.min_obs.intraday, 100);
    }

    #[test]
    fn threshold_out_of_range_names_key() {
        let e = parse_config("data_root = \"d\"\n[coupling]\nthreshold = 1.5\n").unwrap_err();
        match e {
            ConfigError::Domain { key, .. } => assert_eq!(key, "coupling.threshold"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(parse_config("data_root = \"d\"\ntreshold = 1\n"), Err(ConfigError::Parse(_))));
        assert!(matches!(
            parse_config("data_root = \"d\"\n[coupling]\ntreshold = 0.5\n"),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn round_trip() {
        let text = r#"
data_root = "x"
granularities = ["5min", "1min"]
return_kind = "simple"
workers = 3
[coupling]
weights = [0.5, 0.25, 0.25]
threshold = 0.55
dtw_band = 7
[lag]
search = "positive_only"
max_lag = { "1min" = 20 }
[market]
mode = "index_file"
path = "idx_{granularity}.csv"
[universe]
min_listing_date = "2019-01-01"
[report]
industry_map = "ind.csv"
"#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.lag.max_lag.min1, 20);
        assert_eq!(c.lag.max_lag.min5, 12);
        let again = parse_config(&c.to_toml()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.digest(), c.digest());
    }

    #[test]
    fn digest_ignores_workers_only() {
        let a = PipelineConfig::new("d");
        let mut b = a.clone();
        b.workers = 8;
        assert_eq!(a.digest(), b.digest());
        b.coupling.threshold = 0.5;
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "data_root = \"data\"\n").unwrap();
        let c = load_config(&p).unwrap();
        assert_eq!(c.data_root, dir.path().join("data"));
        assert_eq!(c.output_dir, dir.path().join("output"));
    }
}
