//! Time-series primitives: bars, returns, pair alignment.
//!
//! Timestamps are epoch seconds of exchange-local wall-clock time (no zone
//! conversion is ever applied). Every type here is immutable after
//! construction; constructors enforce the invariants.

pub mod barcsv;
mod describe;

pub use describe::{rolling_correlation, summary_stats, SummaryStats};

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Gap (in seconds) above which two consecutive intraday bars are treated as
/// belonging to different trading sessions.
pub const SESSION_BREAK_SECONDS: i64 = 1800;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("series too short: need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("non-positive price {price} at index {index}")]
    NonPositivePrice { index: usize, price: f64 },
    #[error("granularity mismatch: {0} vs {1}")]
    GranularityMismatch(Granularity, Granularity),
    #[error("insufficient overlap: {got} common timestamps, need {needed}")]
    InsufficientOverlap { needed: usize, got: usize },
    #[error("zero variance in series {0}")]
    ZeroVariance(String),
    #[error("rolling window {window} exceeds series length {n}")]
    WindowTooLarge { window: usize, n: usize },
    #[error("rolling window {0} is below the minimum of 3")]
    WindowTooSmall(usize),
    #[error("invalid bar at index {index}: {reason}")]
    InvalidBar { index: usize, reason: String },
    #[error("timestamps not strictly increasing at index {0}")]
    NonIncreasingTimestamps(usize),
    #[error("length mismatch: {0} timestamps vs {1} values")]
    LengthMismatch(usize, usize),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("timestamp sequences differ between paired series")]
    TimestampMismatch,
}

/// Bar sampling interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Granularity {
    #[serde(rename = "1min")]
    Min1,
    #[serde(rename = "5min")]
    Min5,
    #[serde(rename = "15min")]
    Min15,
    #[serde(rename = "daily")]
    Daily,
}

impl Granularity {
    pub const ALL: [Granularity; 4] = [
        Granularity::Min1,
        Granularity::Min5,
        Granularity::Min15,
        Granularity::Daily,
    ];

    pub fn bar_seconds(self) -> i64 {
        match self {
            Granularity::Min1 => 60,
            Granularity::Min5 => 300,
            Granularity::Min15 => 900,
            Granularity::Daily => 86_400,
        }
    }

    pub fn from_bar_seconds(secs: i64) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.bar_seconds() == secs)
    }

    /// Short label used in directory and file names (`1min`, `daily`, ...).
    pub fn label(self) -> &'static str {
        match self {
            Granularity::Min1 => "1min",
            Granularity::Min5 => "5min",
            Granularity::Min15 => "15min",
            Granularity::Daily => "daily",
        }
    }

    /// Fixture directory name, e.g. `data_1min_fixed`.
    pub fn dir_name(self) -> String {
        format!("data_{}_fixed", self.label())
    }

    pub fn is_intraday(self) -> bool {
        self != Granularity::Daily
    }

    /// Wall-clock rendering of a lag measured in bars: `"3m"` intraday, `"2d"` daily.
    pub fn wallclock(self, bars: i64) -> String {
        match self {
            Granularity::Daily => format!("{bars}d"),
            g => format!("{}m", bars * g.bar_seconds() / 60),
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|g| g.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown granularity '{s}' (expected 1min, 5min, 15min or daily)"))
    }
}

/// One OHLCV observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub timestamp: i64,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl Bar {
    /// Checks price positivity and OHLC consistency.
    pub fn validate(&self) -> Result<(), String> {
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err("prices must be finite and positive".into());
        }
        if !self.volume.is_finite() || self.volume < 0.0 {
            return Err("volume must be finite and non-negative".into());
        }
        if self.low > self.high {
            return Err(format!("low {} > high {}", self.low, self.high));
        }
        if self.low > self.open.min(self.close) {
            return Err(format!("low {} above min(open, close)", self.low));
        }
        if self.high < self.open.max(self.close) {
            return Err(format!("high {} below max(open, close)", self.high));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarSeries {
    symbol: String,
    granularity: Granularity,
    bars: Vec<Bar>,
}

impl BarSeries {
    pub fn new(
        symbol: impl Into<String>,
        granularity: Granularity,
        bars: Vec<Bar>,
    ) -> Result<Self, SeriesError> {
        for (index, bar) in bars.iter().enumerate() {
            bar.validate()
                .map_err(|reason| SeriesError::InvalidBar { index, reason })?;
            if index > 0 && bars[index - 1].timestamp >= bar.timestamp {
                return Err(SeriesError::NonIncreasingTimestamps(index));
            }
        }
        Ok(Self {
            symbol: symbol.into(),
            granularity,
            bars,
        })
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn closes(&self) -> impl Iterator<Item = f64> + '_ {
        self.bars.iter().map(|b| b.close)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnKind {
    #[default]
    Log,
    Simple,
}

/// How returns spanning a session break are treated at intraday granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionPolicy {
    #[default]
    Include,
    DropBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    symbol: String,
    granularity: Granularity,
    kind: ReturnKind,
    timestamps: Vec<i64>,
    values: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(
        symbol: impl Into<String>,
        granularity: Granularity,
        kind: ReturnKind,
        timestamps: Vec<i64>,
        values: Vec<f64>,
    ) -> Result<Self, SeriesError> {
        if timestamps.len() != values.len() {
            return Err(SeriesError::LengthMismatch(timestamps.len(), values.len()));
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[0] >= w[1]) {
            return Err(SeriesError::NonIncreasingTimestamps(i + 1));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SeriesError::NonFinite(i));
        }
        Ok(Self {
            symbol: symbol.into(),
            granularity,
            kind,
            timestamps,
            values,
        })
    }

    /// Builds a series on a plain integer grid `0..values.len()`; handy for
    /// tests and for analyses that do not care about wall-clock time.
    pub fn from_values(symbol: impl Into<String>, values: Vec<f64>) -> Result<Self, SeriesError> {
        let timestamps = (0..values.len() as i64).collect();
        Self::new(symbol, Granularity::Min1, ReturnKind::Log, timestamps, values)
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn kind(&self) -> ReturnKind {
        self.kind
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            values,
            ..self.clone()
        }
    }

    /// Value at `timestamp`, if present.
    pub fn value_at(&self, timestamp: i64) -> Option<f64> {
        self.timestamps
            .binary_search(&timestamp)
            .ok()
            .map(|i| self.values[i])
    }
}

/// Two return series restricted to a shared timestamp grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair {
    a: ReturnSeries,
    b: ReturnSeries,
}

impl AlignedPair {
    /// Wraps two series that already share timestamps.
    pub fn from_aligned(a: ReturnSeries, b: ReturnSeries) -> Result<Self, SeriesError> {
        if a.timestamps != b.timestamps {
            return Err(SeriesError::TimestampMismatch);
        }
        Ok(Self { a, b })
    }

    /// Pair built from raw vectors on an integer grid.
    pub fn from_values(a: Vec<f64>, b: Vec<f64>) -> Result<Self, SeriesError> {
        Self::from_aligned(
            ReturnSeries::from_values("a", a)?,
            ReturnSeries::from_values("b", b)?,
        )
    }

    pub fn a(&self) -> &ReturnSeries {
        &self.a
    }

    pub fn b(&self) -> &ReturnSeries {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn timestamps(&self) -> &[i64] {
        self.a.timestamps()
    }

    /// Same pair with roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }
}

fn is_session_boundary(prev: i64, curr: i64) -> bool {
    curr - prev > SESSION_BREAK_SECONDS || date_of(prev) != date_of(curr)
}

/// Per-bar returns from closes; output is one shorter than the input and
/// stamped with the later bar's timestamp.
pub fn compute_returns(series: &BarSeries, kind: ReturnKind) -> Result<ReturnSeries, SeriesError> {
    compute_returns_with(series, kind, SessionPolicy::Include)
}

pub fn compute_returns_with(
    series: &BarSeries,
    kind: ReturnKind,
    policy: SessionPolicy,
) -> Result<ReturnSeries, SeriesError> {
    let bars = series.bars();
    if bars.len() < 2 {
        return Err(SeriesError::TooShort {
            needed: 2,
            got: bars.len(),
        });
    }
    if let Some((index, bar)) = bars.iter().enumerate().find(|(_, b)| b.close <= 0.0) {
        return Err(SeriesError::NonPositivePrice {
            index,
            price: bar.close,
        });
    }
    let drop_gaps =
        policy == SessionPolicy::DropBoundary && series.granularity().is_intraday();
    let mut timestamps = Vec::with_capacity(bars.len() - 1);
    let mut values = Vec::with_capacity(bars.len() - 1);
    for w in bars.windows(2) {
        if drop_gaps && is_session_boundary(w[0].timestamp, w[1].timestamp) {
            continue;
        }
        let ratio = w[1].close / w[0].close;
        let r = match kind {
            ReturnKind::Log => ratio.ln(),
            ReturnKind::Simple => ratio - 1.0,
        };
        timestamps.push(w[1].timestamp);
        values.push(r);
    }
    ReturnSeries::new(series.symbol(), series.granularity(), kind, timestamps, values)
}

/// Restricts both series to their common timestamps.
pub fn align(a: &ReturnSeries, b: &ReturnSeries, min_obs: usize) -> Result<AlignedPair, SeriesError> {
    if a.granularity != b.granularity {
        return Err(SeriesError::GranularityMismatch(a.granularity, b.granularity));
    }
    let (mut i, mut j) = (0, 0);
    let mut ts = Vec::new();
    let (mut va, mut vb) = (Vec::new(), Vec::new());
    while i < a.len() && j < b.len() {
        let (ta, tb) = (a.timestamps[i], b.timestamps[j]);
        match ta.cmp(&tb) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                ts.push(ta);
                va.push(a.values[i]);
                vb.push(b.values[j]);
                i += 1;
                j += 1;
            }
        }
    }
    if ts.len() < min_obs || ts.is_empty() {
        return Err(SeriesError::InsufficientOverlap {
            needed: min_obs.max(1),
            got: ts.len(),
        });
    }
    Ok(AlignedPair {
        a: ReturnSeries {
            timestamps: ts.clone(),
            values: va,
            ..a.clone()
        },
        b: ReturnSeries {
            timestamps: ts,
            values: vb,
            ..b.clone()
        },
    })
}

/// Rescales to mean 0 and sample standard deviation 1.
pub fn zscore_normalize(r: &ReturnSeries) -> Result<ReturnSeries, SeriesError> {
    let z = zscore(r.values()).ok_or_else(|| SeriesError::ZeroVariance(r.symbol.clone()))?;
    Ok(r.with_values(z))
}

/// Slice-level z-score; `None` when the input is too short or constant.
pub fn zscore(values: &[f64]) -> Option<Vec<f64>> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values);
    let sd = sample_std(values, m);
    if !(sd > 0.0) {
        return None;
    }
    Some(values.iter().map(|v| (v - m) / sd).collect())
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub(crate) fn sample_std(values: &[f64], mean: f64) -> f64 {
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (values.len() as f64 - 1.0)).sqrt()
}

/// Two-pass Pearson correlation of equal-length slices. `None` if either
/// side has zero variance.
pub fn correlation(x: &[f64], y: &[f64]) -> Option<f64> {
    debug_assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Aggregates bars into a coarser granularity: first open, last close,
/// extreme high/low, summed volume. Intraday buckets are stamped at their
/// end (`ceil(ts / bar_seconds) * bar_seconds`); daily buckets at 15:00 of
/// the calendar date.
pub fn resample(series: &BarSeries, target: Granularity) -> Result<BarSeries, SeriesError> {
    if target.bar_seconds() < series.granularity.bar_seconds() {
        return Err(SeriesError::GranularityMismatch(series.granularity, target));
    }
    let bucket = |ts: i64| -> i64 {
        if target.is_intraday() {
            let w = target.bar_seconds();
            ts.div_euclid(w) * w + if ts.rem_euclid(w) == 0 { 0 } else { w }
        } else {
            datetime_to_timestamp(date_of(ts).and_hms_opt(15, 0, 0).expect("valid time"))
        }
    };
    let mut out: Vec<Bar> = Vec::new();
    for bar in series.bars() {
        let stamp = bucket(bar.timestamp);
        match out.last_mut() {
            Some(last) if last.timestamp == stamp => {
                last.high = last.high.max(bar.high);
                last.low = last.low.min(bar.low);
                last.close = bar.close;
                last.volume += bar.volume;
            }
            _ => out.push(Bar {
                timestamp: stamp,
                ..*bar
            }),
        }
    }
    Ok(BarSeries {
        symbol: series.symbol.clone(),
        granularity: target,
        bars: out,
    })
}

pub fn timestamp_to_datetime(ts: i64) -> NaiveDateTime {
    DateTime::from_timestamp(ts, 0)
        .map(|d| d.naive_utc())
        .unwrap_or_default()
}

pub fn datetime_to_timestamp(dt: NaiveDateTime) -> i64 {
    dt.and_utc().timestamp()
}

pub fn date_of(ts: i64) -> NaiveDate {
    timestamp_to_datetime(ts).date()
}

/// ISO-8601 local time without zone, e.g. `2021-03-04T09:31:00`.
pub fn format_timestamp(ts: i64) -> String {
    timestamp_to_datetime(ts)
        .format("%Y-%m-%dT%H:%M:%S")
        .to_string()
}

/// Accepts `YYYY-MM-DDTHH:MM:SS`, `YYYY-MM-DD HH:MM:SS` or a bare date.
pub fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(datetime_to_timestamp(dt));
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(datetime_to_timestamp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bars_from_closes(closes: &[f64]) -> BarSeries {
        let bars = closes
            .iter()
            .enumerate()
            .map(|(i, &c)| Bar {
                timestamp: 60 * i as i64,
                open: c,
                high: c,
                low: c,
                close: c,
                volume: 1.0,
            })
            .collect();
        BarSeries::new("X", Granularity::Min1, bars).unwrap()
    }

    #[test]
    fn granularity_mapping_is_bijective() {
        for g in Granularity::ALL {
            assert_eq!(Granularity::from_bar_seconds(g.bar_seconds()), Some(g));
            assert_eq!(g.label().parse::<Granularity>().unwrap(), g);
        }
        assert_eq!(Granularity::Min1.wallclock(2), "2m");
        assert_eq!(Granularity::Min15.wallclock(2), "30m");
        assert_eq!(Granularity::Daily.wallclock(1), "1d");
    }

    #[test]
    fn simple_returns() {
        let r = compute_returns(&bars_from_closes(&[100.0, 101.0, 100.0]), ReturnKind::Simple).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r.values()[0] - 0.01).abs() < 1e-15);
        assert!((r.values()[1] - (100.0 / 101.0 - 1.0)).abs() < 1e-15);
        assert_eq!(r.timestamps(), &[60, 120]);
    }

    #[test]
    fn constant_closes_give_zero_log_returns() {
        let r = compute_returns(&bars_from_closes(&[5.0, 5.0, 5.0]), ReturnKind::Log).unwrap();
        assert_eq!(r.values(), &[0.0, 0.0]);
    }

    #[test]
    fn returns_need_two_bars() {
        let err = compute_returns(&bars_from_closes(&[5.0]), ReturnKind::Log).unwrap_err();
        assert!(matches!(err, SeriesError::TooShort { .. }));
    }

    #[test]
    fn bar_series_rejects_inconsistent_ohlc() {
        let bar = Bar {
            timestamp: 0,
            open: 10.0,
            high: 9.0,
            low: 8.0,
            close: 9.5,
            volume: 0.0,
        };
        assert!(BarSeries::new("X", Granularity::Daily, vec![bar]).is_err());
    }

    #[test]
    fn session_boundary_returns_dropped_on_request() {
        // 11:29, 11:30, then 13:01 the same day.
        let base = parse_timestamp("2021-03-04T11:29:00").unwrap();
        let ts = [base, base + 60, base + 60 + 91 * 60];
        let bars: Vec<Bar> = ts
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let c = 10.0 + i as f64;
                Bar { timestamp: t, open: c, high: c, low: c, close: c, volume: 0.0 }
            })
            .collect();
        let s = BarSeries::new("X", Granularity::Min1, bars).unwrap();
        assert_eq!(compute_returns(&s, ReturnKind::Log).unwrap().len(), 2);
        let dropped = compute_returns_with(&s, ReturnKind::Log, SessionPolicy::DropBoundary).unwrap();
        assert_eq!(dropped.timestamps(), &[base + 60]);
    }

    #[test]
    fn align_intersects() {
        let a = ReturnSeries::new("a", Granularity::Min1, ReturnKind::Log, vec![1, 2, 3], vec![0.1, 0.2, 0.3]).unwrap();
        let b = ReturnSeries::new("b", Granularity::Min1, ReturnKind::Log, vec![2, 3, 4], vec![1.0, 2.0, 3.0]).unwrap();
        let p = align(&a, &b, 2).unwrap();
        assert_eq!(p.timestamps(), &[2, 3]);
        assert_eq!(p.a().values(), &[0.2, 0.3]);
        assert_eq!(p.b().values(), &[1.0, 2.0]);
        assert!(matches!(align(&a, &b, 3), Err(SeriesError::InsufficientOverlap { .. })));
    }

    #[test]
    fn align_disjoint_fails() {
        let a = ReturnSeries::new("a", Granularity::Min1, ReturnKind::Log, vec![1, 2], vec![0.1, 0.2]).unwrap();
        let b = ReturnSeries::new("b", Granularity::Min1, ReturnKind::Log, vec![3, 4], vec![0.1, 0.2]).unwrap();
        assert!(matches!(align(&a, &b, 0), Err(SeriesError::InsufficientOverlap { .. })));
    }

    #[test]
    fn align_rejects_granularity_mismatch() {
        let a = ReturnSeries::new("a", Granularity::Min1, ReturnKind::Log, vec![1], vec![0.1]).unwrap();
        let b = ReturnSeries::new("b", Granularity::Daily, ReturnKind::Log, vec![1], vec![0.1]).unwrap();
        assert!(matches!(align(&a, &b, 1), Err(SeriesError::GranularityMismatch(..))));
    }

    #[test]
    fn zscore_of_small_series() {
        let r = ReturnSeries::from_values("x", vec![1.0, 2.0, 3.0]).unwrap();
        let z = zscore_normalize(&r).unwrap();
        assert_eq!(z.values(), &[-1.0, 0.0, 1.0]);
        let again = zscore_normalize(&z).unwrap();
        for (u, v) in z.values().iter().zip(again.values()) {
            assert!((u - v).abs() < 1e-12);
        }
        let flat = ReturnSeries::from_values("x", vec![2.0; 5]).unwrap();
        assert!(matches!(zscore_normalize(&flat), Err(SeriesError::ZeroVariance(_))));
    }

    #[test]
    fn resample_to_daily() {
        let base = parse_timestamp("2021-03-04T14:58:00").unwrap();
        let mk = |t: i64, c: f64| Bar { timestamp: t, open: c, high: c + 1.0, low: c - 1.0, close: c, volume: 2.0 };
        // two bars on the 4th, one on the 5th
        let s = BarSeries::new(
            "X",
            Granularity::Min1,
            vec![mk(base, 10.0), mk(base + 60, 12.0), mk(base + 86_400, 11.0)],
        )
        .unwrap();
        let d = resample(&s, Granularity::Daily).unwrap();
        assert_eq!(d.len(), 2);
        let first = d.bars()[0];
        assert_eq!((first.open, first.close, first.high, first.low, first.volume), (10.0, 12.0, 13.0, 9.0, 4.0));
        assert_eq!(format_timestamp(first.timestamp), "2021-03-04T15:00:00");
        assert!(resample(&d, Granularity::Min5).is_err());
    }

    #[test]
    fn intraday_resample_stamps_bucket_end() {
        let base = parse_timestamp("2021-03-04T09:31:00").unwrap();
        let bars = (0..7)
            .map(|k| Bar { timestamp: base + 60 * k, open: 10.0, high: 20.0, low: 9.0, close: 10.0 + k as f64, volume: 1.0 })
            .collect();
        let s = BarSeries::new("X", Granularity::Min1, bars).unwrap();
        let r = resample(&s, Granularity::Min5).unwrap();
        let stamps: Vec<String> = r.bars().iter().map(|b| format_timestamp(b.timestamp)).collect();
        assert_eq!(stamps, ["2021-03-04T09:35:00", "2021-03-04T09:40:00"]);
        assert_eq!((r.bars()[0].close, r.bars()[0].volume), (14.0, 5.0));
        assert_eq!(r.bars()[1].close, 16.0);
    }

    #[test]
    fn timestamp_round_trip() {
        let ts = parse_timestamp("2020-01-02T09:31:00").unwrap();
        assert_eq!(format_timestamp(ts), "2020-01-02T09:31:00");
        assert_eq!(parse_timestamp("2020-01-02 09:31:00"), Some(ts));
        assert!(parse_timestamp("yesterday").is_none());
    }
}
