//! Stage-1 coupling screen: Pearson correlation, DTW distance and Kendall
//! tau folded into one composite score per instrument pair.
//!
//! The composite for a pair is
//!
//! ```text
//! CS = w1 * pearson + w2 * (1 - dtw / dtw_max) + w3 * tau
//! ```
//!
//! where `dtw_max` is the largest DTW distance seen among the pairs evaluated
//! in the same screening run. Normalization is therefore run-relative and the
//! value used is recorded in [`Screening::dtw_max`].

mod dtw;
mod kendall;

pub use dtw::{dtw_distance, DtwBand};
pub use kendall::{kendall_tau_b, tau_counts, TauCounts};

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{self, align, zscore, AlignedPair, ReturnSeries, SeriesError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CouplingError {
    #[error("too short: need {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("zero variance")]
    ZeroVariance,
    #[error("one of the series is entirely tied")]
    AllTied,
    #[error("empty sequence")]
    EmptySequence,
    #[error("band {band} narrower than the length difference {needed}")]
    BandTooNarrow { band: usize, needed: usize },
    #[error("invalid coupling weights: {0}")]
    WeightDomain(String),
    #[error("universe needs at least 2 symbols, got {0}")]
    UniverseTooSmall(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("non-finite input")]
    NonFinite,
    #[error("dtw_normalized {0} outside [0, 1]")]
    NormalizedOutOfRange(f64),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("malformed stage-1 csv: {0}")]
    Csv(String),
}

/// Weights on (Pearson, DTW similarity, Kendall tau). Non-negative, sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct CouplingWeights {
    pearson: f64,
    dtw: f64,
    tau: f64,
}

impl CouplingWeights {
    pub fn new(pearson: f64, dtw: f64, tau: f64) -> Result<Self, CouplingError> {
        let w = [pearson, dtw, tau];
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(CouplingError::WeightDomain(format!(
                "weights must be finite and non-negative, got {w:?}"
            )));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CouplingError::WeightDomain(format!("weights sum to {sum}, expected 1")));
        }
        Ok(Self { pearson, dtw, tau })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.pearson, self.dtw, self.tau]
    }
}

impl Default for CouplingWeights {
    fn default() -> Self {
        Self {
            pearson: 0.4,
            dtw: 0.3,
            tau: 0.3,
        }
    }
}

impl TryFrom<[f64; 3]> for CouplingWeights {
    type Error = CouplingError;

    fn try_from(w: [f64; 3]) -> Result<Self, Self::Error> {
        Self::new(w[0], w[1], w[2])
    }
}

impl From<CouplingWeights> for [f64; 3] {
    fn from(w: CouplingWeights) -> Self {
        w.as_array()
    }
}

pub fn composite_score(
    pearson: f64,
    dtw_normalized: f64,
    tau: f64,
    weights: &CouplingWeights,
) -> Result<f64, CouplingError> {
    if !(0.0..=1.0).contains(&dtw_normalized) {
        return Err(CouplingError::NormalizedOutOfRange(dtw_normalized));
    }
    Ok(weights.pearson * pearson + weights.dtw * (1.0 - dtw_normalized) + weights.tau * tau)
}

/// Contemporaneous Pearson correlation of an aligned pair.
pub fn pearson(pair: &AlignedPair) -> Result<f64, CouplingError> {
    pearson_slices(pair.a().values(), pair.b().values())
}

pub fn pearson_slices(x: &[f64], y: &[f64]) -> Result<f64, CouplingError> {
    if x.len() != y.len() {
        return Err(CouplingError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(CouplingError::TooShort { needed: 3, got: x.len() });
    }
    series::correlation(x, y).ok_or(CouplingError::ZeroVariance)
}

pub fn kendall_tau(pair: &AlignedPair) -> Result<f64, CouplingError> {
    kendall_tau_b(pair.a().values(), pair.b().values())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreenParams {
    pub weights: CouplingWeights,
    pub threshold: f64,
    pub dtw_band: DtwBand,
    pub min_obs: usize,
}

impl Default for ScreenParams {
    fn default() -> Self {
        Self {
            weights: CouplingWeights::default(),
            threshold: 0.6,
            dtw_band: DtwBand::default(),
            min_obs: 60,
        }
    }
}

/// Per-pair metrics before run-level DTW normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawCoupling {
    pub symbol_a: String,
    pub symbol_b: String,
    pub n: usize,
    pub pearson: f64,
    pub dtw_distance: f64,
    pub kendall_tau: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub symbol_a: String,
    pub symbol_b: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PairEvaluation {
    Evaluated(RawCoupling),
    Skipped(SkipRecord),
}

impl PairEvaluation {
    pub fn symbols(&self) -> (&str, &str) {
        match self {
            PairEvaluation::Evaluated(r) => (&r.symbol_a, &r.symbol_b),
            PairEvaluation::Skipped(s) => (&s.symbol_a, &s.symbol_b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingResult {
    pub symbol_a: String,
    pub symbol_b: String,
    pub n: usize,
    pub pearson: f64,
    pub dtw_distance: f64,
    pub dtw_normalized: f64,
    pub kendall_tau: f64,
    pub composite: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Screening {
    /// Sorted by composite descending, ties by symbol pair.
    pub results: Vec<CouplingResult>,
    /// Sorted by symbol pair.
    pub skips: Vec<SkipRecord>,
    pub dtw_max: f64,
}

impl Screening {
    pub fn passed(&self) -> impl Iterator<Item = &CouplingResult> {
        self.results.iter().filter(|r| r.passed)
    }
}

/// Unordered pairs of `symbols` as `(a, b)` with `a < b`, in lexicographic order.
pub fn pair_keys<S: AsRef<str>>(symbols: &[S]) -> Vec<(String, String)> {
    let mut s: Vec<&str> = symbols.iter().map(AsRef::as_ref).collect();
    s.sort_unstable();
    s.dedup();
    let mut out = Vec::with_capacity(s.len() * s.len().saturating_sub(1) / 2);
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            out.push((s[i].to_string(), s[j].to_string()));
        }
    }
    out
}

/// Metrics for one pair; failures become skip records with a reason.
/// DTW runs on z-scored returns.
pub fn evaluate_pair(a: &ReturnSeries, b: &ReturnSeries, params: &ScreenParams) -> PairEvaluation {
    let skip = |reason: String| {
        PairEvaluation::Skipped(SkipRecord {
            symbol_a: a.symbol().to_string(),
            symbol_b: b.symbol().to_string(),
            reason,
        })
    };
    let pair = match align(a, b, params.min_obs.max(3)) {
        Ok(p) => p,
        Err(e) => return skip(e.to_string()),
    };
    let (xa, xb) = (pair.a().values(), pair.b().values());
    let (Some(za), Some(zb)) = (zscore(xa), zscore(xb)) else {
        return skip("zero variance".into());
    };
    let metrics = (|| {
        let rho = pearson(&pair)?;
        let tau = kendall_tau(&pair)?;
        let band = params.dtw_band.resolve(za.len(), zb.len());
        let d = dtw_distance(&za, &zb, band)?;
        Ok::<_, CouplingError>((rho, tau, d))
    })();
    match metrics {
        Ok((rho, tau, d)) => PairEvaluation::Evaluated(RawCoupling {
            symbol_a: a.symbol().to_string(),
            symbol_b: b.symbol().to_string(),
            n: pair.n(),
            pearson: rho,
            dtw_distance: d,
            kendall_tau: tau,
        }),
        Err(e) => skip(e.to_string()),
    }
}

/// Second pass: DTW normalization, composite, pass flag and ordering.
pub fn finalize(
    evaluations: impl IntoIterator<Item = PairEvaluation>,
    weights: &CouplingWeights,
    threshold: f64,
) -> Screening {
    let mut raw = Vec::new();
    let mut skips = Vec::new();
    for e in evaluations {
        match e {
            PairEvaluation::Evaluated(r) => raw.push(r),
            PairEvaluation::Skipped(s) => skips.push(s),
        }
    }
    let dtw_max = raw
        .iter()
        .map(|r| r.dtw_distance)
        .filter(|d| d.is_finite())
        .fold(0.0f64, f64::max);
    let mut results: Vec<CouplingResult> = raw
        .into_iter()
        .map(|r| {
            let norm = if dtw_max > 0.0 {
                (r.dtw_distance / dtw_max).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let composite = composite_score(r.pearson, norm, r.kendall_tau, weights)
                .expect("normalized DTW is clamped to [0, 1]");
            CouplingResult {
                symbol_a: r.symbol_a,
                symbol_b: r.symbol_b,
                n: r.n,
                pearson: r.pearson,
                dtw_distance: r.dtw_distance,
                dtw_normalized: norm,
                kendall_tau: r.kendall_tau,
                composite,
                passed: composite >= threshold,
            }
        })
        .collect();
    results.sort_by(|x, y| {
        y.composite
            .total_cmp(&x.composite)
            .then_with(|| (&x.symbol_a, &x.symbol_b).cmp(&(&y.symbol_a, &y.symbol_b)))
    });
    skips.sort_by(|x, y| (&x.symbol_a, &x.symbol_b).cmp(&(&y.symbol_a, &y.symbol_b)));
    Screening {
        results,
        skips,
        dtw_max,
    }
}

/// Screens every unordered pair of the (daily) universe. Pairs are evaluated
/// in parallel on the current rayon pool; the output order does not depend
/// on scheduling.
pub fn screen_pairs(universe: &[ReturnSeries], params: &ScreenParams) -> Result<Screening, CouplingError> {
    let symbols: Vec<&str> = universe.iter().map(ReturnSeries::symbol).collect();
    let keys = pair_keys(&symbols);
    if keys.is_empty() {
        return Err(CouplingError::UniverseTooSmall(universe.len()));
    }
    let lookup = |s: &str| universe.iter().find(|r| r.symbol() == s).expect("symbol from universe");
    let evaluations: Vec<PairEvaluation> = keys
        .par_iter()
        .map(|(a, b)| evaluate_pair(lookup(a), lookup(b), params))
        .collect();
    Ok(finalize(evaluations, &params.weights, params.threshold))
}

pub const STAGE1_HEADER: [&str; 10] = [
    "symbol_a",
    "symbol_b",
    "n",
    "pearson",
    "dtw",
    "dtw_norm",
    "kendall_tau",
    "composite",
    "passed",
    "skip_reason",
];

/// Result rows in ranking order, then skip rows.
pub fn write_stage1_csv<W: Write>(screening: &Screening, out: W) -> Result<(), CouplingError> {
    let csv_err = |e: csv::Error| CouplingError::Csv(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STAGE1_HEADER).map_err(csv_err)?;
    for r in &screening.results {
        w.write_record([
            r.symbol_a.clone(),
            r.symbol_b.clone(),
            r.n.to_string(),
            r.pearson.to_string(),
            r.dtw_distance.to_string(),
            r.dtw_normalized.to_string(),
            r.kendall_tau.to_string(),
            r.composite.to_string(),
            r.passed.to_string(),
            String::new(),
        ])
        .map_err(csv_err)?;
    }
    for s in &screening.skips {
        let mut row = vec![s.symbol_a.clone(), s.symbol_b.clone()];
        row.extend(std::iter::repeat_n(String::new(), 6));
        row.push("false".into());
        row.push(s.reason.clone());
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CouplingError::Csv(e.to_string()))
}

/// Reads back a stage-1 CSV. `dtw_max` is not stored per row and is
/// recovered from the row that attains `dtw_norm == 1`.
pub fn read_stage1_csv<R: Read>(input: R) -> Result<Screening, CouplingError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers().map_err(|e| CouplingError::Csv(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != STAGE1_HEADER {
        return Err(CouplingError::Csv(format!("unexpected header {headers:?}")));
    }
    let mut results = Vec::new();
    let mut skips = Vec::new();
    let mut dtw_max: f64 = 0.0;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CouplingError::Csv(e.to_string()))?;
        let bad = |what: &str| CouplingError::Csv(format!("row {}: bad {what}", line + 2));
        let f = |i: usize, what: &str| rec[i].parse::<f64>().map_err(|_| bad(what));
        if !rec[9].is_empty() {
            skips.push(SkipRecord {
                symbol_a: rec[0].to_string(),
                symbol_b: rec[1].to_string(),
                reason: rec[9].to_string(),
            });
            continue;
        }
        let r = CouplingResult {
            symbol_a: rec[0].to_string(),
            symbol_b: rec[1].to_string(),
            n: rec[2].parse().map_err(|_| bad("n"))?,
            pearson: f(3, "pearson")?,
            dtw_distance: f(4, "dtw")?,
            dtw_normalized: f(5, "dtw_norm")?,
            kendall_tau: f(6, "kendall_tau")?,
            composite: f(7, "composite")?,
            passed: rec[8].parse().map_err(|_| bad("passed"))?,
        };
        dtw_max = dtw_max.max(r.dtw_distance);
        results.push(r);
    }
    Ok(Screening {
        results,
        skips,
        dtw_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_validation() {
        assert!(CouplingWeights::new(0.5, 0.5, 0.0).is_ok());
        assert!(matches!(CouplingWeights::new(0.5, 0.6, 0.0), Err(CouplingError::WeightDomain(_))));
        assert!(matches!(CouplingWeights::new(-0.1, 0.6, 0.5), Err(CouplingError::WeightDomain(_))));
    }

    #[test]
    fn composite_examples() {
        let rho_only = CouplingWeights::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(composite_score(0.73, 0.4, -0.2, &rho_only).unwrap(), 0.73);
        let w = CouplingWeights::new(0.4, 0.3, 0.3).unwrap();
        assert!((composite_score(0.8, 0.5, 0.6, &w).unwrap() - 0.65).abs() < 1e-12);
        for w in [w, rho_only, CouplingWeights::new(0.1, 0.7, 0.2).unwrap()] {
            assert!((composite_score(1.0, 0.0, 1.0, &w).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(composite_score(0.5, 1.5, 0.0, &w).is_err());
    }

    #[test]
    fn pearson_examples() {
        let a = vec![0.1, -0.3, 0.25, 0.0, 0.7];
        let b: Vec<f64> = a.iter().map(|x| -2.0 * x + 3.0).collect();
        assert!((pearson(&AlignedPair::from_values(a.clone(), a.clone()).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&AlignedPair::from_values(a, b).unwrap()).unwrap() + 1.0).abs() < 1e-15);
        let flat = AlignedPair::from_values(vec![1.0; 4], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(pearson(&flat), Err(CouplingError::ZeroVariance));
    }

    #[test]
    fn pair_keys_are_sorted_and_unique() {
        let k = pair_keys(&["c", "a", "b"]);
        assert_eq!(
            k,
            vec![("a".into(), "b".into()), ("a".into(), "c".into()), ("b".into(), "c".into())]
        );
    }

    #[test]
    fn three_symbols_give_three_rows_and_normalization_boundary() {
        let mk = |s: &str, f: fn(f64) -> f64| {
            ReturnSeries::from_values(s, (0..80).map(|i| f(i as f64)).collect()).unwrap()
        };
        let u = vec![
            mk("x", |t| (t * 0.7).sin()),
            mk("y", |t| (t * 0.7).sin() + 0.3 * (t * 1.9).cos()),
            mk("z", |t| (t * 2.3).cos()),
        ];
        let s = screen_pairs(&u, &ScreenParams::default()).unwrap();
        assert_eq!(s.results.len() + s.skips.len(), 3);
        let top = s.results.iter().find(|r| r.dtw_distance == s.dtw_max).unwrap();
        assert_eq!(top.dtw_normalized, 1.0);
        for w in s.results.windows(2) {
            assert!(w[0].composite >= w[1].composite);
        }
    }

    #[test]
    fn universe_too_small() {
        let u = vec![ReturnSeries::from_values("x", vec![1.0, 2.0, 3.0]).unwrap()];
        assert_eq!(screen_pairs(&u, &ScreenParams::default()), Err(CouplingError::UniverseTooSmall(1)));
    }

    #[test]
    fn short_overlap_becomes_skip_record() {
        let u = vec![
            ReturnSeries::from_values("x", (0..10).map(f64::from).collect()).unwrap(),
            ReturnSeries::from_values("y", (0..10).map(|i| f64::from(i * i)).collect()).unwrap(),
        ];
        let s = screen_pairs(&u, &ScreenParams::default()).unwrap();
        assert!(s.results.is_empty());
        assert_eq!(s.skips.len(), 1);
        assert!(s.skips[0].reason.contains("insufficient overlap"));
    }

    #[test]
    fn csv_round_trip() {
        let u: Vec<ReturnSeries> = (0..4)
            .map(|k| {
                ReturnSeries::from_values(
                    format!("s{k}"),
                    (0..70).map(|i| ((i * (k + 2)) as f64 * 0.37).sin()).collect(),
                )
                .unwrap()
            })
            .collect();
        let s = screen_pairs(&u, &ScreenParams::default()).unwrap();
        let mut buf = Vec::new();
        write_stage1_csv(&s, &mut buf).unwrap();
        let back = read_stage1_csv(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }
}
