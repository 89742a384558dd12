//! Loading one granularity directory and applying the universe filters.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::UniverseFilters;
use super::PipelineError;
use crate::series::barcsv::read_bars;
use crate::series::{date_of, BarSeries, Granularity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    Malformed,
    ListingDate,
    HaltRun,
}

impl ExclusionReason {
    pub fn label(self) -> &'static str {
        match self {
            ExclusionReason::Malformed => "malformed",
            ExclusionReason::ListingDate => "listing_date",
            ExclusionReason::HaltRun => "halt_run",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub symbol: String,
    pub reason: ExclusionReason,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct IngestReport {
    pub granularity: Granularity,
    /// Sorted by symbol.
    pub series: Vec<BarSeries>,
    /// Sorted by symbol.
    pub excluded: Vec<Exclusion>,
    pub warnings: Vec<String>,
}

impl IngestReport {
    pub fn symbols(&self) -> Vec<&str> {
        self.series.iter().map(BarSeries::symbol).collect()
    }
}

fn csv_files(dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let entries = fs::read_dir(dir).map_err(|e| PipelineError::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| PipelineError::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Longest run of universe trading dates missing from `dates`, counted from
/// the symbol's first date through the end of the universe calendar.
pub fn longest_halt_run(dates: &BTreeSet<NaiveDate>, calendar: &BTreeSet<NaiveDate>) -> usize {
    let Some(first) = dates.first() else {
        return calendar.len();
    };
    let mut best = 0;
    let mut run = 0;
    for d in calendar.range(first..) {
        if dates.contains(d) {
            run = 0;
        } else {
            run += 1;
            best = best.max(run);
        }
    }
    best
}

/// Parses every `*.csv` under `<root>/data_<granularity>_fixed/`. Malformed
/// files are excluded with a diagnostic; the rest are filtered by listing
/// date and halt run.
pub fn ingest(root: &Path, granularity: Granularity, filters: &UniverseFilters) -> Result<IngestReport, PipelineError> {
    let dir = root.join(granularity.dir_name());
    if !dir.is_dir() {
        return Err(PipelineError::MissingDirectory(dir.display().to_string()));
    }
    let files = csv_files(&dir)?;
    let mut warnings = Vec::new();
    if files.is_empty() {
        let msg = format!("{} contains no CSV files; the universe is empty", dir.display());
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let parsed: Vec<(String, Result<BarSeries, String>)> = files
        .par_iter()
        .map(|path| {
            let symbol = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let result = match fs::read(path) {
                Ok(bytes) => read_bars(&symbol, granularity, bytes.as_slice())
                    .map_err(|e| format!("{}: {e}", path.display())),
                Err(e) => Err(format!("{}: {e}", path.display())),
            };
            (symbol, result)
        })
        .collect();

    let mut excluded = Vec::new();
    let mut good = Vec::new();
    for (symbol, result) in parsed {
        match result {
            Ok(s) => good.push(s),
            Err(detail) => {
                log::warn!("skipping malformed file {detail}");
                excluded.push(Exclusion {
                    symbol,
                    reason: ExclusionReason::Malformed,
                    detail,
                });
            }
        }
    }

    let dates: BTreeMap<&str, BTreeSet<NaiveDate>> = good
        .iter()
        .map(|s| (s.symbol(), s.bars().iter().map(|b| date_of(b.timestamp)).collect()))
        .collect();
    let calendar: BTreeSet<NaiveDate> = dates.values().flatten().copied().collect();
    let mut keep = Vec::new();
    for s in &good {
        let own = &dates[s.symbol()];
        let reason = match (filters.min_listing_date, own.first()) {
            (Some(limit), Some(first)) if *first > limit => Some((
                ExclusionReason::ListingDate,
                format!("first bar on {first} is after {limit}"),
            )),
            _ => {
                let run = longest_halt_run(own, &calendar);
                (run > filters.max_halt_run).then(|| {
                    (
                        ExclusionReason::HaltRun,
                        format!("{run} consecutive trading days missing (limit {})", filters.max_halt_run),
                    )
                })
            }
        };
        match reason {
            Some((reason, detail)) => excluded.push(Exclusion {
                symbol: s.symbol().to_string(),
                reason,
                detail,
            }),
            None => keep.push(s.symbol().to_string()),
        }
    }
    let series = good.into_iter().filter(|s| keep.iter().any(|k| k == s.symbol())).collect();
    excluded.sort_by(|a, b| a.symbol.cmp(&b.symbol));
    Ok(IngestReport {
        granularity,
        series,
        excluded,
        warnings,
    })
}

pub const EXCLUSION_HEADER: [&str; 3] = ["symbol", "reason", "detail"];

pub fn write_exclusions(path: &Path, excluded: &[Exclusion]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(EXCLUSION_HEADER).map_err(PipelineError::csv)?;
    for e in excluded {
        w.write_record([e.symbol.as_str(), e.reason.label(), e.detail.as_str()])
            .map_err(PipelineError::csv)?;
    }
    let bytes = w.into_inner().map_err(|e| PipelineError::Csv(e.to_string()))?;
    super::write_atomic(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, write_fixture, PlantedGap, SynthSpec};

    #[test]
    fn planted_halt_is_excluded() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = SynthSpec::new(4, 5, 120, Granularity::Daily);
        spec.gaps.push(PlantedGap { symbol: 2, start_bar: 40, len: 25 });
        write_fixture(&generate(&spec).unwrap().bars, dir.path(), Some(4)).unwrap();
        let r = ingest(dir.path(), Granularity::Daily, &UniverseFilters::default()).unwrap();
        assert_eq!(r.series.len(), 4);
        assert_eq!(r.excluded.len(), 1);
        assert_eq!(r.excluded[0].symbol, "S002");
        assert_eq!(r.excluded[0].reason, ExclusionReason::HaltRun);
    }

    #[test]
    fn listing_date_filter() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = SynthSpec::new(4, 3, 100, Granularity::Daily);
        spec.gaps.push(PlantedGap { symbol: 1, start_bar: 0, len: 10 });
        write_fixture(&generate(&spec).unwrap().bars, dir.path(), None).unwrap();
        let filters = UniverseFilters {
            min_listing_date: NaiveDate::from_ymd_opt(2020, 1, 5),
            max_halt_run: 20,
        };
        let r = ingest(dir.path(), Granularity::Daily, &filters).unwrap();
        assert_eq!(r.symbols(), ["S000", "S002"]);
        assert_eq!(r.excluded[0].reason, ExclusionReason::ListingDate);
    }

    #[test]
    fn empty_directory_warns() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("data_5min_fixed")).unwrap();
        let r = ingest(dir.path(), Granularity::Min5, &UniverseFilters::default()).unwrap();
        assert!(r.series.is_empty() && r.excluded.is_empty());
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn missing_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let e = ingest(dir.path(), Granularity::Min5, &UniverseFilters::default()).unwrap_err();
        assert!(matches!(e, PipelineError::MissingDirectory(_)));
    }

    #[test]
    fn malformed_row_names_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        let sub = dir.path().join("data_daily_fixed");
        fs::create_dir(&sub).unwrap();
        fs::write(
            sub.join("BAD.csv"),
            "timestamp,open,high,low,close,volume\n2020-01-02,10,11,9,10,1\n2020-01-03,10,11,12,10,1\n",
        )
        .unwrap();
        fs::write(sub.join("OK.csv"), "timestamp,open,high,low,close,volume\n2020-01-02,10,11,9,10,1\n").unwrap();
        let r = ingest(dir.path(), Granularity::Daily, &UniverseFilters::default()).unwrap();
        assert_eq!(r.symbols(), ["OK"]);
        let e = &r.excluded[0];
        assert_eq!(e.reason, ExclusionReason::Malformed);
        assert!(e.detail.contains("BAD.csv") && e.detail.contains("line 3"), "{}", e.detail);
    }

    #[test]
    fn halt_run_counts_trailing_gap() {
        let d = |k: u32| NaiveDate::from_ymd_opt(2020, 1, k).unwrap();
        let cal: BTreeSet<_> = (1..=10).map(d).collect();
        let own: BTreeSet<_> = [d(3), d(4), d(7)].into();
        assert_eq!(longest_halt_run(&own, &cal), 3);
    }
}
