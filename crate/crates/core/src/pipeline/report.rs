//! Presentation tables built from the stage-2 rows.

use std::io::Write;
use std::path::PathBuf;

use super::cascade::{detect_cascades, write_cascades};
use super::config::PipelineConfig;
use super::industry::{industry_report, read_industry_map, write_industry_report};
use super::ingest::ingest;
use super::stage2::PairReportRow;
use super::{read_stage2, universe_returns, write_atomic, PipelineError};
use crate::series::{summary_stats, Granularity};

/// Column set of the ranking table.
pub const TOP_HEADER: [&str; 6] = ["Leader", "Follower", "Lag", "CCF", "p-val", "R²"];

pub fn format_p_value(p: f64) -> String {
    if p < 1e-4 {
        "<0.0001".into()
    } else {
        format!("{p:.4}")
    }
}

/// The `top_n` best confirmed rows of one granularity, in rank order.
pub fn top_rows(rows: &[PairReportRow], g: Granularity, top_n: usize) -> Vec<&PairReportRow> {
    let mut chosen: Vec<&PairReportRow> = rows.iter().filter(|r| r.granularity == g && r.is_confirmed()).collect();
    chosen.sort_by_key(|r| r.rank);
    chosen.truncate(top_n);
    chosen
}

pub fn write_top_table<W: Write>(rows: &[&PairReportRow], out: W) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TOP_HEADER).map_err(PipelineError::csv)?;
    for r in rows {
        w.write_record([
            r.leader.clone(),
            r.follower.clone(),
            r.lag_wallclock.clone(),
            format!("{:.4}", r.ccf_value),
            r.granger_p.map(format_p_value).unwrap_or_default(),
            r.r_squared.map(|v| format!("{v:.4}")).unwrap_or_default(),
        ])
        .map_err(PipelineError::csv)?;
    }
    w.flush().map_err(|e| PipelineError::Csv(e.to_string()))
}

pub const COMPARISON_HEADER: [&str; 8] = [
    "granularity",
    "pairs_analyzed",
    "ccf_significant",
    "granger_confirmed",
    "mean_abs_ccf",
    "mean_lag_bars",
    "mean_lag_minutes",
    "mean_r_squared",
];

/// One line per granularity; means are over the confirmed rows.
pub fn write_granularity_comparison<W: Write>(rows: &[PairReportRow], grans: &[Granularity], out: W) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARISON_HEADER).map_err(PipelineError::csv)?;
    let mean = |v: Vec<f64>| {
        if v.is_empty() {
            String::new()
        } else {
            (v.iter().sum::<f64>() / v.len() as f64).to_string()
        }
    };
    for &g in grans {
        let all: Vec<&PairReportRow> = rows.iter().filter(|r| r.granularity == g).collect();
        let conf: Vec<&&PairReportRow> = all.iter().filter(|r| r.is_confirmed()).collect();
        let minutes = g.bar_seconds() as f64 / 60.0;
        w.write_record([
            g.label().to_string(),
            all.len().to_string(),
            all.iter().filter(|r| r.ccf_significant).count().to_string(),
            conf.len().to_string(),
            mean(conf.iter().map(|r| r.ccf_value.abs()).collect()),
            mean(conf.iter().map(|r| r.optimal_lag as f64).collect()),
            mean(conf.iter().map(|r| r.optimal_lag as f64 * minutes).collect()),
            mean(conf.iter().filter_map(|r| r.r_squared).collect()),
        ])
        .map_err(PipelineError::csv)?;
    }
    w.flush().map_err(|e| PipelineError::Csv(e.to_string()))
}

pub const SUMMARY_HEADER: [&str; 8] = [
    "granularity",
    "symbol",
    "n",
    "mean",
    "std_dev",
    "skewness",
    "kurtosis",
    "autocorr_lag1",
];

/// Descriptive statistics of every ingested symbol's returns at each
/// granularity whose data directory exists.
pub fn write_summary_stats<W: Write>(cfg: &PipelineConfig, out: W) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER).map_err(PipelineError::csv)?;
    for g in Granularity::ALL {
        if !cfg.data_root.join(g.dir_name()).is_dir() {
            continue;
        }
        let report = ingest(&cfg.data_root, g, &cfg.universe)?;
        for (symbol, r) in universe_returns(cfg, g, &report.series) {
            let Ok(s) = r.as_ref().map_err(|e| e.to_string()).and_then(|r| summary_stats(r).map_err(|e| e.to_string()))
            else {
                continue;
            };
            w.write_record([
                g.label().to_string(),
                symbol,
                s.n.to_string(),
                s.mean.to_string(),
                s.std_dev.to_string(),
                s.skewness.to_string(),
                s.kurtosis.to_string(),
                s.autocorr_lag1.to_string(),
            ])
            .map_err(PipelineError::csv)?;
        }
    }
    w.flush().map_err(|e| PipelineError::Csv(e.to_string()))
}

/// Writes ranking, cascade, industry, comparison and summary tables into
/// the run directory and returns the files written.
pub fn run_report(cfg: &PipelineConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let rows = read_stage2(cfg)?;
    let dir = cfg.run_dir();
    let industries = match &cfg.report.industry_map {
        Some(p) => {
            let bytes = std::fs::read(p).map_err(|e| PipelineError::io(p, e))?;
            Some(read_industry_map(bytes.as_slice())?)
        }
        None => None,
    };
    let mut files = Vec::new();
    let mut emit = |name: String, bytes: Vec<u8>| -> Result<(), PipelineError> {
        let path = dir.join(name);
        write_atomic(&path, &bytes)?;
        files.push(path);
        Ok(())
    };
    for &g in &cfg.granularities {
        let own: Vec<PairReportRow> = rows.iter().filter(|r| r.granularity == g).cloned().collect();
        let mut buf = Vec::new();
        write_top_table(&top_rows(&own, g, cfg.report.top_n), &mut buf)?;
        emit(format!("top{}_{}.csv", cfg.report.top_n, g.label()), buf)?;
        let mut buf = Vec::new();
        write_cascades(g, &detect_cascades(&own), &mut buf)?;
        emit(format!("cascades_{}.csv", g.label()), buf)?;
        if let Some(map) = &industries {
            let mut buf = Vec::new();
            write_industry_report(&industry_report(&own, map), &mut buf)?;
            emit(format!("industry_{}.csv", g.label()), buf)?;
        }
    }
    let mut buf = Vec::new();
    write_granularity_comparison(&rows, &cfg.granularities, &mut buf)?;
    emit("granularity_comparison.csv".into(), buf)?;
    let mut buf = Vec::new();
    write_summary_stats(cfg, &mut buf)?;
    emit("summary_stats.csv".into(), buf)?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::stage2::sample_row;

    #[test]
    fn top_table_shape() {
        let mut a = sample_row("000011", "000006", 2, 0.32474);
        a.lag_wallclock = "2m".into();
        a.granger_p = Some(1e-9);
        a.r_squared = Some(0.10534);
        let mut b = sample_row("X", "Y", 1, 0.2);
        b.rank = 2;
        b.granger_p = Some(0.01234);
        b.r_squared = Some(0.05);
        let rows = [b, a];
        let mut buf = Vec::new();
        write_top_table(&top_rows(&rows, Granularity::Min1, 10), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "Leader,Follower,Lag,CCF,p-val,R²");
        assert_eq!(lines[1], "000011,000006,2m,0.3247,<0.0001,0.1053");
        assert_eq!(lines[2], "X,Y,1m,0.2000,0.0123,0.0500");
    }
}
