//! Plot data for one analyzed pair, written as four CSV files named
//! `{leader}_{follower}_{granularity}_{kind}.csv`.

use std::path::{Path, PathBuf};

use super::stage2::PairAnalysis;
use super::{write_atomic, PipelineError};
use crate::lagdetect::lagged_columns;
use crate::series::{format_timestamp, rolling_correlation, zscore, AlignedPair, ReturnSeries};

pub const CCF_HEADER: [&str; 3] = ["lag", "value", "band"];
pub const PRICES_HEADER: [&str; 3] = ["timestamp", "leader", "follower"];
pub const SCATTER_HEADER: [&str; 2] = ["leader_lagged_return", "follower_return"];
pub const ROLLING_HEADER: [&str; 4] = ["timestamp", "leader_lagged_return", "follower_return", "rolling_corr"];

pub const PLOT_KINDS: [&str; 4] = ["ccf", "prices", "scatter", "rolling"];

pub fn plot_file_name(analysis: &PairAnalysis, kind: &str) -> String {
    let r = &analysis.row;
    format!("{}_{}_{}_{kind}.csv", r.leader, r.follower, r.granularity.label())
}

fn to_csv<const N: usize>(header: [&str; N], rows: impl Iterator<Item = [String; N]>) -> Result<Vec<u8>, PipelineError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(PipelineError::csv)?;
    for row in rows {
        w.write_record(row).map_err(PipelineError::csv)?;
    }
    w.into_inner().map_err(|e| PipelineError::Csv(e.to_string()))
}

fn cumulative(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Writes the four plot files into `dir` and returns their paths in the
/// order ccf, prices, scatter, rolling.
pub fn emit_plot_data(analysis: &PairAnalysis, rolling_window: usize, dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    let pair = &analysis.oriented;
    let lag = analysis.row.optimal_lag;
    let ts = pair.timestamps();
    let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();

    let band = analysis.curve.significance_band.to_string();
    let ccf = to_csv(
        CCF_HEADER,
        analysis
            .curve
            .lags
            .iter()
            .zip(&analysis.curve.values)
            .map(|(l, v)| [l.to_string(), fmt_opt(*v), band.clone()]),
    )?;

    let za = zscore(&cumulative(pair.a().values())).unwrap_or_else(|| vec![0.0; pair.n()]);
    let zb = zscore(&cumulative(pair.b().values())).unwrap_or_else(|| vec![0.0; pair.n()]);
    let prices = to_csv(
        PRICES_HEADER,
        (0..pair.n()).map(|i| [format_timestamp(ts[i]), za[i].to_string(), zb[i].to_string()]),
    )?;

    let (x, y) = lagged_columns(pair, lag);
    let scatter = to_csv(
        SCATTER_HEADER,
        x.iter().zip(&y).map(|(a, b)| [a.to_string(), b.to_string()]),
    )?;

    let lagged_ts = ts[lag..].to_vec();
    let lagged = AlignedPair::from_aligned(
        ReturnSeries::new("leader", pair.a().granularity(), pair.a().kind(), lagged_ts.clone(), x.clone())?,
        ReturnSeries::new("follower", pair.b().granularity(), pair.b().kind(), lagged_ts.clone(), y.clone())?,
    )?;
    let mut corr: Vec<Option<f64>> = vec![None; lagged_ts.len()];
    if rolling_window <= lagged_ts.len() {
        for (i, (_, c)) in rolling_correlation(&lagged, rolling_window)?.into_iter().enumerate() {
            corr[i + rolling_window - 1] = c;
        }
    }
    let rolling = to_csv(
        ROLLING_HEADER,
        (0..lagged_ts.len())
            .map(|i| [format_timestamp(lagged_ts[i]), x[i].to_string(), y[i].to_string(), fmt_opt(corr[i])]),
    )?;

    let mut paths = Vec::with_capacity(4);
    for (kind, bytes) in PLOT_KINDS.iter().zip([ccf, prices, scatter, rolling]) {
        let path = dir.join(plot_file_name(analysis, kind));
        write_atomic(&path, &bytes)?;
        paths.push(path);
    }
    Ok(paths)
}
