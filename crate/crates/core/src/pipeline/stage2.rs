//! Per-pair lead-lag analysis and the ranked report rows.

use std::cmp::Ordering;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::lagdetect::{ccf, extended_lag_regression, granger_test, optimal_lag, CcfCurve, LagError, LagSearch, Side};
use crate::series::{align, AlignedPair, Granularity, ReturnSeries};
use crate::stats::t_two_sided_tail;

/// Settings shared by every pair of one granularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisParams {
    pub granularity: Granularity,
    pub max_lag: usize,
    pub search: LagSearch,
    pub max_order: usize,
    pub significance: f64,
    pub min_obs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReportRow {
    pub granularity: Granularity,
    pub leader: String,
    pub follower: String,
    pub n: usize,
    pub optimal_lag: usize,
    pub lag_wallclock: String,
    /// CCF at the optimal lag in the leader-to-follower direction.
    pub ccf_value: f64,
    pub ccf_band: f64,
    pub ccf_significant: bool,
    /// Two-sided p-value of the CCF value as a Pearson correlation on the
    /// lag's overlap.
    pub ccf_p: f64,
    pub granger_order: Option<usize>,
    pub granger_f: Option<f64>,
    /// Leader-causes-follower F-test p-value.
    pub granger_p: Option<f64>,
    /// Follower-causes-leader F-test p-value.
    pub granger_p_reverse: Option<f64>,
    pub granger_direction_confirmed: bool,
    pub beta: Option<f64>,
    pub beta_p: Option<f64>,
    pub r_squared: Option<f64>,
    pub r_squared_ext: Option<f64>,
    pub gamma_market: Option<f64>,
    pub delta_autoreg: Option<f64>,
    pub dropped_columns: Vec<String>,
    /// Bonferroni per-test threshold over the granularity's Granger tests.
    pub bonferroni_alpha: Option<f64>,
    pub rank: usize,
}

impl PairReportRow {
    /// Edge for cascade detection: significant CCF and a confirmed Granger
    /// direction.
    pub fn is_confirmed(&self) -> bool {
        self.ccf_significant && self.granger_direction_confirmed
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage2Skip {
    pub granularity: Granularity,
    pub symbol_a: String,
    pub symbol_b: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PairOutcome {
    Row(Box<PairReportRow>),
    Skipped(Stage2Skip),
}

/// The analyzed pair in leader-first order plus its curve, for plotting.
#[derive(Debug, Clone)]
pub struct PairAnalysis {
    pub row: PairReportRow,
    pub oriented: AlignedPair,
    pub curve: CcfCurve,
}

fn ccf_p_value(r: f64, n: usize) -> f64 {
    if n < 3 {
        return 1.0;
    }
    let df = (n - 2) as f64;
    let denom = 1.0 - r * r;
    if denom <= 0.0 {
        return 0.0;
    }
    t_two_sided_tail(r * (df / denom).sqrt(), df).unwrap_or(f64::NAN)
}

/// Full analysis of one unordered pair `(a, b)`. The sign of the optimal
/// lag picks the leader: positive means `a` leads.
pub fn analyze_pair(
    a: &ReturnSeries,
    b: &ReturnSeries,
    market: &ReturnSeries,
    p: &AnalysisParams,
) -> Result<PairAnalysis, LagError> {
    let pair = align(a, b, p.min_obs.max(3))?;
    let curve = ccf(&pair, p.max_lag)?;
    let opt = optimal_lag(&curve, p.search)?;
    let (oriented, lag) = if opt.lag >= 0 {
        (pair, opt.lag as usize)
    } else {
        (pair.swapped(), (-opt.lag) as usize)
    };
    let oriented_curve = if opt.lag >= 0 { curve } else { ccf(&oriented, p.max_lag)? };
    let overlap = oriented.n() - lag;
    let mut row = PairReportRow {
        granularity: p.granularity,
        leader: oriented.a().symbol().to_string(),
        follower: oriented.b().symbol().to_string(),
        n: oriented.n(),
        optimal_lag: lag,
        lag_wallclock: p.granularity.wallclock(lag as i64),
        ccf_value: opt.value,
        ccf_band: oriented_curve.significance_band,
        ccf_significant: opt.significant,
        ccf_p: ccf_p_value(opt.value, overlap),
        granger_order: None,
        granger_f: None,
        granger_p: None,
        granger_p_reverse: None,
        granger_direction_confirmed: false,
        beta: None,
        beta_p: None,
        r_squared: None,
        r_squared_ext: None,
        gamma_market: None,
        delta_autoreg: None,
        dropped_columns: Vec::new(),
        bonferroni_alpha: None,
        rank: 0,
    };
    if opt.significant && lag > 0 {
        let fwd = granger_test(&oriented, Side::A, p.max_order)?;
        let rev = granger_test(&oriented, Side::B, p.max_order)?;
        let reg = extended_lag_regression(&oriented, lag, market, p.min_obs)?;
        let ext = reg.extended.expect("extended terms present");
        row.granger_order = Some(fwd.selected_order);
        row.granger_f = Some(fwd.f_test.f_statistic);
        row.granger_p = Some(fwd.f_test.p_value);
        row.granger_p_reverse = Some(rev.f_test.p_value);
        row.granger_direction_confirmed = fwd.f_test.p_value < p.significance;
        row.beta = Some(reg.beta);
        row.beta_p = Some(reg.beta_t_pvalue);
        row.r_squared = Some(reg.r_squared);
        row.r_squared_ext = Some(ext.r_squared_ext);
        row.gamma_market = Some(ext.gamma_market);
        row.delta_autoreg = Some(ext.delta_autoreg);
        row.dropped_columns = ext.dropped_columns;
    }
    Ok(PairAnalysis {
        row,
        oriented,
        curve: oriented_curve,
    })
}

/// Ranking key: Granger p ascending (untested last), then |CCF| descending,
/// then leader and follower.
pub fn ranking_order(x: &PairReportRow, y: &PairReportRow) -> Ordering {
    let p = |r: &PairReportRow| r.granger_p.unwrap_or(f64::INFINITY);
    p(x).total_cmp(&p(y))
        .then_with(|| y.ccf_value.abs().total_cmp(&x.ccf_value.abs()))
        .then_with(|| (&x.leader, &x.follower).cmp(&(&y.leader, &y.follower)))
}

/// Sorts rows per granularity, assigns ranks from 1 within each, and fills
/// the Bonferroni column.
pub fn rank_rows(rows: &mut [PairReportRow], significance: f64) {
    rows.sort_by(|x, y| x.granularity.cmp(&y.granularity).then_with(|| ranking_order(x, y)));
    let mut start = 0;
    while start < rows.len() {
        let g = rows[start].granularity;
        let end = start + rows[start..].iter().take_while(|r| r.granularity == g).count();
        let tests = rows[start..end].iter().filter(|r| r.granger_p.is_some()).count();
        for (i, r) in rows[start..end].iter_mut().enumerate() {
            r.rank = i + 1;
            r.bonferroni_alpha = (tests > 0).then(|| significance / tests as f64);
        }
        start = end;
    }
}

pub const STAGE2_HEADER: [&str; 25] = [
    "rank",
    "granularity",
    "leader",
    "follower",
    "n",
    "lag_bars",
    "lag_wallclock",
    "ccf",
    "ccf_band",
    "ccf_significant",
    "ccf_p",
    "granger_order",
    "granger_f",
    "granger_p",
    "granger_p_reverse",
    "granger_direction_confirmed",
    "beta",
    "beta_p",
    "r_squared",
    "r_squared_ext",
    "gamma_market",
    "delta_autoreg",
    "dropped_columns",
    "bonferroni_alpha",
    "note",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_stage2_csv<W: Write>(rows: &[PairReportRow], out: W) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STAGE2_HEADER).map_err(PipelineError::csv)?;
    for r in rows {
        let note = if r.granger_p.is_none() {
            if r.optimal_lag == 0 {
                "contemporaneous peak; not tested"
            } else {
                "CCF not significant; not tested"
            }
        } else {
            ""
        };
        w.write_record([
            r.rank.to_string(),
            r.granularity.label().to_string(),
            r.leader.clone(),
            r.follower.clone(),
            r.n.to_string(),
            r.optimal_lag.to_string(),
            r.lag_wallclock.clone(),
            r.ccf_value.to_string(),
            r.ccf_band.to_string(),
            r.ccf_significant.to_string(),
            r.ccf_p.to_string(),
            opt(r.granger_order),
            opt(r.granger_f),
            opt(r.granger_p),
            opt(r.granger_p_reverse),
            r.granger_direction_confirmed.to_string(),
            opt(r.beta),
            opt(r.beta_p),
            opt(r.r_squared),
            opt(r.r_squared_ext),
            opt(r.gamma_market),
            opt(r.delta_autoreg),
            r.dropped_columns.join(";"),
            opt(r.bonferroni_alpha),
            note.to_string(),
        ])
        .map_err(PipelineError::csv)?;
    }
    w.flush().map_err(|e| PipelineError::Csv(e.to_string()))
}

pub fn read_stage2_csv<R: Read>(input: R) -> Result<Vec<PairReportRow>, PipelineError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers().map_err(PipelineError::csv)?.clone();
    if headers.iter().collect::<Vec<_>>() != STAGE2_HEADER {
        return Err(PipelineError::Csv(format!("unexpected stage-2 header {headers:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(PipelineError::csv)?;
        let bad = |col: &str| PipelineError::Csv(format!("stage-2 row {}: bad {col}", i + 2));
        let req = |j: usize| -> Result<f64, PipelineError> { rec[j].parse().map_err(|_| bad(STAGE2_HEADER[j])) };
        let optf = |j: usize| -> Result<Option<f64>, PipelineError> {
            if rec[j].is_empty() {
                Ok(None)
            } else {
                rec[j].parse().map(Some).map_err(|_| bad(STAGE2_HEADER[j]))
            }
        };
        let int = |j: usize| -> Result<usize, PipelineError> { rec[j].parse().map_err(|_| bad(STAGE2_HEADER[j])) };
        let flag = |j: usize| -> Result<bool, PipelineError> { rec[j].parse().map_err(|_| bad(STAGE2_HEADER[j])) };
        rows.push(PairReportRow {
            rank: int(0)?,
            granularity: rec[1].parse().map_err(|_| bad("granularity"))?,
            leader: rec[2].to_string(),
            follower: rec[3].to_string(),
            n: int(4)?,
            optimal_lag: int(5)?,
            lag_wallclock: rec[6].to_string(),
            ccf_value: req(7)?,
            ccf_band: req(8)?,
            ccf_significant: flag(9)?,
            ccf_p: req(10)?,
            granger_order: if rec[11].is_empty() { None } else { Some(int(11)?) },
            granger_f: optf(12)?,
            granger_p: optf(13)?,
            granger_p_reverse: optf(14)?,
            granger_direction_confirmed: flag(15)?,
            beta: optf(16)?,
            beta_p: optf(17)?,
            r_squared: optf(18)?,
            r_squared_ext: optf(19)?,
            gamma_market: optf(20)?,
            delta_autoreg: optf(21)?,
            dropped_columns: if rec[22].is_empty() {
                Vec::new()
            } else {
                rec[22].split(';').map(str::to_string).collect()
            },
            bonferroni_alpha: optf(23)?,
        });
    }
    Ok(rows)
}

pub const STAGE2_SKIP_HEADER: [&str; 4] = ["granularity", "symbol_a", "symbol_b", "reason"];

pub fn write_stage2_skips<W: Write>(skips: &[Stage2Skip], out: W) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STAGE2_SKIP_HEADER).map_err(PipelineError::csv)?;
    for s in skips {
        w.write_record([s.granularity.label(), &s.symbol_a, &s.symbol_b, &s.reason])
            .map_err(PipelineError::csv)?;
    }
    w.flush().map_err(|e| PipelineError::Csv(e.to_string()))
}

/// A confirmed row with placeholder statistics.
#[cfg(test)]
pub(crate) fn sample_row(leader: &str, follower: &str, lag: usize, ccf: f64) -> PairReportRow {
    PairReportRow {
        granularity: Granularity::Min1,
        leader: leader.into(),
        follower: follower.into(),
        n: 100,
        optimal_lag: lag,
        lag_wallclock: format!("{lag}m"),
        ccf_value: ccf,
        ccf_band: 0.1,
        ccf_significant: true,
        ccf_p: 0.0,
        granger_order: Some(1),
        granger_f: Some(10.0),
        granger_p: Some(0.001),
        granger_p_reverse: Some(0.5),
        granger_direction_confirmed: true,
        beta: None,
        beta_p: None,
        r_squared: None,
        r_squared_ext: None,
        gamma_market: None,
        delta_autoreg: None,
        dropped_columns: vec![],
        bonferroni_alpha: None,
        rank: 1,
    }
}
