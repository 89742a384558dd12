//! Grouping confirmed relationships by the industries of leader and
//! follower.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::stage2::PairReportRow;
use super::PipelineError;

pub const UNKNOWN_INDUSTRY: &str = "Unknown";

/// Reads a `symbol,industry` CSV.
pub fn read_industry_map<R: Read>(input: R) -> Result<BTreeMap<String, String>, PipelineError> {
    let bad = |m: String| PipelineError::MalformedMap(m);
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(str::to_ascii_lowercase)
        .collect();
    if header != ["symbol", "industry"] {
        return Err(bad(format!("expected header symbol,industry, got {}", header.join(","))));
    }
    let mut map = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(format!("line {}: {e}", i + 2)))?;
        if rec.len() != 2 || rec[0].is_empty() || rec[1].is_empty() {
            return Err(bad(format!("line {}: expected two non-empty fields", i + 2)));
        }
        if map.insert(rec[0].to_string(), rec[1].to_string()).is_some() {
            return Err(bad(format!("line {}: duplicate symbol {}", i + 2, &rec[0])));
        }
    }
    Ok(map)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndustryGroup {
    /// "Within X" or "X → Y".
    pub label: String,
    pub leader_industry: String,
    pub follower_industry: String,
    pub within: bool,
    pub frequency: usize,
    pub mean_abs_ccf: f64,
}

/// Aggregates the confirmed rows by (leader industry, follower industry),
/// most frequent first. Symbols missing from the map count as "Unknown".
pub fn industry_report(rows: &[PairReportRow], map: &BTreeMap<String, String>) -> Vec<IndustryGroup> {
    let mut groups: BTreeMap<(String, String), (usize, f64)> = BTreeMap::new();
    let lookup = |s: &str| match map.get(s) {
        Some(i) => i.clone(),
        None => {
            log::warn!("symbol {s} has no industry mapping; grouped as {UNKNOWN_INDUSTRY}");
            UNKNOWN_INDUSTRY.to_string()
        }
    };
    for r in rows.iter().filter(|r| r.is_confirmed()) {
        let g = groups.entry((lookup(&r.leader), lookup(&r.follower))).or_default();
        g.0 += 1;
        g.1 += r.ccf_value.abs();
    }
    let mut out: Vec<IndustryGroup> = groups
        .into_iter()
        .map(|((l, f), (count, sum))| IndustryGroup {
            label: if l == f { format!("Within {l}") } else { format!("{l} → {f}") },
            within: l == f,
            leader_industry: l,
            follower_industry: f,
            frequency: count,
            mean_abs_ccf: sum / count as f64,
        })
        .collect();
    out.sort_by(|x, y| y.frequency.cmp(&x.frequency).then_with(|| x.label.cmp(&y.label)));
    out
}

pub const INDUSTRY_HEADER: [&str; 6] = [
    "group",
    "leader_industry",
    "follower_industry",
    "type",
    "frequency",
    "mean_abs_ccf",
];

pub fn write_industry_report<W: Write>(groups: &[IndustryGroup], out: W) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(INDUSTRY_HEADER).map_err(PipelineError::csv)?;
    for g in groups {
        w.write_record([
            g.label.clone(),
            g.leader_industry.clone(),
            g.follower_industry.clone(),
            if g.within { "within" } else { "cross" }.to_string(),
            g.frequency.to_string(),
            g.mean_abs_ccf.to_string(),
        ])
        .map_err(PipelineError::csv)?;
    }
    w.flush().map_err(|e| PipelineError::Csv(e.to_string()))
}
