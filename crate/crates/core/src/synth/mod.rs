//! Seeded synthetic market with planted lead-lag links.
//!
//! Every return is a finite linear combination of independent standard
//! normal shocks: one market factor plus one idiosyncratic shock stream per
//! symbol. A follower's return is
//!
//! ```text
//! r_f,t = sum_links beta * r_leader,t-lag + market_beta_f * m_t + e_f,t
//! ```
//!
//! evaluated in topological order of the link graph. Because the shock
//! representation is tracked symbolically, population variances and
//! cross-covariances at any lag are exact, and those values are what
//! [`LinkTruth`] reports.

mod fixture;

pub use fixture::{write_fixture, Manifest, ManifestEntry, RNG_ALGORITHM};

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{datetime_to_timestamp, Bar, BarSeries, Granularity};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("planted links form a cycle through symbol {0}")]
    CyclicLinks(usize),
    #[error("invalid synthetic spec: {0}")]
    SpecDomain(String),
    #[error("fixture i/o failure at {path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedLink {
    pub leader: usize,
    pub follower: usize,
    /// Delay in bars, at least 1.
    pub lag: usize,
    pub beta: f64,
    /// Follower idiosyncratic std over the std of everything transmitted
    /// to it through its incoming links.
    pub noise_ratio: f64,
}

impl PlantedLink {
    /// Link whose implied R² (single incoming link, no market exposure on
    /// the follower) equals `r2`.
    pub fn with_r2(leader: usize, follower: usize, lag: usize, beta: f64, r2: f64) -> Self {
        Self {
            leader,
            follower,
            lag,
            beta,
            noise_ratio: (1.0 / r2 - 1.0).sqrt(),
        }
    }

    pub fn implied_r2(&self) -> f64 {
        1.0 / (1.0 + self.noise_ratio * self.noise_ratio)
    }
}

/// Bars removed from one symbol after generation (a trading halt, or a late
/// listing when `start_bar` is 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedGap {
    pub symbol: usize,
    pub start_bar: usize,
    pub len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Calendar {
    /// Uniform grid with no breaks; intraday bars roll across midnight.
    #[default]
    Continuous,
    /// Weekdays only, 09:30-11:30 and 13:00-15:00 for intraday bars.
    Session,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub seed: u64,
    pub n_symbols: usize,
    pub bars_per_symbol: usize,
    pub granularity: Granularity,
    /// Std of the market factor and of root symbols' idiosyncratic shocks.
    pub base_vol: f64,
    #[serde(default)]
    pub links: Vec<PlantedLink>,
    /// Per-symbol market betas are drawn uniformly from `[lo, hi]`.
    #[serde(default)]
    pub market_beta_range: [f64; 2],
    #[serde(default)]
    pub calendar: Calendar,
    #[serde(default = "default_start_date")]
    pub start_date: NaiveDate,
    #[serde(default)]
    pub gaps: Vec<PlantedGap>,
    #[serde(default = "default_prefix")]
    pub symbol_prefix: String,
}

fn default_start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 2).expect("valid date")
}

fn default_prefix() -> String {
    "S".into()
}

impl SynthSpec {
    pub fn new(seed: u64, n_symbols: usize, bars_per_symbol: usize, granularity: Granularity) -> Self {
        Self {
            seed,
            n_symbols,
            bars_per_symbol,
            granularity,
            base_vol: 0.001,
            links: Vec::new(),
            market_beta_range: [0.0, 0.0],
            calendar: Calendar::Continuous,
            start_date: default_start_date(),
            gaps: Vec::new(),
            symbol_prefix: default_prefix(),
        }
    }

    pub fn symbol(&self, index: usize) -> String {
        let width = self.n_symbols.saturating_sub(1).to_string().len().max(3);
        format!("{}{:0width$}", self.symbol_prefix, index)
    }

    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::SpecDomain(m));
        if self.n_symbols == 0 {
            return bad("n_symbols must be positive".into());
        }
        if self.bars_per_symbol < 2 {
            return bad("bars_per_symbol must be at least 2".into());
        }
        if !(self.base_vol.is_finite() && self.base_vol > 0.0) {
            return bad(format!("base_vol must be positive, got {}", self.base_vol));
        }
        let [lo, hi] = self.market_beta_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return bad(format!("market_beta_range [{lo}, {hi}] is not an interval"));
        }
        for (i, l) in self.links.iter().enumerate() {
            if l.leader >= self.n_symbols || l.follower >= self.n_symbols {
                return bad(format!("link {i}: symbol index out of range"));
            }
            if l.leader == l.follower {
                return bad(format!("link {i}: self-link on symbol {}", l.leader));
            }
            if l.lag == 0 {
                return bad(format!("link {i}: lag must be at least 1"));
            }
            if !(l.beta.is_finite() && l.beta != 0.0) {
                return bad(format!("link {i}: beta must be finite and non-zero"));
            }
            if !(l.noise_ratio.is_finite() && l.noise_ratio > 0.0) {
                return bad(format!("link {i}: noise_ratio must be positive"));
            }
        }
        for g in &self.gaps {
            if g.symbol >= self.n_symbols || g.start_bar + g.len > self.bars_per_symbol {
                return bad(format!("gap {g:?} outside the generated range"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Source {
    Market,
    Idio(usize),
}

/// Return of one symbol as `sum coef * z_source[t - delay]`.
type Representation = BTreeMap<(Source, usize), f64>;

fn variance(rep: &Representation) -> f64 {
    rep.values().map(|c| c * c).sum()
}

/// `cov(x_t, y_{t+lag})` for any integer lag.
fn cross_cov(x: &Representation, y: &Representation, lag: i64) -> f64 {
    x.iter()
        .filter_map(|(&(src, dx), cx)| {
            let dy = dx as i64 + lag;
            if dy < 0 {
                return None;
            }
            y.get(&(src, dy as usize)).map(|cy| cx * cy)
        })
        .sum()
}

fn max_delay(rep: &Representation) -> usize {
    rep.keys().map(|&(_, d)| d).max().unwrap_or(0)
}

/// Analytic properties of one planted link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkTruth {
    pub link: PlantedLink,
    pub leader_symbol: String,
    pub follower_symbol: String,
    /// Population correlation of `(leader_t, follower_{t+lag})`.
    pub population_ccf: f64,
    /// Population R² of the follower on the lagged leader (= ccf²).
    pub population_r2: f64,
}

#[derive(Debug, Clone)]
pub struct SynthMarket {
    pub bars: Vec<BarSeries>,
    pub truth: Vec<LinkTruth>,
    pub market_betas: Vec<f64>,
    /// Market factor returns, one per return slot (bars_per_symbol - 1).
    pub market_factor: Vec<f64>,
    reps: Vec<Representation>,
}

impl SynthMarket {
    /// Exact population correlation of `(r_i,t, r_j,t+lag)`.
    pub fn population_ccf(&self, i: usize, j: usize, lag: i64) -> f64 {
        let (x, y) = (&self.reps[i], &self.reps[j]);
        cross_cov(x, y, lag) / (variance(x) * variance(y)).sqrt()
    }

    pub fn population_std(&self, i: usize) -> f64 {
        variance(&self.reps[i]).sqrt()
    }
}

fn topological_order(n: usize, links: &[PlantedLink]) -> Result<Vec<usize>, SynthError> {
    let mut indegree = vec![0usize; n];
    for l in links {
        indegree[l.follower] += 1;
    }
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&i) = ready.iter().next() {
        ready.remove(&i);
        order.push(i);
        for l in links.iter().filter(|l| l.leader == i) {
            indegree[l.follower] -= 1;
            if indegree[l.follower] == 0 {
                ready.insert(l.follower);
            }
        }
    }
    match (0..n).find(|&i| indegree[i] > 0) {
        Some(i) => Err(SynthError::CyclicLinks(i)),
        None => Ok(order),
    }
}

fn timestamps(spec: &SynthSpec) -> Vec<i64> {
    let g = spec.granularity;
    let count = spec.bars_per_symbol;
    let at = |d: NaiveDate, h: u32, m: u32| datetime_to_timestamp(d.and_hms_opt(h, m, 0).expect("valid time"));
    match spec.calendar {
        Calendar::Continuous => {
            let first = if g.is_intraday() {
                at(spec.start_date, 9, 30) + g.bar_seconds()
            } else {
                at(spec.start_date, 15, 0)
            };
            (0..count as i64).map(|k| first + k * g.bar_seconds()).collect()
        }
        Calendar::Session => {
            let mut out = Vec::with_capacity(count);
            let mut day = spec.start_date;
            while out.len() < count {
                if !matches!(day.weekday(), Weekday::Sat | Weekday::Sun) {
                    if g.is_intraday() {
                        for (open_h, open_m) in [(9, 30), (13, 0)] {
                            let open = at(day, open_h, open_m);
                            let slots = 7200 / g.bar_seconds();
                            out.extend((1..=slots).map(|k| open + k * g.bar_seconds()));
                        }
                    } else {
                        out.push(at(day, 15, 0));
                    }
                }
                day = day.succ_opt().expect("date in range");
            }
            out.truncate(count);
            out
        }
    }
}

/// Generates the market described by `spec`. Pure function of the spec.
pub fn generate(spec: &SynthSpec) -> Result<SynthMarket, SynthError> {
    spec.validate()?;
    let order = topological_order(spec.n_symbols, &spec.links)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sigma = spec.base_vol;

    let [lo, hi] = spec.market_beta_range;
    let market_betas: Vec<f64> = (0..spec.n_symbols)
        .map(|_| if hi > lo { rng.random_range(lo..=hi) } else { lo })
        .collect();

    let mut reps: Vec<Representation> = vec![Representation::new(); spec.n_symbols];
    for &s in &order {
        let mut rep = Representation::new();
        let incoming: Vec<&PlantedLink> = spec.links.iter().filter(|l| l.follower == s).collect();
        for l in &incoming {
            for (&(src, d), c) in &reps[l.leader] {
                *rep.entry((src, d + l.lag)).or_insert(0.0) += l.beta * c;
            }
        }
        let idio_std = if incoming.is_empty() {
            sigma
        } else {
            // Multiple incoming links share one noise level: the largest ratio wins.
            let ratio = incoming.iter().map(|l| l.noise_ratio).fold(0.0, f64::max);
            ratio * variance(&rep).sqrt()
        };
        if market_betas[s] != 0.0 {
            *rep.entry((Source::Market, 0)).or_insert(0.0) += market_betas[s] * sigma;
        }
        rep.insert((Source::Idio(s), 0), idio_std);
        reps[s] = rep;
    }

    let burn = reps.iter().map(max_delay).max().unwrap_or(0);
    let n_returns = spec.bars_per_symbol - 1;
    let len = n_returns + burn;
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..len).map(|_| rng.sample(StandardNormal)).collect() };
    let market_z = draw(&mut rng);
    let idio_z: Vec<Vec<f64>> = (0..spec.n_symbols).map(|_| draw(&mut rng)).collect();

    let shock = |src: Source| -> &[f64] {
        match src {
            Source::Market => &market_z,
            Source::Idio(i) => &idio_z[i],
        }
    };
    let returns: Vec<Vec<f64>> = reps
        .iter()
        .map(|rep| {
            (0..n_returns)
                .map(|t| rep.iter().map(|(&(src, d), c)| c * shock(src)[t + burn - d]).sum())
                .collect()
        })
        .collect();

    let ts = timestamps(spec);
    let wick = Uniform::new_inclusive(-0.001, 0.001).expect("valid range");
    let volume: LogNormal<f64> = LogNormal::new(8.0, 0.5).expect("valid parameters");
    let mut bars = Vec::with_capacity(spec.n_symbols);
    for (s, r) in returns.iter().enumerate() {
        let mut out = Vec::with_capacity(spec.bars_per_symbol);
        let mut cum = 0.0;
        let mut prev_close = 100.0;
        for k in 0..spec.bars_per_symbol {
            if k > 0 {
                cum += r[k - 1];
            }
            let close = 100.0 * f64::exp(cum);
            let open = if k == 0 { close } else { prev_close };
            let u: f64 = wick.sample(&mut rng);
            out.push(Bar {
                timestamp: ts[k],
                open,
                high: open.max(close) * (1.0 + u.abs()),
                low: open.min(close) * (1.0 - u.abs()),
                close,
                volume: Distribution::<f64>::sample(&volume, &mut rng).round(),
            });
            prev_close = close;
        }
        for g in spec.gaps.iter().filter(|g| g.symbol == s) {
            // Later gaps index into the original bar numbering.
            let (start, end) = (ts[g.start_bar], ts[g.start_bar + g.len - 1]);
            out.retain(|b| b.timestamp < start || b.timestamp > end);
        }
        bars.push(BarSeries::new(spec.symbol(s), spec.granularity, out).map_err(|e| SynthError::SpecDomain(e.to_string()))?);
    }

    let market_factor = market_z[burn..].iter().map(|z| z * sigma).collect();
    let mut market = SynthMarket {
        bars,
        truth: Vec::new(),
        market_betas,
        market_factor,
        reps,
    };
    let reach = burn as i64 + 1;
    for (i, l) in spec.links.iter().enumerate() {
        let peak = market.population_ccf(l.leader, l.follower, l.lag as i64);
        for lag in -reach..=reach {
            if lag != l.lag as i64 && market.population_ccf(l.leader, l.follower, lag).abs() >= peak.abs() {
                return Err(SynthError::SpecDomain(format!(
                    "link {i}: population CCF at lag {lag} is at least the planted-lag value {peak}"
                )));
            }
        }
        market.truth.push(LinkTruth {
            link: *l,
            leader_symbol: spec.symbol(l.leader),
            follower_symbol: spec.symbol(l.follower),
            population_ccf: peak,
            population_r2: peak * peak,
        });
    }
    Ok(market)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{compute_returns, format_timestamp, ReturnKind};

    #[test]
    fn deterministic() {
        let mut spec = SynthSpec::new(42, 4, 300, Granularity::Min1);
        spec.links.push(PlantedLink::with_r2(0, 1, 3, 0.5, 0.09));
        spec.market_beta_range = [0.1, 0.4];
        let (x, y) = (generate(&spec).unwrap(), generate(&spec).unwrap());
        assert_eq!(x.bars, y.bars);
        assert_eq!(x.truth, y.truth);
        let mut other = spec.clone();
        other.seed = 43;
        assert_ne!(generate(&other).unwrap().bars, x.bars);
    }

    #[test]
    fn single_link_truth_matches_formula() {
        let mut spec = SynthSpec::new(1, 2, 50, Granularity::Min1);
        spec.links.push(PlantedLink::with_r2(0, 1, 3, 0.7, 0.09));
        let m = generate(&spec).unwrap();
        assert!((m.truth[0].population_r2 - 0.09).abs() < 1e-12);
        assert!((m.population_ccf(0, 1, 2)).abs() < 1e-15);
        assert_eq!(m.truth[0].leader_symbol, "S000");
    }

    #[test]
    fn cascade_truth_composes() {
        let mut spec = SynthSpec::new(5, 3, 50, Granularity::Min1);
        spec.links.push(PlantedLink::with_r2(0, 1, 2, 1.0, 0.1));
        spec.links.push(PlantedLink::with_r2(1, 2, 3, 1.0, 0.1));
        let m = generate(&spec).unwrap();
        let direct = m.population_ccf(0, 2, 5);
        assert!((direct - m.truth[0].population_ccf * m.truth[1].population_ccf).abs() < 1e-12);
    }

    #[test]
    fn returns_follow_representation() {
        let mut spec = SynthSpec::new(9, 2, 200, Granularity::Min5);
        spec.links.push(PlantedLink { leader: 0, follower: 1, lag: 2, beta: 0.5, noise_ratio: 1e-9 });
        let m = generate(&spec).unwrap();
        let r0 = compute_returns(&m.bars[0], ReturnKind::Log).unwrap();
        let r1 = compute_returns(&m.bars[1], ReturnKind::Log).unwrap();
        for t in 2..r0.len() {
            assert!((r1.values()[t] - 0.5 * r0.values()[t - 2]).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_cycles_and_bad_links() {
        let mut spec = SynthSpec::new(1, 3, 50, Granularity::Min1);
        spec.links.push(PlantedLink::with_r2(0, 1, 1, 1.0, 0.1));
        spec.links.push(PlantedLink::with_r2(1, 2, 1, 1.0, 0.1));
        spec.links.push(PlantedLink::with_r2(2, 0, 1, 1.0, 0.1));
        assert!(matches!(generate(&spec), Err(SynthError::CyclicLinks(_))));
        let mut selfy = SynthSpec::new(1, 3, 50, Granularity::Min1);
        selfy.links.push(PlantedLink::with_r2(1, 1, 1, 1.0, 0.1));
        assert!(matches!(generate(&selfy), Err(SynthError::SpecDomain(_))));
        let mut lag0 = SynthSpec::new(1, 3, 50, Granularity::Min1);
        lag0.links.push(PlantedLink::with_r2(0, 1, 0, 1.0, 0.1));
        assert!(matches!(generate(&lag0), Err(SynthError::SpecDomain(_))));
    }

    #[test]
    fn session_calendar_layout() {
        let mut spec = SynthSpec::new(1, 1, 250, Granularity::Min1);
        spec.calendar = Calendar::Session;
        let m = generate(&spec).unwrap();
        let b = m.bars[0].bars();
        assert_eq!(format_timestamp(b[0].timestamp), "2020-01-02T09:31:00");
        assert_eq!(format_timestamp(b[119].timestamp), "2020-01-02T11:30:00");
        assert_eq!(format_timestamp(b[120].timestamp), "2020-01-02T13:01:00");
        // 2020-01-02 is a Thursday; the next session is Friday the 3rd.
        assert_eq!(format_timestamp(b[240].timestamp), "2020-01-03T09:31:00");
    }

    #[test]
    fn gaps_remove_bars() {
        let mut spec = SynthSpec::new(1, 2, 100, Granularity::Daily);
        spec.gaps.push(PlantedGap { symbol: 1, start_bar: 10, len: 25 });
        let m = generate(&spec).unwrap();
        assert_eq!(m.bars[0].len(), 100);
        assert_eq!(m.bars[1].len(), 75);
    }
}
