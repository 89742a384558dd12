use serde::{Deserialize, Serialize};

use super::LagError;
use crate::series::{correlation, AlignedPair};

/// Two-sided 95% white-noise band multiplier.
const BAND_Z: f64 = 1.96;

/// Cross-correlation function over lags `-L..=L`.
///
/// The value at lag `l` correlates `a_t` with `b_{t+l}` over the `n - |l|`
/// overlapping observations, using the means and deviations of that window
/// only. A significant peak at positive `l` therefore reads as "a leads b by
/// l bars". Lags whose window is constant on either side are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcfCurve {
    pub lags: Vec<i64>,
    pub values: Vec<Option<f64>>,
    pub n_effective: Vec<usize>,
    pub significance_band: f64,
    pub n: usize,
}

impl CcfCurve {
    pub fn max_lag(&self) -> usize {
        self.lags.len() / 2
    }

    pub fn value_at(&self, lag: i64) -> Option<f64> {
        let l = self.max_lag() as i64;
        if lag.abs() > l {
            return None;
        }
        self.values[(lag + l) as usize]
    }

    /// Curve built from explicit values at lags `-L..=L`.
    pub fn from_values(values: Vec<Option<f64>>, n: usize) -> Result<Self, LagError> {
        if values.len() % 2 == 0 {
            return Err(LagError::InvalidCurve(format!(
                "expected an odd number of lag values, got {}",
                values.len()
            )));
        }
        let l = (values.len() / 2) as i64;
        let lags: Vec<i64> = (-l..=l).collect();
        let n_effective = lags.iter().map(|k| n.saturating_sub(k.unsigned_abs() as usize)).collect();
        Ok(Self {
            lags,
            values,
            n_effective,
            significance_band: BAND_Z / (n as f64).sqrt(),
            n,
        })
    }
}

pub fn ccf(pair: &AlignedPair, max_lag: usize) -> Result<CcfCurve, LagError> {
    let n = pair.n();
    if n <= 3 * max_lag || n < 3 {
        return Err(LagError::TooShortForLag { n, max_lag });
    }
    let (a, b) = (pair.a().values(), pair.b().values());
    let l = max_lag as i64;
    let mut lags = Vec::with_capacity(2 * max_lag + 1);
    let mut values = Vec::with_capacity(2 * max_lag + 1);
    let mut n_effective = Vec::with_capacity(2 * max_lag + 1);
    for lag in -l..=l {
        let k = lag.unsigned_abs() as usize;
        let (xa, xb) = if lag >= 0 {
            (&a[..n - k], &b[k..])
        } else {
            (&a[k..], &b[..n - k])
        };
        lags.push(lag);
        values.push(correlation(xa, xb));
        n_effective.push(n - k);
    }
    Ok(CcfCurve {
        lags,
        values,
        n_effective,
        significance_band: BAND_Z / (n as f64).sqrt(),
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagSearch {
    #[default]
    FullRange,
    PositiveOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalLag {
    pub lag: i64,
    pub value: f64,
    pub significant: bool,
}

/// Lag maximizing `|value|`. Exact ties go to the smaller `|lag|`, then to
/// the positive lag.
pub fn optimal_lag(curve: &CcfCurve, search: LagSearch) -> Result<OptimalLag, LagError> {
    let mut best: Option<(i64, f64)> = None;
    for (&lag, value) in curve.lags.iter().zip(&curve.values) {
        let Some(v) = *value else { continue };
        if search == LagSearch::PositiveOnly && lag <= 0 {
            continue;
        }
        let better = match best {
            None => true,
            Some((bl, bv)) => {
                let (m, bm) = (v.abs(), bv.abs());
                m > bm
                    || (m == bm
                        && (lag.abs() < bl.abs() || (lag.abs() == bl.abs() && lag > bl)))
            }
        };
        if better {
            best = Some((lag, v));
        }
    }
    let (lag, value) = best.ok_or(LagError::AllNull)?;
    Ok(OptimalLag {
        lag,
        value,
        significant: value.abs() > curve.significance_band,
    })
}
