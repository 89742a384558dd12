use serde::{Deserialize, Serialize};

use super::LagError;
use crate::series::{AlignedPair, ReturnSeries};
use crate::stats::{ols_fit, ols_fit_dropping, t_two_sided_tail, Design, OlsFit};

/// Extra terms of the regression with market and autoregressive controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedTerms {
    pub beta: f64,
    pub gamma_market: f64,
    pub delta_autoreg: f64,
    pub r_squared_ext: f64,
    /// Regressors removed by the collinearity rule (their coefficient is
    /// reported as 0).
    pub dropped_columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagRegressionResult {
    pub lag: usize,
    pub n_used: usize,
    pub alpha: f64,
    pub beta: f64,
    pub r_squared: f64,
    pub beta_t_pvalue: f64,
    pub extended: Option<ExtendedTerms>,
}

fn check(pair: &AlignedPair, lag: usize, min_obs: usize) -> Result<usize, LagError> {
    if lag == 0 {
        return Err(LagError::InvalidLag(0));
    }
    let n = pair.n();
    if n <= lag || n - lag < min_obs.max(3) {
        return Err(LagError::TooShort {
            needed: lag + min_obs.max(3),
            got: n,
        });
    }
    Ok(n - lag)
}

fn two_sided_p(fit: &OlsFit, j: usize) -> Result<f64, LagError> {
    let (b, se) = (fit.coefficients[j], fit.std_errors[j]);
    if se == 0.0 {
        return Ok(if b == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(t_two_sided_tail(b / se, fit.df_resid() as f64)?)
}

/// The leader/follower variables of the lag regression, `(a_{t-lag}, b_t)`.
pub fn lagged_columns(pair: &AlignedPair, lag: usize) -> (Vec<f64>, Vec<f64>) {
    let n = pair.n();
    (
        pair.a().values()[..n - lag].to_vec(),
        pair.b().values()[lag..].to_vec(),
    )
}

/// `b_t = alpha + beta * a_{t-lag} + e_t` over rows `lag..n`.
pub fn lag_regression(pair: &AlignedPair, lag: usize, min_obs: usize) -> Result<LagRegressionResult, LagError> {
    let rows = check(pair, lag, min_obs)?;
    let (x, y) = lagged_columns(pair, lag);
    let fit = ols_fit(&Design::with_intercept(rows).column("leader_lag", x), &y)?;
    Ok(LagRegressionResult {
        lag,
        n_used: rows,
        alpha: fit.coefficients[0],
        beta: fit.coefficients[1],
        r_squared: fit.r_squared,
        beta_t_pvalue: two_sided_p(&fit, 1)?,
        extended: None,
    })
}

/// Lag regression plus the controlled variant
/// `b_t = alpha + beta a_{t-lag} + gamma m_t + delta b_{t-1} + e_t`,
/// both over rows `lag..n`. `market` must cover every timestamp of the pair.
pub fn extended_lag_regression(
    pair: &AlignedPair,
    lag: usize,
    market: &ReturnSeries,
    min_obs: usize,
) -> Result<LagRegressionResult, LagError> {
    let mut base = lag_regression(pair, lag, min_obs)?;
    let rows = base.n_used;
    let n = pair.n();
    let ts = pair.timestamps();
    let m: Vec<f64> = ts[lag..]
        .iter()
        .map(|&t| market.value_at(t).ok_or(LagError::MarketAlignmentFailure(t)))
        .collect::<Result<_, _>>()?;
    let (x, y) = lagged_columns(pair, lag);
    let b = pair.b().values();
    let design = Design::with_intercept(rows)
        .column("leader_lag", x)
        .column("market", m)
        .column("follower_lag1", b[lag - 1..n - 1].to_vec());
    let (fit, kept, dropped) = ols_fit_dropping(&design, &y, &["leader_lag"])?;
    for name in &dropped {
        log::warn!(
            "{}->{}: dropped collinear regressor '{name}' from the extended lag regression",
            pair.a().symbol(),
            pair.b().symbol()
        );
    }
    let coef = |name: &str| {
        kept.names()
            .iter()
            .position(|c| c == name)
            .map_or(0.0, |j| fit.coefficients[j])
    };
    base.extended = Some(ExtendedTerms {
        beta: coef("leader_lag"),
        gamma_market: coef("market"),
        delta_autoreg: coef("follower_lag1"),
        r_squared_ext: fit.r_squared,
        dropped_columns: dropped,
    });
    Ok(base)
}
