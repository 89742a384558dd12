//! Numerical kernel: least squares, t and F distributions, nested-model
//! F-tests.

mod dist;
mod ols;

pub use dist::{f_cdf, f_sf, incomplete_beta, ln_beta, ln_gamma, t_cdf, t_two_sided_tail};
pub use ols::{ols_fit, ols_fit_dropping, Design, OlsFit, RANK_TOLERANCE};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatError {
    #[error("design matrix is rank deficient at column {column} ('{name}')")]
    RankDeficient { column: usize, name: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid degrees of freedom: {0}")]
    InvalidDegreesOfFreedom(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("incomplete beta did not converge (a = {a}, b = {b}, x = {x}) after {iterations} iterations")]
    NoConvergence {
        a: f64,
        b: f64,
        x: f64,
        iterations: usize,
    },
    #[error("unrestricted RSS must be positive, got {0}")]
    NonPositiveDenominator(f64),
    #[error("restricted RSS {restricted} is below unrestricted RSS {unrestricted}")]
    RestrictedBelowUnrestricted { restricted: f64, unrestricted: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FTestResult {
    pub f_statistic: f64,
    pub df_num: usize,
    pub df_den: usize,
    pub p_value: f64,
}

/// Relative slack under which `RSS_r < RSS_u` is treated as rounding noise.
const NESTED_CLAMP: f64 = 1e-12;

/// F-test of a restricted model nested in an unrestricted one:
/// `F = ((RSS_r - RSS_u) / q) / (RSS_u / df_den)`.
pub fn nested_f_test(
    restricted_rss: f64,
    unrestricted_rss: f64,
    num_restrictions: usize,
    df_den: usize,
) -> Result<FTestResult, StatError> {
    if num_restrictions == 0 || df_den == 0 {
        return Err(StatError::InvalidDegreesOfFreedom(format!(
            "q = {num_restrictions}, df_den = {df_den}"
        )));
    }
    if !(unrestricted_rss > 0.0) {
        return Err(StatError::NonPositiveDenominator(unrestricted_rss));
    }
    let diff = restricted_rss - unrestricted_rss;
    let f = if diff >= 0.0 {
        (diff / num_restrictions as f64) / (unrestricted_rss / df_den as f64)
    } else if -diff < NESTED_CLAMP * unrestricted_rss {
        0.0
    } else {
        return Err(StatError::RestrictedBelowUnrestricted {
            restricted: restricted_rss,
            unrestricted: unrestricted_rss,
        });
    };
    Ok(FTestResult {
        f_statistic: f,
        df_num: num_restrictions,
        df_den,
        p_value: f_sf(f, num_restrictions as f64, df_den as f64)?,
    })
}
