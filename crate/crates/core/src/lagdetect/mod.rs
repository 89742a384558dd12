//! Stage-2 lead-lag verification on a screened pair: cross-correlation and
//! optimal lag, Granger causality through a bivariate VAR, and lag
//! regressions quantifying how much of the follower the leader explains.

mod ccf;
mod regression;
mod var;

pub use ccf::{ccf, optimal_lag, CcfCurve, LagSearch, OptimalLag};
pub use regression::{extended_lag_regression, lag_regression, lagged_columns, ExtendedTerms, LagRegressionResult};
pub use var::{
    fit_var, granger_test, select_order_bic, BicSelection, EquationRss, GrangerResult, Side, VarFit, GRANGER_ALPHA,
};

use thiserror::Error;

use crate::series::{Granularity, SeriesError};
use crate::stats::StatError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LagError {
    #[error("need more than 3 * max_lag observations (n = {n}, max_lag = {max_lag})")]
    TooShortForLag { n: usize, max_lag: usize },
    #[error("too short: need {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("VAR order must be at least 1, got {0}")]
    InvalidOrder(usize),
    #[error("lag must be at least 1, got {0}")]
    InvalidLag(usize),
    #[error("every CCF value is undefined")]
    AllNull,
    #[error("invalid CCF curve: {0}")]
    InvalidCurve(String),
    #[error("market series has no value at timestamp {0}")]
    MarketAlignmentFailure(i64),
    #[error(transparent)]
    Stat(#[from] StatError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Default CCF search half-width per granularity, in bars.
pub fn default_max_lag(g: Granularity) -> usize {
    match g {
        Granularity::Min1 => 30,
        Granularity::Min5 => 12,
        Granularity::Min15 => 8,
        Granularity::Daily => 10,
    }
}
