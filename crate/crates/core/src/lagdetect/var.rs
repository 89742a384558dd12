//! Bivariate VAR by per-equation OLS, BIC order selection and Granger
//! F-tests.
//!
//! For target series `y` and other series `x`, the unrestricted equation of
//! order `p` is
//!
//! ```text
//! y_t = c + sum_{k=1..p} beta_k y_{t-k} + sum_{k=1..p} gamma_k x_{t-k} + e_t
//! ```
//!
//! and the restricted equation drops every `gamma_k`.

use serde::{Deserialize, Serialize};

use super::LagError;
use crate::series::AlignedPair;
use crate::stats::{nested_f_test, ols_fit, Design, FTestResult};

/// Which member of an [`AlignedPair`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Self {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    fn split<'p>(self, pair: &'p AlignedPair) -> (&'p [f64], &'p [f64]) {
        match self {
            Side::A => (pair.a().values(), pair.b().values()),
            Side::B => (pair.b().values(), pair.a().values()),
        }
    }

    pub fn symbol(self, pair: &AlignedPair) -> &str {
        match self {
            Side::A => pair.a().symbol(),
            Side::B => pair.b().symbol(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationRss {
    pub unrestricted: f64,
    pub restricted: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarFit {
    pub order: usize,
    pub n_used: usize,
    /// Equation with `a` as the dependent variable.
    pub equation_a: EquationRss,
    /// Equation with `b` as the dependent variable.
    pub equation_b: EquationRss,
}

impl VarFit {
    pub fn equation(&self, target: Side) -> EquationRss {
        match target {
            Side::A => self.equation_a,
            Side::B => self.equation_b,
        }
    }
}

fn equation_design(target: &[f64], other: &[f64], p: usize, start: usize, cross: bool) -> (Design, Vec<f64>) {
    let n = target.len();
    let rows = n - start;
    let mut d = Design::with_intercept(rows);
    for k in 1..=p {
        d.push(format!("own_lag{k}"), target[start - k..n - k].to_vec());
    }
    if cross {
        for k in 1..=p {
            d.push(format!("cross_lag{k}"), other[start - k..n - k].to_vec());
        }
    }
    (d, target[start..].to_vec())
}

fn equation_rss(target: &[f64], other: &[f64], p: usize, start: usize, cross: bool) -> Result<f64, LagError> {
    let (d, y) = equation_design(target, other, p, start, cross);
    Ok(ols_fit(&d, &y)?.residual_sum_squares)
}

fn check_order(n: usize, p: usize, start: usize) -> Result<(), LagError> {
    if p == 0 {
        return Err(LagError::InvalidOrder(p));
    }
    if start > n || n - start <= 2 * p + 1 {
        return Err(LagError::TooShort {
            needed: start + 2 * p + 2,
            got: n,
        });
    }
    Ok(())
}

fn fit_window(pair: &AlignedPair, p: usize, start: usize) -> Result<VarFit, LagError> {
    check_order(pair.n(), p, start)?;
    let eq = |side: Side| -> Result<EquationRss, LagError> {
        let (y, x) = side.split(pair);
        Ok(EquationRss {
            unrestricted: equation_rss(y, x, p, start, true)?,
            restricted: equation_rss(y, x, p, start, false)?,
        })
    };
    Ok(VarFit {
        order: p,
        n_used: pair.n() - start,
        equation_a: eq(Side::A)?,
        equation_b: eq(Side::B)?,
    })
}

/// Both equations of a VAR(p), unrestricted and restricted, over the
/// `n - p` usable rows.
pub fn fit_var(pair: &AlignedPair, order: usize) -> Result<VarFit, LagError> {
    fit_window(pair, order, order)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicSelection {
    pub selected: usize,
    /// Entry `i` is BIC at order `i + 1`.
    pub bic_by_order: Vec<f64>,
}

/// `BIC(p) = ln(RSS_p / T) + p ln(T) / T` for the unrestricted equation of
/// `target`, with every candidate order fit on the same `T = n - max_order`
/// rows. Ties go to the smaller order.
pub fn select_order_bic(pair: &AlignedPair, target: Side, max_order: usize) -> Result<BicSelection, LagError> {
    if max_order == 0 {
        return Err(LagError::InvalidOrder(0));
    }
    check_order(pair.n(), max_order, max_order)?;
    let t = (pair.n() - max_order) as f64;
    let (y, x) = target.split(pair);
    let mut bic_by_order = Vec::with_capacity(max_order);
    for p in 1..=max_order {
        let rss = equation_rss(y, x, p, max_order, true)?;
        bic_by_order.push((rss / t).ln() + p as f64 * t.ln() / t);
    }
    let mut selected = 1;
    for (i, &b) in bic_by_order.iter().enumerate() {
        if b < bic_by_order[selected - 1] {
            selected = i + 1;
        }
    }
    Ok(BicSelection {
        selected,
        bic_by_order,
    })
}

/// Significance level behind [`GrangerResult::causal_at_5pct`].
pub const GRANGER_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrangerResult {
    pub cause: String,
    pub effect: String,
    pub selected_order: usize,
    pub bic_by_order: Vec<f64>,
    pub f_test: FTestResult,
    pub causal_at_5pct: bool,
}

/// Does `cause` Granger-cause the other member of the pair? The order is
/// chosen by BIC on the effect's equation, then both effect equations are
/// refit on the `n - p` rows available at that order.
pub fn granger_test(pair: &AlignedPair, cause: Side, max_order: usize) -> Result<GrangerResult, LagError> {
    let effect = cause.other();
    let sel = select_order_bic(pair, effect, max_order)?;
    let p = sel.selected;
    let fit = fit_var(pair, p)?;
    let eq = fit.equation(effect);
    let df_den = fit.n_used - 2 * p - 1;
    let f_test = nested_f_test(eq.restricted, eq.unrestricted, p, df_den)?;
    Ok(GrangerResult {
        cause: cause.symbol(pair).to_string(),
        effect: effect.symbol(pair).to_string(),
        selected_order: p,
        bic_by_order: sel.bic_by_order,
        causal_at_5pct: f_test.p_value < GRANGER_ALPHA,
        f_test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::StatError;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn noise(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    fn planted(seed: u64, n: usize) -> AlignedPair {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = noise(&mut rng, n);
        let e = noise(&mut rng, n);
        let b = (0..n).map(|t| if t == 0 { e[0] } else { 0.8 * a[t - 1] + e[t] }).collect();
        AlignedPair::from_values(a, b).unwrap()
    }

    #[test]
    fn order_zero_rejected() {
        let p = planted(1, 100);
        assert_eq!(fit_var(&p, 0), Err(LagError::InvalidOrder(0)));
        assert_eq!(select_order_bic(&p, Side::B, 0), Err(LagError::InvalidOrder(0)));
    }

    #[test]
    fn too_short_for_order() {
        let p = planted(1, 8);
        assert!(matches!(fit_var(&p, 3), Err(LagError::TooShort { .. })));
    }

    #[test]
    fn planted_causality_shrinks_rss() {
        let fit = fit_var(&planted(2, 2000), 2).unwrap();
        assert_eq!(fit.n_used, 1998);
        let eq = fit.equation_b;
        assert!(eq.unrestricted < 0.7 * eq.restricted);
        // a does not depend on b
        let ea = fit.equation_a;
        assert!(ea.restricted - ea.unrestricted < 0.01 * ea.unrestricted);
    }

    #[test]
    fn single_candidate_order() {
        let s = select_order_bic(&planted(3, 500), Side::B, 1).unwrap();
        assert_eq!(s.selected, 1);
        assert_eq!(s.bic_by_order.len(), 1);
    }

    #[test]
    fn granger_planted_direction() {
        let pair = planted(4, 5000);
        let fwd = granger_test(&pair, Side::A, 5).unwrap();
        assert_eq!((fwd.cause.as_str(), fwd.effect.as_str()), ("a", "b"));
        assert!(fwd.causal_at_5pct);
        assert!(fwd.f_test.p_value < 1e-3);
        assert_eq!(fwd.bic_by_order.len(), 5);
        assert!(fwd.selected_order <= 5);
        let min = fwd.bic_by_order.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(fwd.bic_by_order[fwd.selected_order - 1], min);
    }

    #[test]
    fn shifted_copy_is_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = noise(&mut rng, 300);
        let b = a.iter().map(|v| v + 0.25).collect();
        let pair = AlignedPair::from_values(a, b).unwrap();
        let err = granger_test(&pair, Side::A, 3).unwrap_err();
        assert!(matches!(err, LagError::Stat(StatError::RankDeficient { .. })), "{err:?}");
    }
}
