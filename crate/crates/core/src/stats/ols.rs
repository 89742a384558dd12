use serde::{Deserialize, Serialize};

use super::StatError;

/// Relative tolerance on the Householder diagonal below which a column is
/// considered linearly dependent on the columns before it.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Column-oriented design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    n: usize,
    columns: Vec<Vec<f64>>,
    names: Vec<String>,
}

impl Design {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            columns: Vec::new(),
            names: Vec::new(),
        }
    }

    pub fn with_intercept(n: usize) -> Self {
        Self::new(n).column("intercept", vec![1.0; n])
    }

    /// Appends a named column. Length is checked at fit time.
    pub fn column(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        self.columns.push(values);
        self.names.push(name.into());
        self
    }

    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) {
        self.columns.push(values);
        self.names.push(name.into());
    }

    /// Row-major convenience constructor (no intercept added).
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        let mut d = Self::new(n);
        for j in 0..k {
            d.push(format!("x{j}"), rows.iter().map(|r| r[j]).collect());
        }
        d
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    fn without(&self, col: usize) -> Self {
        let mut d = self.clone();
        d.columns.remove(col);
        d.names.remove(col);
        d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    /// One per design column, in column order.
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub residuals: Vec<f64>,
    pub residual_sum_squares: f64,
    pub r_squared: f64,
    pub n: usize,
    pub k: usize,
}

impl OlsFit {
    pub fn df_resid(&self) -> usize {
        self.n - self.k
    }

    /// t statistic of coefficient `j` against zero.
    pub fn t_stat(&self, j: usize) -> f64 {
        self.coefficients[j] / self.std_errors[j]
    }
}

/// Least squares via Householder QR.
pub fn ols_fit(design: &Design, response: &[f64]) -> Result<OlsFit, StatError> {
    let n = design.rows();
    let k = design.cols();
    if response.len() != n {
        return Err(StatError::DimensionMismatch(format!(
            "response has {} rows, design has {n}",
            response.len()
        )));
    }
    if let Some(j) = design.columns.iter().position(|c| c.len() != n) {
        return Err(StatError::DimensionMismatch(format!(
            "column '{}' has {} rows, expected {n}",
            design.names[j],
            design.columns[j].len()
        )));
    }
    if k == 0 || n <= k {
        return Err(StatError::DimensionMismatch(format!(
            "need more observations than regressors (n = {n}, k = {k})"
        )));
    }

    let mut a: Vec<Vec<f64>> = design.columns.clone();
    let mut qty = response.to_vec();
    let col_norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();
    let mut diag = vec![0.0; k];

    for j in 0..k {
        let alpha = {
            let x = &a[j][j..];
            let s = norm(x);
            if x[0] > 0.0 {
                -s
            } else {
                s
            }
        };
        if alpha.abs() <= RANK_TOLERANCE * col_norms[j] || col_norms[j] == 0.0 {
            return Err(StatError::RankDeficient {
                column: j,
                name: design.names[j].clone(),
            });
        }
        // v = x - alpha e1, stored in place of column j.
        a[j][j] -= alpha;
        let v: Vec<f64> = a[j][j..].to_vec();
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        for col in a[j + 1..].iter_mut() {
            reflect(&v, vnorm2, &mut col[j..]);
        }
        reflect(&v, vnorm2, &mut qty[j..]);
        diag[j] = alpha;
    }

    // R is upper triangular: R[i][j] = a[j][i] for i < j, diag on the diagonal.
    let r = |i: usize, j: usize| if i == j { diag[i] } else { a[j][i] };
    let mut beta = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = qty[i];
        for j in i + 1..k {
            s -= r(i, j) * beta[j];
        }
        beta[i] = s / r(i, i);
    }

    // Inverse of R for coefficient standard errors.
    let mut rinv = vec![vec![0.0; k]; k];
    for c in 0..k {
        for i in (0..=c).rev() {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for j in i + 1..=c {
                s -= r(i, j) * rinv[j][c];
            }
            rinv[i][c] = s / r(i, i);
        }
    }

    let residuals: Vec<f64> = (0..n)
        .map(|t| {
            let fitted: f64 = design.columns.iter().zip(&beta).map(|(c, b)| c[t] * b).sum();
            response[t] - fitted
        })
        .collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let ybar = response.iter().sum::<f64>() / n as f64;
    let tss: f64 = response.iter().map(|y| (y - ybar) * (y - ybar)).sum();
    let r_squared = if tss > 0.0 {
        (1.0 - rss / tss).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let s2 = rss / (n - k) as f64;
    let std_errors = (0..k)
        .map(|i| (s2 * rinv[i].iter().map(|x| x * x).sum::<f64>()).sqrt())
        .collect();

    Ok(OlsFit {
        coefficients: beta,
        std_errors,
        residuals,
        residual_sum_squares: rss,
        r_squared,
        n,
        k,
    })
}

/// Fit that drops rank-deficient columns one at a time until the rest is of
/// full rank. Returns the fit (dropped coefficients are absent) plus the
/// dropped column names in the order they were removed. The intercept and
/// any column named in `protected` are never dropped.
pub fn ols_fit_dropping(
    design: &Design,
    response: &[f64],
    protected: &[&str],
) -> Result<(OlsFit, Design, Vec<String>), StatError> {
    let mut current = design.clone();
    let mut dropped = Vec::new();
    loop {
        match ols_fit(&current, response) {
            Ok(fit) => return Ok((fit, current, dropped)),
            Err(StatError::RankDeficient { column, name })
                if name != "intercept" && !protected.contains(&name.as_str()) =>
            {
                dropped.push(name);
                current = current.without(column);
            }
            Err(e) => return Err(e),
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    // Scaled to avoid overflow on large inputs.
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * x.iter().map(|v| (v / scale) * (v / scale)).sum::<f64>().sqrt()
}

fn reflect(v: &[f64], vnorm2: f64, x: &mut [f64]) {
    let dot: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let f = 2.0 * dot / vnorm2;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= f * vi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 + 2.0 * v).collect();
        let fit = ols_fit(&Design::with_intercept(10).column("x", x), &y).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit.residual_sum_squares < 1e-20);
    }

    #[test]
    fn orthogonal_response_gives_zero_slope() {
        // x is centered and symmetric, y symmetric in x: slope is exactly zero.
        let x = vec![-2.0, -1.0, 0.0, 1.0, 2.0];
        let y = vec![4.0, 1.0, 0.0, 1.0, 4.0];
        let fit = ols_fit(&Design::with_intercept(5).column("x", x), &y).unwrap();
        assert!(fit.coefficients[1].abs() < 1e-10);
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_column_is_rank_deficient() {
        let d = Design::with_intercept(5).column("z", vec![0.0; 5]);
        let err = ols_fit(&d, &[1.0, 2.0, 3.0, 4.0, 6.0]).unwrap_err();
        assert_eq!(err, StatError::RankDeficient { column: 1, name: "z".into() });
    }

    #[test]
    fn collinear_column_is_rank_deficient() {
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let d = Design::with_intercept(5)
            .column("x", x.clone())
            .column("x2", x.iter().map(|v| 3.0 * v - 1.0).collect());
        assert!(matches!(ols_fit(&d, &[1.0, 0.0, 3.0, 2.0, 5.0]), Err(StatError::RankDeficient { column: 2, .. })));
    }

    #[test]
    fn dimension_checks() {
        let d = Design::with_intercept(3).column("x", vec![1.0, 2.0]);
        assert!(matches!(ols_fit(&d, &[1.0, 2.0, 3.0]), Err(StatError::DimensionMismatch(_))));
        let d = Design::with_intercept(2).column("x", vec![1.0, 2.0]);
        assert!(matches!(ols_fit(&d, &[1.0, 2.0]), Err(StatError::DimensionMismatch(_))));
    }

    #[test]
    fn dropping_rule_removes_zero_column() {
        let x = vec![1.0, 2.0, 4.0, 3.0, 5.0, 7.0];
        let y = vec![2.0, 3.9, 8.1, 6.0, 10.2, 13.8];
        let d = Design::with_intercept(6).column("x", x.clone()).column("m", vec![0.0; 6]);
        let (fit, kept, dropped) = ols_fit_dropping(&d, &y, &[]).unwrap();
        assert_eq!(dropped, vec!["m".to_string()]);
        assert_eq!(kept.names(), &["intercept".to_string(), "x".to_string()]);
        let direct = ols_fit(&Design::with_intercept(6).column("x", x), &y).unwrap();
        assert_eq!(fit.coefficients, direct.coefficients);
    }
}
