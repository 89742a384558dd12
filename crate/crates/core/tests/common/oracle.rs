//! Slow, direct reference implementations used to check the library.

/// Minimum path cost over every monotone warping path, enumerated
/// explicitly. Costs are summed from the start of the path.
pub fn dtw_exhaustive(a: &[f64], b: &[f64], band: Option<usize>) -> f64 {
    fn walk(a: &[f64], b: &[f64], band: Option<usize>, i: usize, j: usize, acc: f64, best: &mut f64) {
        if let Some(w) = band {
            if i.abs_diff(j) > w {
                return;
            }
        }
        let acc = acc + (a[i] - b[j]).abs();
        if i == a.len() - 1 && j == b.len() - 1 {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, band, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, band, i, j + 1, acc, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, band, i + 1, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, band, 0, 0, 0.0, &mut best);
    best
}

/// `(concordant - discordant, pairs untied in x, pairs untied in y)` by
/// enumerating all pairs.
pub fn kendall_counts(x: &[f64], y: &[f64]) -> (i64, u64, u64) {
    let (mut net, mut ux, mut uy) = (0i64, 0u64, 0u64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = (x[i] - x[j]).signum() * ((x[i] != x[j]) as i32 as f64);
            let dy = (y[i] - y[j]).signum() * ((y[i] != y[j]) as i32 as f64);
            if dx != 0.0 {
                ux += 1;
            }
            if dy != 0.0 {
                uy += 1;
            }
            net += (dx * dy) as i64;
        }
    }
    (net, ux, uy)
}

/// Least squares through the normal equations `X'X b = X'y`, solved by
/// Gaussian elimination with partial pivoting. `cols` are the design columns.
pub fn normal_equations(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let k = cols.len();
    let mut m = vec![vec![0.0; k + 1]; k];
    for r in 0..k {
        for c in 0..k {
            m[r][c] = cols[r].iter().zip(&cols[c]).map(|(u, v)| u * v).sum();
        }
        m[r][k] = cols[r].iter().zip(y).map(|(u, v)| u * v).sum();
    }
    for p in 0..k {
        let piv = (p..k).max_by(|&i, &j| m[i][p].abs().total_cmp(&m[j][p].abs())).unwrap();
        m.swap(p, piv);
        for r in p + 1..k {
            let f = m[r][p] / m[p][p];
            for c in p..=k {
                m[r][c] -= f * m[p][c];
            }
        }
    }
    let mut b = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| m[r][c] * b[c]).sum();
        b[r] = (m[r][k] - s) / m[r][r];
    }
    b
}

/// Sample correlation of `a_t` and `b_{t+lag}` over the overlap, with the
/// window's own means and deviations.
pub fn ccf_brute(a: &[f64], b: &[f64], lag: i64) -> Option<f64> {
    let n = a.len();
    let k = lag.unsigned_abs() as usize;
    let pairs: Vec<(f64, f64)> = (0..n - k)
        .map(|t| if lag >= 0 { (a[t], b[t + k]) } else { (a[t + k], b[t]) })
        .collect();
    let m = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / m;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for &(x, y) in &pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}
