use serde::{Deserialize, Serialize};

use super::{correlation, mean, sample_std, AlignedPair, ReturnSeries, SeriesError};

/// Descriptive statistics of a return series.
///
/// Skewness and kurtosis are the standardized third and fourth central
/// moments (population moments, kurtosis not excess-adjusted, so a normal
/// sample sits near 3). `autocorr_lag1` is the Pearson correlation of
/// `(r_t, r_{t+1})`; it is 0 when either shifted slice is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub autocorr_lag1: f64,
}

pub fn summary_stats(r: &ReturnSeries) -> Result<SummaryStats, SeriesError> {
    let v = r.values();
    let n = v.len();
    if n < 4 {
        return Err(SeriesError::TooShort { needed: 4, got: n });
    }
    let m = mean(v);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in v {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let nf = n as f64;
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    if !(m2 > 0.0) {
        return Err(SeriesError::ZeroVariance(r.symbol().to_string()));
    }
    Ok(SummaryStats {
        n,
        mean: m,
        std_dev: sample_std(v, m),
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
        autocorr_lag1: correlation(&v[..n - 1], &v[1..]).unwrap_or(0.0),
    })
}

/// Trailing-window Pearson correlation. One entry per index from
/// `window - 1` on; windows where either side is constant yield `None`.
pub fn rolling_correlation(
    pair: &AlignedPair,
    window: usize,
) -> Result<Vec<(i64, Option<f64>)>, SeriesError> {
    if window < 3 {
        return Err(SeriesError::WindowTooSmall(window));
    }
    let n = pair.n();
    if window > n {
        return Err(SeriesError::WindowTooLarge { window, n });
    }
    let (a, b, ts) = (pair.a().values(), pair.b().values(), pair.timestamps());
    Ok((window - 1..n)
        .map(|end| {
            let start = end + 1 - window;
            (ts[end], correlation(&a[start..=end], &b[start..=end]))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn alternating_series() {
        let r = ReturnSeries::from_values("x", vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        let s = summary_stats(&r).unwrap();
        assert_eq!(s.mean, 0.0);
        assert!((s.autocorr_lag1 + 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_series_is_zero_variance() {
        let r = ReturnSeries::from_values("x", vec![0.5; 10]).unwrap();
        assert!(matches!(summary_stats(&r), Err(SeriesError::ZeroVariance(_))));
        let short = ReturnSeries::from_values("x", vec![0.5, 1.0, 2.0]).unwrap();
        assert!(matches!(summary_stats(&short), Err(SeriesError::TooShort { .. })));
    }

    #[test]
    fn normal_kurtosis_near_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = ReturnSeries::from_values("x", normal_vec(&mut rng, 100_000)).unwrap();
        let s = summary_stats(&r).unwrap();
        assert!((s.kurtosis - 3.0).abs() < 0.1, "kurtosis {}", s.kurtosis);
        assert!(s.skewness.abs() < 0.05);
        assert!((s.std_dev - 1.0).abs() < 0.02);
    }

    #[test]
    fn rolling_identity_and_sign_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = normal_vec(&mut rng, 40);
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        let same = rolling_correlation(&AlignedPair::from_values(a.clone(), a.clone()).unwrap(), 10).unwrap();
        assert_eq!(same.len(), 31);
        assert!(same.iter().all(|(_, c)| (c.unwrap() - 1.0).abs() < 1e-12));
        let flipped = rolling_correlation(&AlignedPair::from_values(a, neg).unwrap(), 10).unwrap();
        assert!(flipped.iter().all(|(_, c)| (c.unwrap() + 1.0).abs() < 1e-12));
    }

    #[test]
    fn rolling_window_bounds_and_nulls() {
        let p = AlignedPair::from_values(vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 1.0, 1.0, 2.0]).unwrap();
        assert!(matches!(rolling_correlation(&p, 2), Err(SeriesError::WindowTooSmall(2))));
        assert!(matches!(rolling_correlation(&p, 5), Err(SeriesError::WindowTooLarge { .. })));
        let out = rolling_correlation(&p, 3).unwrap();
        assert_eq!(out[0], (2, None));
        assert!(out[1].1.is_some());
    }

    #[test]
    fn rolling_matches_per_window_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = normal_vec(&mut rng, 200);
        let b: Vec<f64> = a.iter().map(|x| 0.3 * x + rng.sample::<f64, _>(StandardNormal)).collect();
        let out = rolling_correlation(&AlignedPair::from_values(a.clone(), b.clone()).unwrap(), 50).unwrap();
        assert_eq!(out.len(), 151);
        for (k, (_, c)) in out.iter().enumerate() {
            let (xa, xb) = (&a[k..k + 50], &b[k..k + 50]);
            let ma = xa.iter().sum::<f64>() / 50.0;
            let mb = xb.iter().sum::<f64>() / 50.0;
            let cov: f64 = (0..50).map(|i| (xa[i] - ma) * (xb[i] - mb)).sum();
            let va: f64 = xa.iter().map(|x| (x - ma).powi(2)).sum();
            let vb: f64 = xb.iter().map(|x| (x - mb).powi(2)).sum();
            let expected = cov / (va * vb).sqrt();
            assert!((c.unwrap() - expected).abs() < 1e-12);
        }
    }
}
