//! Sampling behaviour of the Granger test under the null.

mod common;

use common::{normals, rng};
use leadlag::lagdetect::{granger_test, Side};
use leadlag::series::AlignedPair;

/// Kolmogorov-Smirnov distance of a sample from Uniform(0, 1).
fn ks_uniform(mut p: Vec<f64>) -> f64 {
    p.sort_by(f64::total_cmp);
    let n = p.len() as f64;
    p.iter()
        .enumerate()
        .map(|(i, &v)| (v - i as f64 / n).max((i + 1) as f64 / n - v))
        .fold(0.0, f64::max)
}

#[test]
fn null_p_values_are_uniform() {
    let mut r = rng(2024);
    let p: Vec<f64> = (0..500)
        .map(|_| {
            let pair = AlignedPair::from_values(normals(&mut r, 500), normals(&mut r, 500)).unwrap();
            granger_test(&pair, Side::A, 5).unwrap().f_test.p_value
        })
        .collect();
    let d = ks_uniform(p);
    assert!(d < 0.06, "KS distance {d}");
}

#[test]
fn ks_distance_detects_a_skewed_sample() {
    let skewed: Vec<f64> = (0..500).map(|i| (i as f64 / 500.0).powi(2)).collect();
    assert!(ks_uniform(skewed) > 0.2);
}
