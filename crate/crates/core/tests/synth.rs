//! Generator determinism and planted-truth recovery.

mod common;

use std::collections::BTreeSet;

use leadlag::coupling::pearson_slices;
use leadlag::lagdetect::{ccf, lag_regression, optimal_lag, LagSearch};
use leadlag::series::{align, compute_returns, ReturnKind, ReturnSeries};
use leadlag::series::Granularity;
use leadlag::synth::{generate, write_fixture, PlantedLink, SynthError, SynthSpec};

fn digest(spec: &SynthSpec) -> String {
    let dir = tempfile::tempdir().unwrap();
    let m = generate(spec).unwrap();
    let manifest = write_fixture(&m.bars, dir.path(), Some(spec.seed)).unwrap();
    manifest.files.iter().map(|f| f.sha256.as_str()).collect::<Vec<_>>().join(":")
}

fn returns(spec: &SynthSpec) -> Vec<ReturnSeries> {
    generate(spec)
        .unwrap()
        .bars
        .iter()
        .map(|b| compute_returns(b, ReturnKind::Log).unwrap())
        .collect()
}

#[test]
fn seeds_give_distinct_fixtures_and_repeat_exactly() {
    let spec = |seed| {
        let mut s = SynthSpec::new(seed, 3, 200, Granularity::Min5);
        s.links.push(PlantedLink::with_r2(0, 1, 2, 1.0, 0.3));
        s
    };
    let digests: BTreeSet<String> = (0..100).map(|seed| digest(&spec(seed))).collect();
    assert_eq!(digests.len(), 100);
    assert_eq!(digest(&spec(7)), digest(&spec(7)));
}

#[test]
fn independent_symbols_are_uncorrelated() {
    let n_bars = 20_000;
    let r = returns(&SynthSpec::new(5, 6, n_bars, Granularity::Min1));
    let bound = 4.0 / ((n_bars - 1) as f64).sqrt();
    for i in 0..r.len() {
        for j in i + 1..r.len() {
            let rho = pearson_slices(r[i].values(), r[j].values()).unwrap();
            assert!(rho.abs() < bound, "{i},{j}: {rho}");
        }
    }
}

#[test]
fn single_link_recovers_lag_and_r_squared() {
    let mut spec = SynthSpec::new(77, 2, 50_000, Granularity::Min1);
    spec.links.push(PlantedLink::with_r2(0, 1, 3, 0.6, 0.09));
    let m = generate(&spec).unwrap();
    assert!((m.truth[0].population_r2 - 0.09).abs() < 1e-12);
    let r = returns(&spec);
    let pair = align(&r[0], &r[1], 100).unwrap();
    let opt = optimal_lag(&ccf(&pair, 30).unwrap(), LagSearch::FullRange).unwrap();
    assert_eq!(opt.lag, 3);
    let reg = lag_regression(&pair, 3, 100).unwrap();
    assert!((reg.r_squared - 0.09).abs() < 0.015, "{}", reg.r_squared);
    assert!((reg.beta - 0.6).abs() < 0.05, "{}", reg.beta);
}

#[test]
fn cascade_truth_composes() {
    let mut spec = SynthSpec::new(8, 3, 40_000, Granularity::Min1);
    spec.links.push(PlantedLink::with_r2(0, 1, 2, 1.0, 0.5));
    spec.links.push(PlantedLink::with_r2(1, 2, 3, 1.0, 0.5));
    let m = generate(&spec).unwrap();
    // Through the chain the end-to-end correlation at lag 5 is the product.
    let end = m.population_ccf(0, 2, 5);
    assert!((end - m.truth[0].population_ccf * m.truth[1].population_ccf).abs() < 1e-12);
    let r = returns(&spec);
    let pair = align(&r[0], &r[2], 100).unwrap();
    let opt = optimal_lag(&ccf(&pair, 10).unwrap(), LagSearch::FullRange).unwrap();
    assert_eq!(opt.lag, 5);
    assert!((opt.value - end).abs() < 0.03);
}

#[test]
fn invalid_specs_are_rejected() {
    let mut cyclic = SynthSpec::new(1, 3, 100, Granularity::Min1);
    cyclic.links.push(PlantedLink::with_r2(0, 1, 1, 1.0, 0.2));
    cyclic.links.push(PlantedLink::with_r2(1, 2, 1, 1.0, 0.2));
    cyclic.links.push(PlantedLink::with_r2(2, 0, 1, 1.0, 0.2));
    assert!(matches!(generate(&cyclic), Err(SynthError::CyclicLinks(_))));

    let mut outside = SynthSpec::new(1, 3, 100, Granularity::Min1);
    outside.links.push(PlantedLink::with_r2(0, 3, 1, 1.0, 0.2));
    assert!(matches!(generate(&outside), Err(SynthError::SpecDomain(_))));

    let mut zero_lag = SynthSpec::new(1, 3, 100, Granularity::Min1);
    zero_lag.links.push(PlantedLink::with_r2(0, 1, 0, 1.0, 0.2));
    assert!(matches!(generate(&zero_lag), Err(SynthError::SpecDomain(_))));
}
