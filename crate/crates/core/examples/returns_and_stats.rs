//! Bars to returns, alignment and descriptive statistics.
//!
//! cargo run --example returns_and_stats

use leadlag::series::{align, compute_returns, rolling_correlation, summary_stats, Granularity, ReturnKind};
use leadlag::synth::{generate, PlantedLink, SynthSpec};

fn main() {
    let mut spec = SynthSpec::new(1, 2, 2_000, Granularity::Min5);
    spec.links.push(PlantedLink::with_r2(0, 1, 1, 0.9, 0.3));
    let market = generate(&spec).expect("valid spec");

    let returns: Vec<_> = market
        .bars
        .iter()
        .map(|b| compute_returns(b, ReturnKind::Log).expect("positive closes"))
        .collect();
    println!("symbol  n      mean         std_dev      skew     kurt     ac1");
    for r in &returns {
        let s = summary_stats(r).expect("enough data");
        println!(
            "{:<7} {:<6} {:>12.3e} {:>12.3e} {:>8.4} {:>8.4} {:>8.4}",
            r.symbol(),
            s.n,
            s.mean,
            s.std_dev,
            s.skewness,
            s.kurtosis,
            s.autocorr_lag1
        );
    }

    let pair = align(&returns[0], &returns[1], 100).expect("shared timestamps");
    let rolling = rolling_correlation(&pair, 60).expect("window >= 3");
    let (ts, last) = rolling.last().expect("non-empty");
    println!(
        "aligned {} observations; contemporaneous rolling(60) correlation at {} = {:.4}",
        pair.n(),
        leadlag::series::format_timestamp(*ts),
        last.unwrap_or(f64::NAN)
    );
}
