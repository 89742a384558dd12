//! Chains and cycles among confirmed lead-lag edges.
//!
//! cargo run --example cascade_detection

use leadlag::lagdetect::LagSearch;
use leadlag::pipeline::cascade::{detect_cascades, write_cascades};
use leadlag::pipeline::equal_weight_market;
use leadlag::pipeline::stage2::{analyze_pair, AnalysisParams};
use leadlag::series::{compute_returns, Granularity, ReturnKind};
use leadlag::synth::{generate, PlantedLink, SynthSpec};

fn main() {
    // A -> B by 2 bars, B -> C by 3 bars; D is unrelated.
    let mut spec = SynthSpec::new(5, 4, 30_000, Granularity::Min1);
    spec.links.push(PlantedLink::with_r2(0, 1, 2, 1.0, 0.12));
    spec.links.push(PlantedLink::with_r2(1, 2, 3, 1.0, 0.12));
    let market = generate(&spec).expect("valid spec");
    let r: Vec<_> = market.bars.iter().map(|b| compute_returns(b, ReturnKind::Log).unwrap()).collect();
    let ew = equal_weight_market(Granularity::Min1, &r.iter().collect::<Vec<_>>()).unwrap();

    let params = AnalysisParams {
        granularity: Granularity::Min1,
        max_lag: 10,
        search: LagSearch::FullRange,
        max_order: 5,
        significance: 0.05,
        min_obs: 100,
    };
    let mut rows = Vec::new();
    for i in 0..r.len() {
        for j in i + 1..r.len() {
            let a = analyze_pair(&r[i], &r[j], &ew, &params).expect("long enough");
            println!(
                "{} -> {}: lag {}, CCF {:+.3}, confirmed {}",
                a.row.leader,
                a.row.follower,
                a.row.optimal_lag,
                a.row.ccf_value,
                a.row.is_confirmed()
            );
            rows.push(a.row);
        }
    }
    let report = detect_cascades(&rows);
    let mut out = Vec::new();
    write_cascades(Granularity::Min1, &report, &mut out).unwrap();
    print!("{}", String::from_utf8(out).unwrap());
}
