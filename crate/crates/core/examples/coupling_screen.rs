//! Stage-1 coupling screen over a small daily universe.
//!
//! cargo run --example coupling_screen

use leadlag::coupling::{screen_pairs, write_stage1_csv, DtwBand, ScreenParams};
use leadlag::series::{compute_returns, Granularity, ReturnKind};
use leadlag::synth::{generate, PlantedLink, SynthSpec};

fn main() {
    // Symbols 1 and 2 both copy symbol 0 a day late, so they move together
    // with each other; 3-5 are independent.
    let mut spec = SynthSpec::new(11, 6, 250, Granularity::Daily);
    spec.links.push(PlantedLink::with_r2(0, 1, 1, 1.0, 0.9));
    spec.links.push(PlantedLink::with_r2(0, 2, 1, 1.0, 0.9));
    let market = generate(&spec).expect("valid spec");
    let universe: Vec<_> = market
        .bars
        .iter()
        .map(|b| compute_returns(b, ReturnKind::Log).unwrap())
        .collect();

    let params = ScreenParams {
        dtw_band: DtwBand::Fraction(0.1),
        ..ScreenParams::default()
    };
    let screening = screen_pairs(&universe, &params).expect("at least two symbols");
    println!("DTW_max = {:.4}; {} of {} pairs pass", screening.dtw_max, screening.passed().count(), screening.results.len());
    let mut out = Vec::new();
    write_stage1_csv(&screening, &mut out).unwrap();
    print!("{}", String::from_utf8(out).unwrap());
}
