#![allow(dead_code)]

pub mod oracle;

use std::path::Path;

use leadlag::pipeline::config::PipelineConfig;
use leadlag::series::{resample, Granularity};
use leadlag::synth::{generate, write_fixture, PlantedLink, SynthMarket, SynthSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn uniforms(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Writes the generated bars plus the given coarser aggregates under `root`.
pub fn write_market(market: &SynthMarket, root: &Path, aggregates: &[Granularity], seed: u64) {
    write_fixture(&market.bars, root, Some(seed)).unwrap();
    for &g in aggregates {
        let bars: Vec<_> = market.bars.iter().map(|b| resample(b, g).unwrap()).collect();
        write_fixture(&bars, root, Some(seed)).unwrap();
    }
}

/// Config over `data` writing runs under `out`, analysing `grans`.
pub fn config(data: &Path, out: &Path, grans: &[Granularity]) -> PipelineConfig {
    let mut cfg = PipelineConfig::new(data);
    cfg.output_dir = out.to_path_buf();
    cfg.granularities = grans.to_vec();
    cfg
}

/// Star clusters: the first member of each cluster leads every other
/// member at a lag of 1 or 2 bars. Remaining symbols are independent.
pub fn cluster_spec(seed: u64, n_symbols: usize, sizes: &[usize], bars: usize, g: Granularity, r2: f64) -> SynthSpec {
    let mut spec = SynthSpec::new(seed, n_symbols, bars, g);
    let mut next = 0;
    for &size in sizes {
        let hub = next;
        for k in 1..size {
            spec.links.push(PlantedLink::with_r2(hub, hub + k, 1 + k % 2, 1.0, r2));
        }
        next += size;
    }
    assert!(next <= n_symbols);
    spec
}

pub fn cluster_pairs(sizes: &[usize]) -> usize {
    sizes.iter().map(|k| k * (k - 1) / 2).sum()
}

pub fn generate_to(spec: &SynthSpec, root: &Path, aggregates: &[Granularity]) -> SynthMarket {
    let m = generate(spec).unwrap();
    write_market(&m, root, aggregates, spec.seed);
    m
}
