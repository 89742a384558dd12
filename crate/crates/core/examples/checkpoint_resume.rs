//! Interrupt a stage-1 run part way and resume it from the checkpoint log.
//!
//! cargo run --release --example checkpoint_resume -- [work_dir]

use std::path::PathBuf;

use leadlag::pipeline::config::PipelineConfig;
use leadlag::pipeline::{read_metadata, run_stage1, PipelineError, RunControl, STAGE1_FILE};
use leadlag::series::{resample, Granularity};
use leadlag::synth::{generate, write_fixture, SynthSpec};

fn main() {
    let work = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "resume_demo".into()));
    let data = work.join("data");
    let spec = SynthSpec::new(8, 30, 96 * 70, Granularity::Min15);
    let market = generate(&spec).expect("valid spec");
    let daily: Vec<_> = market.bars.iter().map(|b| resample(b, Granularity::Daily).unwrap()).collect();
    write_fixture(&daily, &data, Some(spec.seed)).unwrap();

    let mut cfg = PipelineConfig::new(&data);
    cfg.output_dir = work.join("output");
    cfg.checkpoint_batch = 50;

    let halt = RunControl {
        halt_after: Some(200),
        ..RunControl::default()
    };
    match run_stage1(&cfg, &halt) {
        Err(PipelineError::Interrupted { completed }) => println!("interrupted after {completed} pairs"),
        other => panic!("expected an interruption, got {other:?}"),
    }
    let resume = RunControl {
        resume: true,
        ..RunControl::default()
    };
    let s = run_stage1(&cfg, &resume).expect("resumed run");
    let meta = read_metadata(&cfg.run_dir()).unwrap().stage1.unwrap();
    println!(
        "finished: {} pairs, {} taken from the checkpoint, {} passed",
        s.results.len() + s.skips.len(),
        meta.resumed_units,
        meta.passed
    );

    // A changed config is refused instead of mixing results.
    let mut changed = cfg.clone();
    changed.coupling.threshold = 0.4;
    match run_stage1(&changed, &resume) {
        Err(e) => println!("resume with another config: {e} (exit code {})", e.exit_code()),
        Ok(_) => println!("unexpected: resumed under a different config"),
    }
    println!("{} is {} bytes", STAGE1_FILE, std::fs::metadata(cfg.run_dir().join(STAGE1_FILE)).unwrap().len());
}
