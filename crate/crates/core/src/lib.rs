//! Lead-lag detection between financial instruments in two stages.
//!
//! Stage 1 ([`coupling`]) scores every pair of the daily universe by a
//! weighted mix of Pearson correlation, normalized DTW distance and Kendall
//! tau, and keeps pairs above a threshold. Stage 2 ([`lagdetect`]) looks for
//! a lead-lag relationship in the surviving pairs at intraday granularities
//! using the cross-correlation function, Granger tests and lag regressions.
//! [`pipeline`] wires both stages to CSV data directories with checkpointing,
//! and [`synth`] produces fixtures with planted, analytically known links.

pub mod cli;
pub mod coupling;
pub mod lagdetect;
pub mod pipeline;
pub mod series;
pub mod stats;
pub mod synth;
