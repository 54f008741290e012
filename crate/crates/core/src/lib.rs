//! Scoring how well class labels match cluster structure, comparably across
//! datasets.
//!
//! Classical internal validity measures rank partitions of a single dataset,
//! but their raw values are confounded by dataset size, dimensionality, and
//! class count, so they cannot rank *datasets*. This crate implements five
//! adjusted measures that remove those confounds — exponential
//! shift-invariant cores normalized by dispersion, a calibrated logistic
//! squash, min-max scaling against a worst-score estimate, and class-pairwise
//! aggregation — alongside the six classical measures they derive from, a
//! two-Gaussian benchmark generator, a sensitivity/ranking experiment
//! harness, and growth-rate calibration against reference separability
//! scores.
//!
//! Entry points:
//! - [`baseline`]: the classical measures (`ch`, `di`, `ii`, `xb`, `db`, `sc`).
//! - [`adjusted`]: the adjusted measures and their configuration.
//! - [`measure::AnyMeasure`]: name-based dispatch over all of the above.
//! - [`synth`], [`harness`], [`calibrate`], [`io`]: benchmark generation,
//!   experiments, calibration, and file formats.
//!
//! Everything is deterministic given explicit seeds: parallel execution
//! (rayon, behind the default `parallel` feature) fans out per task and
//! reduces in fixed order, so results are bitwise identical at any thread
//! count, including the sequential build.

pub mod adjusted;
pub mod baseline;
pub mod calibrate;
pub mod data;
pub mod error;
mod exec;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod measure;
pub mod sampling;
pub mod synth;

pub use adjusted::{
    ch_adjusted, db_adjusted, dunn_adjusted, evaluate_adjusted, evaluate_adjusted_detailed,
    ii_adjusted, logistic, sc_adjusted, xb_adjusted, AdjustedMeasure, Aggregation, MeasureConfig,
    MinMode,
};
pub use baseline::BaselineMeasure;
pub use data::{centroid, dispersion, Dataset, DispersionStats, Labeling};
pub use error::{Error, ErrorCategory, Result};
pub use exec::configure_threads;
pub use measure::AnyMeasure;
