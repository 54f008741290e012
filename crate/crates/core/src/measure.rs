//! Unified measure dispatch shared by the experiment harness and the CLI.

use crate::adjusted::{evaluate_adjusted, AdjustedMeasure, MeasureConfig, MinMode};
use crate::baseline::BaselineMeasure;
use crate::data::{Dataset, Labeling};
use crate::error::{Error, Result};

/// Any of the eleven scoring functions: the six classical measures or the
/// five adjusted ones (with their configuration).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnyMeasure {
    Baseline(BaselineMeasure),
    Adjusted(AdjustedMeasure, MeasureConfig),
}

impl AnyMeasure {
    pub fn evaluate(&self, ds: &Dataset, lab: &Labeling) -> Result<f64> {
        match self {
            AnyMeasure::Baseline(b) => b.evaluate(ds, lab),
            AnyMeasure::Adjusted(kind, cfg) => evaluate_adjusted(*kind, ds, lab, cfg),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AnyMeasure::Baseline(b) => b.name(),
            AnyMeasure::Adjusted(kind, _) => kind.name(),
        }
    }

    /// True when evaluation draws random numbers (Monte-Carlo worst-score
    /// estimation); such runs require an explicit seed at the CLI.
    pub fn is_randomized(&self) -> bool {
        matches!(
            self,
            AnyMeasure::Adjusted(
                _,
                MeasureConfig {
                    min_mode: MinMode::MonteCarlo { .. },
                    ..
                }
            )
        )
    }

    /// Resolve a measure name. Adjusted names take the given configuration;
    /// the Dunn chain swaps an inapplicable closed-form min for its
    /// geometric-median default. `ii_adj` and `xb_adj` are two names for the
    /// same measure.
    pub fn parse(name: &str, cfg: MeasureConfig) -> Result<AnyMeasure> {
        let lower = name.to_ascii_lowercase();
        let adjusted = |kind: AdjustedMeasure| {
            let mut cfg = cfg;
            if kind == AdjustedMeasure::DiA && cfg.min_mode == MinMode::ClosedFormHalf {
                cfg.min_mode = MinMode::GeometricMedianPartition;
            }
            AnyMeasure::Adjusted(kind, cfg)
        };
        match lower.as_str() {
            "ch" => Ok(AnyMeasure::Baseline(BaselineMeasure::Ch)),
            "di" | "dunn" => Ok(AnyMeasure::Baseline(BaselineMeasure::Di)),
            "ii" => Ok(AnyMeasure::Baseline(BaselineMeasure::Ii { p: cfg.p })),
            "xb" => Ok(AnyMeasure::Baseline(BaselineMeasure::Xb)),
            "db" => Ok(AnyMeasure::Baseline(BaselineMeasure::Db)),
            "sc" => Ok(AnyMeasure::Baseline(BaselineMeasure::Sc)),
            "ch_adj" => Ok(adjusted(AdjustedMeasure::ChA)),
            "di_adj" | "dunn_adj" => Ok(adjusted(AdjustedMeasure::DiA)),
            "ii_adj" | "xb_adj" | "ii_xb_adj" => Ok(adjusted(AdjustedMeasure::IiXbA)),
            "db_adj" => Ok(adjusted(AdjustedMeasure::DbA)),
            "sc_adj" => Ok(adjusted(AdjustedMeasure::ScA)),
            other => Err(Error::InvalidConfig(format!(
                "unknown measure `{other}` (expected one of ch, di, ii, xb, db, sc, \
                 ch_adj, di_adj, ii_adj, xb_adj, db_adj, sc_adj)"
            ))),
        }
    }

    /// The full comparison suite: every classical measure followed by its
    /// adjusted counterpart.
    pub fn standard_suite(cfg: MeasureConfig) -> Vec<AnyMeasure> {
        [
            "ch", "ch_adj", "di", "di_adj", "ii", "xb", "ii_xb_adj", "db", "db_adj", "sc",
            "sc_adj",
        ]
        .iter()
        .map(|n| AnyMeasure::parse(n, cfg).expect("suite names are valid"))
        .collect()
    }
}
