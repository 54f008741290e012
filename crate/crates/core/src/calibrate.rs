//! Calibration of the logistic growth rate `k` against reference
//! separability scores, with inverse-bin-count weighting to offset score
//! imbalance.

use crate::adjusted::{logistic, AdjustedMeasure, MeasureConfig, MinMode};
use crate::adjusted::{CoreMeasure};
use crate::data::{pair_subset, Dataset, Labeling};
use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::geometric_median_partition;

/// One calibration record: a labeled dataset with its reference score in
/// [0, 1] (e.g. the share of human judges who saw more than one cluster).
#[derive(Clone, Debug)]
pub struct CalibrationEntry {
    pub dataset: Dataset,
    pub labeling: Labeling,
    pub human_score: f64,
}

#[derive(Clone, Debug)]
pub struct CalibrationSet {
    pub entries: Vec<CalibrationEntry>,
    pub bins: usize,
}

impl CalibrationSet {
    pub fn new(entries: Vec<CalibrationEntry>, bins: usize) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput("calibration set has no entries"));
        }
        if bins == 0 {
            return Err(Error::InvalidConfig("at least one bin is required".into()));
        }
        if let Some(bad) = entries
            .iter()
            .find(|e| !(0.0..=1.0).contains(&e.human_score))
        {
            return Err(Error::InvalidConfig(format!(
                "reference score {} outside [0, 1]",
                bad.human_score
            )));
        }
        Ok(Self { entries, bins })
    }

    pub fn weights(&self) -> Vec<f64> {
        let scores: Vec<f64> = self.entries.iter().map(|e| e.human_score).collect();
        bin_weights(&scores, self.bins)
    }
}

/// Inverse-bin-count weights over `b` equal-width bins of [0, 1].
///
/// Bin `i` covers `((i-1)/b, i/b]`; a score of exactly 0 falls into bin 1.
/// Each weight is one over the number of scores sharing the bin, so every
/// occupied bin contributes total weight one.
pub fn bin_weights(scores: &[f64], bins: usize) -> Vec<f64> {
    assert!(bins >= 1, "bins must be >= 1");
    assert!(!scores.is_empty(), "scores must be nonempty");
    let bin_of = |s: f64| -> usize {
        let idx = (s * bins as f64).ceil() as usize;
        idx.clamp(1, bins)
    };
    let mut counts = vec![0usize; bins + 1];
    for &s in scores {
        counts[bin_of(s)] += 1;
    }
    scores.iter().map(|&s| 1.0 / counts[bin_of(s)] as f64).collect()
}

/// Weighted coefficient of determination: 1 minus the weighted squared error
/// over the weighted variance of the targets. Equals 1 only for a perfect
/// fit; 0 for the weighted-mean constant predictor; negative for worse.
pub fn weighted_r2(predicted: &[f64], target: &[f64], weights: &[f64]) -> Result<f64> {
    if predicted.len() != target.len() || target.len() != weights.len() {
        return Err(Error::InvalidConfig(
            "predicted, target, and weight lengths differ".into(),
        ));
    }
    if target.len() < 2 {
        return Err(Error::DegenerateTargets);
    }
    let w_sum: f64 = weights.iter().sum();
    let t_mean = target
        .iter()
        .zip(weights)
        .map(|(t, w)| t * w)
        .sum::<f64>()
        / w_sum;
    let ss_tot: f64 = target
        .iter()
        .zip(weights)
        .map(|(t, w)| w * (t - t_mean) * (t - t_mean))
        .sum();
    if ss_tot == 0.0 {
        return Err(Error::DegenerateTargets);
    }
    let ss_res: f64 = predicted
        .iter()
        .zip(target)
        .zip(weights)
        .map(|((p, t), w)| w * (t - p) * (t - p))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Search settings for the growth-rate calibration: a log-spaced grid pass
/// followed by golden-section refinement around the best grid point.
#[derive(Clone, Copy, Debug)]
pub struct SearchConfig {
    pub k_min: f64,
    pub k_max: f64,
    pub grid_points: usize,
    pub refine_iters: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            k_min: 1e-3,
            k_max: 1e3,
            grid_points: 61,
            refine_iters: 40,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CalibrationResult {
    pub k_star: f64,
    /// Weighted R^2 achieved at `k_star`; the maximum over the trace.
    pub objective: f64,
    pub trace: Vec<(f64, f64)>,
    /// Entries whose measure evaluation failed and were left out.
    pub skipped: usize,
}

/// Per-entry values that are independent of `k`, so the search only repeats
/// the cheap logistic/min-max arithmetic.
enum Precomputed {
    /// Pair cores with the exact worst score of one half.
    HalfMin(Vec<f64>),
    /// Pair cores with the matching worst-case partition cores.
    DunnMin(Vec<(f64, f64)>),
    /// Score that does not depend on k at all.
    Fixed(f64),
}

impl Precomputed {
    fn score_at(&self, k: f64) -> f64 {
        match self {
            Precomputed::HalfMin(cores) => {
                let sum: f64 = cores
                    .iter()
                    .map(|&c| min_max_scale(logistic(c, k), 0.5))
                    .sum();
                sum / cores.len() as f64
            }
            Precomputed::DunnMin(pairs) => {
                let sum: f64 = pairs
                    .iter()
                    .map(|&(core, min_core)| {
                        let scaled = min_max_scale(logistic(core, k), logistic(min_core, k));
                        scaled.max(0.0)
                    })
                    .sum();
                sum / pairs.len() as f64
            }
            Precomputed::Fixed(score) => *score,
        }
    }
}

fn min_max_scale(l: f64, min: f64) -> f64 {
    (l - min) / (1.0 - min)
}

fn precompute_entry(kind: AdjustedMeasure, entry: &CalibrationEntry) -> Result<Precomputed> {
    let ds = &entry.dataset;
    let lab = &entry.labeling;
    let m = lab.class_count();
    if m < 2 {
        return Err(Error::TooFewClasses);
    }
    let mut pairs = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            pairs.push((i, j));
        }
    }
    match kind {
        AdjustedMeasure::ScA => {
            let mut total = 0.0;
            for &(i, j) in &pairs {
                let (sub, sub_lab) = pair_subset(ds, lab, i, j);
                total += crate::adjusted::core_value(CoreMeasure::Sc, &sub, &sub_lab)?;
            }
            Ok(Precomputed::Fixed(total / pairs.len() as f64))
        }
        AdjustedMeasure::DiA => {
            let mut cores = Vec::with_capacity(pairs.len());
            for &(i, j) in &pairs {
                let (sub, sub_lab) = pair_subset(ds, lab, i, j);
                let core = crate::adjusted::core_value(CoreMeasure::Di, &sub, &sub_lab)?;
                let psi = geometric_median_partition(&sub)?;
                let min_core = crate::adjusted::core_value(CoreMeasure::Di, &sub, &psi)?;
                cores.push((core, min_core));
            }
            Ok(Precomputed::DunnMin(cores))
        }
        _ => {
            let core_kind = match kind {
                AdjustedMeasure::ChA => CoreMeasure::Ch,
                AdjustedMeasure::IiXbA => CoreMeasure::Ii,
                AdjustedMeasure::DbA => CoreMeasure::Db,
                _ => unreachable!(),
            };
            let mut cores = Vec::with_capacity(pairs.len());
            for &(i, j) in &pairs {
                let (sub, sub_lab) = pair_subset(ds, lab, i, j);
                cores.push(crate::adjusted::core_value(core_kind, &sub, &sub_lab)?);
            }
            Ok(Precomputed::HalfMin(cores))
        }
    }
}

/// Calibrate the growth rate of an adjusted measure against the reference
/// scores of a calibration set.
///
/// Scores at a candidate `k` use the measure's default configuration
/// (closed-form worst score, or the geometric-median partition for the Dunn
/// chain, pair-averaged), so the recovered `k` plugs straight into
/// [`MeasureConfig::default_for`]. The search is fully deterministic; ties
/// prefer the smaller `k`.
pub fn calibrate_k(
    kind: AdjustedMeasure,
    set: &CalibrationSet,
    search: &SearchConfig,
) -> Result<CalibrationResult> {
    if !(search.k_min > 0.0 && search.k_min < search.k_max) {
        return Err(Error::InvalidConfig(
            "requires 0 < k_min < k_max".into(),
        ));
    }
    if search.grid_points < 2 {
        return Err(Error::InvalidConfig(
            "the search grid needs at least two points".into(),
        ));
    }

    let prepared = exec::par_map(&set.entries, |entry| precompute_entry(kind, entry));
    let mut cores = Vec::new();
    let mut targets = Vec::new();
    let mut skipped = 0usize;
    for (prep, entry) in prepared.into_iter().zip(&set.entries) {
        match prep {
            Ok(p) => {
                cores.push(p);
                targets.push(entry.human_score);
            }
            Err(_) => skipped += 1,
        }
    }
    if cores.is_empty() {
        return Err(Error::CalibrationFailed(
            "every measure evaluation failed".into(),
        ));
    }
    let weights = bin_weights(&targets, set.bins);

    let objective = |k: f64| -> Result<f64> {
        let predicted: Vec<f64> = cores.iter().map(|c| c.score_at(k)).collect();
        weighted_r2(&predicted, &targets, &weights)
    };

    // Log-spaced grid pass.
    let (ln_min, ln_max) = (search.k_min.ln(), search.k_max.ln());
    let grid: Vec<f64> = (0..search.grid_points)
        .map(|i| {
            let t = i as f64 / (search.grid_points - 1) as f64;
            (ln_min + t * (ln_max - ln_min)).exp()
        })
        .collect();
    let grid_objs = exec::par_map(&grid, |&k| objective(k));
    let mut trace: Vec<(f64, f64)> = Vec::with_capacity(grid.len() + search.refine_iters + 2);
    for (k, obj) in grid.iter().zip(grid_objs) {
        trace.push((*k, obj?));
    }
    let mut best_idx = 0usize;
    for (i, &(_, obj)) in trace.iter().enumerate() {
        if obj > trace[best_idx].1 {
            best_idx = i;
        }
    }

    // Golden-section refinement (in log space) around the best grid point.
    let lo_idx = best_idx.saturating_sub(1);
    let hi_idx = (best_idx + 1).min(grid.len() - 1);
    let mut a = grid[lo_idx].ln();
    let mut b = grid[hi_idx].ln();
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = objective(x1.exp())?;
    let mut f2 = objective(x2.exp())?;
    trace.push((x1.exp(), f1));
    trace.push((x2.exp(), f2));
    for _ in 0..search.refine_iters {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1.exp())?;
            trace.push((x1.exp(), f1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2.exp())?;
            trace.push((x2.exp(), f2));
        }
    }

    let mut k_star = trace[0].0;
    let mut best = trace[0].1;
    for &(k, obj) in &trace {
        if obj > best || (obj == best && k < k_star) {
            best = obj;
            k_star = k;
        }
    }
    Ok(CalibrationResult {
        k_star,
        objective: best,
        trace,
        skipped,
    })
}

/// Calibrate with the default search range (61 log-spaced points over
/// [1e-3, 1e3], 40 refinement steps).
pub fn calibrate_k_default(kind: AdjustedMeasure, set: &CalibrationSet) -> Result<CalibrationResult> {
    calibrate_k(kind, set, &SearchConfig::default())
}

/// The measure configuration implied by a calibration result.
pub fn config_from_calibration(kind: AdjustedMeasure, result: &CalibrationResult) -> MeasureConfig {
    let mut cfg = MeasureConfig::default_for(kind);
    cfg.k = result.k_star;
    debug_assert!(matches!(
        cfg.min_mode,
        MinMode::ClosedFormHalf | MinMode::GeometricMedianPartition
    ));
    cfg
}
