//! Adjusted validity measures built from four combinators: exponential
//! shift-invariant cores, a logistic squash, a worst-score estimate used for
//! min-max scaling, and class-pairwise aggregation.
//!
//! Distance terms come in three kinds: point-point, point-centroid, and
//! centroid-centroid. When every squared point-point distance grows by a
//! constant `beta`, squared point-centroid distances grow by `beta / 2` and
//! centroid-centroid distances do not move at all. The cores below combine
//! their terms so such a shift cancels exactly, which is what keeps scores
//! comparable across dimensionalities; `shifted_core` evaluates a core under
//! an explicit shift so tests can verify the cancellation.

use crate::data::{
    centroid, class_centroid, dispersion_shifted, euclidean, euclidean_sq, pair_subset, Dataset,
    Labeling,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::geometric_median_partition;
use crate::sampling::{child_seed, seeded_rng, shuffle_labels};

/// How the worst score (the lower anchor of min-max scaling) is obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MinMode {
    /// Exact expectation of the logistic-transformed score under random
    /// label permutations: 1/2. Valid for the `ChA`, `IiXbA`, and `DbA`
    /// chains, whose cores vanish under label shuffling.
    ClosedFormHalf,
    /// Empirical mean of the logistic-transformed score over `runs` random
    /// label shuffles, derived deterministically from `seed`.
    MonteCarlo { runs: usize, seed: u64 },
    /// Deterministic worst case for the Dunn chain: the single most central
    /// point split off against the rest.
    GeometricMedianPartition,
}

impl MinMode {
    pub fn name(&self) -> &'static str {
        match self {
            MinMode::ClosedFormHalf => "closed_form",
            MinMode::MonteCarlo { .. } => "monte_carlo",
            MinMode::GeometricMedianPartition => "geo_median",
        }
    }
}

/// Reduction applied over class-pair scores.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Aggregation {
    Average,
    Min,
    Max,
}

impl Aggregation {
    pub fn name(&self) -> &'static str {
        match self {
            Aggregation::Average => "avg",
            Aggregation::Min => "min",
            Aggregation::Max => "max",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "avg" | "average" | "mean" => Ok(Aggregation::Average),
            "min" => Ok(Aggregation::Min),
            "max" => Ok(Aggregation::Max),
            other => Err(Error::InvalidConfig(format!(
                "unknown aggregation `{other}` (expected avg, min, or max)"
            ))),
        }
    }

    fn reduce(&self, values: &[f64]) -> f64 {
        match self {
            Aggregation::Average => values.iter().sum::<f64>() / values.len() as f64,
            Aggregation::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
            Aggregation::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Evaluation settings for the adjusted measures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureConfig {
    /// Logistic growth rate; calibrate against reference separability scores
    /// or accept the uncalibrated default of 1.
    pub k: f64,
    pub min_mode: MinMode,
    /// Discrimination power of the classical I-index; the adjusted chain
    /// always works at power 1, so this only affects the baseline.
    pub p: f64,
    pub agg: Aggregation,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self {
            k: 1.0,
            min_mode: MinMode::ClosedFormHalf,
            p: 1.0,
            agg: Aggregation::Average,
        }
    }
}

impl MeasureConfig {
    pub fn with_k(k: f64) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    /// Default configuration for a measure: closed-form worst score where it
    /// is exact, the geometric-median partition for the Dunn chain.
    pub fn default_for(kind: AdjustedMeasure) -> Self {
        let mut cfg = Self::default();
        if kind == AdjustedMeasure::DiA {
            cfg.min_mode = MinMode::GeometricMedianPartition;
        }
        cfg
    }
}

/// The five adjusted measures. The adjusted I-index and Xie-Beni chains are
/// one measure with two entry points, hence a single variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdjustedMeasure {
    ChA,
    DiA,
    IiXbA,
    DbA,
    ScA,
}

impl AdjustedMeasure {
    pub fn name(&self) -> &'static str {
        match self {
            AdjustedMeasure::ChA => "ch_adj",
            AdjustedMeasure::DiA => "di_adj",
            AdjustedMeasure::IiXbA => "ii_xb_adj",
            AdjustedMeasure::DbA => "db_adj",
            AdjustedMeasure::ScA => "sc_adj",
        }
    }

    fn core(&self) -> Option<CoreMeasure> {
        match self {
            AdjustedMeasure::ChA => Some(CoreMeasure::Ch),
            AdjustedMeasure::DiA => Some(CoreMeasure::Di),
            AdjustedMeasure::IiXbA => Some(CoreMeasure::Ii),
            AdjustedMeasure::DbA => Some(CoreMeasure::Db),
            AdjustedMeasure::ScA => None,
        }
    }
}

/// The pre-logistic shift-invariant cores.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoreMeasure {
    Ch,
    Di,
    Ii,
    Db,
    Sc,
}

/// Additive shift applied to raw distance terms during core evaluation, in
/// the core's own distance units (squared for `Ch`/`Ii`/`Db`, plain for
/// `Di`/`Sc`). Centroid-centroid terms never shift.
#[derive(Clone, Copy, Debug)]
struct Shift {
    point_point: f64,
    point_centroid: f64,
}

const NO_SHIFT: Shift = Shift {
    point_point: 0.0,
    point_centroid: 0.0,
};

/// Logistic squash `1 / (1 + exp(-k x))`: strictly increasing with range
/// (0, 1) and value 1/2 at zero.
pub fn logistic(x: f64, k: f64) -> f64 {
    1.0 / (1.0 + (-k * x).exp())
}

/// Evaluate a pre-logistic core.
pub fn core_value(kind: CoreMeasure, ds: &Dataset, lab: &Labeling) -> Result<f64> {
    core_value_at(kind, ds, lab, NO_SHIFT)
}

/// Evaluate a core with every point-point distance term increased by `beta`
/// and every point-centroid term by `beta / 2` (centroid-centroid terms are
/// unshifted; the dispersion normalizer is recomputed from the shifted
/// values). The result equals the unshifted core up to rounding.
pub fn shifted_core(kind: CoreMeasure, ds: &Dataset, lab: &Labeling, beta: f64) -> Result<f64> {
    if beta < 0.0 {
        return Err(Error::InvalidConfig("shift must be nonnegative".into()));
    }
    core_value_at(
        kind,
        ds,
        lab,
        Shift {
            point_point: beta,
            point_centroid: beta / 2.0,
        },
    )
}

fn core_value_at(kind: CoreMeasure, ds: &Dataset, lab: &Labeling, shift: Shift) -> Result<f64> {
    if lab.class_count() < 2 {
        return Err(Error::TooFewClasses);
    }
    match kind {
        CoreMeasure::Ch => ch_core_at(ds, lab, shift),
        CoreMeasure::Di => di_core_at(ds, lab, shift),
        CoreMeasure::Ii => ii_core_at(ds, lab, shift),
        CoreMeasure::Db => db_core_at(ds, lab, shift),
        CoreMeasure::Sc => sc_core_at(ds, lab, shift),
    }
}

/// Squared-distance statistics shared by the `Ch`, `Ii`, and `Db` cores.
struct SquaredStats {
    sigma: f64,
    mean_global: f64,
    class_means: Vec<f64>,
    centroids: Vec<Vec<f64>>,
    global_centroid: Vec<f64>,
}

fn squared_stats(ds: &Dataset, lab: &Labeling, shift: Shift) -> Result<SquaredStats> {
    let stats = dispersion_shifted(ds, 0.0, shift.point_centroid)?;
    let sigma = stats.sigma_d2;
    if sigma == 0.0 {
        return Err(Error::DegenerateDispersion(
            "squared distances to the centroid have zero spread",
        ));
    }
    let global_centroid = centroid(ds);
    let mean_global = ds
        .rows()
        .map(|r| euclidean_sq(r, &global_centroid) + shift.point_centroid)
        .sum::<f64>()
        / ds.n() as f64;
    let centroids: Vec<Vec<f64>> = lab
        .classes()
        .iter()
        .map(|members| class_centroid(ds, members).expect("classes are nonempty"))
        .collect();
    let class_means: Vec<f64> = lab
        .classes()
        .iter()
        .zip(&centroids)
        .map(|(members, ci)| {
            members
                .iter()
                .map(|&i| euclidean_sq(ds.row(i), ci) + shift.point_centroid)
                .sum::<f64>()
                / members.len() as f64
        })
        .collect();
    Ok(SquaredStats {
        sigma,
        mean_global,
        class_means,
        centroids,
        global_centroid,
    })
}

/// Compactness-separability core of the adjusted Calinski-Harabasz chain:
/// an exponential ratio of mean squared point-centroid distances times the
/// dispersion-normalized between-class scatter.
fn ch_core_at(ds: &Dataset, lab: &Labeling, shift: Shift) -> Result<f64> {
    let st = squared_stats(ds, lab, shift)?;
    let n = ds.n() as f64;
    let m = lab.class_count() as f64;
    let mean_within = lab
        .classes()
        .iter()
        .zip(&st.class_means)
        .map(|(members, cm)| cm * members.len() as f64)
        .sum::<f64>()
        / n;
    let between: f64 = lab
        .classes()
        .iter()
        .zip(&st.centroids)
        .map(|(members, ci)| members.len() as f64 * euclidean_sq(ci, &st.global_centroid))
        .sum();
    let separation = between / (st.sigma * n * (m - 1.0));
    if separation == 0.0 {
        return Ok(0.0);
    }
    Ok(((st.mean_global - mean_within) / st.sigma).exp() * separation)
}

/// Core of the adjusted I-index chain; for two classes it is half the
/// inverted Xie-Beni core, so both chains share this function.
fn ii_core_at(ds: &Dataset, lab: &Labeling, shift: Shift) -> Result<f64> {
    let st = squared_stats(ds, lab, shift)?;
    let n = ds.n() as f64;
    let m = lab.class_count();
    let mean_within = lab
        .classes()
        .iter()
        .zip(&st.class_means)
        .map(|(members, cm)| cm * members.len() as f64)
        .sum::<f64>()
        / n;
    let mut max_c2 = 0.0f64;
    for i in 0..m {
        for j in (i + 1)..m {
            max_c2 = max_c2.max(euclidean_sq(&st.centroids[i], &st.centroids[j]));
        }
    }
    if max_c2 == 0.0 {
        return Ok(0.0);
    }
    Ok(((st.mean_global - mean_within) / st.sigma).exp() * max_c2 / (m as f64 * st.sigma))
}

/// Core of the adjusted Davies-Bouldin chain (already inverted: higher is
/// better). Evaluated in log space so concentrated data cannot produce
/// inf/inf artifacts.
fn db_core_at(ds: &Dataset, lab: &Labeling, shift: Shift) -> Result<f64> {
    let st = squared_stats(ds, lab, shift)?;
    let m = lab.class_count();
    // Exponents of the per-class compactness terms and the global factor.
    let a: Vec<f64> = st.class_means.iter().map(|cm| cm / st.sigma).collect();
    let g = st.mean_global / st.sigma;
    let mut total = 0.0;
    for i in 0..m {
        let mut worst = f64::NEG_INFINITY;
        for j in 0..m {
            if i == j {
                continue;
            }
            let sep = euclidean_sq(&st.centroids[i], &st.centroids[j]);
            if sep == 0.0 {
                return Err(Error::DegenerateCentroids);
            }
            // log of (e^{a_i} + e^{a_j}) / ((sep / sigma) e^{g})
            let hi = a[i].max(a[j]);
            let log_num = hi + ((a[i] - hi).exp() + (a[j] - hi).exp()).ln();
            worst = worst.max(log_num - g - (sep / st.sigma).ln());
        }
        total += worst.exp();
    }
    Ok(m as f64 / total)
}

/// Core of the adjusted Dunn chain: exponential ratio of the minimum average
/// inter-class distance to the maximum average intra-class distance. Classes
/// with fewer than two points contribute no intra-class average, so the
/// worst-case singleton partition stays evaluable.
fn di_core_at(ds: &Dataset, lab: &Labeling, shift: Shift) -> Result<f64> {
    let stats = dispersion_shifted(ds, shift.point_centroid, 0.0)?;
    let sigma = stats.sigma_d;
    if sigma == 0.0 {
        return Err(Error::DegenerateDispersion(
            "distances to the centroid have zero spread",
        ));
    }
    let m = lab.class_count();
    let assignment = lab.assignment();
    let mut intra = vec![0.0f64; m];
    let mut inter = vec![0.0f64; m * m];
    for i in 0..ds.n() {
        for j in (i + 1)..ds.n() {
            let d = euclidean(ds.row(i), ds.row(j));
            let (ci, cj) = (assignment[i], assignment[j]);
            if ci == cj {
                intra[ci] += d;
            } else {
                inter[ci.min(cj) * m + ci.max(cj)] += d;
            }
        }
    }
    let sizes = lab.class_sizes();
    let mut max_intra = f64::NEG_INFINITY;
    for (c, &size) in sizes.iter().enumerate() {
        if size >= 2 {
            let pairs = (size * (size - 1) / 2) as f64;
            max_intra = max_intra.max(intra[c] / pairs + shift.point_point);
        }
    }
    if !max_intra.is_finite() {
        return Err(Error::DegenerateDispersion(
            "no class has two points for an intra-class average",
        ));
    }
    let mut min_inter = f64::INFINITY;
    for i in 0..m {
        for j in (i + 1)..m {
            let avg = inter[i * m + j] / (sizes[i] * sizes[j]) as f64 + shift.point_point;
            min_inter = min_inter.min(avg);
        }
    }
    Ok(((min_inter - max_intra) / sigma).exp())
}

/// Exponentiated silhouette: the classical silhouette with both mean
/// distances passed through `exp(. / sigma_d)`. Already ranges over (-1, 1)
/// with random labelings near zero, so no logistic or min-max step follows.
fn sc_core_at(ds: &Dataset, lab: &Labeling, shift: Shift) -> Result<f64> {
    for (id, members) in lab.classes().iter().enumerate() {
        if members.len() < 2 {
            return Err(Error::ClassTooSmall {
                class: lab.name(id).to_string(),
                size: members.len(),
                min: 2,
            });
        }
    }
    let stats = dispersion_shifted(ds, shift.point_centroid, 0.0)?;
    let sigma = stats.sigma_d;
    if sigma == 0.0 {
        return Err(Error::DegenerateDispersion(
            "distances to the centroid have zero spread",
        ));
    }
    let m = lab.class_count();
    let assignment = lab.assignment();
    let sizes = lab.class_sizes();
    let sums = crate::baseline::per_point_class_distance_sums(ds, lab);
    let mut class_totals = vec![0.0; m];
    for i in 0..ds.n() {
        let own = assignment[i];
        let row = &sums[i * m..(i + 1) * m];
        let a = row[own] / (sizes[own] - 1) as f64 + shift.point_point;
        let b = (0..m)
            .filter(|&j| j != own)
            .map(|j| row[j] / sizes[j] as f64 + shift.point_point)
            .fold(f64::INFINITY, f64::min);
        // (e^{b/s} - e^{a/s}) / max(e^{b/s}, e^{a/s}), via exponent
        // differences so large magnitudes cannot overflow.
        let s = if b >= a {
            1.0 - ((a - b) / sigma).exp()
        } else {
            ((b - a) / sigma).exp() - 1.0
        };
        class_totals[own] += s;
    }
    Ok((0..m)
        .map(|i| class_totals[i] / sizes[i] as f64)
        .sum::<f64>()
        / m as f64)
}

/// Mean of the logistic-transformed core over `runs` label shuffles; the
/// empirical worst-score estimate. Deterministic in `(input, runs, seed)`.
pub fn estimate_min_monte_carlo(
    kind: CoreMeasure,
    ds: &Dataset,
    lab: &Labeling,
    k: f64,
    runs: usize,
    seed: u64,
) -> Result<f64> {
    if runs == 0 {
        return Err(Error::InvalidConfig(
            "Monte-Carlo estimation needs at least one run".into(),
        ));
    }
    let samples = exec::par_map_indexed(runs, |t| {
        let mut rng = seeded_rng(child_seed(seed, t as u64));
        let shuffled = shuffle_labels(lab, &mut rng);
        core_value(kind, ds, &shuffled).map(|core| logistic(core, k))
    });
    let mut total = 0.0;
    for s in samples {
        total += s?;
    }
    Ok(total / runs as f64)
}

/// Per-pair evaluation record kept for reports.
#[derive(Clone, Debug)]
pub struct PairDetail {
    pub class_a: String,
    pub class_b: String,
    /// Pre-logistic core value (for `ScA` this is already the pair score).
    pub core: f64,
    pub logistic: Option<f64>,
    pub min_estimate: Option<f64>,
    pub score: f64,
    /// True when the min-max step produced a negative value that was clamped
    /// to zero (possible only for the Dunn chain's estimated minimum).
    pub clamped: bool,
}

/// An adjusted score with its class-pair breakdown.
#[derive(Clone, Debug)]
pub struct AdjustedScore {
    pub score: f64,
    pub pairs: Vec<PairDetail>,
}

fn validate_config(kind: AdjustedMeasure, cfg: &MeasureConfig) -> Result<()> {
    if !(cfg.k > 0.0 && cfg.k.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "growth rate k must be positive and finite, got {}",
            cfg.k
        )));
    }
    if !(cfg.p > 0.0) {
        return Err(Error::InvalidConfig("power p must be positive".into()));
    }
    match (kind, cfg.min_mode) {
        (AdjustedMeasure::DiA, MinMode::ClosedFormHalf) => Err(Error::InvalidConfig(
            "the Dunn chain has no closed-form worst score; use geo_median or monte_carlo".into(),
        )),
        (AdjustedMeasure::DiA, _) => Ok(()),
        (_, MinMode::GeometricMedianPartition) => Err(Error::InvalidConfig(
            "the geometric-median worst case applies to the Dunn chain only".into(),
        )),
        (_, MinMode::MonteCarlo { runs: 0, .. }) => Err(Error::InvalidConfig(
            "Monte-Carlo estimation needs at least one run".into(),
        )),
        _ => Ok(()),
    }
}

fn pair_detail(
    kind: AdjustedMeasure,
    sub: &Dataset,
    sub_lab: &Labeling,
    cfg: &MeasureConfig,
    pair_index: u64,
) -> Result<PairDetail> {
    let names = (sub_lab.name(0).to_string(), sub_lab.name(1).to_string());
    if kind == AdjustedMeasure::ScA {
        let core = core_value_at(CoreMeasure::Sc, sub, sub_lab, NO_SHIFT)?;
        return Ok(PairDetail {
            class_a: names.0,
            class_b: names.1,
            core,
            logistic: None,
            min_estimate: None,
            score: core,
            clamped: false,
        });
    }
    let core_kind = kind.core().expect("non-silhouette chains have a core");
    let core = core_value_at(core_kind, sub, sub_lab, NO_SHIFT)?;
    let l = logistic(core, cfg.k);
    let min = match cfg.min_mode {
        MinMode::ClosedFormHalf => 0.5,
        MinMode::GeometricMedianPartition => {
            let psi = geometric_median_partition(sub)?;
            logistic(core_value_at(CoreMeasure::Di, sub, &psi, NO_SHIFT)?, cfg.k)
        }
        MinMode::MonteCarlo { runs, seed } => estimate_min_monte_carlo(
            core_kind,
            sub,
            sub_lab,
            cfg.k,
            runs,
            child_seed(seed, pair_index),
        )?,
    };
    let raw = (l - min) / (1.0 - min);
    let clamped = kind == AdjustedMeasure::DiA && raw < 0.0;
    Ok(PairDetail {
        class_a: names.0,
        class_b: names.1,
        core,
        logistic: Some(l),
        min_estimate: Some(min),
        score: if clamped { 0.0 } else { raw },
        clamped,
    })
}

/// Evaluate an adjusted measure, returning the per-pair breakdown.
pub fn evaluate_adjusted_detailed(
    kind: AdjustedMeasure,
    ds: &Dataset,
    lab: &Labeling,
    cfg: &MeasureConfig,
) -> Result<AdjustedScore> {
    validate_config(kind, cfg)?;
    let m = lab.class_count();
    if m < 2 {
        return Err(Error::TooFewClasses);
    }
    let mut pairs = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in (i + 1)..m {
            pairs.push((i, j));
        }
    }
    // Pair evaluations run in parallel but are reduced in sorted pair order,
    // so the result does not depend on thread count.
    let details = exec::par_map_indexed(pairs.len(), |idx| {
        let (i, j) = pairs[idx];
        let (sub, sub_lab) = pair_subset(ds, lab, i, j);
        pair_detail(kind, &sub, &sub_lab, cfg, idx as u64).map_err(|e| Error::PairFailed {
            a: lab.name(i).to_string(),
            b: lab.name(j).to_string(),
            source: Box::new(e),
        })
    });
    let mut collected = Vec::with_capacity(details.len());
    for d in details {
        collected.push(d?);
    }
    let scores: Vec<f64> = collected.iter().map(|d| d.score).collect();
    Ok(AdjustedScore {
        score: cfg.agg.reduce(&scores),
        pairs: collected,
    })
}

pub fn evaluate_adjusted(
    kind: AdjustedMeasure,
    ds: &Dataset,
    lab: &Labeling,
    cfg: &MeasureConfig,
) -> Result<f64> {
    evaluate_adjusted_detailed(kind, ds, lab, cfg).map(|s| s.score)
}

/// Adjusted Calinski-Harabasz score.
pub fn ch_adjusted(ds: &Dataset, lab: &Labeling, cfg: &MeasureConfig) -> Result<f64> {
    evaluate_adjusted(AdjustedMeasure::ChA, ds, lab, cfg)
}

/// Adjusted Dunn score.
pub fn dunn_adjusted(ds: &Dataset, lab: &Labeling, cfg: &MeasureConfig) -> Result<f64> {
    evaluate_adjusted(AdjustedMeasure::DiA, ds, lab, cfg)
}

/// Adjusted I-index score. Identical to [`xb_adjusted`] for every input:
/// after adjustment the two chains coincide, so both entry points call the
/// same implementation.
pub fn ii_adjusted(ds: &Dataset, lab: &Labeling, cfg: &MeasureConfig) -> Result<f64> {
    evaluate_adjusted(AdjustedMeasure::IiXbA, ds, lab, cfg)
}

/// Adjusted Xie-Beni score; see [`ii_adjusted`].
pub fn xb_adjusted(ds: &Dataset, lab: &Labeling, cfg: &MeasureConfig) -> Result<f64> {
    evaluate_adjusted(AdjustedMeasure::IiXbA, ds, lab, cfg)
}

/// Adjusted Davies-Bouldin score.
pub fn db_adjusted(ds: &Dataset, lab: &Labeling, cfg: &MeasureConfig) -> Result<f64> {
    evaluate_adjusted(AdjustedMeasure::DbA, ds, lab, cfg)
}

/// Adjusted (exponentiated) silhouette score, averaged over class pairs.
pub fn sc_adjusted(ds: &Dataset, lab: &Labeling) -> Result<f64> {
    evaluate_adjusted(AdjustedMeasure::ScA, ds, lab, &MeasureConfig::default())
}

/// Apply a scoring function to every pair-restricted sub-dataset (the points
/// of the two classes only, with all statistics recomputed there) and reduce
/// with `agg`. Errors are annotated with the failing pair.
pub fn pairwise_aggregate<F>(ds: &Dataset, lab: &Labeling, agg: Aggregation, pair_fn: F) -> Result<f64>
where
    F: Fn(&Dataset, &Labeling) -> Result<f64> + Sync + Send,
{
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
    let results = exec::par_map(&pairs, |&(i, j)| {
        let (sub, sub_lab) = pair_subset(ds, lab, i, j);
        pair_fn(&sub, &sub_lab).map_err(|e| Error::PairFailed {
            a: lab.name(i).to_string(),
            b: lab.name(j).to_string(),
            source: Box::new(e),
        })
    });
    let mut scores = Vec::with_capacity(results.len());
    for r in results {
        scores.push(r?);
    }
    Ok(agg.reduce(&scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{seeded_rng, shuffle_labels};
    use crate::synth::{generate_gaussian_pair, GaussianPairSpec};
    use approx::assert_relative_eq;
    use rand::Rng;

    fn hand_dataset() -> (Dataset, Labeling) {
        let ds = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![10.0], vec![11.0]]).unwrap();
        let lab = Labeling::new(&[0, 0, 1, 1]).unwrap();
        (ds, lab)
    }

    fn random_blobs(seed: u64, n: usize, dim: usize) -> (Dataset, Labeling) {
        let spec = GaussianPairSpec::sample(&mut seeded_rng(seed), n, dim, seed);
        generate_gaussian_pair(&spec).unwrap()
    }

    #[test]
    fn logistic_hand_values() {
        assert_eq!(logistic(0.0, 1.0), 0.5);
        assert_eq!(logistic(0.0, 17.0), 0.5);
        assert_relative_eq!(logistic(3f64.ln(), 1.0), 0.75, max_relative = 1e-12);
        assert_eq!(logistic(f64::INFINITY, 1.0), 1.0);
        // Strictly increasing.
        assert!(logistic(1.0, 2.0) > logistic(0.9, 2.0));
    }

    #[test]
    fn ch_core_hand_value() {
        // 5 * e^5, from evaluating the definition by hand on {0,1,10,11}.
        let (ds, lab) = hand_dataset();
        let v = core_value(CoreMeasure::Ch, &ds, &lab).unwrap();
        assert_relative_eq!(v, 742.065_795_512_882_9, max_relative = 1e-12);
    }

    #[test]
    fn ii_core_hand_value() {
        let (ds, lab) = hand_dataset();
        let v = core_value(CoreMeasure::Ii, &ds, &lab).unwrap();
        assert_relative_eq!(v, 1_484.131_591_025_765_8, max_relative = 1e-12);
    }

    #[test]
    fn db_core_hand_value() {
        let (ds, lab) = hand_dataset();
        let v = core_value(CoreMeasure::Db, &ds, &lab).unwrap();
        assert_relative_eq!(v, 1_484.131_591_025_765_6, max_relative = 1e-9);
    }

    #[test]
    fn di_core_hand_value() {
        // exp((10 - 1) / 0.5) = e^18.
        let (ds, lab) = hand_dataset();
        let v = core_value(CoreMeasure::Di, &ds, &lab).unwrap();
        assert_relative_eq!(v, 18f64.exp(), max_relative = 1e-12);
    }

    #[test]
    fn sc_core_hand_value() {
        let (ds, lab) = hand_dataset();
        let v = core_value(CoreMeasure::Sc, &ds, &lab).unwrap();
        assert_relative_eq!(v, 0.999_999_976_498_913_1, max_relative = 1e-12);
    }

    #[test]
    fn shifted_core_with_zero_beta_is_identity() {
        let (ds, lab) = random_blobs(21, 40, 3);
        for kind in [
            CoreMeasure::Ch,
            CoreMeasure::Di,
            CoreMeasure::Ii,
            CoreMeasure::Db,
            CoreMeasure::Sc,
        ] {
            let a = core_value(kind, &ds, &lab).unwrap();
            let b = shifted_core(kind, &ds, &lab, 0.0).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn cores_are_shift_invariant() {
        let (ds, lab) = random_blobs(5, 60, 6);
        for kind in [
            CoreMeasure::Ch,
            CoreMeasure::Di,
            CoreMeasure::Ii,
            CoreMeasure::Db,
            CoreMeasure::Sc,
        ] {
            let plain = core_value(kind, &ds, &lab).unwrap();
            for beta in [0.1, 1.0, 100.0] {
                let shifted = shifted_core(kind, &ds, &lab, beta).unwrap();
                assert_relative_eq!(plain, shifted, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn cores_are_scale_invariant() {
        let (ds, lab) = random_blobs(6, 50, 4);
        for kind in [
            CoreMeasure::Ch,
            CoreMeasure::Di,
            CoreMeasure::Ii,
            CoreMeasure::Db,
            CoreMeasure::Sc,
        ] {
            let plain = core_value(kind, &ds, &lab).unwrap();
            for lambda in [0.5, 3.0, 100.0] {
                let scaled = core_value(kind, &ds.scaled(lambda), &lab).unwrap();
                assert_relative_eq!(plain, scaled, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn shuffled_labels_drive_adjusted_scores_to_zero() {
        let (ds, lab) = random_blobs(9, 500, 10);
        let shuffled = shuffle_labels(&lab, &mut seeded_rng(1));
        let cfg = MeasureConfig::default();
        for kind in [
            AdjustedMeasure::ChA,
            AdjustedMeasure::IiXbA,
            AdjustedMeasure::DbA,
        ] {
            let v = evaluate_adjusted(kind, &ds, &shuffled, &cfg).unwrap();
            assert!(v.abs() <= 0.1, "{kind:?} scored {v} on shuffled labels");
        }
        let sc = evaluate_adjusted(AdjustedMeasure::ScA, &ds, &shuffled, &cfg).unwrap();
        assert!(sc.abs() <= 0.1, "ScA scored {sc} on shuffled labels");
    }

    #[test]
    fn monte_carlo_min_is_deterministic_and_near_half() {
        let (ds, lab) = random_blobs(3, 150, 4);
        let a =
            estimate_min_monte_carlo(CoreMeasure::Ch, &ds, &lab, 1.0, 50, 77).unwrap();
        let b =
            estimate_min_monte_carlo(CoreMeasure::Ch, &ds, &lab, 1.0, 50, 77).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!((a - 0.5).abs() < 0.05, "estimate {a}");
    }

    #[test]
    fn monte_carlo_single_run_equals_that_shuffle() {
        let (ds, lab) = random_blobs(13, 60, 3);
        let est = estimate_min_monte_carlo(CoreMeasure::Ch, &ds, &lab, 2.0, 1, 5).unwrap();
        let mut rng = seeded_rng(child_seed(5, 0));
        let shuffled = shuffle_labels(&lab, &mut rng);
        let direct = logistic(core_value(CoreMeasure::Ch, &ds, &shuffled).unwrap(), 2.0);
        assert_eq!(est.to_bits(), direct.to_bits());
    }

    #[test]
    fn ii_and_xb_entry_points_agree_bitwise() {
        for seed in 0..10 {
            let (ds, lab) = random_blobs(seed, 80, 5);
            let cfg = MeasureConfig::default();
            let a = ii_adjusted(&ds, &lab, &cfg).unwrap();
            let b = xb_adjusted(&ds, &lab, &cfg).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn adjusted_scores_are_monotone_in_k() {
        let (ds, lab) = random_blobs(30, 80, 3);
        let mut last = f64::NEG_INFINITY;
        for k in [0.01, 0.1, 1.0, 10.0] {
            let v = ch_adjusted(&ds, &lab, &MeasureConfig::with_k(k)).unwrap();
            assert!(v >= last, "score decreased from {last} to {v} at k={k}");
            last = v;
        }
    }

    #[test]
    fn two_class_score_equals_single_pair_score() {
        let (ds, lab) = random_blobs(40, 70, 4);
        let cfg = MeasureConfig::default();
        let detailed =
            evaluate_adjusted_detailed(AdjustedMeasure::ChA, &ds, &lab, &cfg).unwrap();
        assert_eq!(detailed.pairs.len(), 1);
        assert_eq!(detailed.score.to_bits(), detailed.pairs[0].score.to_bits());
    }

    #[test]
    fn aggregations_are_ordered() {
        // Three classes so there is more than one pair to reduce over.
        let mut rows = Vec::new();
        let mut raw = Vec::new();
        let mut rng = seeded_rng(2);
        for (c, center) in [0.0, 4.0, 20.0].iter().enumerate() {
            for _ in 0..15 {
                rows.push(vec![
                    center + rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ]);
                raw.push(c);
            }
        }
        let ds = Dataset::from_rows(&rows).unwrap();
        let lab = Labeling::new(&raw).unwrap();
        let score = |agg| {
            evaluate_adjusted(
                AdjustedMeasure::ChA,
                &ds,
                &lab,
                &MeasureConfig {
                    agg,
                    ..Default::default()
                },
            )
            .unwrap()
        };
        let (lo, mid, hi) = (
            score(Aggregation::Min),
            score(Aggregation::Average),
            score(Aggregation::Max),
        );
        assert!(lo <= mid && mid <= hi, "{lo} {mid} {hi}");
    }

    #[test]
    fn pairwise_aggregate_matches_direct_pair_score() {
        let (ds, lab) = random_blobs(55, 60, 3);
        let direct = core_value(CoreMeasure::Sc, &ds, &lab).unwrap();
        let via = pairwise_aggregate(&ds, &lab, Aggregation::Average, |sub, sub_lab| {
            core_value(CoreMeasure::Sc, sub, sub_lab)
        })
        .unwrap();
        assert_eq!(direct.to_bits(), via.to_bits());
    }

    #[test]
    fn pairwise_errors_name_the_failing_pair() {
        // Class "2" is a singleton, so the silhouette chain fails on its pairs.
        let ds = Dataset::from_rows(&[
            vec![0.0],
            vec![1.0],
            vec![10.0],
            vec![11.0],
            vec![30.0],
        ])
        .unwrap();
        let lab = Labeling::new(&[0, 0, 1, 1, 2]).unwrap();
        let err = evaluate_adjusted(
            AdjustedMeasure::ScA,
            &ds,
            &lab,
            &MeasureConfig::default(),
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('2'), "message should name the pair: {msg}");
    }

    #[test]
    fn dunn_geometric_median_min_is_below_monte_carlo_min() {
        for seed in 0..5 {
            let (ds, lab) = random_blobs(seed + 60, 80, 2);
            let gm = evaluate_adjusted_detailed(
                AdjustedMeasure::DiA,
                &ds,
                &lab,
                &MeasureConfig {
                    min_mode: MinMode::GeometricMedianPartition,
                    ..Default::default()
                },
            )
            .unwrap();
            let mc = evaluate_adjusted_detailed(
                AdjustedMeasure::DiA,
                &ds,
                &lab,
                &MeasureConfig {
                    min_mode: MinMode::MonteCarlo { runs: 30, seed: 9 },
                    ..Default::default()
                },
            )
            .unwrap();
            let gm_min = gm.pairs[0].min_estimate.unwrap();
            let mc_min = mc.pairs[0].min_estimate.unwrap();
            assert!(
                gm_min <= mc_min,
                "geometric-median min {gm_min} above Monte-Carlo min {mc_min}"
            );
        }
    }

    #[test]
    fn dunn_separates_tight_pair_from_spread_pair() {
        // Same centroid distance; tighter clusters must score higher. The
        // overlap is kept moderate so the logistic does not saturate.
        let make = |spread: f64| {
            let mut rng = seeded_rng(77);
            let mut rows = Vec::new();
            let mut raw = Vec::new();
            for c in 0..2 {
                for _ in 0..40 {
                    rows.push(vec![
                        c as f64 * 3.0 + rng.random_range(-spread..spread),
                        rng.random_range(-spread..spread),
                    ]);
                    raw.push(c);
                }
            }
            (
                Dataset::from_rows(&rows).unwrap(),
                Labeling::new(&raw).unwrap(),
            )
        };
        let cfg = MeasureConfig::default_for(AdjustedMeasure::DiA);
        let (tight_ds, tight_lab) = make(1.2);
        let (spread_ds, spread_lab) = make(2.4);
        let tight = dunn_adjusted(&tight_ds, &tight_lab, &cfg).unwrap();
        let spread = dunn_adjusted(&spread_ds, &spread_lab, &cfg).unwrap();
        assert!(tight > spread, "tight {tight} <= spread {spread}");
    }

    #[test]
    fn db_rewards_tighter_clusters_at_fixed_separation() {
        let make = |spread: f64| {
            let mut rng = seeded_rng(31);
            let mut rows = Vec::new();
            let mut raw = Vec::new();
            for c in 0..2 {
                for _ in 0..50 {
                    rows.push(vec![
                        c as f64 * 8.0 + rng.random_range(-spread..spread),
                        rng.random_range(-spread..spread),
                    ]);
                    raw.push(c);
                }
            }
            (
                Dataset::from_rows(&rows).unwrap(),
                Labeling::new(&raw).unwrap(),
            )
        };
        let cfg = MeasureConfig::default();
        let (t_ds, t_lab) = make(0.4);
        let (s_ds, s_lab) = make(2.5);
        let tight = db_adjusted(&t_ds, &t_lab, &cfg).unwrap();
        let spread = db_adjusted(&s_ds, &s_lab, &cfg).unwrap();
        assert!(tight > spread, "tight {tight} <= spread {spread}");
    }

    #[test]
    fn duplicating_the_class_pattern_keeps_the_average_close() {
        // Two well-separated classes, then the same pattern duplicated into
        // four classes; the pair-averaged score should barely move.
        let mut rng = seeded_rng(41);
        let mut two_rows = Vec::new();
        let mut two_raw = Vec::new();
        let mut four_rows = Vec::new();
        let mut four_raw = Vec::new();
        for rep in 0..2 {
            for c in 0..2 {
                for _ in 0..30 {
                    let p = vec![
                        c as f64 * 12.0 + rng.random_range(-1.0..1.0),
                        rep as f64 * 12.0 + rng.random_range(-1.0..1.0),
                    ];
                    if rep == 0 {
                        two_rows.push(p.clone());
                        two_raw.push(c);
                    }
                    four_rows.push(p);
                    four_raw.push(rep * 2 + c);
                }
            }
        }
        let cfg = MeasureConfig::default();
        let two = ch_adjusted(
            &Dataset::from_rows(&two_rows).unwrap(),
            &Labeling::new(&two_raw).unwrap(),
            &cfg,
        )
        .unwrap();
        let four = ch_adjusted(
            &Dataset::from_rows(&four_rows).unwrap(),
            &Labeling::new(&four_raw).unwrap(),
            &cfg,
        )
        .unwrap();
        assert!((two - four).abs() <= 0.05, "two={two} four={four}");
    }

    #[test]
    fn invalid_min_mode_combinations_are_rejected() {
        let (ds, lab) = random_blobs(1, 30, 2);
        let err = evaluate_adjusted(
            AdjustedMeasure::DiA,
            &ds,
            &lab,
            &MeasureConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
        let err = evaluate_adjusted(
            AdjustedMeasure::ChA,
            &ds,
            &lab,
            &MeasureConfig {
                min_mode: MinMode::GeometricMedianPartition,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }
}
