//! Experiment machinery: sensitivity sweeps, noisy-label rank correlation,
//! pairwise rank stability, and score-driven feature selection.

use rand::Rng;

use crate::data::{Dataset, Labeling};
use crate::error::{Error, Result};
use crate::exec;
use crate::measure::AnyMeasure;
use crate::sampling::{child_seed, seeded_rng, subsample};
use crate::synth::{generate_gaussian_pair, noisy_label_variants, GaussianPairSpec};

/// Symmetric mean absolute percentage error over two aligned score lists:
/// `sum |F - G| / sum (|F| + |G|)`, in [0, 1]. Both-zero sums mean the lists
/// agree everywhere, so the error is defined as 0.
pub fn smape(f: &[f64], g: &[f64]) -> f64 {
    assert_eq!(f.len(), g.len(), "smape needs aligned lists");
    assert!(!f.is_empty(), "smape needs at least one entry");
    let num: f64 = f.iter().zip(g).map(|(a, b)| (a - b).abs()).sum();
    let den: f64 = f.iter().zip(g).map(|(a, b)| a.abs() + b.abs()).sum();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Average ranks (ties share the mean of the positions they occupy).
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties, in [-1, 1].
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidConfig(
            "rank correlation needs aligned lists".into(),
        ));
    }
    if a.len() < 2 {
        return Err(Error::DegenerateRanks("fewer than two observations"));
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = ra.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - mean) * (y - mean);
        var_a += (x - mean) * (x - mean);
        var_b += (y - mean) * (y - mean);
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::DegenerateRanks("an input is constant"));
    }
    Ok(cov / (var_a * var_b).sqrt())
}

/// Which dataset property a sensitivity sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    Cardinality,
    Dimensionality,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Cardinality => "cardinality",
            SweepAxis::Dimensionality => "dimensionality",
        }
    }

    /// The standard levels: cardinalities 500, 550, ..., 1000 or dimensions
    /// 2, 10, 20, ..., 100.
    pub fn default_levels(&self) -> Vec<usize> {
        match self {
            SweepAxis::Cardinality => (0..=10).map(|t| 500 + 50 * t).collect(),
            SweepAxis::Dimensionality => {
                let mut v = vec![2];
                v.extend((1..=10).map(|t| 10 * t));
                v
            }
        }
    }
}

/// Settings for one sensitivity sweep over generated base datasets.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub levels: Vec<usize>,
    pub base_count: usize,
    /// Cardinality of each base dataset (levels subsample from it).
    pub base_n: usize,
    /// Dimensionality of each base dataset (levels truncate columns).
    pub base_dim: usize,
    pub seed: u64,
    /// Per-base-dataset weights; uniform when absent.
    pub weights: Option<Vec<f64>>,
}

impl SweepConfig {
    pub fn new(axis: SweepAxis, base_count: usize, seed: u64) -> Self {
        Self {
            axis,
            levels: axis.default_levels(),
            base_count,
            base_n: 1000,
            base_dim: 100,
            seed,
            weights: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.base_count < 2 {
            return Err(Error::InvalidConfig(
                "a sweep needs at least two base datasets".into(),
            ));
        }
        if self.levels.is_empty() || self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "levels must be nonempty and strictly increasing".into(),
            ));
        }
        let max_level = *self.levels.last().unwrap();
        match self.axis {
            SweepAxis::Cardinality => {
                if max_level > self.base_n {
                    return Err(Error::InvalidConfig(
                        "cardinality levels exceed the base dataset size".into(),
                    ));
                }
            }
            SweepAxis::Dimensionality => {
                if self.levels[0] < 2 || max_level > self.base_dim {
                    return Err(Error::InvalidConfig(
                        "dimension levels must lie within [2, base_dim]".into(),
                    ));
                }
            }
        }
        if let Some(w) = &self.weights {
            if w.len() != self.base_count {
                return Err(Error::InvalidConfig(
                    "one weight per base dataset is required".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Sensitivity of one measure across the sweep: the pairwise error matrix
/// over levels and its mean over distinct level pairs.
#[derive(Clone, Debug, serde::Serialize)]
pub struct VariantSensitivity {
    pub measure: String,
    pub error_matrix: Vec<Vec<f64>>,
    pub average_error: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct AblationReport {
    pub axis: String,
    pub levels: Vec<usize>,
    pub base_count: usize,
    pub variants: Vec<VariantSensitivity>,
}

impl AblationReport {
    pub fn average_error_of(&self, measure: &str) -> Option<f64> {
        self.variants
            .iter()
            .find(|v| v.measure == measure)
            .map(|v| v.average_error)
    }
}

/// Run a sensitivity sweep: generate `base_count` two-Gaussian datasets,
/// vary the controlled property over `levels` (the uncontrolled property is
/// re-drawn at random per variant), score every variant with every measure,
/// and report the weighted, minimum-aligned symmetric error between each
/// pair of levels.
pub fn ablation_sweep(measures: &[AnyMeasure], cfg: &SweepConfig) -> Result<AblationReport> {
    cfg.validate()?;
    if measures.is_empty() {
        return Err(Error::EmptyInput("no measures to sweep"));
    }
    let levels = &cfg.levels;
    let n_levels = levels.len();
    let n_tasks = cfg.base_count * n_levels;

    // Each base dataset is generated once and shared by its level variants.
    let bases = exec::par_map_indexed(cfg.base_count, |base| {
        let base_seed = child_seed(cfg.seed, base as u64);
        let mut shape_rng = seeded_rng(base_seed);
        let spec = GaussianPairSpec::sample(
            &mut shape_rng,
            cfg.base_n,
            cfg.base_dim,
            child_seed(base_seed, 1),
        );
        generate_gaussian_pair(&spec).map_err(|e| e.with_context(format!("base dataset {base}")))
    });
    let mut base_data = Vec::with_capacity(cfg.base_count);
    for b in bases {
        base_data.push(b?);
    }

    // scores[measure][base][level]
    let task_scores = exec::par_map_indexed(n_tasks, |task| -> Result<Vec<f64>> {
        let base = task / n_levels;
        let level_idx = task % n_levels;
        let base_seed = child_seed(cfg.seed, base as u64);
        let (full_ds, full_lab) = &base_data[base];
        let mut variant_rng = seeded_rng(child_seed(base_seed, 2 + level_idx as u64));
        let (ds, lab) = match cfg.axis {
            SweepAxis::Cardinality => {
                let n_t = levels[level_idx];
                let dim = variant_rng.random_range(2..=cfg.base_dim);
                let alpha = n_t as f64 / cfg.base_n as f64;
                let (sub, sub_lab) = subsample(full_ds, full_lab, alpha, &mut variant_rng)?;
                (sub.take_columns(dim), sub_lab)
            }
            SweepAxis::Dimensionality => {
                let dim = levels[level_idx];
                let n_t = variant_rng.random_range(cfg.base_n / 2..=cfg.base_n);
                let alpha = n_t as f64 / cfg.base_n as f64;
                let (sub, sub_lab) = subsample(full_ds, full_lab, alpha, &mut variant_rng)?;
                (sub.take_columns(dim), sub_lab)
            }
        };
        measures
            .iter()
            .map(|m| {
                m.evaluate(&ds, &lab).map_err(|e| {
                    e.with_context(format!(
                        "measure {} at {} level {} on base {}",
                        m.name(),
                        cfg.axis.name(),
                        levels[level_idx],
                        base
                    ))
                })
            })
            .collect()
    });

    let mut scores = vec![vec![vec![0.0; n_levels]; cfg.base_count]; measures.len()];
    for (task, per_measure) in task_scores.into_iter().enumerate() {
        let base = task / n_levels;
        let level_idx = task % n_levels;
        for (mi, s) in per_measure?.into_iter().enumerate() {
            scores[mi][base][level_idx] = s;
        }
    }

    let uniform = vec![1.0; cfg.base_count];
    let weights = cfg.weights.as_deref().unwrap_or(&uniform);

    let variants = measures
        .iter()
        .enumerate()
        .map(|(mi, m)| {
            let mut matrix = vec![vec![0.0; n_levels]; n_levels];
            let mut total = 0.0;
            let mut count = 0usize;
            for a in 0..n_levels {
                for b in (a + 1)..n_levels {
                    // Align both lists to the empirical minimum over the two
                    // levels before comparing, then weight per base dataset.
                    let min_score = (0..cfg.base_count)
                        .flat_map(|k| [scores[mi][k][a], scores[mi][k][b]])
                        .fold(f64::INFINITY, f64::min);
                    let f: Vec<f64> = (0..cfg.base_count)
                        .map(|k| weights[k] * (scores[mi][k][a] - min_score))
                        .collect();
                    let g: Vec<f64> = (0..cfg.base_count)
                        .map(|k| weights[k] * (scores[mi][k][b] - min_score))
                        .collect();
                    let err = smape(&f, &g);
                    matrix[a][b] = err;
                    matrix[b][a] = err;
                    total += err;
                    count += 1;
                }
            }
            VariantSensitivity {
                measure: m.name().to_string(),
                error_matrix: matrix,
                average_error: total / count as f64,
            }
        })
        .collect();

    Ok(AblationReport {
        axis: cfg.axis.name().to_string(),
        levels: levels.clone(),
        base_count: cfg.base_count,
        variants,
    })
}

/// Score a dataset's noisy-label variants and correlate the scores with the
/// known noise order (less noise ranks higher). Returns the Spearman
/// correlation; near 1 means the measure tracks label quality.
pub fn noisy_label_ranking(
    ds: &Dataset,
    lab: &Labeling,
    measure: &AnyMeasure,
    fractions: &[f64],
    seed: u64,
) -> Result<f64> {
    if fractions.len() < 2 {
        return Err(Error::DegenerateRanks("need at least two noise fractions"));
    }
    let variants = noisy_label_variants(lab, fractions, seed)?;
    let scores = exec::par_map(&variants, |v| measure.evaluate(ds, &v.labeling));
    let mut collected = Vec::with_capacity(scores.len());
    for s in scores {
        collected.push(s?);
    }
    let ground_truth: Vec<f64> = fractions.iter().map(|f| -f).collect();
    spearman(&collected, &ground_truth)
}

/// The standard noise ladder 0.0, 0.1, ..., 1.0.
pub fn default_noise_fractions() -> Vec<f64> {
    (0..=10).map(|l| l as f64 / 10.0).collect()
}

/// A datasets-by-techniques table of external scores.
#[derive(Clone, Debug)]
pub struct ScoreTable {
    pub dataset_names: Vec<String>,
    pub technique_names: Vec<String>,
    /// Row-per-dataset scores, aligned with the name lists.
    pub values: Vec<Vec<f64>>,
}

impl ScoreTable {
    pub fn new(
        dataset_names: Vec<String>,
        technique_names: Vec<String>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if dataset_names.is_empty() || technique_names.is_empty() {
            return Err(Error::EmptyInput("score table is empty"));
        }
        if values.len() != dataset_names.len()
            || values.iter().any(|r| r.len() != technique_names.len())
        {
            return Err(Error::InvalidConfig(
                "score table is not rectangular".into(),
            ));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "score table contains non-finite cells".into(),
            ));
        }
        Ok(Self {
            dataset_names,
            technique_names,
            values,
        })
    }
}

/// Pairwise rank stability over random dataset subsets.
///
/// For each simulation a random subset of datasets is drawn and techniques
/// are compared on their subset-mean scores. With `p` the share of
/// simulations where technique `i` strictly beats `j`, the entry is
/// `max(1 - p, p)`, in [0.5, 1]; ties count toward neither side.
pub fn rank_stability(
    table: &ScoreTable,
    subset_size: usize,
    n_sims: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let n_rows = table.values.len();
    let n_cols = table.technique_names.len();
    if subset_size == 0 || subset_size > n_rows {
        return Err(Error::InvalidConfig(format!(
            "subset size must be in [1, {n_rows}]"
        )));
    }
    if n_sims == 0 {
        return Err(Error::InvalidConfig("at least one simulation".into()));
    }
    let sim_means = exec::par_map_indexed(n_sims, |s| {
        let mut rng = seeded_rng(child_seed(seed, s as u64));
        let subset = rand::seq::index::sample(&mut rng, n_rows, subset_size);
        let mut means = vec![0.0; n_cols];
        for row in subset.iter() {
            for (m, v) in means.iter_mut().zip(&table.values[row]) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= subset_size as f64;
        }
        means
    });
    let mut wins = vec![vec![0usize; n_cols]; n_cols];
    for means in &sim_means {
        for i in 0..n_cols {
            for j in 0..n_cols {
                if means[i] > means[j] {
                    wins[i][j] += 1;
                }
            }
        }
    }
    let mut stability = vec![vec![1.0; n_cols]; n_cols];
    for i in 0..n_cols {
        for j in 0..n_cols {
            if i != j {
                let p = wins[i][j] as f64 / n_sims as f64;
                stability[i][j] = (1.0 - p).max(p);
            }
        }
    }
    Ok(stability)
}

/// Outcome of the feature-subset search.
#[derive(Clone, Debug)]
pub struct ImproveOutcome {
    /// Column mask of the best-scoring subspace (the full mask when nothing
    /// beat the original data).
    pub mask: Vec<bool>,
    pub improved_score: f64,
    pub original_score: f64,
    /// Candidates whose evaluation failed and were skipped.
    pub failed_candidates: usize,
}

/// Random-search feature selection maximizing a measure: draw `n_candidates`
/// random nonzero column masks (each bit fair-coin, all-zero masks redrawn),
/// score the column-filtered dataset, and keep the best. The full-feature
/// mask is always a candidate, so the result never scores below the
/// original data.
pub fn improve_clm(
    ds: &Dataset,
    lab: &Labeling,
    measure: &AnyMeasure,
    n_candidates: usize,
    seed: u64,
) -> Result<ImproveOutcome> {
    if ds.dim() < 2 {
        return Err(Error::InvalidConfig(
            "feature selection needs at least two columns".into(),
        ));
    }
    if n_candidates == 0 {
        return Err(Error::InvalidConfig("at least one candidate".into()));
    }
    let original_score = measure
        .evaluate(ds, lab)
        .map_err(|e| e.with_context("scoring the full-feature dataset"))?;

    let mut rng = seeded_rng(seed);
    let masks: Vec<Vec<bool>> = (0..n_candidates)
        .map(|_| loop {
            let mask: Vec<bool> = (0..ds.dim()).map(|_| rng.random::<bool>()).collect();
            if mask.iter().any(|&b| b) {
                break mask;
            }
        })
        .collect();
    let scores = exec::par_map(&masks, |mask| {
        ds.select_columns(mask)
            .and_then(|filtered| measure.evaluate(&filtered, lab))
    });

    let mut best_mask = vec![true; ds.dim()];
    let mut best_score = original_score;
    let mut failed = 0usize;
    for (mask, score) in masks.iter().zip(scores) {
        match score {
            Ok(s) if s > best_score => {
                best_score = s;
                best_mask = mask.clone();
            }
            Ok(_) => {}
            Err(_) => failed += 1,
        }
    }
    Ok(ImproveOutcome {
        mask: best_mask,
        improved_score: best_score,
        original_score,
        failed_candidates: failed,
    })
}
