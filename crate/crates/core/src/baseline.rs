//! The six classical internal validity measures in their textbook form.
//!
//! These are the adjustment inputs and the negative controls of the property
//! suites. Each has a `*_shifted` variant that evaluates the measure with
//! every distance term uniformly increased by `beta`, which the invariance
//! tests use to show the classical forms react to a constant distance shift.

use crate::data::{centroid, class_centroid, euclidean, euclidean_sq, Dataset, Labeling};
use crate::error::{Error, Result};

/// Identifies one of the six classical measures; the I-index carries its
/// discrimination power `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BaselineMeasure {
    Ch,
    Di,
    Ii { p: f64 },
    Xb,
    Db,
    Sc,
}

impl BaselineMeasure {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineMeasure::Ch => "ch",
            BaselineMeasure::Di => "di",
            BaselineMeasure::Ii { .. } => "ii",
            BaselineMeasure::Xb => "xb",
            BaselineMeasure::Db => "db",
            BaselineMeasure::Sc => "sc",
        }
    }

    pub fn evaluate(&self, ds: &Dataset, lab: &Labeling) -> Result<f64> {
        self.evaluate_shifted(ds, lab, 0.0)
    }

    pub fn evaluate_shifted(&self, ds: &Dataset, lab: &Labeling, beta: f64) -> Result<f64> {
        match *self {
            BaselineMeasure::Ch => ch_shifted(ds, lab, beta),
            BaselineMeasure::Di => di_shifted(ds, lab, beta),
            BaselineMeasure::Ii { p } => ii_shifted(ds, lab, p, beta),
            BaselineMeasure::Xb => xb_shifted(ds, lab, beta),
            BaselineMeasure::Db => db_shifted(ds, lab, beta),
            BaselineMeasure::Sc => sc_shifted(ds, lab, beta),
        }
    }
}

fn require_two_classes(lab: &Labeling) -> Result<()> {
    if lab.class_count() < 2 {
        return Err(Error::TooFewClasses);
    }
    Ok(())
}

fn class_centroids(ds: &Dataset, lab: &Labeling) -> Vec<Vec<f64>> {
    lab.classes()
        .iter()
        .map(|members| class_centroid(ds, members).expect("classes are nonempty"))
        .collect()
}

/// Sum over classes of squared distances of members to their class centroid.
fn within_sq_sum(ds: &Dataset, lab: &Labeling, cents: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for (members, c) in lab.classes().iter().zip(cents) {
        for &i in members {
            total += euclidean_sq(ds.row(i), c);
        }
    }
    total
}

/// Calinski-Harabasz index; higher is better.
pub fn ch(ds: &Dataset, lab: &Labeling) -> Result<f64> {
    ch_shifted(ds, lab, 0.0)
}

pub fn ch_shifted(ds: &Dataset, lab: &Labeling, beta: f64) -> Result<f64> {
    require_two_classes(lab)?;
    let n = ds.n() as f64;
    let m = lab.class_count() as f64;
    let c = centroid(ds);
    let cents = class_centroids(ds, lab);
    let between: f64 = lab
        .classes()
        .iter()
        .zip(&cents)
        .map(|(members, ci)| members.len() as f64 * euclidean_sq(ci, &c))
        .sum();
    let within = within_sq_sum(ds, lab, &cents);
    let denom = within + n * beta;
    if denom == 0.0 {
        return Err(Error::DegenerateDispersion(
            "within-class squared dispersion is zero",
        ));
    }
    Ok((n - m) / (m - 1.0) * (between + n * beta) / denom)
}

/// Dunn index: minimum inter-class over maximum intra-class point distance.
pub fn di(ds: &Dataset, lab: &Labeling) -> Result<f64> {
    di_shifted(ds, lab, 0.0)
}

pub fn di_shifted(ds: &Dataset, lab: &Labeling, beta: f64) -> Result<f64> {
    require_two_classes(lab)?;
    let assignment = lab.assignment();
    let mut min_inter = f64::INFINITY;
    let mut max_intra: f64 = 0.0;
    let mut intra_seen = false;
    for i in 0..ds.n() {
        for j in (i + 1)..ds.n() {
            let d = euclidean(ds.row(i), ds.row(j));
            if assignment[i] == assignment[j] {
                intra_seen = true;
                max_intra = max_intra.max(d);
            } else {
                min_inter = min_inter.min(d);
            }
        }
    }
    let denom = max_intra + beta;
    if !intra_seen || denom == 0.0 {
        return Err(Error::DegenerateDispersion(
            "maximum intra-class distance is zero",
        ));
    }
    Ok((min_inter + beta) / denom)
}

/// I-index with discrimination power `p`.
pub fn ii(ds: &Dataset, lab: &Labeling, p: f64) -> Result<f64> {
    ii_shifted(ds, lab, p, 0.0)
}

pub fn ii_shifted(ds: &Dataset, lab: &Labeling, p: f64, beta: f64) -> Result<f64> {
    require_two_classes(lab)?;
    if !(p > 0.0) {
        return Err(Error::InvalidConfig("I-index power must be positive".into()));
    }
    let n = ds.n() as f64;
    let m = lab.class_count();
    let c = centroid(ds);
    let cents = class_centroids(ds, lab);
    let global: f64 = ds.rows().map(|r| euclidean(r, &c)).sum();
    let mut within = 0.0;
    for (members, ci) in lab.classes().iter().zip(&cents) {
        for &i in members {
            within += euclidean(ds.row(i), ci);
        }
    }
    let denom = within + n * beta;
    if denom == 0.0 {
        return Err(Error::DegenerateDispersion(
            "within-class dispersion is zero",
        ));
    }
    let mut max_c = 0.0f64;
    for i in 0..m {
        for j in (i + 1)..m {
            max_c = max_c.max(euclidean(&cents[i], &cents[j]));
        }
    }
    Ok((1.0 / m as f64 * (global + n * beta) / denom * (max_c + beta)).powf(p))
}

/// Xie-Beni index; lower is better for the classical form.
pub fn xb(ds: &Dataset, lab: &Labeling) -> Result<f64> {
    xb_shifted(ds, lab, 0.0)
}

pub fn xb_shifted(ds: &Dataset, lab: &Labeling, beta: f64) -> Result<f64> {
    require_two_classes(lab)?;
    let n = ds.n() as f64;
    let cents = class_centroids(ds, lab);
    let within = within_sq_sum(ds, lab, &cents);
    let mut min_c2 = f64::INFINITY;
    for i in 0..cents.len() {
        for j in (i + 1)..cents.len() {
            min_c2 = min_c2.min(euclidean_sq(&cents[i], &cents[j]));
        }
    }
    let denom = min_c2 + beta;
    if denom == 0.0 {
        return Err(Error::DegenerateCentroids);
    }
    Ok((within + n * beta) / (n * denom))
}

/// Davies-Bouldin index; lower is better for the classical form.
pub fn db(ds: &Dataset, lab: &Labeling) -> Result<f64> {
    db_shifted(ds, lab, 0.0)
}

pub fn db_shifted(ds: &Dataset, lab: &Labeling, beta: f64) -> Result<f64> {
    require_two_classes(lab)?;
    let m = lab.class_count();
    let cents = class_centroids(ds, lab);
    let scatter: Vec<f64> = lab
        .classes()
        .iter()
        .zip(&cents)
        .map(|(members, ci)| {
            members
                .iter()
                .map(|&i| euclidean(ds.row(i), ci))
                .sum::<f64>()
                / members.len() as f64
        })
        .collect();
    let mut total = 0.0;
    for i in 0..m {
        let mut worst = f64::NEG_INFINITY;
        for j in 0..m {
            if i == j {
                continue;
            }
            let sep = euclidean(&cents[i], &cents[j]) + beta;
            if sep == 0.0 {
                return Err(Error::DegenerateCentroids);
            }
            worst = worst.max((scatter[i] + scatter[j] + 2.0 * beta) / sep);
        }
        total += worst;
    }
    Ok(total / m as f64)
}

/// Silhouette coefficient, averaged per class then over classes; in [-1, 1].
pub fn sc(ds: &Dataset, lab: &Labeling) -> Result<f64> {
    sc_shifted(ds, lab, 0.0)
}

pub fn sc_shifted(ds: &Dataset, lab: &Labeling, beta: f64) -> Result<f64> {
    require_two_classes(lab)?;
    for (id, members) in lab.classes().iter().enumerate() {
        if members.len() < 2 {
            return Err(Error::ClassTooSmall {
                class: lab.name(id).to_string(),
                size: members.len(),
                min: 2,
            });
        }
    }
    let m = lab.class_count();
    let sizes = lab.class_sizes();
    let sums = per_point_class_distance_sums(ds, lab);
    let assignment = lab.assignment();
    let mut class_means = vec![0.0; m];
    for i in 0..ds.n() {
        let own = assignment[i];
        let row = &sums[i * m..(i + 1) * m];
        let a = row[own] / (sizes[own] - 1) as f64;
        let b = (0..m)
            .filter(|&j| j != own)
            .map(|j| row[j] / sizes[j] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b) + beta;
        let s = if denom == 0.0 { 0.0 } else { (b - a) / denom };
        class_means[own] += s;
    }
    let score = (0..m)
        .map(|i| class_means[i] / sizes[i] as f64)
        .sum::<f64>()
        / m as f64;
    Ok(score)
}

/// `sums[i * m + c]` = total distance from point `i` to every point of class
/// `c` (self contributes zero). One pass over unordered pairs.
pub(crate) fn per_point_class_distance_sums(ds: &Dataset, lab: &Labeling) -> Vec<f64> {
    let n = ds.n();
    let m = lab.class_count();
    let assignment = lab.assignment();
    let mut sums = vec![0.0; n * m];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(ds.row(i), ds.row(j));
            sums[i * m + assignment[j]] += d;
            sums[j * m + assignment[i]] += d;
        }
    }
    sums
}
