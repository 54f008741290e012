//! Datasets, labelings, and the shared dispersion statistics.

use crate::error::{Error, Result};

/// A dense numeric dataset: `n` points in `dim` dimensions, stored row-major.
///
/// Every entry is finite; this is checked once at construction so the
/// measures never have to re-validate.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    n: usize,
    dim: usize,
    data: Vec<f64>,
}

impl Dataset {
    pub fn new(n: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput("dataset has no rows"));
        }
        if dim == 0 {
            return Err(Error::EmptyInput("dataset has no columns"));
        }
        if data.len() != n * dim {
            return Err(Error::InvalidConfig(format!(
                "dataset buffer holds {} values but {}x{} requires {}",
                data.len(),
                n,
                dim,
                n * dim
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(Self { n, dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("dataset has no rows"));
        }
        let dim = rows[0].len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidConfig("ragged rows".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), dim, data)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Dataset {
            n: idx.len(),
            dim: self.dim,
            data,
        }
    }

    /// Column-filtered copy; `keep` must have one flag per column.
    pub fn select_columns(&self, keep: &[bool]) -> Result<Dataset> {
        if keep.len() != self.dim {
            return Err(Error::InvalidConfig(format!(
                "mask has {} bits for {} columns",
                keep.len(),
                self.dim
            )));
        }
        let kept: Vec<usize> = (0..self.dim).filter(|&j| keep[j]).collect();
        if kept.is_empty() {
            return Err(Error::EmptyInput("column mask selects no columns"));
        }
        let mut data = Vec::with_capacity(self.n * kept.len());
        for r in self.rows() {
            for &j in &kept {
                data.push(r[j]);
            }
        }
        Ok(Dataset {
            n: self.n,
            dim: kept.len(),
            data,
        })
    }

    /// Copy keeping only the first `k` columns.
    pub fn take_columns(&self, k: usize) -> Dataset {
        assert!(k >= 1 && k <= self.dim, "column count out of range");
        let mut data = Vec::with_capacity(self.n * k);
        for r in self.rows() {
            data.extend_from_slice(&r[..k]);
        }
        Dataset {
            n: self.n,
            dim: k,
            data,
        }
    }

    /// Uniformly scaled copy (every coordinate multiplied by `factor`).
    pub fn scaled(&self, factor: f64) -> Dataset {
        Dataset {
            n: self.n,
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }
}

/// A class assignment over `n` points, with derived per-class index lists.
///
/// Classes are disjoint and cover all indices by construction; every class
/// is nonempty. Class ids are dense (`0..class_count`) and each carries a
/// display name used in reports and error messages.
#[derive(Clone, Debug, PartialEq)]
pub struct Labeling {
    assignment: Vec<usize>,
    classes: Vec<Vec<usize>>,
    names: Vec<String>,
}

impl Labeling {
    /// Build from raw (possibly sparse) numeric ids. Distinct ids are
    /// compacted in ascending order and keep their decimal form as name.
    pub fn new(raw: &[usize]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyInput("labeling has no entries"));
        }
        let mut distinct: Vec<usize> = raw.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let names: Vec<String> = distinct.iter().map(|id| id.to_string()).collect();
        let assignment: Vec<usize> = raw
            .iter()
            .map(|id| distinct.binary_search(id).unwrap())
            .collect();
        Self::from_dense(assignment, names)
    }

    /// Build from dense ids `0..names.len()`; every class must be nonempty.
    pub fn from_dense(assignment: Vec<usize>, names: Vec<String>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::EmptyInput("labeling has no entries"));
        }
        let m = names.len();
        let mut classes = vec![Vec::new(); m];
        for (i, &c) in assignment.iter().enumerate() {
            if c >= m {
                return Err(Error::InvalidConfig(format!(
                    "class id {} out of range for {} classes",
                    c, m
                )));
            }
            classes[c].push(i);
        }
        if let Some(empty) = classes.iter().position(|c| c.is_empty()) {
            return Err(Error::InvalidConfig(format!(
                "class `{}` has no members",
                names[empty]
            )));
        }
        Ok(Self {
            assignment,
            classes,
            names,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    #[inline]
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    #[inline]
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    #[inline]
    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    #[inline]
    pub fn class(&self, i: usize) -> &[usize] {
        &self.classes[i]
    }

    #[inline]
    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.len()).collect()
    }

    pub fn min_class_size(&self) -> usize {
        self.classes.iter().map(|c| c.len()).min().unwrap_or(0)
    }

    /// Same partition with a different assignment vector (used by shuffles);
    /// class names are preserved.
    pub(crate) fn with_assignment(&self, assignment: Vec<usize>) -> Labeling {
        Labeling::from_dense(assignment, self.names.clone())
            .expect("permuted assignment keeps every class nonempty")
    }
}

/// Restrict a dataset to the points of classes `a` and `b`.
///
/// Rows keep their original relative order (class `a` first); the returned
/// labeling uses dense ids 0/1 with the original class names.
pub fn pair_subset(ds: &Dataset, lab: &Labeling, a: usize, b: usize) -> (Dataset, Labeling) {
    let ca = lab.class(a);
    let cb = lab.class(b);
    let mut idx = Vec::with_capacity(ca.len() + cb.len());
    idx.extend_from_slice(ca);
    idx.extend_from_slice(cb);
    let sub = ds.select_rows(&idx);
    let mut assignment = vec![0usize; ca.len()];
    assignment.extend(std::iter::repeat(1usize).take(cb.len()));
    let names = vec![lab.name(a).to_string(), lab.name(b).to_string()];
    let sub_lab = Labeling::from_dense(assignment, names).expect("both classes nonempty");
    (sub, sub_lab)
}

#[inline]
pub fn euclidean_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    euclidean_sq(a, b).sqrt()
}

/// Arithmetic mean of all rows.
pub fn centroid(ds: &Dataset) -> Vec<f64> {
    let mut c = vec![0.0; ds.dim()];
    for r in ds.rows() {
        for (acc, v) in c.iter_mut().zip(r) {
            *acc += v;
        }
    }
    let n = ds.n() as f64;
    for v in &mut c {
        *v /= n;
    }
    c
}

/// Arithmetic mean of the given rows.
pub fn class_centroid(ds: &Dataset, idx: &[usize]) -> Result<Vec<f64>> {
    if idx.is_empty() {
        return Err(Error::EmptyInput("centroid of an empty point set"));
    }
    let mut c = vec![0.0; ds.dim()];
    for &i in idx {
        for (acc, v) in c.iter_mut().zip(ds.row(i)) {
            *acc += v;
        }
    }
    let n = idx.len() as f64;
    for v in &mut c {
        *v /= n;
    }
    Ok(c)
}

/// Population standard deviation (no Bessel correction).
pub(crate) fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    var.sqrt()
}

/// Standard deviations of the distances (`sigma_d`) and squared distances
/// (`sigma_d2`) of all points to the global centroid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DispersionStats {
    pub sigma_d: f64,
    pub sigma_d2: f64,
}

pub fn dispersion(ds: &Dataset) -> Result<DispersionStats> {
    dispersion_shifted(ds, 0.0, 0.0)
}

/// Dispersion with every point-to-centroid distance increased by `shift_d`
/// and every squared one by `shift_d2` before taking the standard deviation.
/// The std of a shifted sample equals the unshifted std; the explicit form
/// exists so the shift-invariance tests exercise the full computation.
pub(crate) fn dispersion_shifted(
    ds: &Dataset,
    shift_d: f64,
    shift_d2: f64,
) -> Result<DispersionStats> {
    if ds.n() < 2 {
        return Err(Error::EmptyInput("dispersion requires at least two points"));
    }
    let c = centroid(ds);
    let mut d = Vec::with_capacity(ds.n());
    let mut d2 = Vec::with_capacity(ds.n());
    for r in ds.rows() {
        let sq = euclidean_sq(r, &c);
        d.push(sq.sqrt() + shift_d);
        d2.push(sq + shift_d2);
    }
    Ok(DispersionStats {
        sigma_d: population_std(&d),
        sigma_d2: population_std(&d2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn centroid_of_hand_sets() {
        let ds = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![10.0], vec![11.0]]).unwrap();
        assert_eq!(centroid(&ds), vec![5.5]);

        let single = Dataset::from_rows(&[vec![2.0, 2.0]]).unwrap();
        assert_eq!(centroid(&single), vec![2.0, 2.0]);

        let square = Dataset::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 2.0],
            vec![2.0, 0.0],
            vec![2.0, 2.0],
        ])
        .unwrap();
        assert_eq!(centroid(&square), vec![1.0, 1.0]);
    }

    #[test]
    fn class_centroid_rejects_empty() {
        let ds = Dataset::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert!(matches!(
            class_centroid(&ds, &[]),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn dispersion_hand_value() {
        let ds = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![10.0], vec![11.0]]).unwrap();
        let stats = dispersion(&ds).unwrap();
        assert_relative_eq!(stats.sigma_d, 0.5, max_relative = 1e-12);
        assert_relative_eq!(stats.sigma_d2, 5.0, max_relative = 1e-12);
    }

    #[test]
    fn dispersion_of_identical_points_is_zero() {
        let ds = Dataset::from_rows(&vec![vec![3.0, 3.0]; 5]).unwrap();
        let stats = dispersion(&ds).unwrap();
        assert_eq!(stats.sigma_d, 0.0);
        assert_eq!(stats.sigma_d2, 0.0);
    }

    #[test]
    fn non_finite_entry_is_rejected_with_position() {
        let err = Dataset::new(2, 2, vec![0.0, 1.0, f64::NAN, 2.0]).unwrap_err();
        match err {
            Error::NonFiniteValue { row, col } => {
                assert_eq!((row, col), (1, 0));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn labeling_compacts_sparse_ids_and_keeps_names() {
        let lab = Labeling::new(&[7, 3, 7, 3, 9]).unwrap();
        assert_eq!(lab.class_count(), 3);
        assert_eq!(lab.names(), &["3", "7", "9"]);
        assert_eq!(lab.class(0), &[1, 3]);
        assert_eq!(lab.class(2), &[4]);
    }

    #[test]
    fn labeling_rejects_empty_class() {
        let err = Labeling::from_dense(vec![0, 0, 2], vec!["a".into(), "b".into(), "c".into()])
            .unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn pair_subset_restricts_points_and_names() {
        let ds = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![5.0], vec![6.0], vec![9.0]])
            .unwrap();
        let lab = Labeling::new(&[0, 0, 1, 1, 2]).unwrap();
        let (sub, sub_lab) = pair_subset(&ds, &lab, 0, 2);
        assert_eq!(sub.n(), 3);
        assert_eq!(sub.row(2), &[9.0]);
        assert_eq!(sub_lab.names(), &["0", "2"]);
        assert_eq!(sub_lab.class_sizes(), vec![2, 1]);
    }

    proptest! {
        // Partition property: classes are disjoint and cover all indices.
        #[test]
        fn labeling_is_a_partition(raw in prop::collection::vec(0usize..5, 1..60)) {
            let lab = Labeling::new(&raw).unwrap();
            let total: usize = lab.class_sizes().iter().sum();
            prop_assert_eq!(total, raw.len());
            let mut seen = vec![false; raw.len()];
            for class in lab.classes() {
                for &i in class {
                    prop_assert!(!seen[i]);
                    seen[i] = true;
                }
            }
            prop_assert!(seen.iter().all(|&s| s));
        }

        // Scaling the data scales sigma_d by |lambda| and sigma_d2 by lambda^2.
        #[test]
        fn dispersion_homogeneity(
            rows in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3), 2..30),
            lambda in 0.1f64..20.0,
        ) {
            let ds = Dataset::from_rows(&rows).unwrap();
            let base = dispersion(&ds).unwrap();
            let scaled = dispersion(&ds.scaled(lambda)).unwrap();
            prop_assert!((scaled.sigma_d - lambda * base.sigma_d).abs() <= 1e-9 * (1.0 + base.sigma_d.abs() * lambda));
            prop_assert!((scaled.sigma_d2 - lambda * lambda * base.sigma_d2).abs() <= 1e-9 * (1.0 + base.sigma_d2.abs() * lambda * lambda));
        }
    }
}
