//! Controlled two-Gaussian benchmark generator and noisy-label variants.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{Dataset, Labeling};
use crate::error::{Error, Result};
use crate::sampling::{child_seed, seeded_rng};

/// Symmetric 2x2 covariance (three independent parameters).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Covariance2 {
    pub var_x: f64,
    pub cov_xy: f64,
    pub var_y: f64,
}

impl Covariance2 {
    pub fn isotropic(var: f64) -> Self {
        Self {
            var_x: var,
            cov_xy: 0.0,
            var_y: var,
        }
    }

    pub fn determinant(&self) -> f64 {
        self.var_x * self.var_y - self.cov_xy * self.cov_xy
    }

    pub fn is_positive_definite(&self) -> bool {
        self.var_x > 0.0 && self.determinant() > 0.0
    }

    /// Smallest eigenvalue; for a positive-definite matrix this is the
    /// variance along the narrowest axis of the Gaussian.
    pub fn min_eigenvalue(&self) -> f64 {
        let tr = self.var_x + self.var_y;
        let gap = ((self.var_x - self.var_y).powi(2) + 4.0 * self.cov_xy * self.cov_xy).sqrt();
        (tr - gap) / 2.0
    }

    /// Lower-triangular Cholesky factor.
    fn cholesky(&self) -> [[f64; 2]; 2] {
        let l11 = self.var_x.sqrt();
        let l21 = self.cov_xy / l11;
        let l22 = (self.var_y - l21 * l21).sqrt();
        [[l11, 0.0], [l21, l22]]
    }
}

/// Parameters of one labeled two-Gaussian dataset: two covariances (three
/// independent parameters each), the class proportion, and the distance
/// between the cluster means — eight shape parameters in total. The first
/// two dimensions hold the clusters; any further dimension carries
/// per-cluster Gaussian noise with variance equal to the smallest eigenvalue
/// of that cluster's covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPairSpec {
    pub cov_a: Covariance2,
    pub cov_b: Covariance2,
    /// Share of points in class A, in (0, 1).
    pub proportion: f64,
    pub mean_distance: f64,
    pub n: usize,
    pub target_dim: usize,
    pub seed: u64,
}

impl GaussianPairSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.cov_a.is_positive_definite() || !self.cov_b.is_positive_definite() {
            return Err(Error::InvalidConfig(
                "covariances must be positive definite".into(),
            ));
        }
        if !(self.proportion > 0.0 && self.proportion < 1.0) {
            return Err(Error::InvalidConfig(
                "class proportion must lie strictly between 0 and 1".into(),
            ));
        }
        if self.mean_distance < 0.0 {
            return Err(Error::InvalidConfig("mean distance must be >= 0".into()));
        }
        if self.n < 4 {
            return Err(Error::InvalidConfig(
                "at least four points are required".into(),
            ));
        }
        if self.target_dim < 2 {
            return Err(Error::InvalidConfig(
                "the cluster space alone needs two dimensions".into(),
            ));
        }
        Ok(())
    }

    /// Draw a random shape spec spanning overlapping to well-separated
    /// cluster pairs: eigenvalues in [0.25, 2], arbitrary orientation,
    /// proportion in [0.25, 0.75], mean distance in [0, 6].
    pub fn sample<R: Rng>(rng: &mut R, n: usize, target_dim: usize, data_seed: u64) -> Self {
        let cov = |rng: &mut R| {
            let l1: f64 = rng.random_range(0.25..2.0);
            let l2: f64 = rng.random_range(0.25..2.0);
            let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
            let (s, c) = theta.sin_cos();
            Covariance2 {
                var_x: c * c * l1 + s * s * l2,
                cov_xy: s * c * (l1 - l2),
                var_y: s * s * l1 + c * c * l2,
            }
        };
        GaussianPairSpec {
            cov_a: cov(rng),
            cov_b: cov(rng),
            proportion: rng.random_range(0.25..0.75),
            mean_distance: rng.random_range(0.0..6.0),
            n,
            target_dim,
            seed: data_seed,
        }
    }

    /// Like [`GaussianPairSpec::sample`] but with a guaranteed wide gap
    /// between the cluster means, for tests that need clear structure.
    pub fn sample_separated<R: Rng>(
        rng: &mut R,
        n: usize,
        target_dim: usize,
        data_seed: u64,
    ) -> Self {
        let mut spec = Self::sample(rng, n, target_dim, data_seed);
        spec.mean_distance = rng.random_range(6.0..10.0);
        spec
    }
}

/// Generate the labeled dataset described by `spec`. Class A sits at the
/// origin, class B at `mean_distance` along the first axis; deterministic
/// per seed.
pub fn generate_gaussian_pair(spec: &GaussianPairSpec) -> Result<(Dataset, Labeling)> {
    spec.validate()?;
    let n_a = (spec.proportion * spec.n as f64).round() as usize;
    let n_b = spec.n - n_a.min(spec.n);
    for (name, size) in [("A", n_a), ("B", n_b)] {
        if size < 2 {
            return Err(Error::ClassTooSmall {
                class: name.into(),
                size,
                min: 2,
            });
        }
    }
    let mut rng = seeded_rng(spec.seed);
    let dim = spec.target_dim;
    let mut data = Vec::with_capacity(spec.n * dim);
    let mut assignment = Vec::with_capacity(spec.n);
    for (class, count, cov, mean_x) in [
        (0usize, n_a, spec.cov_a, 0.0),
        (1usize, n_b, spec.cov_b, spec.mean_distance),
    ] {
        let l = cov.cholesky();
        let noise_sd = cov.min_eigenvalue().sqrt();
        for _ in 0..count {
            let z0: f64 = rng.sample(StandardNormal);
            let z1: f64 = rng.sample(StandardNormal);
            data.push(mean_x + l[0][0] * z0);
            data.push(l[1][0] * z0 + l[1][1] * z1);
            for _ in 2..dim {
                let z: f64 = rng.sample(StandardNormal);
                data.push(noise_sd * z);
            }
            assignment.push(class);
        }
    }
    let ds = Dataset::new(spec.n, dim, data)?;
    let lab = Labeling::from_dense(assignment, vec!["A".into(), "B".into()])?;
    Ok((ds, lab))
}

/// A labeling with a known fraction of shuffled positions.
#[derive(Clone, Debug)]
pub struct NoisyLabelVariant {
    pub fraction: f64,
    pub labeling: Labeling,
}

/// For each fraction, pick `round(fraction * n)` positions uniformly and
/// permute their labels among themselves. Fraction 0 returns the original
/// labeling; fraction 1 is a full class-count-preserving shuffle. Per-class
/// counts are preserved for every fraction.
pub fn noisy_label_variants(
    lab: &Labeling,
    fractions: &[f64],
    seed: u64,
) -> Result<Vec<NoisyLabelVariant>> {
    let n = lab.n();
    let mut variants = Vec::with_capacity(fractions.len());
    for (vi, &fraction) in fractions.iter().enumerate() {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::InvalidConfig(format!(
                "noise fraction must be in [0, 1], got {fraction}"
            )));
        }
        let count = (fraction * n as f64).round() as usize;
        let mut rng = seeded_rng(child_seed(seed, vi as u64));
        let mut positions: Vec<usize> = rand::seq::index::sample(&mut rng, n, count).into_vec();
        positions.sort_unstable();
        let mut assignment = lab.assignment().to_vec();
        let mut values: Vec<usize> = positions.iter().map(|&p| assignment[p]).collect();
        values.shuffle(&mut rng);
        for (&p, v) in positions.iter().zip(values) {
            assignment[p] = v;
        }
        variants.push(NoisyLabelVariant {
            fraction,
            labeling: lab.with_assignment(assignment),
        });
    }
    Ok(variants)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjusted::{ch_adjusted, MeasureConfig};
    use crate::data::{centroid, class_centroid, euclidean};

    fn base_spec(n: usize, dim: usize, seed: u64) -> GaussianPairSpec {
        GaussianPairSpec {
            cov_a: Covariance2::isotropic(1.0),
            cov_b: Covariance2 {
                var_x: 1.5,
                cov_xy: 0.3,
                var_y: 0.8,
            },
            proportion: 0.5,
            mean_distance: 5.0,
            n,
            target_dim: dim,
            seed,
        }
    }

    #[test]
    fn min_eigenvalue_matches_quadratic_roots() {
        let cov = Covariance2 {
            var_x: 2.0,
            cov_xy: 0.5,
            var_y: 1.0,
        };
        let lo = cov.min_eigenvalue();
        // Eigenvalues of [[2, .5], [.5, 1]]: (3 +- sqrt(2)) / 2.
        assert!((lo - (3.0 - 2.0f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_spec_appends_no_noise() {
        let (ds, _) = generate_gaussian_pair(&base_spec(50, 2, 1)).unwrap();
        assert_eq!(ds.dim(), 2);
    }

    #[test]
    fn class_sizes_follow_the_proportion() {
        let (_, lab) = generate_gaussian_pair(&base_spec(1000, 2, 2)).unwrap();
        assert_eq!(lab.class_sizes(), vec![500, 500]);
        let mut spec = base_spec(10, 2, 2);
        spec.proportion = 0.31;
        let (_, lab) = generate_gaussian_pair(&spec).unwrap();
        assert_eq!(lab.class_sizes(), vec![3, 7]);
    }

    #[test]
    fn tiny_class_after_rounding_is_rejected() {
        let mut spec = base_spec(20, 2, 3);
        spec.proportion = 0.02;
        assert!(matches!(
            generate_gaussian_pair(&spec),
            Err(Error::ClassTooSmall { .. })
        ));
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let (a, _) = generate_gaussian_pair(&base_spec(100, 5, 7)).unwrap();
        let (b, _) = generate_gaussian_pair(&base_spec(100, 5, 7)).unwrap();
        let (c, _) = generate_gaussian_pair(&base_spec(100, 5, 8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn empirical_mean_distance_matches_spec() {
        let (ds, lab) = generate_gaussian_pair(&base_spec(1000, 2, 11)).unwrap();
        let ca = class_centroid(&ds, lab.class(0)).unwrap();
        let cb = class_centroid(&ds, lab.class(1)).unwrap();
        let d = euclidean(&ca, &cb);
        assert!((d - 5.0).abs() / 5.0 < 0.05, "observed distance {d}");
    }

    #[test]
    fn noise_dimension_variance_tracks_the_min_eigenvalue() {
        // Statistical check: variance estimates averaged over five seeds.
        let spec0 = base_spec(1000, 4, 0);
        for (class, cov) in [(0usize, spec0.cov_a), (1usize, spec0.cov_b)] {
            for col in 2..4 {
                let mut mean_var = 0.0;
                for seed in 0..5 {
                    let (ds, lab) = generate_gaussian_pair(&base_spec(1000, 4, seed)).unwrap();
                    let members = lab.class(class);
                    let vals: Vec<f64> = members.iter().map(|&i| ds.row(i)[col]).collect();
                    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                    mean_var += vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                        / vals.len() as f64;
                }
                mean_var /= 5.0;
                let want = cov.min_eigenvalue();
                assert!(
                    (mean_var - want).abs() / want < 0.10,
                    "class {class} col {col}: var {mean_var} vs want {want}"
                );
            }
        }
    }

    #[test]
    fn noise_dimensions_are_centred() {
        let (ds, _) = generate_gaussian_pair(&base_spec(2000, 3, 5)).unwrap();
        let c = centroid(&ds);
        assert!(c[2].abs() < 0.1, "noise column mean {}", c[2]);
    }

    #[test]
    fn zero_fraction_keeps_the_labeling() {
        let (_, lab) = generate_gaussian_pair(&base_spec(60, 2, 1)).unwrap();
        let variants = noisy_label_variants(&lab, &[0.0], 5).unwrap();
        assert_eq!(variants[0].labeling.assignment(), lab.assignment());
    }

    #[test]
    fn all_fractions_preserve_class_counts() {
        let (_, lab) = generate_gaussian_pair(&base_spec(101, 2, 9)).unwrap();
        let fractions: Vec<f64> = (0..=10).map(|l| l as f64 / 10.0).collect();
        for v in noisy_label_variants(&lab, &fractions, 3).unwrap() {
            assert_eq!(v.labeling.class_sizes(), lab.class_sizes());
        }
    }

    #[test]
    fn full_fraction_is_a_full_shuffle() {
        let (_, lab) = generate_gaussian_pair(&base_spec(200, 2, 4)).unwrap();
        let v = noisy_label_variants(&lab, &[1.0], 8).unwrap().remove(0);
        assert_eq!(v.labeling.class_sizes(), lab.class_sizes());
        let moved = v
            .labeling
            .assignment()
            .iter()
            .zip(lab.assignment())
            .filter(|(a, b)| a != b)
            .count();
        assert!(moved > 50, "only {moved} labels moved on a full shuffle");
    }

    #[test]
    fn noisy_variants_are_deterministic() {
        let (_, lab) = generate_gaussian_pair(&base_spec(80, 2, 6)).unwrap();
        let a = noisy_label_variants(&lab, &[0.3, 0.7], 12).unwrap();
        let b = noisy_label_variants(&lab, &[0.3, 0.7], 12).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.labeling.assignment(), y.labeling.assignment());
        }
    }

    // Sanity check on the generator family: more separated means should not
    // score lower, judged by the median over seeds.
    #[test]
    fn separability_is_monotone_in_mean_distance() {
        let cfg = MeasureConfig::default();
        let median_score = |dist: f64| {
            let mut scores: Vec<f64> = (0..20)
                .map(|seed| {
                    let mut spec = base_spec(200, 2, seed);
                    spec.mean_distance = dist;
                    let (ds, lab) = generate_gaussian_pair(&spec).unwrap();
                    ch_adjusted(&ds, &lab, &cfg).unwrap()
                })
                .collect();
            scores.sort_by(|a, b| a.total_cmp(b));
            scores[scores.len() / 2]
        };
        let close = median_score(1.0);
        let mid = median_score(4.0);
        let far = median_score(8.0);
        assert!(close <= mid && mid <= far, "{close} {mid} {far}");
    }
}
