//! Geometric median (Vardi–Zhang iteration) and squared-distance identities.

use crate::data::{centroid, euclidean, euclidean_sq, Dataset, Labeling};
use crate::error::{Error, Result};

/// Result of the geometric-median iteration.
#[derive(Clone, Debug)]
pub struct GeometricMedian {
    pub point: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

pub const GEOMEDIAN_TOLERANCE: f64 = 1e-8;
pub const GEOMEDIAN_MAX_ITER: usize = 1000;

/// Point minimizing the sum of Euclidean distances to all rows.
///
/// Uses the Vardi–Zhang fixed-point iteration, which stays well defined when
/// the current iterate coincides with one or more data points: the plain
/// Weiszfeld update is blended with the inflation-factor correction instead
/// of aborting. On non-convergence the best iterate is returned with
/// `converged = false`.
pub fn geometric_median(ds: &Dataset, tolerance: f64, max_iter: usize) -> Result<GeometricMedian> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidConfig(
            "geometric median tolerance must be positive".into(),
        ));
    }
    if ds.n() == 1 {
        return Ok(GeometricMedian {
            point: ds.row(0).to_vec(),
            converged: true,
            iterations: 0,
        });
    }

    let dim = ds.dim();
    let mut y = centroid(ds);
    for iter in 0..max_iter {
        // One Vardi–Zhang step from y.
        let mut weight_sum = 0.0;
        let mut weighted = vec![0.0; dim];
        let mut coincident = 0usize;
        for r in ds.rows() {
            let d = euclidean(r, &y);
            if d == 0.0 {
                coincident += 1;
                continue;
            }
            let w = 1.0 / d;
            weight_sum += w;
            for (acc, v) in weighted.iter_mut().zip(r) {
                *acc += v * w;
            }
        }
        if weight_sum == 0.0 {
            // Every point coincides with the iterate.
            return Ok(GeometricMedian {
                point: y,
                converged: true,
                iterations: iter,
            });
        }
        let tilde: Vec<f64> = weighted.iter().map(|v| v / weight_sum).collect();
        let next = if coincident == 0 {
            tilde
        } else {
            // r(y) = || sum (x - y)/d(x,y) || over non-coincident points.
            let mut r_norm_sq = 0.0;
            for j in 0..dim {
                let r = weighted[j] - y[j] * weight_sum;
                r_norm_sq += r * r;
            }
            let r_norm = r_norm_sq.sqrt();
            let eta = coincident as f64;
            if r_norm <= eta {
                // The current data point is the median.
                return Ok(GeometricMedian {
                    point: y,
                    converged: true,
                    iterations: iter,
                });
            }
            let gamma = eta / r_norm;
            tilde
                .iter()
                .zip(&y)
                .map(|(t, cur)| (1.0 - gamma) * t + gamma * cur)
                .collect()
        };
        let moved = euclidean(&next, &y);
        y = next;
        if moved <= tolerance {
            return Ok(GeometricMedian {
                point: y,
                converged: true,
                iterations: iter + 1,
            });
        }
    }
    Ok(GeometricMedian {
        point: y,
        converged: false,
        iterations: max_iter,
    })
}

/// Index of the data point closest to the geometric median (ties broken
/// toward the smaller index).
pub fn geometric_median_index(ds: &Dataset) -> Result<usize> {
    let gm = geometric_median(ds, GEOMEDIAN_TOLERANCE, GEOMEDIAN_MAX_ITER)?;
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (i, r) in ds.rows().enumerate() {
        let d = euclidean_sq(r, &gm.point);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    Ok(best)
}

/// Deterministic worst-case two-class partition: the single most central
/// point (nearest to the geometric median) against everything else.
pub fn geometric_median_partition(ds: &Dataset) -> Result<Labeling> {
    if ds.n() < 2 {
        return Err(Error::EmptyInput(
            "worst-case partition requires at least two points",
        ));
    }
    let med = geometric_median_index(ds)?;
    let assignment: Vec<usize> = (0..ds.n()).map(|i| usize::from(i != med)).collect();
    Labeling::from_dense(assignment, vec!["median".into(), "rest".into()])
}

/// Residuals of two exact squared-distance identities evaluated on row
/// subsets, used by the test suites: both are zero up to float rounding.
///
/// 1. `2|A| * sum_{x in A} d^2(x, c_A) = sum_{x,y in A} d^2(x, y)`
/// 2. `d^2(c_A, c_B)` equals the cross/within double-sum combination
///    `S_AB/(|A||B|) - S_AA/(2|A|^2) - S_BB/(2|B|^2)`.
pub fn distance_identity_residuals(
    ds: &Dataset,
    subset_a: &[usize],
    subset_b: &[usize],
) -> Result<(f64, f64)> {
    if subset_a.is_empty() || subset_b.is_empty() {
        return Err(Error::EmptyInput("identity subsets must be nonempty"));
    }
    let double_sum = |a: &[usize], b: &[usize]| -> f64 {
        let mut s = 0.0;
        for &i in a {
            for &j in b {
                s += euclidean_sq(ds.row(i), ds.row(j));
            }
        }
        s
    };
    let c_a = crate::data::class_centroid(ds, subset_a)?;
    let c_b = crate::data::class_centroid(ds, subset_b)?;

    let to_centroid: f64 = subset_a
        .iter()
        .map(|&i| euclidean_sq(ds.row(i), &c_a))
        .sum();
    let n_a = subset_a.len() as f64;
    let n_b = subset_b.len() as f64;
    let r1 = (2.0 * n_a * to_centroid - double_sum(subset_a, subset_a)).abs();

    let combination = double_sum(subset_a, subset_b) / (n_a * n_b)
        - double_sum(subset_a, subset_a) / (2.0 * n_a * n_a)
        - double_sum(subset_b, subset_b) / (2.0 * n_b * n_b);
    let r2 = (euclidean_sq(&c_a, &c_b) - combination).abs();
    Ok((r1, r2))
}
