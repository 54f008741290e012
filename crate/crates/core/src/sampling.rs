//! Seeded label shuffling and proportional subsampling.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, Labeling};
use crate::error::{Error, Result};

/// Deterministic RNG from a 64-bit seed. All randomized operations in this
/// crate go through this constructor so runs are reproducible.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent child seed from `(master, index)`.
///
/// SplitMix64 finalizer; parallel tasks seed their own RNG from the task
/// index so results do not depend on scheduling.
pub fn child_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniformly random permutation of the class assignment. Per-class counts
/// are preserved exactly, making the result a class-proportion-preserving
/// random partition.
pub fn shuffle_labels<R: Rng>(lab: &Labeling, rng: &mut R) -> Labeling {
    let mut assignment = lab.assignment().to_vec();
    assignment.shuffle(rng);
    lab.with_assignment(assignment)
}

/// Per-class uniform subsampling without replacement.
///
/// Each class keeps `round(alpha * size)` points (round half up), floored at
/// two so the measures stay defined downstream. Surviving rows keep their
/// original order.
pub fn subsample<R: Rng>(
    ds: &Dataset,
    lab: &Labeling,
    alpha: f64,
    rng: &mut R,
) -> Result<(Dataset, Labeling)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "subsample ratio must be in (0, 1], got {alpha}"
        )));
    }
    let mut selected: Vec<(usize, usize)> = Vec::new();
    for (class_id, members) in lab.classes().iter().enumerate() {
        if members.len() < 2 {
            return Err(Error::ClassTooSmall {
                class: lab.name(class_id).to_string(),
                size: members.len(),
                min: 2,
            });
        }
        let target = ((alpha * members.len() as f64).round() as usize).max(2);
        let picks = rand::seq::index::sample(rng, members.len(), target);
        for p in picks.iter() {
            selected.push((members[p], class_id));
        }
    }
    selected.sort_unstable_by_key(|&(row, _)| row);
    let rows: Vec<usize> = selected.iter().map(|&(row, _)| row).collect();
    let assignment: Vec<usize> = selected.iter().map(|&(_, class)| class).collect();
    let sub = ds.select_rows(&rows);
    let sub_lab = Labeling::from_dense(assignment, lab.names().to_vec())
        .expect("every class keeps at least two members");
    Ok((sub, sub_lab))
}
