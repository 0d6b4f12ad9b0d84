use serde::{Deserialize, Serialize};

use super::{ClassLabel, FeatureTensor, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::hash::Fnv1a;
use crate::rng::Rng;

pub const DEFAULT_SPLIT_RATIOS: [f64; 3] = [0.7, 0.15, 0.15];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSet {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
    pub ratios: [f64; 3],
}

impl SplitSet {
    pub fn parts(&self) -> [&[usize]; 3] {
        [&self.train, &self.val, &self.test]
    }

    /// Identity of the test subset; models are only comparable when these agree.
    pub fn test_hash(&self) -> u64 {
        let mut h = Fnv1a::default();
        for &i in &self.test {
            h.update(&(i as u64).to_le_bytes());
        }
        h.finish()
    }
}

pub fn split_dataset(tensor: &FeatureTensor, ratios: [f64; 3], seed: u64) -> Result<SplitSet> {
    split_labels(tensor.labels(), ratios, seed)
}

/// Stratified split: each class is shuffled with one seeded stream (classes in
/// label order) and dealt out so that every per-class split count is the floor
/// or ceiling of `ratio * class_size`. The extra samples of a class go to the
/// splits that are still empty, then to those lagging furthest behind their
/// cumulative global target, keeping the overall split sizes on ratio as well.
pub fn split_labels(labels: &[ClassLabel], ratios: [f64; 3], seed: u64) -> Result<SplitSet> {
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "split ratios must be non-negative, got {ratios:?}"
        )));
    }
    let total: f64 = ratios.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "split ratios must sum to 1, got {total}"
        )));
    }

    let mut by_class: [Vec<usize>; NUM_CLASSES] = Default::default();
    for (i, l) in labels.iter().enumerate() {
        by_class[l.index()].push(i);
    }

    let mut rng = Rng::new(seed);
    let mut parts: [Vec<usize>; 3] = Default::default();
    let mut assigned = [0usize; 3];
    let mut seen = 0usize;
    for (class, members) in by_class.iter_mut().enumerate() {
        let n = members.len();
        if n == 0 {
            continue;
        }
        rng.shuffle(members);
        seen += n;

        let mut counts = [0usize; 3];
        let mut fractional = [false; 3];
        for s in 0..3 {
            let target = ratios[s] * n as f64;
            let floor = (target + 1e-9).floor();
            counts[s] = floor as usize;
            fractional[s] = target - floor > 1e-9;
        }
        let mut remaining = n - counts.iter().sum::<usize>().min(n);
        while remaining > 0 {
            let deficit = |s: usize| ratios[s] * seen as f64 - (assigned[s] + counts[s]) as f64;
            let mut candidates: Vec<usize> = (0..3).filter(|&s| fractional[s]).collect();
            if candidates.is_empty() {
                candidates = (0..3).filter(|&s| ratios[s] > 0.0).collect();
            }
            // Empty nonempty-ratio splits first, then the split furthest behind.
            let key = |s: usize| (ratios[s] > 0.0 && counts[s] == 0, deficit(s));
            let pick = candidates
                .into_iter()
                .fold(None::<usize>, |best, s| match best {
                    Some(b) if key(b).0 > key(s).0 || (key(b).0 == key(s).0 && key(b).1 >= key(s).1) => Some(b),
                    _ => Some(s),
                })
                .expect("some ratio is positive");
            counts[pick] += 1;
            fractional[pick] = false;
            remaining -= 1;
        }

        for s in 0..3 {
            if ratios[s] > 0.0 && counts[s] == 0 {
                return Err(Error::Split(format!(
                    "class {} has {n} samples, too few to place one in every nonempty split",
                    ClassLabel::ALL[class]
                )));
            }
        }
        let mut offset = 0;
        for s in 0..3 {
            parts[s].extend_from_slice(&members[offset..offset + counts[s]]);
            offset += counts[s];
            assigned[s] += counts[s];
        }
    }

    let [mut train, mut val, mut test] = parts;
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok(SplitSet {
        train,
        val,
        test,
        seed,
        ratios,
    })
}
