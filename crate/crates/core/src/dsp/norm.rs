use serde::{Deserialize, Serialize};

use crate::data::FeatureTensor;
use crate::error::{Error, Result};

pub const NORM_EPS: f64 = 1e-8;

/// Per-channel z-score statistics. `std` is floored at [`NORM_EPS`]; channels
/// at the floor are mapped to zero by [`apply_norm`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    pub(crate) fn from_rows<'a>(
        channels: usize,
        rows: impl Fn() -> Box<dyn Iterator<Item = &'a [f64]> + 'a>,
    ) -> Result<Self> {
        let mut n = 0usize;
        let mut sum = vec![0.0; channels];
        for row in rows() {
            for (s, v) in sum.iter_mut().zip(row) {
                *s += v;
            }
            n += 1;
        }
        if n == 0 {
            return Err(Error::InvalidArgument(
                "normalization statistics need a non-empty training subset".into(),
            ));
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
        let mut sq = vec![0.0; channels];
        for row in rows() {
            for ((q, v), m) in sq.iter_mut().zip(row).zip(&mean) {
                let d = v - m;
                *q += d * d;
            }
        }
        let std = sq.iter().map(|q| (q / n as f64).sqrt().max(NORM_EPS)).collect();
        Ok(NormStats { mean, std })
    }

    pub(crate) fn apply_in_place(&self, data: &mut [f64]) {
        let c = self.mean.len();
        for row in data.chunks_exact_mut(c) {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
                *v = if *s <= NORM_EPS { 0.0 } else { (*v - m) / s };
            }
        }
    }
}

/// Population mean and standard deviation per channel over every time step of
/// every sample in `train`. Callers pass only the training subset.
pub fn fit_norm_stats(train: &FeatureTensor) -> Result<NormStats> {
    let c = train.channels();
    NormStats::from_rows(c, || Box::new(train.data().chunks_exact(c)))
}

pub fn apply_norm(stats: &NormStats, tensor: &FeatureTensor) -> Result<FeatureTensor> {
    if stats.mean.len() != tensor.channels() || stats.std.len() != tensor.channels() {
        return Err(Error::Shape(format!(
            "stats for {} channels applied to a tensor with {}",
            stats.mean.len(),
            tensor.channels()
        )));
    }
    let (shape, mut data, labels, hash) = tensor.clone().into_parts();
    stats.apply_in_place(&mut data);
    FeatureTensor::new(shape, data, labels, hash)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ClassLabel;
    use crate::rng::Rng;

    fn tensor(s: usize, t: usize, c: usize, seed: u64) -> FeatureTensor {
        let mut rng = Rng::new(seed);
        let data = (0..s * t * c).map(|i| rng.normal() * (1.0 + (i % c) as f64) + 4.0).collect();
        FeatureTensor::new([s, t, c], data, vec![ClassLabel::Healthy; s], 0).unwrap()
    }

    fn moments(t: &FeatureTensor, ch: usize) -> (f64, f64) {
        let c = t.channels();
        let vals: Vec<f64> = t.data().iter().skip(ch).step_by(c).copied().collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    }

    #[test]
    fn self_application_standardizes() {
        let t = tensor(5, 20, 3, 1);
        let stats = fit_norm_stats(&t).unwrap();
        let z = apply_norm(&stats, &t).unwrap();
        for ch in 0..3 {
            let (m, s) = moments(&z, ch);
            assert!(m.abs() < 1e-9);
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_channel_maps_to_zero() {
        let data: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { 0.1 } else { i as f64 }).collect();
        let t = FeatureTensor::new([2, 5, 2], data, vec![ClassLabel::Lbbb; 2], 0).unwrap();
        let stats = fit_norm_stats(&t).unwrap();
        assert!(stats.std[0] >= NORM_EPS);
        let z = apply_norm(&stats, &t).unwrap();
        assert!(z.data().iter().step_by(2).all(|&v| v == 0.0));
    }

    #[test]
    fn held_out_data_is_only_finite() {
        let train = tensor(4, 10, 2, 2);
        let val = tensor(3, 10, 2, 3);
        let z = apply_norm(&fit_norm_stats(&train).unwrap(), &val).unwrap();
        assert!(z.data().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn empty_training_subset() {
        let t = FeatureTensor::new([0, 4, 2], vec![], vec![], 0).unwrap();
        assert!(fit_norm_stats(&t).is_err());
        let wrong = FeatureTensor::new([1, 1, 3], vec![0.0; 3], vec![ClassLabel::Lbbb], 0).unwrap();
        let stats = fit_norm_stats(&tensor(2, 2, 2, 0)).unwrap();
        assert!(apply_norm(&stats, &wrong).is_err());
    }
}
