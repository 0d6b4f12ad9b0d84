//! Domain types, persistence formats and stratified splitting.

mod manifest;
mod record;
mod split;
mod tensor_io;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use manifest::{load_manifest, parse_manifest, save_manifest, DatasetManifest, ManifestEntry};
pub use record::{load_record, parse_record, render_record, save_record};
pub use split::{split_dataset, split_labels, SplitSet, DEFAULT_SPLIT_RATIOS};
pub use tensor_io::{
    decode_feature_tensor, load_feature_tensor, parse_tensor_sidecar, save_feature_tensor,
    tensor_paths, TensorSidecar,
};

pub const NUM_LEADS: usize = 12;
pub const NUM_CLASSES: usize = 3;

/// Standard lead order for every record matrix column.
pub const LEAD_NAMES: [&str; NUM_LEADS] = [
    "I", "II", "III", "aVR", "aVL", "aVF", "V1", "V2", "V3", "V4", "V5", "V6",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ClassLabel {
    Healthy = 0,
    Lbbb = 1,
    Slbbb = 2,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; NUM_CLASSES] =
        [ClassLabel::Healthy, ClassLabel::Lbbb, ClassLabel::Slbbb];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(code: usize) -> Result<Self> {
        match code {
            0 => Ok(ClassLabel::Healthy),
            1 => Ok(ClassLabel::Lbbb),
            2 => Ok(ClassLabel::Slbbb),
            other => Err(Error::InvalidArgument(format!(
                "class label {other} outside 0..=2"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::Healthy => "Healthy",
            ClassLabel::Lbbb => "LBBB",
            ClassLabel::Slbbb => "sLBBB",
        }
    }
}

impl TryFrom<u8> for ClassLabel {
    type Error = Error;

    fn try_from(code: u8) -> Result<Self> {
        ClassLabel::from_index(usize::from(code))
    }
}

impl From<ClassLabel> for u8 {
    fn from(label: ClassLabel) -> u8 {
        label as u8
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One subject's 12-lead recording; rows are time samples in millivolts.
#[derive(Debug, Clone, PartialEq)]
pub struct EcgRecord {
    pub id: String,
    pub sampling_rate_hz: f64,
    pub samples: Vec<[f64; NUM_LEADS]>,
    pub label: ClassLabel,
}

impl EcgRecord {
    pub fn new(
        id: impl Into<String>,
        sampling_rate_hz: f64,
        samples: Vec<[f64; NUM_LEADS]>,
        label: ClassLabel,
    ) -> Result<Self> {
        let id = id.into();
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!(
                "record id {id:?} must be non-empty without whitespace"
            )));
        }
        if !(sampling_rate_hz.is_finite() && sampling_rate_hz > 0.0) {
            return Err(Error::SamplingRate(sampling_rate_hz));
        }
        if samples.len() < 2 {
            return Err(Error::Shape(format!(
                "record {id} has {} samples, need at least 2",
                samples.len()
            )));
        }
        if let Some(row) = samples.iter().position(|r| r.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite { line: row + 2 });
        }
        Ok(EcgRecord {
            id,
            sampling_rate_hz,
            samples,
            label,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn lead(&self, lead: usize) -> Vec<f64> {
        self.samples.iter().map(|row| row[lead]).collect()
    }
}

/// Preprocessed dataset: `samples x time x channels`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    shape: [usize; 3],
    data: Vec<f64>,
    labels: Vec<ClassLabel>,
    config_hash: u64,
}

impl FeatureTensor {
    pub fn new(
        shape: [usize; 3],
        data: Vec<f64>,
        labels: Vec<ClassLabel>,
        config_hash: u64,
    ) -> Result<Self> {
        let [s, t, c] = shape;
        if t == 0 || c == 0 {
            return Err(Error::Shape(format!(
                "time and channel dims must be >= 1, got {shape:?}"
            )));
        }
        let expected = s
            .checked_mul(t)
            .and_then(|v| v.checked_mul(c))
            .ok_or_else(|| Error::Shape(format!("shape {shape:?} overflows")))?;
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "shape {shape:?} declares {expected} values, payload has {}",
                data.len()
            )));
        }
        if labels.len() != s {
            return Err(Error::Shape(format!(
                "{} labels for {s} samples",
                labels.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("tensor contains non-finite values".into()));
        }
        Ok(FeatureTensor {
            shape,
            data,
            labels,
            config_hash,
        })
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn num_samples(&self) -> usize {
        self.shape[0]
    }

    pub fn time_steps(&self) -> usize {
        self.shape[1]
    }

    pub fn channels(&self) -> usize {
        self.shape[2]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn config_hash(&self) -> u64 {
        self.config_hash
    }

    /// One sample as a `T x C` row-major slice.
    pub fn sample(&self, index: usize) -> &[f64] {
        let stride = self.shape[1] * self.shape[2];
        &self.data[index * stride..(index + 1) * stride]
    }

    /// Sub-tensor holding the given samples in the given order.
    pub fn select(&self, indices: &[usize]) -> FeatureTensor {
        let mut data = Vec::with_capacity(indices.len() * self.shape[1] * self.shape[2]);
        for &i in indices {
            data.extend_from_slice(self.sample(i));
        }
        FeatureTensor {
            shape: [indices.len(), self.shape[1], self.shape[2]],
            data,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            config_hash: self.config_hash,
        }
    }

    pub fn into_parts(self) -> ([usize; 3], Vec<f64>, Vec<ClassLabel>, u64) {
        (self.shape, self.data, self.labels, self.config_hash)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_mapping_is_total() {
        for (i, l) in ClassLabel::ALL.iter().enumerate() {
            assert_eq!(l.index(), i);
            assert_eq!(ClassLabel::from_index(i).unwrap(), *l);
        }
        assert!(ClassLabel::from_index(3).is_err());
        assert_eq!(serde_json::to_string(&ClassLabel::Slbbb).unwrap(), "2");
        assert!(serde_json::from_str::<ClassLabel>("7").is_err());
    }

    #[test]
    fn record_invariants() {
        let row = [0.0; NUM_LEADS];
        assert!(EcgRecord::new("a", 500.0, vec![row; 2], ClassLabel::Healthy).is_ok());
        assert!(matches!(
            EcgRecord::new("a", 0.0, vec![row; 2], ClassLabel::Healthy),
            Err(Error::SamplingRate(_))
        ));
        assert!(EcgRecord::new("a", 500.0, vec![row; 1], ClassLabel::Healthy).is_err());
        let mut bad = row;
        bad[4] = f64::NAN;
        assert!(EcgRecord::new("a", 500.0, vec![row, bad], ClassLabel::Healthy).is_err());
        assert!(EcgRecord::new("a b", 500.0, vec![row; 2], ClassLabel::Healthy).is_err());
    }

    #[test]
    fn tensor_invariants() {
        let ok = FeatureTensor::new([2, 2, 1], vec![0.0; 4], vec![ClassLabel::Lbbb; 2], 0);
        assert!(ok.is_ok());
        assert!(FeatureTensor::new([2, 2, 1], vec![0.0; 5], vec![ClassLabel::Lbbb; 2], 0).is_err());
        assert!(FeatureTensor::new([2, 2, 1], vec![0.0; 4], vec![ClassLabel::Lbbb; 1], 0).is_err());
        assert!(FeatureTensor::new([1, 0, 1], vec![], vec![ClassLabel::Lbbb], 0).is_err());
        let t = FeatureTensor::new([3, 1, 2], (0..6).map(f64::from).collect(), ClassLabel::ALL.to_vec(), 5)
            .unwrap();
        let sub = t.select(&[2, 0]);
        assert_eq!(sub.data(), &[4.0, 5.0, 0.0, 1.0]);
        assert_eq!(sub.labels(), &[ClassLabel::Slbbb, ClassLabel::Healthy]);
    }
}
