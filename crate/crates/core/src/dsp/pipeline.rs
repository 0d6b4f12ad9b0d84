use serde::{Deserialize, Serialize};

use super::denoise::wavelet_denoise;
use super::norm::NormStats;
use super::pca::{pca_project, CovarianceAccumulator, PcaModel};
use super::resample::resample_to_length;
use super::wavelet::WaveletSpec;
use crate::data::{
    load_record, split_labels, DatasetManifest, EcgRecord, FeatureTensor, SplitSet,
    DEFAULT_SPLIT_RATIOS, NUM_LEADS,
};
use crate::error::{Error, Result};
use crate::hash::fnv1a64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Zscore,
}

/// Preprocessing settings. PCA and normalization are fitted on the training
/// split only, so the split ratios and seed are part of the config (and of its
/// provenance hash).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub wavelet: WaveletSpec,
    pub threshold_mode: ThresholdMode,
    pub pca_k: usize,
    pub target_length: usize,
    pub normalization: Normalization,
    pub split_ratios: [f64; 3],
    pub split_seed: u64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            wavelet: WaveletSpec::default(),
            threshold_mode: ThresholdMode::Soft,
            pca_k: 3,
            target_length: 512,
            normalization: Normalization::Zscore,
            split_ratios: DEFAULT_SPLIT_RATIOS,
            split_seed: 0,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=NUM_LEADS).contains(&self.pca_k) {
            return Err(Error::InvalidArgument(format!(
                "pca_k {} outside 1..=12",
                self.pca_k
            )));
        }
        if self.target_length < 8 {
            return Err(Error::InvalidArgument(format!(
                "target length {} < 8",
                self.target_length
            )));
        }
        if self.wavelet.levels == 0 {
            return Err(Error::InvalidArgument("wavelet levels must be >= 1".into()));
        }
        Ok(())
    }

    /// Compact JSON in declaration order; the input to [`Self::hash`].
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// 64-bit FNV-1a of [`Self::canonical_json`].
    pub fn hash(&self) -> u64 {
        fnv1a64(self.canonical_json().as_bytes())
    }
}

#[derive(Debug, Clone)]
pub struct PreprocessOutput {
    pub tensor: FeatureTensor,
    pub pca: PcaModel,
    pub norm: NormStats,
    pub split: SplitSet,
}

fn denoise_record(record: &EcgRecord, config: &PreprocessConfig) -> Result<Vec<f64>> {
    let n = record.len();
    let mut out = vec![0.0; n * NUM_LEADS];
    for lead in 0..NUM_LEADS {
        let clean = wavelet_denoise(&record.lead(lead), config)?;
        for (t, v) in clean.into_iter().enumerate() {
            out[t * NUM_LEADS + lead] = v;
        }
    }
    Ok(out)
}

fn with_id<T>(id: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Record {
        id: id.to_string(),
        source: Box::new(e),
    })
}

/// Denoise every lead, fit lead-space PCA on the training records' time
/// samples, project, resample each record to `target_length` steps, then
/// z-score with statistics from the training samples.
pub fn preprocess_records(records: &[EcgRecord], config: &PreprocessConfig) -> Result<PreprocessOutput> {
    config.validate()?;
    let labels: Vec<_> = records.iter().map(|r| r.label).collect();
    let split = split_labels(&labels, config.split_ratios, config.split_seed)?;

    let denoised = records
        .iter()
        .map(|r| with_id(&r.id, denoise_record(r, config)))
        .collect::<Result<Vec<_>>>()?;

    let mut acc = CovarianceAccumulator::new(NUM_LEADS);
    for &i in &split.train {
        denoised[i].chunks_exact(NUM_LEADS).for_each(|row| acc.add_to_mean(row));
    }
    acc.finish_mean();
    for &i in &split.train {
        denoised[i].chunks_exact(NUM_LEADS).for_each(|row| acc.add_to_scatter(row));
    }
    let pca = acc.into_model()?;

    let (k, t) = (config.pca_k, config.target_length);
    let mut data = Vec::with_capacity(records.len() * t * k);
    for (record, signal) in records.iter().zip(&denoised) {
        let scores = with_id(&record.id, pca_project(&pca, signal, k))?;
        data.extend(with_id(&record.id, resample_to_length(&scores, k, t))?);
    }

    let stride = t * k;
    let norm = NormStats::from_rows(k, || {
        Box::new(
            split
                .train
                .iter()
                .flat_map(|&i| data[i * stride..(i + 1) * stride].chunks_exact(k)),
        )
    })?;
    norm.apply_in_place(&mut data);

    let tensor = FeatureTensor::new([records.len(), t, k], data, labels, config.hash())?;
    Ok(PreprocessOutput {
        tensor,
        pca,
        norm,
        split,
    })
}

pub fn preprocess_dataset(manifest: &DatasetManifest, config: &PreprocessConfig) -> Result<FeatureTensor> {
    let mut records = Vec::with_capacity(manifest.len());
    for (i, entry) in manifest.entries.iter().enumerate() {
        let record = with_id(&entry.path, load_record(manifest.record_path(i)))?;
        if record.label != entry.label {
            return Err(Error::Record {
                id: record.id,
                source: Box::new(Error::InvalidArgument(format!(
                    "record label {} disagrees with manifest label {}",
                    record.label, entry.label
                ))),
            });
        }
        records.push(record);
    }
    Ok(preprocess_records(&records, config)?.tensor)
}
