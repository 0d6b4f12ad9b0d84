//! Checkpoints: `<name>.ckpt.json` carries the metadata and an FNV-1a hash of
//! `<name>.ckpt.bin`, which holds every tensor as little-endian f64 in name
//! order.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::trainer::{StopReason, TrainingRun};
use super::TrainConfig;
use crate::data::SplitSet;
use crate::error::{Error, Result};
use crate::hash::{fnv1a64, hex64};
use crate::nn::{ModelSpec, ParamSet, Tensor};
use crate::svm::{SvmMeta, SvmModel};

/// `kind` tag of linear SVM checkpoints.
pub const SVM_KIND: &str = "SVM";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
}

/// Which split a model was selected on, so evaluations can refuse to mix
/// models scored on different test subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitInfo {
    pub seed: u64,
    pub ratios: [f64; 3],
    pub test_size: usize,
    pub test_hash: String,
}

impl SplitInfo {
    pub fn from_split(split: &SplitSet) -> Self {
        SplitInfo {
            seed: split.seed,
            ratios: split.ratios,
            test_size: split.test.len(),
            test_hash: hex64(split.test_hash()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointMeta {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_config: Option<TrainConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svm: Option<SvmMeta>,
    pub metric: String,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_reason: Option<StopReason>,
    pub weight_decay_on_biases: bool,
    pub feature_config_hash: String,
    pub split: SplitInfo,
    pub tensors: Vec<TensorEntry>,
    pub content_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub meta: CheckpointMeta,
    pub params: ParamSet,
}

impl Checkpoint {
    /// Best parameters of a neural training run.
    pub fn from_run(run: &TrainingRun, feature_config_hash: u64, split: &SplitSet) -> Self {
        let meta = CheckpointMeta {
            kind: run.spec.kind.name().to_string(),
            spec: Some(run.spec.clone()),
            train_config: Some(run.config.clone()),
            svm: None,
            metric: "val_accuracy".into(),
            best_epoch: run.best_epoch,
            best_val_accuracy: run.best_val_accuracy,
            stop_reason: Some(run.stop_reason),
            weight_decay_on_biases: false,
            feature_config_hash: hex64(feature_config_hash),
            split: SplitInfo::from_split(split),
            tensors: Vec::new(),
            content_hash: String::new(),
        };
        Checkpoint::sealed(meta, run.best_params.clone())
    }

    /// A trained SVM baseline; `val_accuracy` is its accuracy on the
    /// validation subset of `split`.
    pub fn from_svm(model: &SvmModel, val_accuracy: f64, feature_config_hash: u64, split: &SplitSet) -> Self {
        let meta = CheckpointMeta {
            kind: SVM_KIND.to_string(),
            spec: None,
            train_config: None,
            svm: Some(model.meta.clone()),
            metric: "val_accuracy".into(),
            best_epoch: model.meta.epochs,
            best_val_accuracy: val_accuracy,
            stop_reason: None,
            // the bias is an augmented weight and shares the L2 penalty
            weight_decay_on_biases: true,
            feature_config_hash: hex64(feature_config_hash),
            split: SplitInfo::from_split(split),
            tensors: Vec::new(),
            content_hash: String::new(),
        };
        Checkpoint::sealed(meta, model.to_params())
    }

    /// Fills the tensor table and content hash from `params`.
    pub fn sealed(mut meta: CheckpointMeta, params: ParamSet) -> Self {
        meta.tensors = params
            .entries()
            .iter()
            .map(|e| TensorEntry {
                name: e.name.clone(),
                shape: e.shape.clone(),
            })
            .collect();
        meta.content_hash = hex64(fnv1a64(&encode_params(&params)));
        Checkpoint { meta, params }
    }

    pub fn is_svm(&self) -> bool {
        self.meta.kind == SVM_KIND
    }

    pub fn spec(&self) -> Result<&ModelSpec> {
        self.meta
            .spec
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument(format!("{} checkpoint has no network spec", self.meta.kind)))
    }
}

fn encode_params(params: &ParamSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(params.num_values() * 8);
    for v in params.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Accepts `name`, `name.ckpt`, `name.ckpt.json` or `name.ckpt.bin` and
/// returns the `(json, bin)` pair.
pub fn checkpoint_paths(path: impl AsRef<Path>) -> (PathBuf, PathBuf) {
    let s = path.as_ref().to_string_lossy().into_owned();
    let base = [".ckpt.json", ".ckpt.bin", ".ckpt"]
        .iter()
        .find_map(|suffix| s.strip_suffix(suffix))
        .unwrap_or(&s)
        .to_string();
    (
        PathBuf::from(format!("{base}.ckpt.json")),
        PathBuf::from(format!("{base}.ckpt.bin")),
    )
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    let (json, bin) = checkpoint_paths(path);
    let sealed = Checkpoint::sealed(ckpt.meta.clone(), ckpt.params.clone());
    fs::write(&bin, encode_params(&sealed.params)).map_err(|e| Error::io(&bin, e))?;
    let text = serde_json::to_string_pretty(&sealed.meta).expect("checkpoint metadata serializes");
    fs::write(&json, text + "\n").map_err(|e| Error::io(&json, e))
}

pub fn parse_checkpoint_meta(text: &str) -> Result<CheckpointMeta> {
    serde_json::from_str(text).map_err(|e| Error::parse("checkpoint metadata", e))
}

/// Rebuilds a checkpoint from its metadata and payload, verifying the hash,
/// the tensor table and (for networks) the model's parameter layout.
pub fn decode_checkpoint(meta: CheckpointMeta, payload: &[u8]) -> Result<Checkpoint> {
    let actual = hex64(fnv1a64(payload));
    if actual != meta.content_hash {
        return Err(Error::Integrity(format!(
            "checkpoint payload hash {actual} does not match recorded {}",
            meta.content_hash
        )));
    }
    if payload.len() % 8 != 0 {
        return Err(Error::Integrity("checkpoint payload is not a whole number of f64 values".into()));
    }
    let mut values = payload
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")));
    let mut tensors = Vec::with_capacity(meta.tensors.len());
    let mut used = 0usize;
    for t in &meta.tensors {
        let n = t
            .shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&n| n <= payload.len() / 8 - used)
            .ok_or_else(|| Error::Integrity(format!("tensor {} overruns the payload", t.name)))?;
        used += n;
        let data: Vec<f64> = values.by_ref().take(n).collect();
        tensors.push((t.name.clone(), Tensor::new(t.shape.clone(), data)?));
    }
    if used != payload.len() / 8 {
        return Err(Error::Integrity(format!(
            "checkpoint payload has {} values, tensor table declares {used}",
            payload.len() / 8
        )));
    }
    let params = ParamSet::from_tensors(tensors)?;
    if meta.kind == SVM_KIND {
        if meta.svm.is_none() {
            return Err(Error::Integrity("SVM checkpoint lacks its SVM settings".into()));
        }
        SvmModel::from_params(&params, meta.svm.clone().expect("checked"))?;
    } else {
        let spec = meta
            .spec
            .as_ref()
            .ok_or_else(|| Error::Integrity(format!("{} checkpoint lacks a model spec", meta.kind)))?;
        if spec.kind.name() != meta.kind {
            return Err(Error::Integrity(format!(
                "checkpoint kind {} disagrees with spec kind {}",
                meta.kind, spec.kind
            )));
        }
        spec.validate()?;
        spec.check_params(&params)?;
    }
    Ok(Checkpoint { meta, params })
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let (json, bin) = checkpoint_paths(path);
    let text = fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
    let meta = parse_checkpoint_meta(&text)?;
    let payload = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    decode_checkpoint(meta, &payload)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{init_params, ModelKind};

    fn sample() -> Checkpoint {
        let spec = ModelSpec::new(ModelKind::Gru, 8, 3).with_hidden(4);
        let params = init_params(&spec, 3).unwrap();
        let meta = CheckpointMeta {
            kind: "GRU".into(),
            spec: Some(spec),
            train_config: Some(TrainConfig::default()),
            svm: None,
            metric: "val_accuracy".into(),
            best_epoch: 4,
            best_val_accuracy: 0.75,
            stop_reason: Some(StopReason::EarlyStop),
            weight_decay_on_biases: false,
            feature_config_hash: hex64(1),
            split: SplitInfo {
                seed: 0,
                ratios: [0.7, 0.15, 0.15],
                test_size: 3,
                test_hash: hex64(2),
            },
            tensors: vec![],
            content_hash: String::new(),
        };
        Checkpoint::sealed(meta, params)
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let ck = sample();
        save_checkpoint(&ck, dir.path().join("gru")).unwrap();
        let back = load_checkpoint(dir.path().join("gru.ckpt.json")).unwrap();
        assert_eq!(back, ck);
        for (a, b) in ck.params.values().iter().zip(back.params.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn truncation_and_tampering_are_integrity_errors() {
        let dir = tempfile::tempdir().unwrap();
        let ck = sample();
        let base = dir.path().join("m");
        save_checkpoint(&ck, &base).unwrap();
        let (_, bin) = checkpoint_paths(&base);
        let bytes = fs::read(&bin).unwrap();
        fs::write(&bin, &bytes[..bytes.len() - 5]).unwrap();
        assert!(matches!(load_checkpoint(&base), Err(Error::Integrity(_))));
        let mut flipped = bytes.clone();
        flipped[10] ^= 1;
        fs::write(&bin, &flipped).unwrap();
        assert!(matches!(load_checkpoint(&base), Err(Error::Integrity(_))));
    }

    #[test]
    fn spec_param_disagreement_is_rejected() {
        let mut ck = sample();
        let mut spec = ck.meta.spec.clone().unwrap();
        spec.hidden = 5;
        ck.meta.spec = Some(spec);
        let payload = encode_params(&ck.params);
        let ck = Checkpoint::sealed(ck.meta, ck.params);
        assert!(decode_checkpoint(ck.meta, &payload).is_err());
    }

    #[test]
    fn path_forms() {
        let (j, b) = checkpoint_paths("out/BILSTM.ckpt.bin");
        assert_eq!(j, PathBuf::from("out/BILSTM.ckpt.json"));
        assert_eq!(b, PathBuf::from("out/BILSTM.ckpt.bin"));
        assert_eq!(checkpoint_paths("out/x").0, PathBuf::from("out/x.ckpt.json"));
    }
}
