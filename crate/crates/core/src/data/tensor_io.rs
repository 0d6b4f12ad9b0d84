//! Tensor cache: `<name>.bin` holds little-endian f64 values in row-major
//! `S, T, C` order; `<name>.json` holds shape, labels and the config hash.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ClassLabel, FeatureTensor};
use crate::error::{Error, Result};
use crate::hash::hex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorSidecar {
    pub shape: [usize; 3],
    pub labels: Vec<ClassLabel>,
    pub config_hash: String,
}

/// Accepts `name`, `name.bin` or `name.json` and returns the `(bin, json)` pair.
pub fn tensor_paths(path: impl AsRef<Path>) -> (PathBuf, PathBuf) {
    let path = path.as_ref();
    let base = match path.extension().and_then(|e| e.to_str()) {
        Some("bin") | Some("json") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    let with = |ext: &str| {
        let mut s = base.clone().into_os_string();
        s.push(".");
        s.push(ext);
        PathBuf::from(s)
    };
    (with("bin"), with("json"))
}

pub fn parse_tensor_sidecar(text: &str) -> Result<TensorSidecar> {
    serde_json::from_str(text).map_err(|e| Error::parse("tensor sidecar", e))
}

pub fn decode_feature_tensor(sidecar: &TensorSidecar, payload: &[u8]) -> Result<FeatureTensor> {
    if payload.len() % 8 != 0 {
        return Err(Error::Shape(format!(
            "payload of {} bytes is not a whole number of f64 values",
            payload.len()
        )));
    }
    let count = payload.len() / 8;
    let [s, t, c] = sidecar.shape;
    let declared = s.checked_mul(t).and_then(|v| v.checked_mul(c));
    if declared != Some(count) {
        return Err(Error::Shape(format!(
            "sidecar shape {:?} does not match {count} payload values",
            sidecar.shape
        )));
    }
    let hash = u64::from_str_radix(&sidecar.config_hash, 16)
        .map_err(|e| Error::parse("tensor sidecar config_hash", e))?;
    let data = payload
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
        .collect();
    FeatureTensor::new(sidecar.shape, data, sidecar.labels.clone(), hash)
}

pub fn save_feature_tensor(tensor: &FeatureTensor, path: impl AsRef<Path>) -> Result<()> {
    let (bin, json) = tensor_paths(path);
    let mut payload = Vec::with_capacity(tensor.data().len() * 8);
    for v in tensor.data() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&bin, payload).map_err(|e| Error::io(&bin, e))?;
    let sidecar = TensorSidecar {
        shape: tensor.shape(),
        labels: tensor.labels().to_vec(),
        config_hash: hex64(tensor.config_hash()),
    };
    let text = serde_json::to_string(&sidecar).expect("sidecar serializes");
    fs::write(&json, text + "\n").map_err(|e| Error::io(&json, e))
}

pub fn load_feature_tensor(path: impl AsRef<Path>) -> Result<FeatureTensor> {
    let (bin, json) = tensor_paths(path);
    let text = fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
    let sidecar = parse_tensor_sidecar(&text)?;
    let payload = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    decode_feature_tensor(&sidecar, &payload)
}
