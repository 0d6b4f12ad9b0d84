//! Experiment configuration: one JSON document holding every stage's
//! settings, so a run is reproducible from the file and the seeds alone.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dsp::PreprocessConfig;
use crate::error::{Error, Result};
use crate::nn::{ModelKind, ModelSpec, DEFAULT_HIDDEN};
use crate::svm::{DEFAULT_EPOCHS, DEFAULT_LAMBDA};
use crate::synth::GeneratorConfig;
use crate::train::TrainConfig;

/// Epoch budget of the default experiment.
pub const EXPERIMENT_MAX_EPOCHS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            lambda: DEFAULT_LAMBDA,
            epochs: DEFAULT_EPOCHS,
        }
    }
}

/// Default locations used when a command is not given explicit paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentPaths {
    pub data: PathBuf,
    pub tensor: PathBuf,
    pub runs: PathBuf,
    pub reports: PathBuf,
}

impl Default for ExperimentPaths {
    fn default() -> Self {
        ExperimentPaths {
            data: "data".into(),
            tensor: "features/tensor".into(),
            runs: "runs".into(),
            reports: "reports".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: GeneratorConfig,
    pub preprocess: PreprocessConfig,
    pub train: TrainConfig,
    pub models: Vec<ModelKind>,
    pub hidden: usize,
    pub svm: SvmConfig,
    pub paths: ExperimentPaths,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            generator: GeneratorConfig::default(),
            preprocess: PreprocessConfig::default(),
            train: TrainConfig {
                max_epochs: EXPERIMENT_MAX_EPOCHS,
                ..TrainConfig::default()
            },
            models: ModelKind::ALL.to_vec(),
            hidden: DEFAULT_HIDDEN,
            svm: SvmConfig::default(),
            paths: ExperimentPaths::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        self.preprocess.validate()?;
        self.train.validate()?;
        if self.models.is_empty() {
            return Err(Error::InvalidArgument("at least one model is required".into()));
        }
        let mut kinds = self.models.clone();
        kinds.sort_by_key(|k| k.name());
        kinds.dedup();
        if kinds.len() != self.models.len() {
            return Err(Error::InvalidArgument("models lists a kind twice".into()));
        }
        if self.hidden == 0 {
            return Err(Error::InvalidArgument("hidden must be positive".into()));
        }
        if !(self.svm.lambda > 0.0 && self.svm.lambda.is_finite()) || self.svm.epochs == 0 {
            return Err(Error::InvalidArgument("svm lambda and epochs must be positive".into()));
        }
        Ok(())
    }

    /// Network spec for `kind` on `[T, C]` inputs with the configured width.
    pub fn model_spec(&self, kind: ModelKind, time_steps: usize, channels: usize) -> ModelSpec {
        ModelSpec::new(kind, time_steps, channels).with_hidden(self.hidden)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}

pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::parse("experiment config", e))?;
    config.validate()?;
    Ok(config)
}

pub fn load_experiment_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_experiment_config(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_and_validates() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(parse_experiment_config(&cfg.to_json()).unwrap(), cfg);
        assert_eq!(cfg.train.max_epochs, 50);
        assert_eq!(cfg.preprocess.pca_k, 3);
        assert_eq!(cfg.preprocess.target_length, 512);
        assert_eq!(cfg.generator.class_counts, [299, 192, 301]);
        assert_eq!(cfg.models.len(), 6);
    }

    #[test]
    fn partial_documents_fill_defaults() {
        let cfg = parse_experiment_config(r#"{"models": ["cnn", "BILSTM"], "train": {"seed": 7}}"#).unwrap();
        assert_eq!(cfg.models, [ModelKind::Cnn, ModelKind::Bilstm]);
        assert_eq!(cfg.train.seed, 7);
        assert_eq!(cfg.train.lr, 1e-3);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(parse_experiment_config(r#"{"models": []}"#).is_err());
        assert!(parse_experiment_config(r#"{"models": ["GRU", "gru"]}"#).is_err());
        assert!(parse_experiment_config(r#"{"bogus": 1}"#).is_err());
        assert!(parse_experiment_config(r#"{"models": ["RNN"]}"#).is_err());
        assert!(parse_experiment_config(r#"{"svm": {"lambda": 0}}"#).is_err());
    }
}
