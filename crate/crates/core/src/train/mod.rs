//! AdamW training loop with plateau learning-rate decay, early stopping,
//! checkpoints and per-epoch history.

mod adamw;
mod callbacks;
mod checkpoint;
mod history;
mod trainer;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use adamw::{adamw_step, AdamWState};
pub use callbacks::{early_stop_step, plateau_step, EarlyStopState, PlateauState, IMPROVEMENT_EPS};
pub use checkpoint::{
    checkpoint_paths, decode_checkpoint, load_checkpoint, parse_checkpoint_meta, save_checkpoint, Checkpoint,
    CheckpointMeta, SplitInfo, TensorEntry, SVM_KIND,
};
pub use history::{history_path, load_history, parse_history, render_history, save_history, HISTORY_HEADER};
pub use trainer::{evaluate_split, train_model, EpochRecord, StopReason, TrainingRun};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub es_patience: usize,
    pub lr_patience: usize,
    pub lr_factor: f64,
    pub min_lr: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-2,
            batch_size: 32,
            max_epochs: 200,
            es_patience: 10,
            lr_patience: 5,
            lr_factor: 0.5,
            min_lr: 1e-6,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return fail("lr must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return fail("beta1 and beta2 must lie in [0, 1)");
        }
        if !(self.eps > 0.0) || !(self.weight_decay >= 0.0) || !self.weight_decay.is_finite() {
            return fail("eps must be positive and weight_decay non-negative");
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return fail("batch_size and max_epochs must be at least 1");
        }
        if self.es_patience == 0 || self.lr_patience == 0 {
            return fail("patience values must be at least 1");
        }
        if !(self.lr_factor > 0.0 && self.lr_factor < 1.0) {
            return fail("lr_factor must lie in (0, 1)");
        }
        if !(self.min_lr >= 0.0 && self.min_lr <= self.lr) {
            return fail("min_lr must lie in [0, lr]");
        }
        Ok(())
    }
}
