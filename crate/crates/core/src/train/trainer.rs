use serde::{Deserialize, Serialize};

use super::adamw::{adamw_step, AdamWState};
use super::callbacks::{early_stop_step, plateau_step, EarlyStopState, PlateauState};
use super::TrainConfig;
use crate::data::{FeatureTensor, SplitSet};
use crate::error::{Error, Result};
use crate::nn::{batch_loss_and_grads, init_params, sample_logits, softmax_cross_entropy, ModelSpec, ParamSet};
use crate::rng::Rng;

/// Stream id for minibatch shuffling, kept apart from the init stream.
const SHUFFLE_STREAM: u64 = 0x5348_5546;

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
    /// Learning rate used for this epoch's updates.
    pub lr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    EarlyStop,
    MaxEpochs,
}

#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub spec: ModelSpec,
    pub config: TrainConfig,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub stop_reason: StopReason,
    /// Parameters as of `best_epoch`.
    pub best_params: ParamSet,
    pub final_params: ParamSet,
}

fn gather(tensor: &FeatureTensor, indices: &[usize], buf: &mut Vec<f64>, labels: &mut Vec<usize>) {
    buf.clear();
    labels.clear();
    for &i in indices {
        buf.extend_from_slice(tensor.sample(i));
        labels.push(tensor.labels()[i].index());
    }
}

/// Mean cross-entropy and accuracy of `params` over the given samples.
pub fn evaluate_split(
    spec: &ModelSpec,
    params: &ParamSet,
    tensor: &FeatureTensor,
    indices: &[usize],
) -> Result<(f64, f64)> {
    if indices.is_empty() {
        return Err(Error::Split("cannot evaluate an empty split".into()));
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    for &i in indices {
        let logits = sample_logits(spec, params, tensor.sample(i))?;
        let label = tensor.labels()[i].index();
        loss += softmax_cross_entropy(&logits, &[label])?.0;
        if crate::nn::argmax(&logits) == label {
            correct += 1;
        }
    }
    let n = indices.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

fn check_inputs(spec: &ModelSpec, tensor: &FeatureTensor, splits: &SplitSet, config: &TrainConfig) -> Result<()> {
    spec.validate()?;
    config.validate()?;
    if spec.input_t != tensor.time_steps() || spec.input_c != tensor.channels() {
        return Err(Error::Shape(format!(
            "model expects {}x{} samples, tensor has {}x{}",
            spec.input_t,
            spec.input_c,
            tensor.time_steps(),
            tensor.channels()
        )));
    }
    let n = tensor.num_samples();
    let [train, val, _] = splits.parts();
    if train.is_empty() || val.is_empty() {
        return Err(Error::Split("training needs non-empty train and validation splits".into()));
    }
    if splits.parts().iter().flat_map(|p| p.iter()).any(|&i| i >= n) {
        return Err(Error::Split(format!("split index out of range for {n} samples")));
    }
    Ok(())
}

/// Trains one model from `init_params(spec, config.seed)`. Every epoch
/// shuffles the training indices, runs minibatch AdamW, scores the
/// validation split, updates the plateau and early-stop callbacks and keeps a
/// copy of the parameters whenever validation accuracy strictly improves.
pub fn train_model(
    spec: &ModelSpec,
    tensor: &FeatureTensor,
    splits: &SplitSet,
    config: &TrainConfig,
) -> Result<TrainingRun> {
    check_inputs(spec, tensor, splits, config)?;
    let mut params = init_params(spec, config.seed)?;
    let mut opt = AdamWState::new(&params);
    let mut plateau = PlateauState::new(config.lr, config.lr_patience, config.lr_factor, config.min_lr);
    let mut stopper = EarlyStopState::new(config.es_patience);
    let mut rng = Rng::derive(config.seed, SHUFFLE_STREAM);
    let mut order = splits.train.clone();
    let mut buf = Vec::new();
    let mut labels = Vec::new();

    let mut history = Vec::new();
    let mut best_params = params.clone();
    let mut best_val_accuracy = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    let mut stop_reason = StopReason::MaxEpochs;
    let mut lr = config.lr;

    for epoch in 1..=config.max_epochs {
        rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            gather(tensor, chunk, &mut buf, &mut labels);
            let (loss, grads) = batch_loss_and_grads(spec, &params, &buf, &labels)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: b + 1 });
            }
            adamw_step(&mut params, &grads, &mut opt, config, lr)?;
            loss_sum += loss * chunk.len() as f64;
        }
        let train_loss = loss_sum / order.len() as f64;
        let (val_loss, val_accuracy) = evaluate_split(spec, &params, tensor, &splits.val)?;
        if !val_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, batch: 0 });
        }
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            val_accuracy,
            lr,
        });
        if val_accuracy > best_val_accuracy {
            best_val_accuracy = val_accuracy;
            best_epoch = epoch;
            best_params.values_mut().copy_from_slice(params.values());
        }
        lr = plateau_step(&mut plateau, val_accuracy);
        if early_stop_step(&mut stopper, val_accuracy) {
            stop_reason = StopReason::EarlyStop;
            break;
        }
    }
    Ok(TrainingRun {
        spec: spec.clone(),
        config: config.clone(),
        history,
        best_epoch,
        best_val_accuracy,
        stop_reason,
        best_params,
        final_params: params,
    })
}
