//! Finite-difference verification of the analytic gradients.

use super::layers::softmax_cross_entropy;
use super::model::{batch_loss_and_grads, init_params, model_forward, ModelKind, ModelSpec};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Largest parameter count [`grad_check`] will perturb one by one.
pub const MAX_CHECKED_PARAMS: usize = 10_000;
const CHECK_BATCH: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub kind: ModelKind,
    pub max_rel_error: f64,
    pub worst_param: String,
    pub worst_index: usize,
    pub checked: usize,
}

/// `|a - n| / max(1e-8, |a| + |n|)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8)
}

/// Compares every analytic gradient entry of the cross-entropy loss on a
/// random batch of two against central differences with step `eps`.
pub fn grad_check(spec: &ModelSpec, seed: u64, eps: f64) -> Result<GradCheckReport> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let n = spec.num_params();
    if n > MAX_CHECKED_PARAMS {
        return Err(Error::InvalidArgument(format!(
            "{n} parameters is too many for a finite-difference check (max {MAX_CHECKED_PARAMS})"
        )));
    }
    let mut params = init_params(spec, seed)?;
    let mut rng = Rng::derive(seed, 1);
    let x: Vec<f64> = (0..CHECK_BATCH * spec.input_t * spec.input_c)
        .map(|_| rng.normal())
        .collect();
    let labels: Vec<usize> = (0..CHECK_BATCH).map(|_| rng.below(spec.classes)).collect();

    let (_, grads) = batch_loss_and_grads(spec, &params, &x, &labels)?;
    let entries = params.entries().to_vec();
    let mut report = GradCheckReport {
        kind: spec.kind,
        max_rel_error: 0.0,
        worst_param: String::new(),
        worst_index: 0,
        checked: 0,
    };
    for e in &entries {
        for (i, idx) in e.range().enumerate() {
            let orig = params.values()[idx];
            params.values_mut()[idx] = orig + eps;
            let lp = loss(spec, &params, &x, &labels)?;
            params.values_mut()[idx] = orig - eps;
            let lm = loss(spec, &params, &x, &labels)?;
            params.values_mut()[idx] = orig;
            let err = relative_error(grads.values()[idx], (lp - lm) / (2.0 * eps));
            if err > report.max_rel_error || report.checked == 0 {
                report.max_rel_error = err;
                report.worst_param = e.name.clone();
                report.worst_index = i;
            }
            report.checked += 1;
        }
    }
    Ok(report)
}

fn loss(spec: &ModelSpec, params: &super::ParamSet, x: &[f64], labels: &[usize]) -> Result<f64> {
    let (logits, _) = model_forward(spec, params, x)?;
    Ok(softmax_cross_entropy(&logits, labels)?.0)
}
