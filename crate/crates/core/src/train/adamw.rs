use super::TrainConfig;
use crate::error::{Error, Result};
use crate::nn::ParamSet;

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamWState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamWState {
    pub fn new(params: &ParamSet) -> Self {
        AdamWState {
            m: vec![0.0; params.num_values()],
            v: vec![0.0; params.num_values()],
            t: 0,
        }
    }
}

/// One AdamW update at learning rate `lr`. Decay is decoupled from the
/// adaptive step, uses the pre-update parameter and skips bias tensors.
/// Non-finite gradients abort before anything is modified.
pub fn adamw_step(
    params: &mut ParamSet,
    grads: &ParamSet,
    state: &mut AdamWState,
    config: &TrainConfig,
    lr: f64,
) -> Result<()> {
    if !params.same_layout(grads) || state.m.len() != params.num_values() || state.v.len() != params.num_values() {
        return Err(Error::Shape("optimizer state, parameters and gradients disagree".into()));
    }
    if state.t >= 1 << 53 {
        return Err(Error::InvalidArgument("optimizer step counter overflow".into()));
    }
    for (e, g) in grads.iter() {
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient(e.name.clone()));
        }
    }
    state.t += 1;
    let t = state.t as f64;
    let (b1, b2) = (config.beta1, config.beta2);
    let c1 = 1.0 - b1.powf(t);
    let c2 = 1.0 - b2.powf(t);
    let entries = params.entries().to_vec();
    let theta = params.values_mut();
    let g = grads.values();
    for e in &entries {
        let wd = if e.is_bias() { 0.0 } else { config.weight_decay };
        for i in e.range() {
            let m = b1 * state.m[i] + (1.0 - b1) * g[i];
            let v = b2 * state.v[i] + (1.0 - b2) * g[i] * g[i];
            state.m[i] = m;
            state.v[i] = v;
            let m_hat = m / c1;
            let v_hat = v / c2;
            let old = theta[i];
            theta[i] = old - lr * m_hat / (v_hat.sqrt() + config.eps) - lr * wd * old;
        }
    }
    Ok(())
}
