//! Plateau learning-rate decay and early stopping on a higher-is-better metric.

/// A metric must beat the best so far by more than this to count.
pub const IMPROVEMENT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PlateauState {
    pub lr: f64,
    pub best: f64,
    pub wait: usize,
    pub patience: usize,
    pub factor: f64,
    pub min_lr: f64,
}

impl PlateauState {
    pub fn new(lr: f64, patience: usize, factor: f64, min_lr: f64) -> Self {
        PlateauState {
            lr,
            best: f64::NEG_INFINITY,
            wait: 0,
            patience,
            factor,
            min_lr,
        }
    }
}

/// Records one epoch's metric and returns the learning rate for the next one.
pub fn plateau_step(state: &mut PlateauState, metric: f64) -> f64 {
    if metric > state.best + IMPROVEMENT_EPS {
        state.best = metric;
        state.wait = 0;
    } else {
        state.wait += 1;
        if state.wait >= state.patience {
            state.lr = (state.lr * state.factor).max(state.min_lr);
            state.wait = 0;
        }
    }
    state.lr
}

#[derive(Debug, Clone, PartialEq)]
pub struct EarlyStopState {
    pub best: f64,
    pub best_epoch: usize,
    pub wait: usize,
    pub patience: usize,
    epochs_seen: usize,
}

impl EarlyStopState {
    pub fn new(patience: usize) -> Self {
        EarlyStopState {
            best: f64::NEG_INFINITY,
            best_epoch: 0,
            wait: 0,
            patience,
            epochs_seen: 0,
        }
    }
}

/// Records one epoch's metric; true means training should stop now.
pub fn early_stop_step(state: &mut EarlyStopState, metric: f64) -> bool {
    state.epochs_seen += 1;
    if metric > state.best + IMPROVEMENT_EPS {
        state.best = metric;
        state.best_epoch = state.epochs_seen;
        state.wait = 0;
    } else {
        state.wait += 1;
    }
    state.wait >= state.patience
}
