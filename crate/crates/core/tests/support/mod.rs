//! Independent oracles and the criterion checks built on them, shared by the
//! core integration tests and the CLI acceptance target.
#![allow(dead_code)]

use ecg_bench::data::{ClassLabel, FeatureTensor, SplitSet};
use ecg_bench::dsp::{
    dwt_forward, dwt_inverse, fit_pca, pca_back_project, pca_project, wavelet_denoise, PreprocessConfig,
    WaveletFamily, WaveletSpec,
};
use ecg_bench::eval::{accuracy, classification_report, confusion_matrix};
use ecg_bench::nn::{ModelKind, ModelSpec, ParamSet, Tensor};
use ecg_bench::rng::Rng;
use ecg_bench::train::{
    adamw_step, early_stop_step, plateau_step, train_model, AdamWState, EarlyStopState, PlateauState,
    StopReason, TrainConfig,
};

pub const DWT_TOLERANCE: f64 = 1e-8;
pub const DENOISE_MIN_WINS: usize = 95;
pub const PCA_TOLERANCE: f64 = 1e-8;
pub const ADAMW_TOLERANCE: f64 = 1e-12;

/// One acceptance line.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

// ---------------------------------------------------------------- DWT

/// Largest reconstruction error over 100 random signals (lengths 64-1024),
/// both families and levels 1-4.
pub fn dwt_round_trip_error() -> f64 {
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let mut rng = Rng::new(seed);
        let n = 64 + rng.below(961);
        let x: Vec<f64> = (0..n).map(|_| rng.uniform_in(-5.0, 5.0)).collect();
        for family in [WaveletFamily::Haar, WaveletFamily::Daubechies4] {
            for levels in 1..=4 {
                let spec = WaveletSpec { family, levels };
                let back = dwt_inverse(&dwt_forward(&x, spec).expect("forward")).expect("inverse");
                assert_eq!(back.len(), n);
                for (a, b) in back.iter().zip(&x) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    worst
}

pub fn check_dwt() -> Check {
    let err = dwt_round_trip_error();
    Check {
        name: "DWT round trip",
        pass: err < DWT_TOLERANCE,
        detail: format!("max |idwt(dwt(x)) - x| = {err:.3e} over 800 transforms (limit {DWT_TOLERANCE:e})"),
    }
}

// ---------------------------------------------------------------- denoising

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// Seeds (out of 100) for which denoising a 360 Hz sine with sigma 0.2 noise
/// lowers the MSE against the clean sine.
pub fn denoise_wins() -> usize {
    let fs = 360.0;
    let clean: Vec<f64> = (0..1800)
        .map(|i| (std::f64::consts::TAU * 3.0 * i as f64 / fs).sin())
        .collect();
    let cfg = PreprocessConfig::default();
    (0..100u64)
        .filter(|&seed| {
            let mut rng = Rng::new(seed);
            let noisy: Vec<f64> = clean.iter().map(|v| v + 0.2 * rng.normal()).collect();
            let out = wavelet_denoise(&noisy, &cfg).expect("denoise");
            mse(&out, &clean) < mse(&noisy, &clean)
        })
        .count()
}

pub fn check_denoise() -> Check {
    let wins = denoise_wins();
    Check {
        name: "Denoising utility",
        pass: wins >= DENOISE_MIN_WINS,
        detail: format!("denoised MSE < noisy MSE for {wins}/100 seeds (need {DENOISE_MIN_WINS})"),
    }
}

// ---------------------------------------------------------------- PCA

/// Cyclic Jacobi eigensolver for a symmetric `n x n` matrix. Returns
/// eigenvalues in descending order and matching unit eigenvectors, each
/// signed so its largest-magnitude entry is positive.
pub fn jacobi_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut col: Vec<f64> = (0..n).map(|k| v[k * n + i]).collect();
            let big = col.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if big < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
            col
        })
        .collect();
    (values, vectors)
}

/// (n-1)-divisor covariance of a row-major `m x c` matrix.
pub fn covariance(data: &[f64], c: usize) -> Vec<f64> {
    let m = data.len() / c;
    let mean: Vec<f64> = (0..c).map(|j| (0..m).map(|i| data[i * c + j]).sum::<f64>() / m as f64).collect();
    let mut cov = vec![0.0; c * c];
    for i in 0..c {
        for j in 0..c {
            cov[i * c + j] = (0..m)
                .map(|r| (data[r * c + i] - mean[i]) * (data[r * c + j] - mean[j]))
                .sum::<f64>()
                / (m - 1) as f64;
        }
    }
    cov
}

/// Worst eigenvalue/component disagreement with the Jacobi oracle over 50
/// random 6x4 matrices, and whether reconstruction error never grew with k.
pub fn pca_oracle() -> (f64, bool) {
    let (m, c) = (6, 4);
    let mut worst = 0.0f64;
    let mut monotone = true;
    for seed in 0..50u64 {
        let mut rng = Rng::new(1000 + seed);
        let data: Vec<f64> = (0..m * c).map(|_| rng.normal()).collect();
        let model = fit_pca(&data, c).expect("pca");
        let (values, vectors) = jacobi_eigen(&covariance(&data, c), c);
        for i in 0..c {
            worst = worst.max((model.eigenvalues[i] - values[i]).abs());
            for (a, b) in model.component(i).iter().zip(&vectors[i]) {
                worst = worst.max((a - b).abs());
            }
        }
        let mut prev = f64::INFINITY;
        for k in 1..=c {
            let back = pca_back_project(&model, &pca_project(&model, &data, k).expect("project"), k).expect("back");
            let err: f64 = back.iter().zip(&data).map(|(a, b)| (a - b) * (a - b)).sum();
            monotone &= err <= prev;
            prev = err;
        }
    }
    (worst, monotone)
}

pub fn check_pca() -> Check {
    let (worst, monotone) = pca_oracle();
    Check {
        name: "PCA oracle",
        pass: worst < PCA_TOLERANCE && monotone,
        detail: format!(
            "max deviation from cyclic Jacobi {worst:.3e} on 50 6x4 matrices (limit {PCA_TOLERANCE:e}); reconstruction error non-increasing in k: {monotone}"
        ),
    }
}

// ---------------------------------------------------------------- AdamW

/// Scalar AdamW written out from the update equations.
pub fn adamw_scalar(theta0: f64, grads: &[f64], lr: f64, wd: f64) -> Vec<f64> {
    let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
    let (mut theta, mut m, mut v) = (theta0, 0.0, 0.0);
    let mut out = Vec::new();
    for (i, &g) in grads.iter().enumerate() {
        let t = (i + 1) as i32;
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        let m_hat = m / (1.0 - b1.powi(t));
        let v_hat = v / (1.0 - b2.powi(t));
        theta = theta - lr * m_hat / (v_hat.sqrt() + eps) - lr * wd * theta;
        out.push(theta);
    }
    out
}

/// Three library steps on a single weight.
pub fn adamw_library(theta0: f64, grads: &[f64], lr: f64, wd: f64) -> Vec<f64> {
    let mut params =
        ParamSet::from_tensors([("head.w".to_string(), Tensor::new(vec![1, 1], vec![theta0]).unwrap())]).unwrap();
    let mut state = AdamWState::new(&params);
    let cfg = TrainConfig {
        lr,
        weight_decay: wd,
        ..TrainConfig::default()
    };
    grads
        .iter()
        .map(|&g| {
            let mut grad = params.zeros_like();
            grad.values_mut()[0] = g;
            adamw_step(&mut params, &grad, &mut state, &cfg, lr).expect("step");
            params.values()[0]
        })
        .collect()
}

/// Worst deviation from the hand values; the first steps must also sit at
/// 0.9 and 0.899 to seven decimals.
pub fn adamw_oracle() -> f64 {
    let mut worst = 0.0f64;
    // constant unit gradient: m_hat = v_hat = 1 at every step
    let step = 0.1 / (1.0 + 1e-8);
    let hand_plain = [1.0 - step, 1.0 - 2.0 * step, 1.0 - 3.0 * step];
    let mut theta = 1.0;
    let hand_decay: Vec<f64> = (0..3)
        .map(|_| {
            theta = theta - step - 0.1 * 0.01 * theta;
            theta
        })
        .collect();
    for (lib, hand) in [
        (adamw_library(1.0, &[1.0; 3], 0.1, 0.0), hand_plain.to_vec()),
        (adamw_library(1.0, &[1.0; 3], 0.1, 0.01), hand_decay),
    ] {
        for (a, b) in lib.iter().zip(&hand) {
            worst = worst.max((a - b).abs());
        }
    }
    let first = adamw_library(1.0, &[1.0], 0.1, 0.0)[0];
    let first_wd = adamw_library(1.0, &[1.0], 0.1, 0.01)[0];
    if (first - 0.9).abs() > 5e-8 || (first_wd - 0.899).abs() > 5e-8 {
        return f64::INFINITY;
    }
    for grads in [[0.5, -1.5, 2.0], [-3.0, 0.25, 0.0]] {
        for wd in [0.0, 0.01] {
            let lib = adamw_library(0.3, &grads, 0.05, wd);
            for (a, b) in lib.iter().zip(adamw_scalar(0.3, &grads, 0.05, wd)) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    worst
}

pub fn check_adamw() -> Check {
    let worst = adamw_oracle();
    Check {
        name: "AdamW oracle",
        pass: worst < ADAMW_TOLERANCE,
        detail: format!(
            "max deviation from hand-computed steps {worst:.3e} (limit {ADAMW_TOLERANCE:e}); theta1 = {:.7}, with wd 0.01 theta1 = {:.7}",
            adamw_library(1.0, &[1.0], 0.1, 0.0)[0],
            adamw_library(1.0, &[1.0], 0.1, 0.01)[0]
        ),
    }
}

// ---------------------------------------------------------------- callbacks

/// Epoch (1-based) of the first LR reduction and of the stop signal for a
/// constant metric fed to the callbacks directly.
pub fn callback_epochs(lr_patience: usize, es_patience: usize) -> (Option<usize>, Option<usize>) {
    let mut plateau = PlateauState::new(1e-3, lr_patience, 0.5, 1e-6);
    let mut stopper = EarlyStopState::new(es_patience);
    let (mut reduced, mut stopped) = (None, None);
    for epoch in 1..=200 {
        let lr = plateau_step(&mut plateau, 0.5);
        if reduced.is_none() && lr < 1e-3 {
            reduced = Some(epoch);
        }
        if early_stop_step(&mut stopper, 0.5) {
            stopped = Some(epoch);
            break;
        }
    }
    (reduced, stopped)
}

/// Small tensor of `per_class` samples per class; class `c` is a constant
/// offset `2c` on channel 0 plus unit noise.
pub fn cluster_tensor(per_class: usize, t: usize, c: usize, spread: f64, seed: u64) -> FeatureTensor {
    let mut rng = Rng::new(seed);
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for i in 0..per_class * 3 {
        let class = i % 3;
        let centre: Vec<f64> = (0..c).map(|ch| if ch == class % c { 2.0 } else { -1.0 }).collect();
        for _ in 0..t {
            for &m in &centre {
                data.push(m + spread * rng.normal());
            }
        }
        labels.push(ClassLabel::ALL[class]);
    }
    FeatureTensor::new([per_class * 3, t, c], data, labels, 7).unwrap()
}

/// Trains with a learning rate too small to move any weight, so the
/// validation accuracy is constant, and reports (epoch whose plateau step
/// lowered the LR, epochs run, best epoch, stop reason).
pub fn trainer_callback_epochs(lr_patience: usize, es_patience: usize) -> (Option<usize>, usize, usize, StopReason) {
    let tensor = cluster_tensor(6, 8, 3, 1.0, 3);
    let idx: Vec<usize> = (0..18).collect();
    let split = SplitSet {
        train: idx[..12].to_vec(),
        val: idx[12..15].to_vec(),
        test: idx[15..].to_vec(),
        seed: 0,
        ratios: [0.7, 0.15, 0.15],
    };
    let spec = ModelSpec::new(ModelKind::Cnn, 8, 3).with_hidden(4);
    let cfg = TrainConfig {
        lr: 1e-300,
        min_lr: 0.0,
        weight_decay: 0.0,
        lr_patience,
        es_patience,
        max_epochs: 100,
        ..TrainConfig::default()
    };
    let run = train_model(&spec, &tensor, &split, &cfg).expect("train");
    // history[e].lr is the rate used during epoch e+1, set by epoch e's step
    let reduced = run.history.windows(2).position(|w| w[1].lr < w[0].lr).map(|i| i + 1);
    (reduced, run.history.len(), run.best_epoch, run.stop_reason)
}

pub fn check_callbacks() -> Check {
    let (lr_p, es_p) = (5, 10);
    let (reduced, stopped) = callback_epochs(lr_p, es_p);
    let (t_reduced, t_epochs, t_best, t_reason) = trainer_callback_epochs(lr_p, es_p);
    let alt = callback_epochs(2, 4);
    let pass = reduced == Some(lr_p + 1)
        && stopped == Some(1 + es_p)
        && alt == (Some(3), Some(5))
        && t_reduced == Some(lr_p + 1)
        && t_best == 1
        && t_epochs == t_best + es_p
        && t_reason == StopReason::EarlyStop;
    Check {
        name: "Callback semantics",
        pass,
        detail: format!(
            "constant metric, lr_patience {lr_p}/es_patience {es_p}: LR cut at epoch {reduced:?}, stop at epoch {stopped:?}; in train_model: cut at {t_reduced:?}, stopped after {t_epochs} epochs (best {t_best}, {t_reason:?}); lr_patience 2/es_patience 4: {alt:?}"
        ),
    }
}

// ---------------------------------------------------------------- metrics

/// Brute-force per-class (precision, recall, f1, support) straight from the
/// label pairs.
pub fn brute_report(truth: &[usize], pred: &[usize]) -> Vec<(f64, f64, f64, u64)> {
    (0..3)
        .map(|c| {
            let mut tp = 0u64;
            let mut predicted = 0u64;
            let mut actual = 0u64;
            for (&t, &p) in truth.iter().zip(pred) {
                if t == c && p == c {
                    tp += 1;
                }
                if p == c {
                    predicted += 1;
                }
                if t == c {
                    actual += 1;
                }
            }
            let precision = if predicted == 0 { 0.0 } else { tp as f64 / predicted as f64 };
            let recall = if actual == 0 { 0.0 } else { tp as f64 / actual as f64 };
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            (precision, recall, f1, actual)
        })
        .collect()
}

/// Whether the library matrix, accuracy and report equal brute force for
/// `pairs` random (truth, prediction) pairs drawn from `seed`.
pub fn metrics_match_brute_force(pairs: usize, seed: u64) -> bool {
    let mut rng = Rng::new(seed);
    // skewed predictions so some classes are rare
    let truth: Vec<usize> = (0..pairs).map(|_| rng.below(3)).collect();
    let pred: Vec<usize> = truth
        .iter()
        .map(|&t| if rng.uniform() < 0.6 { t } else { rng.below(3) })
        .collect();
    let cm = confusion_matrix(&truth, &pred).unwrap();
    let mut counts = [[0u64; 3]; 3];
    for t in 0..3 {
        for p in 0..3 {
            counts[t][p] = truth.iter().zip(&pred).filter(|&(&a, &b)| a == t && b == p).count() as u64;
        }
    }
    let direct = truth.iter().zip(&pred).filter(|(a, b)| a == b).count() as f64 / pairs as f64;
    let report = classification_report(&cm).unwrap();
    let brute = brute_report(&truth, &pred);
    let per_class_ok = report
        .per_class
        .iter()
        .zip(&brute)
        .all(|(m, &(p, r, f, s))| m.precision == p && m.recall == r && m.f1 == f && m.support == s);
    let macro_f1 = brute.iter().map(|b| b.2).sum::<f64>() / 3.0;
    cm.counts == counts && accuracy(&cm).unwrap() == direct && per_class_ok && report.macro_f1 == macro_f1
}

pub fn check_metrics() -> Check {
    let pass = metrics_match_brute_force(1000, 2024);
    Check {
        name: "Metric oracles",
        pass,
        detail: format!("1000 random label/prediction pairs: confusion matrix, accuracy and report equal brute force exactly: {pass}"),
    }
}
