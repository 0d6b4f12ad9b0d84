//! Linear one-vs-rest SVM baseline trained with Pegasos on flattened
//! feature samples.
//!
//! Each binary problem learns `w` over the sample augmented with a constant 1,
//! so the bias is the last weight and is regularized with the rest. Per step
//! `t` (1-based, counted across epochs) with step size `1 / (lambda t)`:
//! `w <- (1 - 1/t) w`, plus `y x / (lambda t)` when `y w.x < 1`, then `w` is
//! projected onto the ball of radius `1 / sqrt(lambda)`.

use serde::{Deserialize, Serialize};

use crate::data::{FeatureTensor, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::nn::{argmax, ParamSet, Tensor};
use crate::rng::Rng;

pub const DEFAULT_LAMBDA: f64 = 1e-3;
pub const DEFAULT_EPOCHS: usize = 50;

/// Settings recorded alongside SVM weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvmMeta {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    pub features: usize,
    pub multiclass: String,
}

impl SvmMeta {
    pub fn new(lambda: f64, epochs: usize, seed: u64, features: usize) -> Self {
        SvmMeta {
            lambda,
            epochs,
            seed,
            features,
            multiclass: "one-vs-rest".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    /// `3 x D`, row `c` scores class `c` against the rest.
    pub weights: Vec<f64>,
    pub biases: [f64; NUM_CLASSES],
    pub meta: SvmMeta,
    /// Per class, the regularized hinge objective after every epoch.
    pub objective: Vec<Vec<f64>>,
}

/// Row-major `S x (T C)` matrix of flattened samples.
pub fn svm_features(tensor: &FeatureTensor) -> Tensor {
    let [s, t, c] = tensor.shape();
    Tensor::new(vec![s, t * c], tensor.data().to_vec()).expect("tensor shape is consistent")
}

fn matrix_dims(features: &Tensor) -> Result<(usize, usize)> {
    match *features.shape() {
        [rows, cols] if cols > 0 => Ok((rows, cols)),
        _ => Err(Error::Shape(format!(
            "SVM features must be a non-empty matrix, got shape {:?}",
            features.shape()
        ))),
    }
}

fn dot_aug(w: &[f64], x: &[f64]) -> f64 {
    let d = x.len();
    let mut s = w[d];
    for (a, b) in w[..d].iter().zip(x) {
        s += a * b;
    }
    s
}

fn objective(w: &[f64], x: &[f64], d: usize, y: &[f64], lambda: f64) -> f64 {
    let norm2: f64 = w.iter().map(|v| v * v).sum();
    let hinge: f64 = x
        .chunks_exact(d)
        .zip(y)
        .map(|(row, yi)| (1.0 - yi * dot_aug(w, row)).max(0.0))
        .sum();
    0.5 * lambda * norm2 + hinge / y.len() as f64
}

fn pegasos(x: &[f64], d: usize, y: &[f64], lambda: f64, epochs: usize, rng: &mut Rng) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let mut w = vec![0.0; d + 1];
    let mut order: Vec<usize> = (0..n).collect();
    let radius2 = 1.0 / lambda;
    let mut trace = Vec::with_capacity(epochs);
    let mut t = 0u64;
    for _ in 0..epochs {
        rng.shuffle(&mut order);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let row = &x[i * d..(i + 1) * d];
            let margin = y[i] * dot_aug(&w, row);
            let shrink = 1.0 - 1.0 / t as f64;
            for v in w.iter_mut() {
                *v *= shrink;
            }
            if margin < 1.0 {
                let step = eta * y[i];
                for (v, xv) in w[..d].iter_mut().zip(row) {
                    *v += step * xv;
                }
                w[d] += step;
            }
            let norm2: f64 = w.iter().map(|v| v * v).sum();
            if norm2 > radius2 {
                let scale = (radius2 / norm2).sqrt();
                for v in w.iter_mut() {
                    *v *= scale;
                }
            }
        }
        trace.push(objective(&w, x, d, y, lambda));
    }
    (w, trace)
}

/// Trains the three binary problems in class order, class `c` drawing its
/// shuffles from stream `c` of `seed`.
pub fn svm_train(features: &Tensor, labels: &[usize], lambda: f64, epochs: usize, seed: u64) -> Result<SvmModel> {
    let (rows, d) = matrix_dims(features)?;
    if rows != labels.len() || rows == 0 {
        return Err(Error::Shape(format!("{rows} feature rows for {} labels", labels.len())));
    }
    if !(lambda > 0.0 && lambda.is_finite()) || epochs == 0 {
        return Err(Error::InvalidArgument("SVM needs lambda > 0 and at least one epoch".into()));
    }
    if let Some(bad) = labels.iter().find(|&&l| l >= NUM_CLASSES) {
        return Err(Error::InvalidArgument(format!("label {bad} out of range")));
    }
    let mut present = [false; NUM_CLASSES];
    for &l in labels {
        present[l] = true;
    }
    if present.iter().filter(|p| **p).count() < 2 {
        return Err(Error::InvalidArgument("SVM training needs at least two classes".into()));
    }
    if features.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("SVM features must be finite".into()));
    }

    let mut weights = Vec::with_capacity(NUM_CLASSES * d);
    let mut biases = [0.0; NUM_CLASSES];
    let mut objective = Vec::with_capacity(NUM_CLASSES);
    for c in 0..NUM_CLASSES {
        let y: Vec<f64> = labels.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
        let mut rng = Rng::derive(seed, c as u64);
        let (w, trace) = pegasos(features.values(), d, &y, lambda, epochs, &mut rng);
        weights.extend_from_slice(&w[..d]);
        biases[c] = w[d];
        objective.push(trace);
    }
    Ok(SvmModel {
        weights,
        biases,
        meta: SvmMeta::new(lambda, epochs, seed, d),
        objective,
    })
}

impl SvmModel {
    pub fn num_features(&self) -> usize {
        self.meta.features
    }

    /// One-vs-rest scores `w_c . x + b_c` for one flattened sample.
    pub fn scores(&self, x: &[f64]) -> [f64; NUM_CLASSES] {
        let mut out = self.biases;
        for (o, w) in out.iter_mut().zip(self.weights.chunks_exact(self.meta.features)) {
            *o += w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
        out
    }

    pub fn to_params(&self) -> ParamSet {
        let d = self.meta.features;
        ParamSet::from_tensors([
            (
                "svm.w".to_string(),
                Tensor::new(vec![NUM_CLASSES, d], self.weights.clone()).expect("weight shape"),
            ),
            (
                "svm.b".to_string(),
                Tensor::new(vec![NUM_CLASSES], self.biases.to_vec()).expect("bias shape"),
            ),
        ])
        .expect("distinct names")
    }

    pub fn from_params(params: &ParamSet, meta: SvmMeta) -> Result<Self> {
        let d = meta.features;
        let w = params.entry("svm.w");
        let b = params.entry("svm.b");
        let ok = params.entries().len() == 2
            && w.is_some_and(|e| e.shape == [NUM_CLASSES, d])
            && b.is_some_and(|e| e.shape == [NUM_CLASSES]);
        if !ok || d == 0 {
            return Err(Error::Shape(format!("SVM parameters do not describe 3 x {d} weights")));
        }
        let mut biases = [0.0; NUM_CLASSES];
        biases.copy_from_slice(params.get("svm.b").expect("checked"));
        Ok(SvmModel {
            weights: params.get("svm.w").expect("checked").to_vec(),
            biases,
            meta,
            objective: Vec::new(),
        })
    }
}

/// Arg-max of the one-vs-rest scores per row; ties go to the lower class.
pub fn svm_predict(model: &SvmModel, features: &Tensor) -> Result<Vec<usize>> {
    let (_, d) = matrix_dims(features)?;
    if d != model.num_features() {
        return Err(Error::Shape(format!(
            "model expects {} features, got {d}",
            model.num_features()
        )));
    }
    Ok(features
        .values()
        .chunks_exact(d)
        .map(|row| argmax(&model.scores(row)))
        .collect())
}
