use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Principal axes of a `M x C` data matrix. `components` is `k x C` row-major
/// with orthonormal rows; eigenvalues are the (n-1)-divisor covariance
/// eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub components: Vec<f64>,
    pub eigenvalues: Vec<f64>,
}

impl PcaModel {
    pub fn channels(&self) -> usize {
        self.mean.len()
    }

    pub fn num_components(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn component(&self, i: usize) -> &[f64] {
        let c = self.channels();
        &self.components[i * c..(i + 1) * c]
    }
}

/// Two-pass mean and scatter over row slices of width `channels`.
#[derive(Debug, Clone)]
pub struct CovarianceAccumulator {
    channels: usize,
    rows: usize,
    sum: Vec<f64>,
    mean: Option<Vec<f64>>,
    scatter: Vec<f64>,
    centered: Vec<f64>,
}

impl CovarianceAccumulator {
    pub fn new(channels: usize) -> Self {
        CovarianceAccumulator {
            channels,
            rows: 0,
            sum: vec![0.0; channels],
            mean: None,
            scatter: vec![0.0; channels * channels],
            centered: vec![0.0; channels],
        }
    }

    /// First pass.
    pub fn add_to_mean(&mut self, row: &[f64]) {
        debug_assert!(self.mean.is_none());
        for (s, v) in self.sum.iter_mut().zip(row) {
            *s += v;
        }
        self.rows += 1;
    }

    pub fn finish_mean(&mut self) -> &[f64] {
        let n = self.rows.max(1) as f64;
        self.mean.get_or_insert_with(|| self.sum.iter().map(|s| s / n).collect())
    }

    /// Second pass; `finish_mean` must have been called.
    pub fn add_to_scatter(&mut self, row: &[f64]) {
        let c = self.channels;
        let mean = self.mean.as_ref().expect("finish_mean before the scatter pass");
        for ((d, v), m) in self.centered.iter_mut().zip(row).zip(mean) {
            *d = v - m;
        }
        let centered = &self.centered;
        for i in 0..c {
            let ci = centered[i];
            let out = &mut self.scatter[i * c..i * c + c];
            for j in i..c {
                out[j] += ci * centered[j];
            }
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Covariance with divisor `n - 1`, full symmetric `C x C`.
    pub fn covariance(&self) -> Result<Vec<f64>> {
        if self.rows < 2 {
            return Err(Error::InvalidArgument(format!(
                "PCA needs at least 2 rows, got {}",
                self.rows
            )));
        }
        let c = self.channels;
        let d = (self.rows - 1) as f64;
        let mut cov = vec![0.0; c * c];
        for i in 0..c {
            for j in i..c {
                let v = self.scatter[i * c + j] / d;
                cov[i * c + j] = v;
                cov[j * c + i] = v;
            }
        }
        Ok(cov)
    }

    pub fn into_model(mut self) -> Result<PcaModel> {
        let cov = self.covariance()?;
        let mean = self.finish_mean().to_vec();
        let (eigenvalues, components) = eigen_descending(&cov, self.channels);
        Ok(PcaModel {
            mean,
            components,
            eigenvalues,
        })
    }
}

/// Eigenpairs of a symmetric matrix sorted by descending eigenvalue; each
/// eigenvector is flipped so its largest-magnitude entry is positive.
fn eigen_descending(cov: &[f64], c: usize) -> (Vec<f64>, Vec<f64>) {
    let m = DMatrix::from_row_slice(c, c, cov);
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut values = Vec::with_capacity(c);
    let mut vectors = Vec::with_capacity(c * c);
    for &k in &order {
        values.push(eig.eigenvalues[k].max(0.0));
        let col: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let pivot = col
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if v.abs() > col[best].abs() { i } else { best });
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        vectors.extend(col.iter().map(|v| v * sign));
    }
    (values, vectors)
}

/// Fits PCA on a row-major `M x C` matrix.
pub fn fit_pca(data: &[f64], channels: usize) -> Result<PcaModel> {
    if channels == 0 || data.len() % channels != 0 {
        return Err(Error::Shape(format!(
            "{} values do not form rows of width {channels}",
            data.len()
        )));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("PCA input contains non-finite values".into()));
    }
    let mut acc = CovarianceAccumulator::new(channels);
    for row in data.chunks_exact(channels) {
        acc.add_to_mean(row);
    }
    if acc.rows() < 2 {
        return Err(Error::InvalidArgument(format!(
            "PCA needs at least 2 rows, got {}",
            acc.rows()
        )));
    }
    acc.finish_mean();
    for row in data.chunks_exact(channels) {
        acc.add_to_scatter(row);
    }
    acc.into_model()
}

/// `(data - mean) * components^T`, keeping the first `k` components.
pub fn pca_project(model: &PcaModel, data: &[f64], k: usize) -> Result<Vec<f64>> {
    let c = model.channels();
    if k == 0 || k > model.num_components() {
        return Err(Error::InvalidArgument(format!(
            "k={k} outside 1..={}",
            model.num_components()
        )));
    }
    if data.len() % c != 0 {
        return Err(Error::Shape(format!("{} values do not form rows of width {c}", data.len())));
    }
    let mut out = Vec::with_capacity(data.len() / c * k);
    let mut centered = vec![0.0; c];
    for row in data.chunks_exact(c) {
        for ((d, v), m) in centered.iter_mut().zip(row).zip(&model.mean) {
            *d = v - m;
        }
        for i in 0..k {
            out.push(model.component(i).iter().zip(&centered).map(|(a, b)| a * b).sum());
        }
    }
    Ok(out)
}

/// Inverse map from `M x k` scores back to channel space.
pub fn pca_back_project(model: &PcaModel, scores: &[f64], k: usize) -> Result<Vec<f64>> {
    let c = model.channels();
    if k == 0 || k > model.num_components() || scores.len() % k != 0 {
        return Err(Error::Shape(format!("cannot back-project {} scores with k={k}", scores.len())));
    }
    let mut out = Vec::with_capacity(scores.len() / k * c);
    for row in scores.chunks_exact(k) {
        let mut x = model.mean.clone();
        for (i, s) in row.iter().enumerate() {
            for (xv, cv) in x.iter_mut().zip(model.component(i)) {
                *xv += s * cv;
            }
        }
        out.extend(x);
    }
    Ok(out)
}
