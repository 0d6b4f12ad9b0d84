use super::pipeline::{PreprocessConfig, ThresholdMode};
use super::wavelet::{dwt_forward, dwt_inverse, WaveletSpec};
use crate::error::Result;

/// `sign(c) * max(|c| - lambda, 0)`
pub fn soft_threshold(c: f64, lambda: f64) -> f64 {
    let m = c.abs() - lambda;
    if m > 0.0 {
        m.copysign(c)
    } else {
        0.0
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 0 {
        0.5 * (values[mid - 1] + values[mid])
    } else {
        values[mid]
    }
}

/// Robust noise level from the finest detail band: `median(|d|) / 0.6745`.
pub fn mad_sigma(finest: &[f64]) -> f64 {
    let mut abs: Vec<f64> = finest.iter().map(|v| v.abs()).collect();
    median(&mut abs) / 0.6745
}

/// VisuShrink threshold `sigma * sqrt(2 ln n)`.
pub fn universal_threshold(sigma: f64, n: usize) -> f64 {
    sigma * (2.0 * (n as f64).ln()).sqrt()
}

pub fn wavelet_denoise(signal: &[f64], config: &PreprocessConfig) -> Result<Vec<f64>> {
    match config.threshold_mode {
        ThresholdMode::Soft => wavelet_denoise_with(signal, config.wavelet),
    }
}

/// Soft-thresholds every detail band with the universal threshold; the
/// approximation band is left untouched.
pub fn wavelet_denoise_with(signal: &[f64], spec: WaveletSpec) -> Result<Vec<f64>> {
    let mut pyramid = dwt_forward(signal, spec)?;
    let lambda = universal_threshold(mad_sigma(pyramid.finest()), signal.len());
    for band in &mut pyramid.details {
        for c in band.iter_mut() {
            *c = soft_threshold(*c, lambda);
        }
    }
    dwt_inverse(&pyramid)
}
