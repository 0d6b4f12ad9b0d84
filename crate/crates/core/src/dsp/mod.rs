//! Signal conditioning: wavelet denoising, lead-space PCA, z-score
//! normalization and resampling to a fixed number of time steps.

mod denoise;
mod norm;
mod pca;
mod pipeline;
mod resample;
mod wavelet;

pub use denoise::{mad_sigma, soft_threshold, universal_threshold, wavelet_denoise, wavelet_denoise_with};
pub use norm::{apply_norm, fit_norm_stats, NormStats, NORM_EPS};
pub use pca::{fit_pca, pca_back_project, pca_project, CovarianceAccumulator, PcaModel};
pub use pipeline::{
    preprocess_dataset, preprocess_records, Normalization, PreprocessConfig, PreprocessOutput,
    ThresholdMode,
};
pub use resample::resample_to_length;
pub use wavelet::{dwt_forward, dwt_inverse, CoefficientPyramid, WaveletFamily, WaveletSpec};
