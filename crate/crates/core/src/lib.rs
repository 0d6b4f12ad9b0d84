//! Self-contained 12-lead ECG classification workbench.
//!
//! The pipeline runs synthetic record generation, wavelet denoising, lead-space
//! PCA, z-score normalization and fixed-length resampling, then trains six
//! neural architectures (CNN, GRU, LSTM, attention, Bi-GRU, Bi-LSTM) with AdamW
//! and a linear SVM baseline, and compares them on a held-out split.

pub mod config;
pub mod data;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod hash;
pub mod nn;
pub mod rng;
pub mod svm;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
