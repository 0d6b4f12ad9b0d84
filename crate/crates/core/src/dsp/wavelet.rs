//! Orthonormal periodized DWT.
//!
//! The input is first extended at the tail by half-sample symmetric reflection
//! up to the next multiple of `2^levels`; each level then applies the analysis
//! filter pair circularly over the padded length. The periodized transform is
//! orthogonal, so the inverse is its transpose and reconstruction is exact up
//! to rounding. `original_length` records how much of the output to keep.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WaveletFamily {
    Haar,
    /// Daubechies with four vanishing moments (8 taps).
    Daubechies4,
}

const HAAR_LO: [f64; 2] = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];

const DB4_LO: [f64; 8] = [
    0.230_377_813_308_855_23,
    0.714_846_570_552_541_5,
    0.630_880_767_929_590_4,
    -0.027_983_769_416_983_85,
    -0.187_034_811_718_881_14,
    0.030_841_381_835_986_965,
    0.032_883_011_666_982_945,
    -0.010_597_401_784_997_278,
];

impl WaveletFamily {
    pub fn lowpass(self) -> &'static [f64] {
        match self {
            WaveletFamily::Haar => &HAAR_LO,
            WaveletFamily::Daubechies4 => &DB4_LO,
        }
    }

    /// Quadrature mirror: `g[n] = (-1)^n h[L-1-n]`.
    pub fn highpass(self) -> Vec<f64> {
        let h = self.lowpass();
        let l = h.len();
        (0..l)
            .map(|n| if n % 2 == 0 { h[l - 1 - n] } else { -h[l - 1 - n] })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WaveletSpec {
    pub family: WaveletFamily,
    pub levels: usize,
}

impl Default for WaveletSpec {
    fn default() -> Self {
        WaveletSpec {
            family: WaveletFamily::Daubechies4,
            levels: 4,
        }
    }
}

impl WaveletSpec {
    pub fn padded_length(&self, n: usize) -> usize {
        let block = 1usize << self.levels;
        n.div_ceil(block) * block
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::InvalidArgument("wavelet levels must be >= 1".into()));
        }
        if self.levels >= usize::BITS as usize - 1 || n < (1usize << self.levels) {
            return Err(Error::InvalidArgument(format!(
                "{} levels too deep for a signal of length {n}",
                self.levels
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPyramid {
    pub approx: Vec<f64>,
    /// Detail bands, coarsest first and finest last.
    pub details: Vec<Vec<f64>>,
    pub original_length: usize,
    pub spec: WaveletSpec,
}

impl CoefficientPyramid {
    pub fn finest(&self) -> &[f64] {
        self.details.last().map(Vec::as_slice).unwrap_or(&[])
    }

    fn check(&self) -> Result<()> {
        let levels = self.spec.levels;
        if levels == 0 || self.details.len() != levels {
            return Err(Error::Shape(format!(
                "pyramid has {} detail bands for {levels} levels",
                self.details.len()
            )));
        }
        let mut expected = self.approx.len();
        if expected == 0 {
            return Err(Error::Shape("empty approximation band".into()));
        }
        for (i, band) in self.details.iter().enumerate() {
            if band.len() != expected {
                return Err(Error::Shape(format!(
                    "detail band {i} has length {}, expected {expected}",
                    band.len()
                )));
            }
            expected = expected
                .checked_mul(2)
                .ok_or_else(|| Error::Shape("band lengths overflow".into()))?;
        }
        if self.original_length == 0 || self.spec.padded_length(self.original_length) != expected {
            return Err(Error::Shape(format!(
                "original length {} inconsistent with padded length {expected}",
                self.original_length
            )));
        }
        Ok(())
    }
}

fn analysis_step(x: &[f64], lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let half = n / 2;
    let mut a = vec![0.0; half];
    let mut d = vec![0.0; half];
    for k in 0..half {
        let mut sa = 0.0;
        let mut sd = 0.0;
        for (j, (&h, &g)) in lo.iter().zip(hi).enumerate() {
            let v = x[(2 * k + j) % n];
            sa += h * v;
            sd += g * v;
        }
        a[k] = sa;
        d[k] = sd;
    }
    (a, d)
}

fn synthesis_step(a: &[f64], d: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let n = a.len() * 2;
    let mut x = vec![0.0; n];
    for k in 0..a.len() {
        for (j, (&h, &g)) in lo.iter().zip(hi).enumerate() {
            x[(2 * k + j) % n] += h * a[k] + g * d[k];
        }
    }
    x
}

pub fn dwt_forward(signal: &[f64], spec: WaveletSpec) -> Result<CoefficientPyramid> {
    let n = signal.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "signal of length {n} is too short for a DWT"
        )));
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("signal contains non-finite values".into()));
    }
    spec.validate(n)?;

    let padded = spec.padded_length(n);
    let mut current = Vec::with_capacity(padded);
    current.extend_from_slice(signal);
    for i in 0..padded - n {
        current.push(signal[n - 1 - i]);
    }

    let lo = spec.family.lowpass();
    let hi = spec.family.highpass();
    let mut details = Vec::with_capacity(spec.levels);
    for _ in 0..spec.levels {
        let (a, d) = analysis_step(&current, lo, &hi);
        details.push(d);
        current = a;
    }
    details.reverse();
    Ok(CoefficientPyramid {
        approx: current,
        details,
        original_length: n,
        spec,
    })
}

pub fn dwt_inverse(pyramid: &CoefficientPyramid) -> Result<Vec<f64>> {
    pyramid.check()?;
    let lo = pyramid.spec.family.lowpass();
    let hi = pyramid.spec.family.highpass();
    let mut current = pyramid.approx.clone();
    for d in &pyramid.details {
        current = synthesis_step(&current, d, lo, &hi);
    }
    current.truncate(pyramid.original_length);
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    const HAAR1: WaveletSpec = WaveletSpec {
        family: WaveletFamily::Haar,
        levels: 1,
    };

    #[test]
    fn filters_are_orthonormal() {
        for fam in [WaveletFamily::Haar, WaveletFamily::Daubechies4] {
            let h = fam.lowpass();
            let g = fam.highpass();
            let norm: f64 = h.iter().map(|v| v * v).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            let sum: f64 = h.iter().sum();
            assert!((sum - std::f64::consts::SQRT_2).abs() < 1e-12);
            let cross: f64 = h.iter().zip(&g).map(|(a, b)| a * b).sum();
            assert!(cross.abs() < 1e-12);
        }
    }

    #[test]
    fn haar_hand_example() {
        let p = dwt_forward(&[1.0, 1.0, 1.0, 1.0], HAAR1).unwrap();
        let r2 = std::f64::consts::SQRT_2;
        assert!(p.approx.iter().all(|v| (v - r2).abs() < 1e-15));
        assert_eq!(p.approx.len(), 2);
        assert_eq!(p.details, vec![vec![0.0, 0.0]]);
        let back = dwt_inverse(&p).unwrap();
        for v in back {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_signal_gives_zero_pyramid() {
        for fam in [WaveletFamily::Haar, WaveletFamily::Daubechies4] {
            let spec = WaveletSpec { family: fam, levels: 3 };
            let p = dwt_forward(&[0.0; 37], spec).unwrap();
            assert!(p.approx.iter().chain(p.details.iter().flatten()).all(|&v| v == 0.0));
            assert_eq!(dwt_inverse(&p).unwrap(), vec![0.0; 37]);
        }
    }

    #[test]
    fn round_trip_random_lengths() {
        let mut rng = Rng::new(11);
        for fam in [WaveletFamily::Haar, WaveletFamily::Daubechies4] {
            for levels in 1..=4 {
                for &n in &[16usize, 17, 63, 512, 1000] {
                    let x: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
                    let spec = WaveletSpec { family: fam, levels };
                    let p = dwt_forward(&x, spec).unwrap();
                    assert_eq!(p.finest().len(), spec.padded_length(n) / 2);
                    let y = dwt_inverse(&p).unwrap();
                    assert_eq!(y.len(), n);
                    let err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    assert!(err < 1e-8, "{fam:?} L{levels} n{n}: {err}");
                }
            }
        }
    }

    #[test]
    fn transform_preserves_energy_on_padded_signal() {
        let mut rng = Rng::new(2);
        let x: Vec<f64> = (0..256).map(|_| rng.normal()).collect();
        let p = dwt_forward(&x, WaveletSpec::default()).unwrap();
        let e_in: f64 = x.iter().map(|v| v * v).sum();
        let e_out: f64 = p.approx.iter().chain(p.details.iter().flatten()).map(|v| v * v).sum();
        assert!((e_in - e_out).abs() < 1e-9 * e_in);
    }

    #[test]
    fn errors() {
        assert!(dwt_forward(&[1.0], HAAR1).is_err());
        assert!(dwt_forward(&[1.0, f64::NAN], HAAR1).is_err());
        let deep = WaveletSpec { family: WaveletFamily::Haar, levels: 4 };
        assert!(dwt_forward(&[1.0; 15], deep).is_err());
        assert!(dwt_forward(&[1.0; 16], deep).is_ok());
        let zero = WaveletSpec { family: WaveletFamily::Haar, levels: 0 };
        assert!(dwt_forward(&[1.0; 4], zero).is_err());

        let mut p = dwt_forward(&[1.0; 16], deep).unwrap();
        p.details[2].pop();
        assert!(matches!(dwt_inverse(&p), Err(Error::Shape(_))));
        let mut q = dwt_forward(&[1.0; 16], deep).unwrap();
        q.original_length = 40;
        assert!(dwt_inverse(&q).is_err());
    }
}
