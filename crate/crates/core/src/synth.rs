//! Deterministic synthetic 12-lead ECG generator.
//!
//! A beat is a sum of Gaussian bumps (P, Q, R, S, T) on a time axis centred on
//! the R peak. The R width is chosen so the 20%-of-peak crossings of the R bump
//! lie exactly `qrs_duration_ms` apart. Strict LBBB beats additionally have a
//! narrow Gaussian subtracted at the QRS centre, which splits the R wave into
//! two peaks. The heart's electrical axis is a three-component dipole: the
//! full beat drives the first component, while the other two carry only
//! class-specific R and T bumps (same timing and widths). Beats are tiled at
//! the heart rate from a random phase, projected onto the 12 leads by a fixed
//! gain matrix that satisfies the Einthoven and Goldberger relations, and
//! white noise is added. Lead II sees the first component alone. Samples are
//! rounded to 1 uV.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{save_manifest, save_record, ClassLabel, DatasetManifest, EcgRecord, ManifestEntry, NUM_LEADS};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Projection of the three dipole components onto each lead, in standard
/// lead order (I, II, III, aVR, aVL, aVF, V1..V6).
pub const LEAD_GAINS: [[f64; 3]; NUM_LEADS] = [
    [0.6, 0.5, 0.0],
    [1.0, 0.0, 0.0],
    [0.4, -0.5, 0.0],
    [-0.8, -0.25, 0.0],
    [0.1, 0.5, 0.0],
    [0.7, -0.25, 0.0],
    [-0.5, -0.3, 0.6],
    [-0.2, -0.1, 0.9],
    [0.35, 0.2, 0.7],
    [0.8, 0.4, 0.4],
    [0.9, 0.6, 0.1],
    [0.7, 0.7, -0.1],
];

/// 20%-of-peak full width of a Gaussian in units of its sigma: `2 sqrt(2 ln 5)`.
pub fn width_20_sigmas() -> f64 {
    2.0 * (2.0 * 5f64.ln()).sqrt()
}

const BASE_HEART_RATE_BPM: f64 = 72.0;
const NOTCH_DEPTH: f64 = 0.35;
const NOTCH_WIDTH: f64 = 0.1;
const QUANTA_PER_MV: f64 = 1000.0;

/// One Gaussian bump; `width_s` is its standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub amplitude_mv: f64,
    pub center_s: f64,
    pub width_s: f64,
}

impl Wave {
    fn at(&self, t: f64) -> f64 {
        self.amplitude_mv * self.shape(t)
    }

    /// The bump with unit amplitude.
    fn shape(&self, t: f64) -> f64 {
        let z = (t - self.center_s) / self.width_s;
        (-0.5 * z * z).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphologyConfig {
    pub p: Wave,
    pub q: Wave,
    pub r: Wave,
    pub s: Wave,
    pub t: Wave,
    /// R amplitudes on the second and third dipole components (mV).
    pub r_secondary: [f64; 2],
    /// T amplitudes on the second and third dipole components (mV).
    pub t_secondary: [f64; 2],
    pub qrs_duration_ms: f64,
    pub notch: bool,
    pub heart_rate_bpm: f64,
    pub noise_std: f64,
}

/// Per-class QRS duration range sampled by the generator (ms).
pub fn qrs_range_ms(label: ClassLabel) -> (f64, f64) {
    match label {
        ClassLabel::Healthy => (78.0, 96.0),
        ClassLabel::Lbbb => (122.0, 148.0),
        ClassLabel::Slbbb => (142.0, 168.0),
    }
}

impl MorphologyConfig {
    /// Class template with `qrs_duration_ms`, then every amplitude scaled by
    /// `amp_scale` and the rate by `rate_scale`.
    pub fn template(label: ClassLabel, qrs_duration_ms: f64, amp_scale: f64, rate_scale: f64, noise_std: f64) -> Self {
        let q = qrs_duration_ms / 1000.0;
        let half = q / 2.0;
        // (R amplitude, Q amplitude, S amplitude, T amplitude)
        let (ra, qa, sa, ta) = match label {
            ClassLabel::Healthy => (1.1, -0.08, -0.25, 0.50),
            ClassLabel::Lbbb => (1.3, 0.0, -0.15, -0.50),
            ClassLabel::Slbbb => (1.5, 0.0, -0.15, -1.10),
        };
        let (r2, t2) = match label {
            ClassLabel::Healthy => ([0.3, 0.3], [0.0, 0.1]),
            ClassLabel::Lbbb => ([-0.5, 0.3], [0.6, 0.1]),
            ClassLabel::Slbbb => ([-0.5, 0.3], [0.0, 0.1]),
        };
        let wave = |a: f64, c: f64, w: f64| Wave {
            amplitude_mv: a * amp_scale,
            center_s: c,
            width_s: w,
        };
        MorphologyConfig {
            p: wave(0.12, -(half + 0.10), 0.02),
            q: wave(qa, -(half + 0.012), 0.006),
            r: wave(ra, 0.0, q / width_20_sigmas()),
            s: wave(sa, half + 0.02, 0.01),
            t: wave(ta, half + 0.22, 0.08),
            r_secondary: r2.map(|a| a * amp_scale),
            t_secondary: t2.map(|a| a * amp_scale),
            qrs_duration_ms,
            notch: label == ClassLabel::Slbbb,
            heart_rate_bpm: BASE_HEART_RATE_BPM * rate_scale,
            noise_std,
        }
    }

    /// Draws the class morphology: QRS duration uniform in [`qrs_range_ms`],
    /// one amplitude factor and one rate factor uniform in [0.9, 1.1].
    pub fn sample(label: ClassLabel, rng: &mut Rng, noise_std: f64) -> Self {
        let (lo, hi) = qrs_range_ms(label);
        let qrs = rng.uniform_in(lo, hi);
        let amp = rng.uniform_in(0.9, 1.1);
        let rate = rng.uniform_in(0.9, 1.1);
        MorphologyConfig::template(label, qrs, amp, rate, noise_std)
    }

    pub fn validate(&self) -> Result<()> {
        let waves = [self.p, self.q, self.r, self.s, self.t];
        if waves.iter().any(|w| !(w.width_s > 0.0) || !w.amplitude_mv.is_finite() || !w.center_s.is_finite())
            || !self.r_secondary.iter().chain(&self.t_secondary).all(|a| a.is_finite())
        {
            return Err(Error::InvalidArgument("wave widths must be positive and finite".into()));
        }
        if !(self.qrs_duration_ms > 0.0) {
            return Err(Error::InvalidArgument("qrs_duration_ms must be positive".into()));
        }
        if !(40.0..=140.0).contains(&self.heart_rate_bpm) {
            return Err(Error::InvalidArgument(format!(
                "heart rate {} bpm outside 40-140",
                self.heart_rate_bpm
            )));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::InvalidArgument("noise_std must be non-negative".into()));
        }
        Ok(())
    }

    fn notch_wave(&self) -> Wave {
        Wave {
            amplitude_mv: -NOTCH_DEPTH * self.r.amplitude_mv,
            center_s: self.r.center_s,
            width_s: NOTCH_WIDTH * self.qrs_duration_ms / 1000.0,
        }
    }

    /// Noise-free first dipole component `t` seconds after an R peak, which
    /// is also the lead II signal.
    pub fn beat(&self, t: f64) -> f64 {
        self.p.at(t) + self.q.at(t) + self.t.at(t) + self.s.at(t) + self.r_complex(t)
    }

    fn r_complex(&self, t: f64) -> f64 {
        self.r.amplitude_mv * self.r_shape(t)
    }

    /// Unit-amplitude R bump minus the notch, if any.
    fn r_shape(&self, t: f64) -> f64 {
        let mut v = self.r.shape(t);
        if self.notch {
            v -= NOTCH_DEPTH * self.notch_wave().shape(t);
        }
        v
    }

    /// All three dipole components `t` seconds after an R peak.
    pub fn dipole(&self, t: f64) -> [f64; 3] {
        let (r, tw) = (self.r_shape(t), self.t.shape(t));
        [
            self.beat(t),
            self.r_secondary[0] * r + self.t_secondary[0] * tw,
            self.r_secondary[1] * r + self.t_secondary[1] * tw,
        ]
    }

    /// Time span around the R peak outside which every bump is negligible.
    fn support(&self) -> (f64, f64) {
        let waves = [self.p, self.q, self.r, self.s, self.t];
        let lo = waves.iter().map(|w| w.center_s - 6.0 * w.width_s).fold(f64::INFINITY, f64::min);
        let hi = waves.iter().map(|w| w.center_s + 6.0 * w.width_s).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub class_counts: [usize; 3],
    pub fs_hz: f64,
    pub duration_s: f64,
    pub seed: u64,
    pub noise_std: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            class_counts: [299, 192, 301],
            fs_hz: 360.0,
            duration_s: 10.0,
            seed: 0,
            noise_std: 0.05,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fs_hz >= 100.0 && self.fs_hz.is_finite()) {
            return Err(Error::InvalidArgument(format!("fs_hz must be at least 100, got {}", self.fs_hz)));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) || self.num_samples() < 2 {
            return Err(Error::InvalidArgument("duration must cover at least two samples".into()));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::InvalidArgument("noise_std must be non-negative".into()));
        }
        Ok(())
    }

    pub fn num_samples(&self) -> usize {
        (self.fs_hz * self.duration_s).round() as usize
    }
}

/// Seed of the `index`-th record of a dataset generated with `seed`.
pub fn record_seed(seed: u64, index: usize) -> u64 {
    Rng::derive(seed, index as u64).next_u64()
}

/// Draws a morphology for `label` from `seed`, renders it and adds noise.
pub fn generate_record(id: &str, label: ClassLabel, seed: u64, config: &GeneratorConfig) -> Result<EcgRecord> {
    config.validate()?;
    let mut rng = Rng::new(seed);
    let morph = MorphologyConfig::sample(label, &mut rng, config.noise_std);
    let phase = rng.uniform();
    render(id, label, &morph, phase, config, &mut rng)
}

/// Renders `morph` with the first R peak `phase` of an RR interval after the
/// record start, drawing noise from `rng`.
pub fn render(
    id: &str,
    label: ClassLabel,
    morph: &MorphologyConfig,
    phase: f64,
    config: &GeneratorConfig,
    rng: &mut Rng,
) -> Result<EcgRecord> {
    morph.validate()?;
    let n = config.num_samples();
    let fs = config.fs_hz;
    let rr = 60.0 / morph.heart_rate_bpm;
    let (lo, hi) = morph.support();
    let mut source = vec![[0.0; 3]; n];
    let mut k = -((hi / rr).ceil() as i64) - 1;
    loop {
        let peak = (phase + k as f64) * rr;
        if peak + lo > n as f64 / fs {
            break;
        }
        let first = ((peak + lo) * fs).ceil().max(0.0) as usize;
        let last = (((peak + hi) * fs).floor().max(-1.0) + 1.0) as usize;
        for (i, v) in source.iter_mut().enumerate().take(last.min(n)).skip(first) {
            let d = morph.dipole(i as f64 / fs - peak);
            for (acc, x) in v.iter_mut().zip(d) {
                *acc += x;
            }
        }
        k += 1;
    }
    let quantize = |v: f64| (v * QUANTA_PER_MV).round() / QUANTA_PER_MV;
    let samples = source
        .iter()
        .map(|s| {
            let mut row = [0.0; NUM_LEADS];
            for (v, g) in row.iter_mut().zip(LEAD_GAINS) {
                let noise = if morph.noise_std > 0.0 { morph.noise_std * rng.normal() } else { 0.0 };
                *v = quantize(g[0] * s[0] + g[1] * s[1] + g[2] * s[2] + noise);
            }
            row
        })
        .collect();
    EcgRecord::new(id, fs, samples, label)
}

fn record_name(label: ClassLabel, index: usize) -> String {
    let prefix = match label {
        ClassLabel::Healthy => "healthy",
        ClassLabel::Lbbb => "lbbb",
        ClassLabel::Slbbb => "slbbb",
    };
    format!("{prefix}_{index:04}")
}

/// Writes `records/<class>_<nnnn>.csv` for every requested record plus
/// `manifest.json` under `out_dir`. Records are numbered globally in class
/// order and record `i` uses [`record_seed`]`(config.seed, i)`.
pub fn generate_dataset(config: &GeneratorConfig, out_dir: impl AsRef<Path>) -> Result<DatasetManifest> {
    config.validate()?;
    let out_dir = out_dir.as_ref();
    let rec_dir = out_dir.join("records");
    fs::create_dir_all(&rec_dir).map_err(|e| Error::io(&rec_dir, e))?;
    let mut entries = Vec::new();
    let mut index = 0;
    for label in ClassLabel::ALL {
        for _ in 0..config.class_counts[label.index()] {
            let name = record_name(label, index);
            let record = generate_record(&name, label, record_seed(config.seed, index), config)?;
            let rel = format!("records/{name}.csv");
            save_record(&record, out_dir.join(&rel))?;
            entries.push(ManifestEntry { path: rel, label });
            index += 1;
        }
    }
    let manifest = DatasetManifest::new(entries, out_dir)?;
    save_manifest(&manifest, out_dir.join("manifest.json"))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> GeneratorConfig {
        GeneratorConfig {
            noise_std: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_and_bounded() {
        let cfg = GeneratorConfig::default();
        for label in ClassLabel::ALL {
            let a = generate_record("r", label, 42, &cfg).unwrap();
            let b = generate_record("r", label, 42, &cfg).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), 3600);
            assert!(a.samples.iter().flatten().all(|v| v.is_finite() && v.abs() <= 5.0));
            assert_ne!(a, generate_record("r", label, 43, &cfg).unwrap());
        }
    }

    #[test]
    fn r_bump_width_matches_duration() {
        let m = MorphologyConfig::template(ClassLabel::Lbbb, 130.0, 1.0, 1.0, 0.0);
        let half = 0.065;
        assert!((m.r.at(half) / m.r.amplitude_mv - 0.2).abs() < 1e-7);
        assert!((m.r.at(-half) / m.r.amplitude_mv - 0.2).abs() < 1e-7);
    }

    #[test]
    fn morphology_validation() {
        let mut m = MorphologyConfig::template(ClassLabel::Healthy, 90.0, 1.0, 1.0, 0.0);
        m.validate().unwrap();
        m.heart_rate_bpm = 150.0;
        assert!(m.validate().is_err());
        let mut m = MorphologyConfig::template(ClassLabel::Healthy, 90.0, 1.0, 1.0, 0.0);
        m.t.width_s = 0.0;
        assert!(m.validate().is_err());
        assert!(GeneratorConfig { fs_hz: 50.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn sampled_parameters_respect_class_rules() {
        let mut rng = Rng::new(9);
        for _ in 0..200 {
            for label in ClassLabel::ALL {
                let m = MorphologyConfig::sample(label, &mut rng, 0.05);
                let (lo, hi) = match label {
                    ClassLabel::Healthy => (70.0, 100.0),
                    ClassLabel::Lbbb => (120.0, 150.0),
                    ClassLabel::Slbbb => (140.0, 170.0),
                };
                assert!((lo..=hi).contains(&m.qrs_duration_ms));
                assert_eq!(m.notch, label == ClassLabel::Slbbb);
                assert!((64.8..=79.2).contains(&m.heart_rate_bpm));
            }
        }
    }

    #[test]
    fn small_dataset_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = GeneratorConfig {
            class_counts: [2, 2, 2],
            duration_s: 2.0,
            ..quiet()
        };
        let m = generate_dataset(&cfg, dir.path()).unwrap();
        assert_eq!(m.class_counts, [2, 2, 2]);
        let loaded = crate::data::load_manifest(dir.path().join("manifest.json")).unwrap();
        assert_eq!(loaded.entries, m.entries);
        for i in 0..loaded.len() {
            let r = crate::data::load_record(loaded.record_path(i)).unwrap();
            assert_eq!(r.label, loaded.entries[i].label);
        }
    }
}
