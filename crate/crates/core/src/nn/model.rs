//! Architecture wiring for the six classifiers.
//!
//! Every model maps one `T x C` sample to a feature vector and then applies a
//! dense head `F -> 3`. Batches are processed sample by sample and gradients
//! are accumulated in batch order, so results do not depend on threading.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::attention::{self_attention, self_attention_backward, AttentionGrads, AttentionTrace};
use super::layers::{
    conv1d_backward, conv1d_forward, dense_backward, dense_forward, maxpool1d, maxpool1d_backward,
    softmax_cross_entropy,
};
use super::recurrent::{
    backward_recurrent, run_recurrent, CellGrads, CellKind, CellWeights, Direction, SequenceTrace,
};
use super::tensor::{ParamSet, Tensor};
use crate::data::NUM_CLASSES;
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE", try_from = "String")]
pub enum ModelKind {
    Cnn,
    Gru,
    Lstm,
    Attn,
    Bigru,
    Bilstm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Cnn,
        ModelKind::Gru,
        ModelKind::Lstm,
        ModelKind::Attn,
        ModelKind::Bigru,
        ModelKind::Bilstm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Cnn => "CNN",
            ModelKind::Gru => "GRU",
            ModelKind::Lstm => "LSTM",
            ModelKind::Attn => "ATTN",
            ModelKind::Bigru => "BIGRU",
            ModelKind::Bilstm => "BILSTM",
        }
    }

    fn cell(self) -> Option<CellKind> {
        match self {
            ModelKind::Gru | ModelKind::Bigru => Some(CellKind::Gru),
            ModelKind::Lstm | ModelKind::Bilstm => Some(CellKind::Lstm),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.to_ascii_uppercase().replace(['-', '_'], "");
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == upper)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model kind {s:?}")))
    }
}

impl TryFrom<String> for ModelKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

pub const DEFAULT_HIDDEN: usize = 64;
pub const DEFAULT_CONV_CHANNELS: [usize; 2] = [16, 32];
pub const DEFAULT_KERNELS: [usize; 2] = [7, 5];

/// Architecture hyperparameters. `hidden` is the recurrent state size or the
/// attention width; `conv_channels` and `kernels` describe the two CNN blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub input_t: usize,
    pub input_c: usize,
    pub hidden: usize,
    pub conv_channels: [usize; 2],
    pub kernels: [usize; 2],
    pub classes: usize,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, input_t: usize, input_c: usize) -> Self {
        ModelSpec {
            kind,
            input_t,
            input_c,
            hidden: DEFAULT_HIDDEN,
            conv_channels: DEFAULT_CONV_CHANNELS,
            kernels: DEFAULT_KERNELS,
            classes: NUM_CLASSES,
        }
    }

    pub fn with_hidden(mut self, hidden: usize) -> Self {
        self.hidden = hidden;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.input_t == 0 || self.input_c == 0 {
            return bad(format!("input must be non-empty, got {}x{}", self.input_t, self.input_c));
        }
        if self.hidden == 0 {
            return bad("hidden size must be at least 1".into());
        }
        if self.classes != NUM_CLASSES {
            return bad(format!("classes must be {NUM_CLASSES}, got {}", self.classes));
        }
        if self.conv_channels.contains(&0) {
            return bad("conv channels must be at least 1".into());
        }
        if self.kernels.iter().any(|k| k % 2 == 0) {
            return bad(format!("kernel widths must be odd, got {:?}", self.kernels));
        }
        Ok(())
    }

    /// Length of the vector fed to the dense head.
    pub fn feature_dim(&self) -> usize {
        match self.kind {
            ModelKind::Cnn => self.conv_channels[1],
            ModelKind::Bigru | ModelKind::Bilstm => 2 * self.hidden,
            _ => self.hidden,
        }
    }

    /// Parameter names and shapes in name order.
    pub fn param_shapes(&self) -> Vec<(String, Vec<usize>)> {
        let (c, h) = (self.input_c, self.hidden);
        let mut out: Vec<(String, Vec<usize>)> = Vec::new();
        let mut add = |name: &str, shape: Vec<usize>| out.push((name.to_string(), shape));
        match self.kind {
            ModelKind::Cnn => {
                let [k1, k2] = self.conv_channels;
                let [w1, w2] = self.kernels;
                add("conv1.w", vec![k1, c, w1]);
                add("conv1.b", vec![k1]);
                add("conv2.w", vec![k2, k1, w2]);
                add("conv2.b", vec![k2]);
            }
            ModelKind::Attn => {
                add("embed.w", vec![c, h]);
                add("embed.b", vec![h]);
                for p in ["attn.wq", "attn.wk", "attn.wv"] {
                    add(p, vec![h, h]);
                }
            }
            kind => {
                let g = kind.cell().expect("recurrent kind").gates() * h;
                for prefix in cell_prefixes(kind) {
                    add(&format!("{prefix}.wx"), vec![c, g]);
                    add(&format!("{prefix}.uh"), vec![h, g]);
                    add(&format!("{prefix}.b"), vec![g]);
                }
            }
        }
        add("head.w", vec![self.feature_dim(), self.classes]);
        add("head.b", vec![self.classes]);
        out.sort();
        out
    }

    pub fn num_params(&self) -> usize {
        self.param_shapes().iter().map(|(_, s)| s.iter().product::<usize>()).sum()
    }

    /// Checks that `params` has exactly this spec's names and shapes.
    pub fn check_params(&self, params: &ParamSet) -> Result<()> {
        let expected = self.param_shapes();
        let matches = params.entries().len() == expected.len()
            && params
                .entries()
                .iter()
                .zip(&expected)
                .all(|(e, (n, s))| &e.name == n && &e.shape == s);
        if !matches {
            return Err(Error::Shape(format!(
                "parameter set does not match the {} spec",
                self.kind
            )));
        }
        Ok(())
    }
}

fn cell_prefixes(kind: ModelKind) -> &'static [&'static str] {
    match kind {
        ModelKind::Gru => &["gru"],
        ModelKind::Lstm => &["lstm"],
        ModelKind::Bigru => &["gru_fwd", "gru_bwd"],
        ModelKind::Bilstm => &["lstm_fwd", "lstm_bwd"],
        _ => &[],
    }
}

/// Glorot fan sizes: `[D, K]` dense and recurrent matrices use `(D, K)`,
/// `[K, C, k]` kernels use `(C k, K k)`.
fn fans(shape: &[usize]) -> (usize, usize) {
    match shape {
        [d, k] => (*d, *k),
        [k, c, w] => (c * w, k * w),
        _ => (1, 1),
    }
}

/// Glorot-uniform weights drawn on `(-a, a)`, zero biases, LSTM forget-gate
/// biases set to 1. Tensors are filled in name order from one seeded stream.
pub fn init_params(spec: &ModelSpec, seed: u64) -> Result<ParamSet> {
    spec.validate()?;
    let mut rng = Rng::new(seed);
    let mut tensors = Vec::new();
    for (name, shape) in spec.param_shapes() {
        let mut t = Tensor::zeros(shape.clone());
        if name.ends_with(".b") {
            if name.starts_with("lstm") {
                let h = spec.hidden;
                t.values_mut()[h..2 * h].fill(1.0);
            }
        } else {
            let (fan_in, fan_out) = fans(&shape);
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for v in t.values_mut() {
                let u = loop {
                    let u = rng.uniform();
                    if u > 0.0 {
                        break u;
                    }
                };
                *v = a * (2.0 * u - 1.0);
            }
        }
        tensors.push((name, t));
    }
    ParamSet::from_tensors(tensors)
}

#[derive(Debug, Clone)]
enum Body {
    Cnn {
        a1: Vec<f64>,
        arg1: Vec<usize>,
        p1: Vec<f64>,
        a2: Vec<f64>,
        arg2: Vec<usize>,
    },
    Recurrent(Vec<SequenceTrace>),
    Attn {
        embed: Vec<f64>,
        attn: AttentionTrace,
    },
}

#[derive(Debug, Clone)]
struct SampleTrace {
    x: Vec<f64>,
    body: Body,
    feat: Vec<f64>,
}

/// Activations of one batch forward pass. [`model_backward`] takes it by
/// value, so each trace backs exactly one backward pass.
#[derive(Debug)]
pub struct ForwardTrace {
    kind: ModelKind,
    samples: Vec<SampleTrace>,
}

impl ForwardTrace {
    pub fn batch_size(&self) -> usize {
        self.samples.len()
    }
}

fn cell_weights<'a>(spec: &ModelSpec, params: &'a ParamSet, prefix: &str) -> CellWeights<'a> {
    CellWeights {
        kind: spec.kind.cell().expect("recurrent kind"),
        input: spec.input_c,
        hidden: spec.hidden,
        wx: params.req(&format!("{prefix}.wx")),
        uh: params.req(&format!("{prefix}.uh")),
        b: params.req(&format!("{prefix}.b")),
    }
}

fn relu_in_place(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

fn relu_mask(dz: &mut [f64], activated: &[f64]) {
    for (g, a) in dz.iter_mut().zip(activated) {
        if *a <= 0.0 {
            *g = 0.0;
        }
    }
}

fn time_mean(x: &[f64], steps: usize, channels: usize) -> Vec<f64> {
    let mut out = vec![0.0; channels];
    for row in x.chunks_exact(channels) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    for o in &mut out {
        *o /= steps as f64;
    }
    out
}

fn forward_sample(spec: &ModelSpec, params: &ParamSet, x: &[f64]) -> Result<(Vec<f64>, SampleTrace)> {
    let (t, c) = (spec.input_t, spec.input_c);
    let (body, feat) = match spec.kind {
        ModelKind::Cnn => {
            let [k1, k2] = spec.conv_channels;
            let [w1, w2] = spec.kernels;
            let mut a1 = conv1d_forward(x, t, c, params.req("conv1.w"), w1, params.req("conv1.b"))?;
            relu_in_place(&mut a1);
            let (p1, arg1) = maxpool1d(&a1, t, k1);
            let t1 = t.div_ceil(2);
            let mut a2 = conv1d_forward(&p1, t1, k1, params.req("conv2.w"), w2, params.req("conv2.b"))?;
            relu_in_place(&mut a2);
            let (p2, arg2) = maxpool1d(&a2, t1, k2);
            let feat = time_mean(&p2, t1.div_ceil(2), k2);
            (Body::Cnn { a1, arg1, p1, a2, arg2 }, feat)
        }
        ModelKind::Attn => {
            let embed = dense_forward(x, t, params.req("embed.w"), params.req("embed.b"))?;
            let (out, attn) = self_attention(
                &embed,
                t,
                spec.hidden,
                params.req("attn.wq"),
                params.req("attn.wk"),
                params.req("attn.wv"),
            )?;
            let feat = time_mean(&out, t, spec.hidden);
            (Body::Attn { embed, attn }, feat)
        }
        kind => {
            let mut traces = Vec::with_capacity(2);
            let mut feat = Vec::with_capacity(spec.feature_dim());
            for (prefix, dir) in cell_prefixes(kind).iter().zip([Direction::Forward, Direction::Backward]) {
                let (out, trace) = run_recurrent(&cell_weights(spec, params, prefix), x, t, dir)?;
                feat.extend_from_slice(&out.final_h);
                traces.push(trace);
            }
            (Body::Recurrent(traces), feat)
        }
    };
    let logits = dense_forward(&feat, 1, params.req("head.w"), params.req("head.b"))?;
    Ok((
        logits,
        SampleTrace {
            x: x.to_vec(),
            body,
            feat,
        },
    ))
}

fn backward_sample(spec: &ModelSpec, params: &ParamSet, trace: &SampleTrace, dlogits: &[f64], grads: &mut ParamSet) {
    let (t, c) = (spec.input_t, spec.input_c);
    let dfeat = {
        let [hw, hb] = grads.slices_mut(["head.w", "head.b"]);
        dense_backward(&trace.feat, 1, params.req("head.w"), dlogits, hw, hb)
    };
    match &trace.body {
        Body::Cnn { a1, arg1, p1, a2, arg2 } => {
            let [k1, k2] = spec.conv_channels;
            let [w1, w2] = spec.kernels;
            let t1 = t.div_ceil(2);
            let t2 = t1.div_ceil(2);
            let mut dp2 = Vec::with_capacity(t2 * k2);
            for _ in 0..t2 {
                dp2.extend(dfeat.iter().map(|g| g / t2 as f64));
            }
            let mut dz2 = maxpool1d_backward(&dp2, arg2, t1, k2);
            relu_mask(&mut dz2, a2);
            let mut dp1 = vec![0.0; t1 * k1];
            {
                let [w, b] = grads.slices_mut(["conv2.w", "conv2.b"]);
                conv1d_backward(p1, t1, k1, params.req("conv2.w"), w2, &dz2, w, b, Some(&mut dp1));
            }
            let mut dz1 = maxpool1d_backward(&dp1, arg1, t, k1);
            relu_mask(&mut dz1, a1);
            let [w, b] = grads.slices_mut(["conv1.w", "conv1.b"]);
            conv1d_backward(&trace.x, t, c, params.req("conv1.w"), w1, &dz1, w, b, None);
        }
        Body::Attn { embed, attn } => {
            let h = spec.hidden;
            let mut d_out = Vec::with_capacity(t * h);
            for _ in 0..t {
                d_out.extend(dfeat.iter().map(|g| g / t as f64));
            }
            let d_embed = {
                let [wq, wk, wv] = grads.slices_mut(["attn.wq", "attn.wk", "attn.wv"]);
                self_attention_backward(
                    embed,
                    params.req("attn.wq"),
                    params.req("attn.wk"),
                    params.req("attn.wv"),
                    attn,
                    &d_out,
                    &mut AttentionGrads { wq, wk, wv },
                )
            };
            let [w, b] = grads.slices_mut(["embed.w", "embed.b"]);
            dense_backward(&trace.x, t, params.req("embed.w"), &d_embed, w, b);
        }
        Body::Recurrent(traces) => {
            let h = spec.hidden;
            for (i, (prefix, seq)) in cell_prefixes(spec.kind).iter().zip(traces).enumerate() {
                let names = [format!("{prefix}.wx"), format!("{prefix}.uh"), format!("{prefix}.b")];
                let [wx, uh, b] = grads.slices_mut([&names[0], &names[1], &names[2]].map(String::as_str));
                backward_recurrent(
                    &cell_weights(spec, params, prefix),
                    &trace.x,
                    seq,
                    &dfeat[i * h..(i + 1) * h],
                    None,
                    &mut CellGrads { wx, uh, b },
                );
            }
        }
    }
}

fn check_batch(spec: &ModelSpec, params: &ParamSet, batch: &[f64]) -> Result<usize> {
    spec.validate()?;
    spec.check_params(params)?;
    let per = spec.input_t * spec.input_c;
    if batch.is_empty() || batch.len() % per != 0 {
        return Err(Error::Shape(format!(
            "batch of {} values is not a multiple of {}x{}",
            batch.len(),
            spec.input_t,
            spec.input_c
        )));
    }
    Ok(batch.len() / per)
}

/// Logits `B x 3` for a flat `B x T x C` batch, plus the trace for backward.
pub fn model_forward(spec: &ModelSpec, params: &ParamSet, batch: &[f64]) -> Result<(Vec<f64>, ForwardTrace)> {
    let b = check_batch(spec, params, batch)?;
    let per = batch.len() / b;
    let mut logits = Vec::with_capacity(b * spec.classes);
    let mut samples = Vec::with_capacity(b);
    for x in batch.chunks_exact(per) {
        let (l, s) = forward_sample(spec, params, x)?;
        logits.extend(l);
        samples.push(s);
    }
    Ok((
        logits,
        ForwardTrace {
            kind: spec.kind,
            samples,
        },
    ))
}

/// Gradients of `sum(dlogits * logits)` with respect to every parameter.
pub fn model_backward(
    spec: &ModelSpec,
    params: &ParamSet,
    trace: ForwardTrace,
    dlogits: &[f64],
) -> Result<ParamSet> {
    spec.check_params(params)?;
    if trace.kind != spec.kind || dlogits.len() != trace.samples.len() * spec.classes {
        return Err(Error::Shape(format!(
            "trace for {} x{} does not match {} with {} logits",
            trace.kind,
            trace.samples.len(),
            spec.kind,
            dlogits.len()
        )));
    }
    let mut grads = params.zeros_like();
    for (s, d) in trace.samples.iter().zip(dlogits.chunks_exact(spec.classes)) {
        backward_sample(spec, params, s, d, &mut grads);
    }
    Ok(grads)
}

/// Mean cross-entropy over the batch and its parameter gradient. Each sample
/// is run forward and backward before the next, which keeps memory flat.
pub fn batch_loss_and_grads(
    spec: &ModelSpec,
    params: &ParamSet,
    batch: &[f64],
    labels: &[usize],
) -> Result<(f64, ParamSet)> {
    let b = check_batch(spec, params, batch)?;
    if labels.len() != b {
        return Err(Error::Shape(format!("{} labels for a batch of {b}", labels.len())));
    }
    let per = batch.len() / b;
    let inv_b = 1.0 / b as f64;
    let mut grads = params.zeros_like();
    let mut loss = 0.0;
    for (x, &label) in batch.chunks_exact(per).zip(labels) {
        let (logits, trace) = forward_sample(spec, params, x)?;
        let (l, mut d) = softmax_cross_entropy(&logits, &[label])?;
        loss += l;
        for g in &mut d {
            *g *= inv_b;
        }
        backward_sample(spec, params, &trace, &d, &mut grads);
    }
    Ok((loss * inv_b, grads))
}

/// Logits of a single `T x C` sample.
pub fn sample_logits(spec: &ModelSpec, params: &ParamSet, x: &[f64]) -> Result<Vec<f64>> {
    check_batch(spec, params, x)?;
    if x.len() != spec.input_t * spec.input_c {
        return Err(Error::Shape("expected exactly one sample".into()));
    }
    Ok(forward_sample(spec, params, x)?.0)
}

/// Arg-max class of a single sample; ties go to the lower class index.
pub fn predict_sample(spec: &ModelSpec, params: &ParamSet, x: &[f64]) -> Result<usize> {
    let logits = sample_logits(spec, params, x)?;
    Ok(argmax(&logits))
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ModelKind) -> ModelSpec {
        ModelSpec {
            conv_channels: [4, 6],
            kernels: [3, 3],
            ..ModelSpec::new(kind, 16, 3).with_hidden(8)
        }
    }

    fn batch(n: usize, spec: &ModelSpec, seed: u64) -> Vec<f64> {
        let mut rng = Rng::new(seed);
        (0..n * spec.input_t * spec.input_c).map(|_| rng.normal()).collect()
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        for kind in ModelKind::ALL {
            let spec = small(kind);
            let a = init_params(&spec, 9).unwrap();
            assert_eq!(a, init_params(&spec, 9).unwrap());
            assert_ne!(a, init_params(&spec, 10).unwrap());
            for (e, v) in a.iter() {
                if e.is_bias() {
                    let forget = e.name.starts_with("lstm");
                    for (i, b) in v.iter().enumerate() {
                        let expect = if forget && (spec.hidden..2 * spec.hidden).contains(&i) { 1.0 } else { 0.0 };
                        assert_eq!(*b, expect, "{}", e.name);
                    }
                } else {
                    let (fi, fo) = fans(&e.shape);
                    let bound = (6.0 / (fi + fo) as f64).sqrt();
                    assert!(v.iter().all(|w| w.abs() < bound), "{}", e.name);
                }
            }
        }
    }

    #[test]
    fn default_shapes() {
        let spec = ModelSpec::new(ModelKind::Bilstm, 512, 3);
        let p = init_params(&spec, 0).unwrap();
        assert_eq!(p.entry("lstm_fwd.wx").unwrap().shape, vec![3, 256]);
        assert_eq!(p.entry("head.w").unwrap().shape, vec![128, 3]);
        let cnn = ModelSpec::new(ModelKind::Cnn, 512, 3);
        let p = init_params(&cnn, 0).unwrap();
        assert_eq!(p.entry("conv1.w").unwrap().shape, vec![16, 3, 7]);
        assert_eq!(p.entry("conv2.w").unwrap().shape, vec![32, 16, 5]);
    }

    #[test]
    fn spec_validation() {
        let mut s = small(ModelKind::Cnn);
        s.kernels = [4, 3];
        assert!(s.validate().is_err());
        let s = small(ModelKind::Gru).with_hidden(0);
        assert!(init_params(&s, 0).is_err());
        let mut s = small(ModelKind::Gru);
        s.classes = 2;
        assert!(s.validate().is_err());
        assert_eq!("bi-lstm".parse::<ModelKind>().unwrap(), ModelKind::Bilstm);
        assert!("mlp".parse::<ModelKind>().is_err());
        assert_eq!(serde_json::to_string(&ModelKind::Attn).unwrap(), "\"ATTN\"");
    }

    #[test]
    fn logits_shape_purity_and_batch_independence() {
        for kind in ModelKind::ALL {
            let spec = small(kind);
            let p = init_params(&spec, 1).unwrap();
            let x = batch(4, &spec, 2);
            let (l1, _) = model_forward(&spec, &p, &x).unwrap();
            let (l2, _) = model_forward(&spec, &p, &x).unwrap();
            assert_eq!(l1.len(), 12);
            assert!(l1.iter().all(|v| v.is_finite()));
            assert_eq!(l1, l2);

            let per = spec.input_t * spec.input_c;
            let mut doubled = x.clone();
            doubled.extend_from_slice(&x);
            let (ld, _) = model_forward(&spec, &p, &doubled).unwrap();
            assert_eq!(&ld[..12], &l1[..]);
            assert_eq!(&ld[12..], &l1[..]);

            let order = [2usize, 0, 3, 1];
            let permuted: Vec<f64> = order.iter().flat_map(|&i| x[i * per..(i + 1) * per].to_vec()).collect();
            let (lp, _) = model_forward(&spec, &p, &permuted).unwrap();
            for (row, &i) in order.iter().enumerate() {
                assert_eq!(&lp[row * 3..row * 3 + 3], &l1[i * 3..i * 3 + 3]);
            }
        }
    }

    #[test]
    fn batch_helper_agrees_with_trace_path() {
        for kind in ModelKind::ALL {
            let spec = small(kind);
            let p = init_params(&spec, 3).unwrap();
            let x = batch(3, &spec, 4);
            let labels = [0, 2, 1];
            let (logits, trace) = model_forward(&spec, &p, &x).unwrap();
            let (loss, d) = softmax_cross_entropy(&logits, &labels).unwrap();
            let g = model_backward(&spec, &p, trace, &d).unwrap();
            let (loss2, g2) = batch_loss_and_grads(&spec, &p, &x, &labels).unwrap();
            assert!((loss - loss2).abs() < 1e-12);
            for (a, b) in g.values().iter().zip(g2.values()) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn shape_errors() {
        let spec = small(ModelKind::Gru);
        let p = init_params(&spec, 0).unwrap();
        assert!(model_forward(&spec, &p, &[0.0; 5]).is_err());
        let other = init_params(&small(ModelKind::Lstm), 0).unwrap();
        assert!(model_forward(&spec, &other, &batch(1, &spec, 0)).is_err());
        let (_, trace) = model_forward(&spec, &p, &batch(2, &spec, 0)).unwrap();
        assert!(model_backward(&spec, &p, trace, &[0.0; 3]).is_err());
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[1.0, 1.0, 0.5]), 0);
        assert_eq!(argmax(&[0.0, 2.0, 2.0]), 1);
    }
}
