//! Single-head scaled dot-product self-attention.

use super::gemm::gemm;
use super::layers::softmax_rows;
use crate::error::{Error, Result};

/// Activations needed by [`self_attention_backward`].
#[derive(Debug, Clone)]
pub struct AttentionTrace {
    steps: usize,
    input: usize,
    hidden: usize,
    q: Vec<f64>,
    k: Vec<f64>,
    v: Vec<f64>,
    /// Row-stochastic `T x T` attention weights.
    attn: Vec<f64>,
}

impl AttentionTrace {
    pub fn weights(&self) -> &[f64] {
        &self.attn
    }
}

pub struct AttentionGrads<'a> {
    pub wq: &'a mut [f64],
    pub wk: &'a mut [f64],
    pub wv: &'a mut [f64],
}

/// `softmax_rows((x wq)(x wk)^T / sqrt(H)) (x wv)` for `x (T x C)` and
/// projections `C x H`.
pub fn self_attention(
    x: &[f64],
    steps: usize,
    input: usize,
    wq: &[f64],
    wk: &[f64],
    wv: &[f64],
) -> Result<(Vec<f64>, AttentionTrace)> {
    if steps == 0 || input == 0 || x.len() != steps * input || wq.len() % input != 0 {
        return Err(Error::Shape(format!(
            "attention input of {} values is not {steps} x {input}",
            x.len()
        )));
    }
    let hidden = wq.len() / input;
    if hidden == 0 || wk.len() != wq.len() || wv.len() != wq.len() {
        return Err(Error::Shape("attention projections must all be C x H".into()));
    }
    let proj = |w: &[f64]| {
        let mut out = vec![0.0; steps * hidden];
        gemm(steps, input, hidden, 1.0, x, false, w, false, 0.0, &mut out);
        out
    };
    let (q, k, v) = (proj(wq), proj(wk), proj(wv));
    let mut scores = vec![0.0; steps * steps];
    let scale = 1.0 / (hidden as f64).sqrt();
    gemm(steps, hidden, steps, scale, &q, false, &k, true, 0.0, &mut scores);
    let attn = softmax_rows(&scores, steps);
    let mut out = vec![0.0; steps * hidden];
    gemm(steps, steps, hidden, 1.0, &attn, false, &v, false, 0.0, &mut out);
    Ok((
        out,
        AttentionTrace {
            steps,
            input,
            hidden,
            q,
            k,
            v,
            attn,
        },
    ))
}

/// Accumulates projection gradients and returns `dx (T x C)`.
pub fn self_attention_backward(
    x: &[f64],
    wq: &[f64],
    wk: &[f64],
    wv: &[f64],
    trace: &AttentionTrace,
    d_out: &[f64],
    grads: &mut AttentionGrads,
) -> Vec<f64> {
    let (t, c, h) = (trace.steps, trace.input, trace.hidden);
    let a = &trace.attn;
    // dA = dO V^T, dV = A^T dO
    let mut da = vec![0.0; t * t];
    gemm(t, h, t, 1.0, d_out, false, &trace.v, true, 0.0, &mut da);
    let mut dv = vec![0.0; t * h];
    gemm(t, t, h, 1.0, a, true, d_out, false, 0.0, &mut dv);
    // softmax backward, row by row
    let mut ds = da;
    for (srow, arow) in ds.chunks_exact_mut(t).zip(a.chunks_exact(t)) {
        let inner: f64 = srow.iter().zip(arow).map(|(g, p)| g * p).sum();
        for (g, p) in srow.iter_mut().zip(arow) {
            *g = p * (*g - inner);
        }
    }
    let scale = 1.0 / (h as f64).sqrt();
    let mut dq = vec![0.0; t * h];
    gemm(t, t, h, scale, &ds, false, &trace.k, false, 0.0, &mut dq);
    let mut dk = vec![0.0; t * h];
    gemm(t, t, h, scale, &ds, true, &trace.q, false, 0.0, &mut dk);

    gemm(c, t, h, 1.0, x, true, &dq, false, 1.0, grads.wq);
    gemm(c, t, h, 1.0, x, true, &dk, false, 1.0, grads.wk);
    gemm(c, t, h, 1.0, x, true, &dv, false, 1.0, grads.wv);

    let mut dx = vec![0.0; t * c];
    gemm(t, h, c, 1.0, &dq, false, wq, true, 0.0, &mut dx);
    gemm(t, h, c, 1.0, &dk, false, wk, true, 1.0, &mut dx);
    gemm(t, h, c, 1.0, &dv, false, wv, true, 1.0, &mut dx);
    dx
}
