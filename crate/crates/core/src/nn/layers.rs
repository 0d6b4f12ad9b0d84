//! Building blocks shared by the architectures. Backward functions accumulate
//! (`+=`) into parameter gradients and return or fill input gradients.

use crate::error::{Error, Result};

fn shape_err(what: &str, detail: String) -> Error {
    Error::Shape(format!("{what}: {detail}"))
}

/// `x (B x D) * w (D x K) + bias`.
pub fn dense_forward(x: &[f64], batch: usize, w: &[f64], bias: &[f64]) -> Result<Vec<f64>> {
    let k = bias.len();
    if batch == 0 || x.len() % batch != 0 || k == 0 {
        return Err(shape_err("dense", format!("{} inputs for batch {batch}", x.len())));
    }
    let d = x.len() / batch;
    if w.len() != d * k {
        return Err(shape_err("dense", format!("weight has {} values, expected {d}x{k}", w.len())));
    }
    let mut y = Vec::with_capacity(batch * k);
    for row in x.chunks_exact(d) {
        let start = y.len();
        y.extend_from_slice(bias);
        let out = &mut y[start..];
        for (xi, wrow) in row.iter().zip(w.chunks_exact(k)) {
            for (o, wv) in out.iter_mut().zip(wrow) {
                *o += xi * wv;
            }
        }
    }
    Ok(y)
}

/// Returns `dx`; accumulates `dw += x^T dy` and `db += colsum(dy)`.
pub fn dense_backward(
    x: &[f64],
    batch: usize,
    w: &[f64],
    dy: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
) -> Vec<f64> {
    let k = db.len();
    let d = x.len() / batch;
    debug_assert_eq!(dy.len(), batch * k);
    debug_assert_eq!(dw.len(), d * k);
    let mut dx = vec![0.0; batch * d];
    for ((xrow, dyrow), dxrow) in x.chunks_exact(d).zip(dy.chunks_exact(k)).zip(dx.chunks_exact_mut(d)) {
        for (b, g) in db.iter_mut().zip(dyrow) {
            *b += g;
        }
        for ((xi, wrow), (dwrow, dxi)) in xrow
            .iter()
            .zip(w.chunks_exact(k))
            .zip(dw.chunks_exact_mut(k).zip(dxrow.iter_mut()))
        {
            let mut acc = 0.0;
            for ((dwv, wv), g) in dwrow.iter_mut().zip(wrow).zip(dyrow) {
                *dwv += xi * g;
                acc += wv * g;
            }
            *dxi = acc;
        }
    }
    dx
}

/// Same-padded 1-D cross-correlation of `x (T x C)` with `w (K x C x k)`.
pub fn conv1d_forward(
    x: &[f64],
    steps: usize,
    channels: usize,
    w: &[f64],
    kernel: usize,
    bias: &[f64],
) -> Result<Vec<f64>> {
    let out_ch = bias.len();
    if kernel % 2 == 0 {
        return Err(shape_err("conv1d", format!("kernel width {kernel} must be odd")));
    }
    if x.len() != steps * channels || w.len() != out_ch * channels * kernel {
        return Err(shape_err(
            "conv1d",
            format!(
                "input {} for {steps}x{channels}, weight {} for {out_ch}x{channels}x{kernel}",
                x.len(),
                w.len()
            ),
        ));
    }
    let wt = transpose_kernel(w, out_ch, channels, kernel);
    let pad = kernel / 2;
    let mut y = Vec::with_capacity(steps * out_ch);
    for t in 0..steps {
        let start = y.len();
        y.extend_from_slice(bias);
        let out = &mut y[start..];
        for j in 0..kernel {
            let Some(src) = (t + j).checked_sub(pad).filter(|&s| s < steps) else {
                continue;
            };
            let xrow = &x[src * channels..(src + 1) * channels];
            let wj = &wt[j * channels * out_ch..(j + 1) * channels * out_ch];
            for (xv, wrow) in xrow.iter().zip(wj.chunks_exact(out_ch)) {
                for (o, wv) in out.iter_mut().zip(wrow) {
                    *o += xv * wv;
                }
            }
        }
    }
    Ok(y)
}

/// `[K][C][k]` to `[k][C][K]` so the output-channel loop is contiguous.
fn transpose_kernel(w: &[f64], out_ch: usize, channels: usize, kernel: usize) -> Vec<f64> {
    let mut wt = vec![0.0; w.len()];
    for o in 0..out_ch {
        for c in 0..channels {
            for j in 0..kernel {
                wt[(j * channels + c) * out_ch + o] = w[(o * channels + c) * kernel + j];
            }
        }
    }
    wt
}

#[allow(clippy::too_many_arguments)]
pub fn conv1d_backward(
    x: &[f64],
    steps: usize,
    channels: usize,
    w: &[f64],
    kernel: usize,
    dy: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
    mut dx: Option<&mut [f64]>,
) {
    let out_ch = db.len();
    let pad = kernel / 2;
    let wt = transpose_kernel(w, out_ch, channels, kernel);
    let mut dwt = vec![0.0; w.len()];
    for t in 0..steps {
        let g = &dy[t * out_ch..(t + 1) * out_ch];
        for (b, gv) in db.iter_mut().zip(g) {
            *b += gv;
        }
        for j in 0..kernel {
            let Some(src) = (t + j).checked_sub(pad).filter(|&s| s < steps) else {
                continue;
            };
            let xrow = &x[src * channels..(src + 1) * channels];
            let base = j * channels * out_ch;
            for c in 0..channels {
                let wrow = &wt[base + c * out_ch..base + (c + 1) * out_ch];
                let dwrow = &mut dwt[base + c * out_ch..base + (c + 1) * out_ch];
                let xv = xrow[c];
                let mut acc = 0.0;
                for ((dwv, wv), gv) in dwrow.iter_mut().zip(wrow).zip(g) {
                    *dwv += xv * gv;
                    acc += wv * gv;
                }
                if let Some(dx) = dx.as_deref_mut() {
                    dx[src * channels + c] += acc;
                }
            }
        }
    }
    for o in 0..out_ch {
        for c in 0..channels {
            for j in 0..kernel {
                dw[(o * channels + c) * kernel + j] += dwt[(j * channels + c) * out_ch + o];
            }
        }
    }
}

/// Width-2, stride-2 max pooling over time on `x (T x K)`. An odd final row
/// passes through. Returns the pooled rows and, per output value, the source
/// row index (ties resolve to the earlier row).
pub fn maxpool1d(x: &[f64], steps: usize, channels: usize) -> (Vec<f64>, Vec<usize>) {
    let out_steps = steps.div_ceil(2);
    let mut y = Vec::with_capacity(out_steps * channels);
    let mut arg = Vec::with_capacity(out_steps * channels);
    for o in 0..out_steps {
        let a = 2 * o;
        for c in 0..channels {
            let va = x[a * channels + c];
            if a + 1 < steps && x[(a + 1) * channels + c] > va {
                y.push(x[(a + 1) * channels + c]);
                arg.push(a + 1);
            } else {
                y.push(va);
                arg.push(a);
            }
        }
    }
    (y, arg)
}

pub fn maxpool1d_backward(dy: &[f64], argmax: &[usize], steps: usize, channels: usize) -> Vec<f64> {
    let mut dx = vec![0.0; steps * channels];
    for (i, (&g, &src)) in dy.iter().zip(argmax).enumerate() {
        dx[src * channels + i % channels] += g;
    }
    dx
}

/// Numerically stable row softmax.
pub fn softmax_rows(logits: &[f64], cols: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(logits.len());
    for row in logits.chunks_exact(cols) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let start = out.len();
        let mut sum = 0.0;
        for v in row {
            let e = (v - max).exp();
            sum += e;
            out.push(e);
        }
        for v in &mut out[start..] {
            *v /= sum;
        }
    }
    out
}

/// Mean cross-entropy over the batch; gradient is `(softmax - onehot) / B`.
pub fn softmax_cross_entropy(logits: &[f64], labels: &[usize]) -> Result<(f64, Vec<f64>)> {
    let batch = labels.len();
    if batch == 0 || logits.len() % batch != 0 {
        return Err(shape_err("cross-entropy", format!("{} logits for {batch} labels", logits.len())));
    }
    let classes = logits.len() / batch;
    if let Some(bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::InvalidArgument(format!("label {bad} out of range for {classes} classes")));
    }
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(logits.len());
    let inv_b = 1.0 / batch as f64;
    for (row, &label) in logits.chunks_exact(classes).zip(labels) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|v| (v - max).exp()).sum();
        let log_z = max + sum.ln();
        loss += log_z - row[label];
        for (c, v) in row.iter().enumerate() {
            let p = (v - log_z).exp();
            let onehot = if c == label { 1.0 } else { 0.0 };
            grad.push((p - onehot) * inv_b);
        }
    }
    Ok((loss * inv_b, grad))
}
