//! GRU and LSTM cells, unrolled sequence runs and exact backpropagation
//! through time.
//!
//! Weight layout per cell: `wx` is `C x (G*H)`, `uh` is `H x (G*H)` and `b` is
//! `G*H`, with gate blocks of width `H` in the order `z, r, n` (GRU) or
//! `i, f, g, o` (LSTM).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Gru,
    Lstm,
}

impl CellKind {
    pub fn gates(self) -> usize {
        match self {
            CellKind::Gru => 3,
            CellKind::Lstm => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy)]
pub struct CellWeights<'a> {
    pub kind: CellKind,
    pub input: usize,
    pub hidden: usize,
    pub wx: &'a [f64],
    pub uh: &'a [f64],
    pub b: &'a [f64],
}

pub struct CellGrads<'a> {
    pub wx: &'a mut [f64],
    pub uh: &'a mut [f64],
    pub b: &'a mut [f64],
}

impl CellWeights<'_> {
    fn width(&self) -> usize {
        self.kind.gates() * self.hidden
    }

    fn check(&self) -> Result<()> {
        let g = self.width();
        if self.hidden == 0
            || self.wx.len() != self.input * g
            || self.uh.len() != self.hidden * g
            || self.b.len() != g
        {
            return Err(Error::Shape(format!(
                "{:?} cell weights do not match input {} hidden {}",
                self.kind, self.input, self.hidden
            )));
        }
        Ok(())
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yv, xv) in y.iter_mut().zip(x) {
        *yv += alpha * xv;
    }
}

/// `gates = b + x * wx`
fn input_affine(w: &CellWeights, x: &[f64], gates: &mut [f64]) {
    let g = w.width();
    gates.copy_from_slice(w.b);
    for (xv, row) in x.iter().zip(w.wx.chunks_exact(g)) {
        axpy(*xv, row, gates);
    }
}

fn gru_step(w: &CellWeights, x: &[f64], h: &[f64], gates: &mut [f64], h_out: &mut [f64]) {
    let hd = w.hidden;
    let g = 3 * hd;
    input_affine(w, x, gates);
    for (hv, row) in h.iter().zip(w.uh.chunks_exact(g)) {
        axpy(*hv, &row[..2 * hd], &mut gates[..2 * hd]);
    }
    for v in &mut gates[..2 * hd] {
        *v = sigmoid(*v);
    }
    let (zr, n) = gates.split_at_mut(2 * hd);
    let r = &zr[hd..];
    for (i, row) in w.uh.chunks_exact(g).enumerate() {
        axpy(r[i] * h[i], &row[2 * hd..], n);
    }
    for v in n.iter_mut() {
        *v = v.tanh();
    }
    let z = &zr[..hd];
    for j in 0..hd {
        h_out[j] = (1.0 - z[j]) * h[j] + z[j] * n[j];
    }
}

fn lstm_step(
    w: &CellWeights,
    x: &[f64],
    h: &[f64],
    c: &[f64],
    gates: &mut [f64],
    h_out: &mut [f64],
    c_out: &mut [f64],
) {
    let hd = w.hidden;
    let g = 4 * hd;
    input_affine(w, x, gates);
    for (hv, row) in h.iter().zip(w.uh.chunks_exact(g)) {
        axpy(*hv, row, gates);
    }
    for (k, v) in gates.iter_mut().enumerate() {
        *v = if (2 * hd..3 * hd).contains(&k) { v.tanh() } else { sigmoid(*v) };
    }
    let (i, rest) = gates.split_at(hd);
    let (f, rest) = rest.split_at(hd);
    let (gg, o) = rest.split_at(hd);
    for j in 0..hd {
        c_out[j] = f[j] * c[j] + i[j] * gg[j];
        h_out[j] = o[j] * c_out[j].tanh();
    }
}

fn check_step(w: &CellWeights, x: &[f64], h: &[f64]) -> Result<()> {
    w.check()?;
    if x.len() != w.input || h.len() != w.hidden {
        return Err(Error::Shape(format!(
            "cell step got input {} / state {}, expected {} / {}",
            x.len(),
            h.len(),
            w.input,
            w.hidden
        )));
    }
    Ok(())
}

/// One GRU step: `h' = (1 - z) * h + z * tanh(Wx_n x + U_n (r * h) + b_n)`.
pub fn gru_cell(w: &CellWeights, x: &[f64], h_prev: &[f64]) -> Result<Vec<f64>> {
    check_step(w, x, h_prev)?;
    if w.kind != CellKind::Gru {
        return Err(Error::InvalidArgument("gru_cell needs GRU weights".into()));
    }
    let mut gates = vec![0.0; w.width()];
    let mut h = vec![0.0; w.hidden];
    gru_step(w, x, h_prev, &mut gates, &mut h);
    Ok(h)
}

/// One LSTM step returning `(h', c')`.
pub fn lstm_cell(w: &CellWeights, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_step(w, x, h_prev)?;
    if w.kind != CellKind::Lstm || c_prev.len() != w.hidden {
        return Err(Error::InvalidArgument("lstm_cell needs LSTM weights and a cell state".into()));
    }
    let mut gates = vec![0.0; w.width()];
    let mut h = vec![0.0; w.hidden];
    let mut c = vec![0.0; w.hidden];
    lstm_step(w, x, h_prev, c_prev, &mut gates, &mut h, &mut c);
    Ok((h, c))
}

#[derive(Debug, Clone)]
pub struct RecurrentOutput {
    /// `T x H`, row `t` is the state after consuming input row `t`.
    pub hidden_seq: Vec<f64>,
    pub final_h: Vec<f64>,
    pub final_c: Option<Vec<f64>>,
}

/// Activations cached by [`run_recurrent`], indexed in processing order.
#[derive(Debug, Clone)]
pub struct SequenceTrace {
    kind: CellKind,
    direction: Direction,
    steps: usize,
    hidden: usize,
    h: Vec<f64>,
    c: Vec<f64>,
    gates: Vec<f64>,
}

fn input_row(x: &[f64], input: usize, steps: usize, dir: Direction, s: usize) -> &[f64] {
    let t = match dir {
        Direction::Forward => s,
        Direction::Backward => steps - 1 - s,
    };
    &x[t * input..(t + 1) * input]
}

/// Left fold of the cell over `x (T x C)` from a zero state. The backward
/// direction consumes the rows in reverse and its final state is the one after
/// row 0.
pub fn run_recurrent(
    w: &CellWeights,
    x: &[f64],
    steps: usize,
    direction: Direction,
) -> Result<(RecurrentOutput, SequenceTrace)> {
    w.check()?;
    if steps == 0 || x.len() != steps * w.input {
        return Err(Error::Shape(format!(
            "sequence of {} values is not {steps} x {}",
            x.len(),
            w.input
        )));
    }
    let hd = w.hidden;
    let g = w.width();
    let mut h = vec![0.0; (steps + 1) * hd];
    let mut c = match w.kind {
        CellKind::Lstm => vec![0.0; (steps + 1) * hd],
        CellKind::Gru => Vec::new(),
    };
    let mut gates = vec![0.0; steps * g];
    for s in 0..steps {
        let xs = input_row(x, w.input, steps, direction, s);
        let (prev, next) = h.split_at_mut((s + 1) * hd);
        let gs = &mut gates[s * g..(s + 1) * g];
        match w.kind {
            CellKind::Gru => gru_step(w, xs, &prev[s * hd..], gs, &mut next[..hd]),
            CellKind::Lstm => {
                let (cprev, cnext) = c.split_at_mut((s + 1) * hd);
                lstm_step(w, xs, &prev[s * hd..], &cprev[s * hd..], gs, &mut next[..hd], &mut cnext[..hd]);
            }
        }
    }

    let mut hidden_seq = vec![0.0; steps * hd];
    for s in 0..steps {
        let t = match direction {
            Direction::Forward => s,
            Direction::Backward => steps - 1 - s,
        };
        hidden_seq[t * hd..(t + 1) * hd].copy_from_slice(&h[(s + 1) * hd..(s + 2) * hd]);
    }
    let final_h = h[steps * hd..].to_vec();
    let final_c = (w.kind == CellKind::Lstm).then(|| c[steps * hd..].to_vec());
    Ok((
        RecurrentOutput {
            hidden_seq,
            final_h,
            final_c,
        },
        SequenceTrace {
            kind: w.kind,
            direction,
            steps,
            hidden: hd,
            h,
            c,
            gates,
        },
    ))
}

/// Backpropagation through the whole unrolled sequence. `d_final` is the
/// gradient w.r.t. the final hidden state; `d_seq` optionally adds gradients
/// w.r.t. every row of `hidden_seq` (input-time aligned). Parameter gradients
/// are accumulated into `grads`.
pub fn backward_recurrent(
    w: &CellWeights,
    x: &[f64],
    trace: &SequenceTrace,
    d_final: &[f64],
    d_seq: Option<&[f64]>,
    grads: &mut CellGrads,
) {
    let hd = trace.hidden;
    let g = w.width();
    let steps = trace.steps;
    debug_assert_eq!(trace.kind, w.kind);
    let mut dh = d_final.to_vec();
    let mut dc = vec![0.0; hd];
    let mut dh_prev = vec![0.0; hd];
    let mut da = vec![0.0; g];
    let mut drh = vec![0.0; hd];
    // `uh` transposed to `G*H x H` so the state gradient is a sum of rows.
    let mut uh_t = vec![0.0; g * hd];
    for (i, row) in w.uh.chunks_exact(g).enumerate() {
        for (j, v) in row.iter().enumerate() {
            uh_t[j * hd + i] = *v;
        }
    }

    for s in (0..steps).rev() {
        if let Some(ds) = d_seq {
            let t = match trace.direction {
                Direction::Forward => s,
                Direction::Backward => steps - 1 - s,
            };
            axpy(1.0, &ds[t * hd..(t + 1) * hd], &mut dh);
        }
        let xs = input_row(x, w.input, steps, trace.direction, s);
        let h_prev = &trace.h[s * hd..(s + 1) * hd];
        let gs = &trace.gates[s * g..(s + 1) * g];
        match w.kind {
            CellKind::Gru => {
                let (z, rest) = gs.split_at(hd);
                let (r, n) = rest.split_at(hd);
                for j in 0..hd {
                    let dz = dh[j] * (n[j] - h_prev[j]);
                    let dn = dh[j] * z[j];
                    dh_prev[j] = dh[j] * (1.0 - z[j]);
                    da[j] = dz * z[j] * (1.0 - z[j]);
                    da[2 * hd + j] = dn * (1.0 - n[j] * n[j]);
                }
                let (dzr, dan) = da.split_at_mut(2 * hd);
                drh.fill(0.0);
                for (dv, col) in dan.iter().zip(uh_t[2 * hd * hd..].chunks_exact(hd)) {
                    axpy(*dv, col, &mut drh);
                }
                for (i, grow) in grads.uh.chunks_exact_mut(g).enumerate() {
                    axpy(r[i] * h_prev[i], dan, &mut grow[2 * hd..]);
                }
                for j in 0..hd {
                    let dr = drh[j] * h_prev[j];
                    dh_prev[j] += drh[j] * r[j];
                    dzr[hd + j] = dr * r[j] * (1.0 - r[j]);
                }
                for (dv, col) in dzr.iter().zip(uh_t.chunks_exact(hd)) {
                    axpy(*dv, col, &mut dh_prev);
                }
                for (i, grow) in grads.uh.chunks_exact_mut(g).enumerate() {
                    axpy(h_prev[i], dzr, &mut grow[..2 * hd]);
                }
            }
            CellKind::Lstm => {
                let c_prev = &trace.c[s * hd..(s + 1) * hd];
                let c_new = &trace.c[(s + 1) * hd..(s + 2) * hd];
                let (i, rest) = gs.split_at(hd);
                let (f, rest) = rest.split_at(hd);
                let (gg, o) = rest.split_at(hd);
                for j in 0..hd {
                    let tc = c_new[j].tanh();
                    let d_o = dh[j] * tc;
                    let dcj = dc[j] + dh[j] * o[j] * (1.0 - tc * tc);
                    let di = dcj * gg[j];
                    let dg = dcj * i[j];
                    let df = dcj * c_prev[j];
                    dc[j] = dcj * f[j];
                    da[j] = di * i[j] * (1.0 - i[j]);
                    da[hd + j] = df * f[j] * (1.0 - f[j]);
                    da[2 * hd + j] = dg * (1.0 - gg[j] * gg[j]);
                    da[3 * hd + j] = d_o * o[j] * (1.0 - o[j]);
                }
                dh_prev.fill(0.0);
                for (dv, col) in da.iter().zip(uh_t.chunks_exact(hd)) {
                    axpy(*dv, col, &mut dh_prev);
                }
                for (k, grow) in grads.uh.chunks_exact_mut(g).enumerate() {
                    axpy(h_prev[k], &da, grow);
                }
            }
        }
        for (xv, grow) in xs.iter().zip(grads.wx.chunks_exact_mut(g)) {
            axpy(*xv, &da, grow);
        }
        axpy(1.0, &da, grads.b);
        std::mem::swap(&mut dh, &mut dh_prev);
    }
}

/// Forward and backward runs with separate weights; returns the concatenated
/// `[final_forward, final_backward]` state and both traces.
pub fn run_bidirectional(
    fwd: &CellWeights,
    bwd: &CellWeights,
    x: &[f64],
    steps: usize,
) -> Result<(Vec<f64>, SequenceTrace, SequenceTrace)> {
    let (of, tf) = run_recurrent(fwd, x, steps, Direction::Forward)?;
    let (ob, tb) = run_recurrent(bwd, x, steps, Direction::Backward)?;
    let mut state = of.final_h;
    state.extend(ob.final_h);
    Ok((state, tf, tb))
}
