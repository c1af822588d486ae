//! Recurrent cells unrolled on the tape.
//!
//! Activations are row-major (`batch × width`), so a weight applied to the
//! input is stored `in × out` and multiplies from the right: `x_t · W_x`.

use super::params::ParamShape;
use crate::autograd::{Bound, Tape, Var};
use crate::error::Result;
use crate::tensor::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Rnn,
    Lstm,
    Gru,
}

impl Cell {
    fn gates(self) -> &'static [&'static str] {
        match self {
            Cell::Rnn => &["h"],
            Cell::Lstm => &["f", "i", "o", "c"],
            Cell::Gru => &["u", "s", "c"],
        }
    }

    /// Parameters of one layer: `w_{g}x` (in × h), `w_{g}h` (h × h), `b_{g}` (1 × h)
    /// for every gate `g`.
    pub fn layer_shapes(self, prefix: &str, input_dim: usize, hidden: usize) -> Vec<ParamShape> {
        let mut out = Vec::new();
        for g in self.gates() {
            out.push(ParamShape::weight(
                format!("{prefix}.w_{g}x"),
                input_dim,
                hidden,
            ));
            out.push(ParamShape::weight(
                format!("{prefix}.w_{g}h"),
                hidden,
                hidden,
            ));
            let bias = if self == Cell::Lstm && *g == "f" {
                1.0
            } else {
                0.0
            };
            out.push(ParamShape::bias(format!("{prefix}.b_{g}"), hidden, bias));
        }
        out
    }

    pub fn stack_shapes(
        self,
        prefix: &str,
        input_dim: usize,
        hidden: usize,
        layers: usize,
    ) -> Vec<ParamShape> {
        (0..layers)
            .flat_map(|l| {
                let in_dim = if l == 0 { input_dim } else { hidden };
                self.layer_shapes(&format!("{prefix}.l{l}"), in_dim, hidden)
            })
            .collect()
    }
}

/// `x W_x + h W_h + b`
fn affine2(tape: &mut Tape, p: &Bound, prefix: &str, gate: &str, x: Var, h: Var) -> Result<Var> {
    let wx = p.get(&format!("{prefix}.w_{gate}x"))?;
    let wh = p.get(&format!("{prefix}.w_{gate}h"))?;
    let b = p.get(&format!("{prefix}.b_{gate}"))?;
    let a = tape.matmul(x, wx)?;
    let r = tape.matmul(h, wh)?;
    let s = tape.add(a, r)?;
    tape.add_row(s, b)
}

/// Elman layer: `h_t = tanh(x_t W_hx + h_{t−1} W_hh + b_h)`.
pub fn rnn_layer(
    tape: &mut Tape,
    p: &Bound,
    prefix: &str,
    xs: &[Var],
    h0: Var,
) -> Result<Vec<Var>> {
    let mut h = h0;
    let mut hs = Vec::with_capacity(xs.len());
    for &x in xs {
        let pre = affine2(tape, p, prefix, "h", x, h)?;
        h = tape.tanh(pre);
        hs.push(h);
    }
    Ok(hs)
}

#[derive(Debug, Clone)]
pub struct LstmTrace {
    pub hs: Vec<Var>,
    pub cs: Vec<Var>,
}

/// LSTM layer with forget, input and output gates:
///
/// ```text
/// f = σ(h W_fh + x W_fx + b_f)     i = σ(h W_ih + x W_ix + b_i)
/// o = σ(h W_oh + x W_ox + b_o)     c' = f ⊙ c + i ⊙ tanh(h W_ch + x W_cx + b_c)
/// h' = o ⊙ tanh(c')
/// ```
pub fn lstm_layer(
    tape: &mut Tape,
    p: &Bound,
    prefix: &str,
    xs: &[Var],
    h0: Var,
    c0: Var,
) -> Result<LstmTrace> {
    let (mut h, mut c) = (h0, c0);
    let mut trace = LstmTrace {
        hs: Vec::with_capacity(xs.len()),
        cs: Vec::with_capacity(xs.len()),
    };
    for &x in xs {
        let f = affine2(tape, p, prefix, "f", x, h)?;
        let f = tape.sigmoid(f);
        let i = affine2(tape, p, prefix, "i", x, h)?;
        let i = tape.sigmoid(i);
        let o = affine2(tape, p, prefix, "o", x, h)?;
        let o = tape.sigmoid(o);
        let g = affine2(tape, p, prefix, "c", x, h)?;
        let g = tape.tanh(g);
        let keep = tape.mul(f, c)?;
        let write = tape.mul(i, g)?;
        c = tape.add(keep, write)?;
        let squashed = tape.tanh(c);
        h = tape.mul(o, squashed)?;
        trace.hs.push(h);
        trace.cs.push(c);
    }
    Ok(trace)
}

/// GRU layer:
///
/// ```text
/// u = σ(h W_uh + x W_ux + b_u)       s = σ(h W_sh + x W_sx + b_s)
/// h̃ = tanh((s ⊙ h) W_ch + x W_cx + b_c)
/// h' = u ⊙ h + (1 − u) ⊙ h̃
/// ```
///
/// An update gate of 1 keeps the previous state unchanged.
pub fn gru_layer(
    tape: &mut Tape,
    p: &Bound,
    prefix: &str,
    xs: &[Var],
    h0: Var,
) -> Result<Vec<Var>> {
    let mut h = h0;
    let mut hs = Vec::with_capacity(xs.len());
    let w_ch = p.get(&format!("{prefix}.w_ch"))?;
    let w_cx = p.get(&format!("{prefix}.w_cx"))?;
    let b_c = p.get(&format!("{prefix}.b_c"))?;
    for &x in xs {
        let u = affine2(tape, p, prefix, "u", x, h)?;
        let u = tape.sigmoid(u);
        let s = affine2(tape, p, prefix, "s", x, h)?;
        let s = tape.sigmoid(s);
        let reset = tape.mul(s, h)?;
        let a = tape.matmul(reset, w_ch)?;
        let bx = tape.matmul(x, w_cx)?;
        let cand = tape.add(a, bx)?;
        let cand = tape.add_row(cand, b_c)?;
        let cand = tape.tanh(cand);
        // h' = h̃ + u ⊙ (h − h̃)
        let diff = tape.sub(h, cand)?;
        let kept = tape.mul(u, diff)?;
        h = tape.add(cand, kept)?;
        hs.push(h);
    }
    Ok(hs)
}

/// Runs `layers` stacked layers from zero initial state; layer ℓ consumes the
/// full hidden sequence of layer ℓ−1. Returns the top layer's hidden sequence.
pub fn stack(
    tape: &mut Tape,
    p: &Bound,
    cell: Cell,
    prefix: &str,
    xs: &[Var],
    hidden: usize,
    layers: usize,
) -> Result<Vec<Var>> {
    let batch = xs.first().map_or(0, |x| tape.value(*x).rows());
    let mut seq = xs.to_vec();
    for l in 0..layers {
        let name = format!("{prefix}.l{l}");
        let h0 = tape.constant(Matrix::zeros(batch, hidden));
        seq = match cell {
            Cell::Rnn => rnn_layer(tape, p, &name, &seq, h0)?,
            Cell::Gru => gru_layer(tape, p, &name, &seq, h0)?,
            Cell::Lstm => {
                let c0 = tape.constant(Matrix::zeros(batch, hidden));
                lstm_layer(tape, p, &name, &seq, h0, c0)?.hs
            }
        };
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_counts_follow_gate_count() {
        let (i, h) = (51, 32);
        let per_gate = i * h + h * h + h;
        let count = |c: Cell| {
            c.layer_shapes("x", i, h)
                .iter()
                .map(ParamShape::len)
                .sum::<usize>()
        };
        assert_eq!(count(Cell::Rnn), per_gate);
        assert_eq!(count(Cell::Gru), 3 * per_gate);
        assert_eq!(count(Cell::Lstm), 4 * per_gate);
    }

    #[test]
    fn forget_bias_starts_at_one() {
        let shapes = Cell::Lstm.layer_shapes("lstm.l0", 3, 2);
        let fb = shapes.iter().find(|s| s.name == "lstm.l0.b_f").unwrap();
        assert_eq!(fb.init, super::super::params::Init::Constant(1.0));
    }
}
