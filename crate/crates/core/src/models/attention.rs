//! Additive attention over a recurrent hidden-state sequence, queried by the
//! final state: `e_t = vᵀ tanh(W¹ h_t + W² h_T)`, `α = softmax(e)`,
//! `z = Σ_t α_t h_t`.

use super::params::ParamShape;
use crate::autograd::{Bound, Tape, Var};
use crate::error::{Error, Result};
use crate::tensor::{softmax, Matrix};

pub fn shapes(prefix: &str, hidden: usize) -> Vec<ParamShape> {
    vec![
        ParamShape::weight(format!("{prefix}.w1"), hidden, hidden),
        ParamShape::weight(format!("{prefix}.w2"), hidden, hidden),
        ParamShape::weight(format!("{prefix}.v"), hidden, 1),
    ]
}

/// Tape version over a batch. `hs[t]` is `batch × hidden`; returns
/// `(z, α)` with `α` of shape `batch × T`.
pub fn attend(tape: &mut Tape, p: &Bound, prefix: &str, hs: &[Var]) -> Result<(Var, Var)> {
    let last = *hs
        .last()
        .ok_or_else(|| Error::Invalid("attention over an empty hidden-state sequence".into()))?;
    let w1 = p.get(&format!("{prefix}.w1"))?;
    let w2 = p.get(&format!("{prefix}.w2"))?;
    let v = p.get(&format!("{prefix}.v"))?;
    let query = tape.matmul(last, w2)?;
    let mut scores = Vec::with_capacity(hs.len());
    for &h in hs {
        let key = tape.matmul(h, w1)?;
        let s = tape.add(key, query)?;
        let s = tape.tanh(s);
        scores.push(tape.matmul(s, v)?);
    }
    let scores = tape.concat_cols(&scores)?;
    let alpha = tape.softmax_rows(scores)?;
    let mut z = None;
    for (t, &h) in hs.iter().enumerate() {
        let a = tape.slice_cols(alpha, t, 1)?;
        let term = tape.mul_col(h, a)?;
        z = Some(match z {
            None => term,
            Some(acc) => tape.add(acc, term)?,
        });
    }
    Ok((z.expect("non-empty sequence"), alpha))
}

#[derive(Debug, Clone)]
pub struct AttentionParams {
    pub w1: Matrix,
    pub w2: Matrix,
    pub v: Matrix,
}

#[derive(Debug, Clone)]
pub struct Attended {
    pub z: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Single-sequence evaluation without the tape. `hidden` is `T × h`; the last
/// row is the query.
pub fn additive_attention(hidden: &Matrix, params: &AttentionParams) -> Result<Attended> {
    let (steps, h) = hidden.shape();
    if steps == 0 {
        return Err(Error::Invalid(
            "attention over an empty hidden-state sequence".into(),
        ));
    }
    if params.w1.shape() != (h, h) || params.w2.shape() != (h, h) || params.v.shape() != (h, 1) {
        return Err(Error::Shape {
            op: "additive_attention",
            left: hidden.shape(),
            right: params.w1.shape(),
        });
    }
    let last = Matrix::row_vector(hidden.row(steps - 1))?;
    let query = last.matmul(&params.w2)?;
    let keys = hidden.matmul(&params.w1)?;
    let mut scores = Vec::with_capacity(steps);
    for t in 0..steps {
        let e: f64 = (0..h)
            .map(|j| (keys.get(t, j) + query.get(0, j)).tanh() * params.v.get(j, 0))
            .sum();
        scores.push(e);
    }
    let weights = softmax(&scores)?;
    let mut z = vec![0.0; h];
    for (t, a) in weights.iter().enumerate() {
        for (j, zj) in z.iter_mut().enumerate() {
            *zj += a * hidden.get(t, j);
        }
    }
    Ok(Attended { z, weights })
}
