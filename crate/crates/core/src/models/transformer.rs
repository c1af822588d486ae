//! Encoder-only transformer: input projection, optional sinusoidal positions,
//! post-norm blocks of multi-head scaled dot-product self-attention and a
//! ReLU feed-forward, then pooling over time.

use serde::{Deserialize, Serialize};

use super::params::ParamShape;
use crate::autograd::{Bound, Tape, Var};
use crate::error::{Error, Result};
use crate::tensor::Matrix;

const LN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    Mean,
    Last,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformerSpec {
    pub embed_dim: usize,
    pub ff_dim: usize,
    pub num_heads: usize,
    pub num_blocks: usize,
    pub positional_encoding: bool,
    pub pooling: Pooling,
}

impl Default for TransformerSpec {
    fn default() -> Self {
        TransformerSpec {
            embed_dim: 256,
            ff_dim: 64,
            num_heads: 4,
            num_blocks: 1,
            positional_encoding: true,
            pooling: Pooling::Mean,
        }
    }
}

impl TransformerSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_heads == 0 || !self.embed_dim.is_multiple_of(self.num_heads) {
            return Err(Error::Config(format!(
                "embed_dim {} is not divisible by num_heads {}",
                self.embed_dim, self.num_heads
            )));
        }
        if self.embed_dim == 0 || self.ff_dim == 0 || self.num_blocks == 0 {
            return Err(Error::Config(
                "transformer dimensions must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn shapes(&self, input_dim: usize) -> Vec<ParamShape> {
        let d = self.embed_dim;
        let mut out = vec![
            ParamShape::weight("tf.proj.w", input_dim, d),
            ParamShape::bias("tf.proj.b", d, 0.0),
        ];
        for k in 0..self.num_blocks {
            let p = format!("tf.b{k}");
            out.extend([
                ParamShape::weight(format!("{p}.wq"), d, d),
                ParamShape::weight(format!("{p}.wk"), d, d),
                ParamShape::weight(format!("{p}.wv"), d, d),
                ParamShape::weight(format!("{p}.wo"), d, d),
                ParamShape::bias(format!("{p}.bo"), d, 0.0),
                ParamShape::bias(format!("{p}.ln1.gamma"), d, 1.0),
                ParamShape::bias(format!("{p}.ln1.beta"), d, 0.0),
                ParamShape::weight(format!("{p}.ff.w1"), d, self.ff_dim),
                ParamShape::bias(format!("{p}.ff.b1"), self.ff_dim, 0.0),
                ParamShape::weight(format!("{p}.ff.w2"), self.ff_dim, d),
                ParamShape::bias(format!("{p}.ff.b2"), d, 0.0),
                ParamShape::bias(format!("{p}.ln2.gamma"), d, 1.0),
                ParamShape::bias(format!("{p}.ln2.beta"), d, 0.0),
            ]);
        }
        out
    }
}

/// `PE[t, 2i] = sin(t / 10000^(2i/d))`, `PE[t, 2i+1] = cos(t / 10000^(2i/d))`.
pub fn sinusoidal_encoding(steps: usize, dim: usize) -> Matrix {
    let mut data = Vec::with_capacity(steps * dim);
    for t in 0..steps {
        for j in 0..dim {
            let pair = (j / 2) * 2;
            let angle = t as f64 / 10000f64.powf(pair as f64 / dim as f64);
            data.push(if j % 2 == 0 { angle.sin() } else { angle.cos() });
        }
    }
    Matrix::from_vec(steps, dim, data)
}

#[derive(Debug, Clone)]
pub struct Encoded {
    pub z: Var,
    /// One `T × T` row-stochastic matrix per (block, sequence, head).
    pub attention: Vec<Var>,
}

/// `tokens` is `(batch·T) × input_dim`, rows grouped by sequence.
pub fn encode(
    tape: &mut Tape,
    p: &Bound,
    spec: &TransformerSpec,
    tokens: Var,
    batch: usize,
    steps: usize,
) -> Result<Encoded> {
    let d = spec.embed_dim;
    let dk = d / spec.num_heads;
    let proj = tape.matmul(tokens, p.get("tf.proj.w")?)?;
    let mut x = tape.add_row(proj, p.get("tf.proj.b")?)?;
    if spec.positional_encoding {
        let pe = sinusoidal_encoding(steps, d);
        let mut tiled = Vec::with_capacity(batch * steps * d);
        for _ in 0..batch {
            tiled.extend_from_slice(pe.data());
        }
        let pe = tape.constant(Matrix::from_vec(batch * steps, d, tiled));
        x = tape.add(x, pe)?;
    }

    let mut attention = Vec::new();
    let scale = 1.0 / (dk as f64).sqrt();
    for k in 0..spec.num_blocks {
        let name = |s: &str| format!("tf.b{k}.{s}");
        let q = tape.matmul(x, p.get(&name("wq"))?)?;
        let kk = tape.matmul(x, p.get(&name("wk"))?)?;
        let v = tape.matmul(x, p.get(&name("wv"))?)?;
        let mut per_seq = Vec::with_capacity(batch);
        for b in 0..batch {
            let qb = tape.slice_rows(q, b * steps, steps)?;
            let kb = tape.slice_rows(kk, b * steps, steps)?;
            let vb = tape.slice_rows(v, b * steps, steps)?;
            let mut heads = Vec::with_capacity(spec.num_heads);
            for h in 0..spec.num_heads {
                let (qh, kh, vh) = if spec.num_heads == 1 {
                    (qb, kb, vb)
                } else {
                    (
                        tape.slice_cols(qb, h * dk, dk)?,
                        tape.slice_cols(kb, h * dk, dk)?,
                        tape.slice_cols(vb, h * dk, dk)?,
                    )
                };
                let s = tape.matmul_nt(qh, kh)?;
                let s = tape.scale(s, scale);
                let a = tape.softmax_rows(s)?;
                attention.push(a);
                heads.push(tape.matmul(a, vh)?);
            }
            per_seq.push(if heads.len() == 1 {
                heads[0]
            } else {
                tape.concat_cols(&heads)?
            });
        }
        let mixed = if per_seq.len() == 1 {
            per_seq[0]
        } else {
            tape.concat_rows(&per_seq)?
        };
        let out = tape.matmul(mixed, p.get(&name("wo"))?)?;
        let out = tape.add_row(out, p.get(&name("bo"))?)?;
        let res = tape.add(x, out)?;
        let h1 = affine_norm(tape, p, &name("ln1"), res)?;

        let f = tape.matmul(h1, p.get(&name("ff.w1"))?)?;
        let f = tape.add_row(f, p.get(&name("ff.b1"))?)?;
        let f = tape.relu(f);
        let f = tape.matmul(f, p.get(&name("ff.w2"))?)?;
        let f = tape.add_row(f, p.get(&name("ff.b2"))?)?;
        let res = tape.add(h1, f)?;
        x = affine_norm(tape, p, &name("ln2"), res)?;
    }

    let z = match spec.pooling {
        Pooling::Mean => tape.mean_row_groups(x, steps)?,
        Pooling::Last => {
            let rows = (0..batch)
                .map(|b| tape.slice_rows(x, b * steps + steps - 1, 1))
                .collect::<Result<Vec<_>>>()?;
            tape.concat_rows(&rows)?
        }
    };
    Ok(Encoded { z, attention })
}

fn affine_norm(tape: &mut Tape, p: &Bound, prefix: &str, x: Var) -> Result<Var> {
    let n = tape.layer_norm(x, LN_EPS)?;
    let n = tape.mul_row(n, p.get(&format!("{prefix}.gamma"))?)?;
    tape.add_row(n, p.get(&format!("{prefix}.beta"))?)
}
