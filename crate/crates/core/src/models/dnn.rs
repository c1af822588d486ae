//! Feed-forward baseline over the flattened feature window.

use super::params::ParamShape;
use crate::autograd::{Bound, Tape, Var};
use crate::error::{Error, Result};
use crate::tensor::Activation;

pub fn shapes(input_dim: usize, widths: &[usize]) -> Vec<ParamShape> {
    let mut out = Vec::new();
    let mut fan_in = input_dim;
    for (k, &w) in widths.iter().enumerate() {
        out.push(ParamShape::weight(format!("dnn.l{k}.w"), fan_in, w));
        out.push(ParamShape::bias(format!("dnn.l{k}.b"), w, 0.0));
        fan_in = w;
    }
    out
}

/// `z = act(… act(x W_0 + b_0) …)` over `layers` affine layers.
pub fn forward(
    tape: &mut Tape,
    p: &Bound,
    input: Var,
    expected_width: usize,
    layers: usize,
    activation: Activation,
) -> Result<Var> {
    let width = tape.value(input).cols();
    if width != expected_width {
        return Err(Error::Invalid(format!(
            "DNN expects {expected_width} input columns, got {width}"
        )));
    }
    let mut x = input;
    for k in 0..layers {
        let a = tape.matmul(x, p.get(&format!("dnn.l{k}.w"))?)?;
        let a = tape.add_row(a, p.get(&format!("dnn.l{k}.b"))?)?;
        x = tape.activate(a, activation);
    }
    Ok(x)
}
