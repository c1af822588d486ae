use crate::autograd::{Bound, Tape, Var};
use crate::error::{Error, Result};
use crate::models::ParamSet;
use crate::tensor::Matrix;

/// Sum of squared errors.
pub fn sse(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::Invalid(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Invalid("loss over an empty batch".into()));
    }
    Ok(predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (t - p) * (t - p))
        .sum())
}

/// Mean squared error: the sum of squared errors divided by the batch size.
pub fn mse_loss(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    Ok(sse(predictions, targets)? / predictions.len() as f64)
}

/// `coefficient · Σ θ²` over every weight and bias entry.
pub fn l2_penalty(params: &ParamSet, coefficient: f64) -> f64 {
    if coefficient == 0.0 {
        return 0.0;
    }
    coefficient * params.sum_of_squares()
}

/// Mean squared error recorded on the tape; `predictions` is `batch × 1`.
pub fn mse_on_tape(tape: &mut Tape, predictions: Var, targets: Matrix) -> Result<Var> {
    let t = tape.constant(targets);
    let diff = tape.sub(predictions, t)?;
    let sq = tape.square(diff);
    tape.mean(sq)
}

/// L2 penalty over every bound parameter, recorded on the tape. Returns
/// `None` when the coefficient is zero.
pub fn l2_on_tape(tape: &mut Tape, params: &Bound, coefficient: f64) -> Result<Option<Var>> {
    if coefficient == 0.0 {
        return Ok(None);
    }
    let vars: Vec<Var> = params.iter().map(|(_, v)| v).collect();
    let mut total: Option<Var> = None;
    for v in vars {
        let sq = tape.square(v);
        let s = tape.sum(sq);
        total = Some(match total {
            None => s,
            Some(acc) => tape.add(acc, s)?,
        });
    }
    Ok(total.map(|t| tape.scale(t, coefficient)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_examples() {
        assert_eq!(mse_loss(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0);
        assert!((mse_loss(&[0.0, 0.0], &[0.1, -0.1]).unwrap() - 0.01).abs() < 1e-17);
        assert!((mse_loss(&[0.02], &[0.05]).unwrap() - 0.0009).abs() < 1e-17);
        assert!(mse_loss(&[], &[]).is_err());
    }

    #[test]
    fn l2_examples() {
        let mut p = ParamSet::new();
        p.insert("w", Matrix::scalar(2.0)).unwrap();
        assert_eq!(l2_penalty(&p, 0.0), 0.0);
        assert!((l2_penalty(&p, 0.0005) - 0.002).abs() < 1e-18);
        let mut z = ParamSet::new();
        z.insert("w", Matrix::zeros(3, 2)).unwrap();
        assert_eq!(l2_penalty(&z, 0.0005), 0.0);
    }

    #[test]
    fn l2_gradient_is_two_c_theta() {
        let mut p = ParamSet::new();
        p.insert("w", Matrix::from_rows(&[&[1.5, -2.0]]).unwrap())
            .unwrap();
        p.insert("b", Matrix::scalar(0.25)).unwrap();
        let mut tape = Tape::new();
        let bound = tape.bind(&p).unwrap();
        let loss = l2_on_tape(&mut tape, &bound, 0.0005).unwrap().unwrap();
        assert!((tape.value(loss).get(0, 0) - l2_penalty(&p, 0.0005)).abs() < 1e-18);
        let g = tape.backward(loss).unwrap();
        assert_eq!(
            g.get("w").unwrap().data(),
            &[2.0 * 0.0005 * 1.5, 2.0 * 0.0005 * -2.0]
        );
        assert_eq!(g.get("b").unwrap().data(), &[2.0 * 0.0005 * 0.25]);
    }
}
