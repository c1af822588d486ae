//! Central finite-difference validation of tape gradients.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Bound, Tape, Var};
use crate::error::{Error, Result};
use crate::models::ParamSet;

/// A scalar function of a parameter set, recorded on a fresh tape per call.
pub trait Objective {
    fn loss(&self, tape: &mut Tape, params: &Bound) -> Result<Var>;

    /// Stochastic objectives (dropout) cannot be differenced.
    fn is_stochastic(&self) -> bool {
        false
    }
}

impl<F> Objective for F
where
    F: Fn(&mut Tape, &Bound) -> Result<Var>,
{
    fn loss(&self, tape: &mut Tape, params: &Bound) -> Result<Var> {
        self(tape, params)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryCheck {
    pub param: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    pub worst: Option<EntryCheck>,
    /// Rounding error of a central difference at this loss scale,
    /// `ε_mach · max(|L|, 1) / ε`. Gradients much smaller than
    /// `noise_floor / tol` cannot be resolved to relative tolerance `tol`.
    pub noise_floor: f64,
    pub entries: Vec<EntryCheck>,
}

impl GradCheckReport {
    /// Every entry agrees to `tol` relative, or to within the rounding
    /// floor in absolute terms.
    pub fn within(&self, tol: f64) -> bool {
        self.entries
            .iter()
            .all(|e| e.rel_error < tol || e.abs_error <= self.noise_floor)
    }

    /// Largest relative error among entries whose gradient is large enough
    /// for `tol` to be resolvable.
    pub fn max_resolved_rel_error(&self, tol: f64) -> f64 {
        let scale = self.noise_floor / tol;
        self.entries
            .iter()
            .filter(|e| e.analytic.abs().max(e.numeric.abs()) >= scale)
            .map(|e| e.rel_error)
            .fold(0.0, f64::max)
    }
}

/// `|a − n| / max(|a|, |n|, 1e-8)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

pub fn evaluate(objective: &dyn Objective, params: &ParamSet) -> Result<f64> {
    let mut tape = Tape::new();
    let bound = tape.bind(params)?;
    let loss = objective.loss(&mut tape, &bound)?;
    let v = tape.value(loss);
    if v.shape() != (1, 1) {
        return Err(Error::Invalid(format!(
            "objective is not scalar: {:?}",
            v.shape()
        )));
    }
    Ok(v.data()[0])
}

/// Compares backward-pass gradients with central differences on up to
/// `samples` parameter entries drawn without replacement (all entries when
/// there are fewer).
pub fn grad_check(
    objective: &dyn Objective,
    params: &ParamSet,
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> Result<GradCheckReport> {
    if !(epsilon > 0.0 && epsilon <= 1e-3) {
        return Err(Error::Invalid(format!(
            "epsilon {epsilon} outside (0, 1e-3]"
        )));
    }
    if objective.is_stochastic() {
        return Err(Error::Invalid(
            "gradient check needs a deterministic forward pass (disable dropout)".into(),
        ));
    }

    let mut tape = Tape::new();
    let bound = tape.bind(params)?;
    let loss = objective.loss(&mut tape, &bound)?;
    let grads = tape.backward(loss)?;
    let base = tape.value(loss).data()[0];

    let entries: Vec<(String, usize)> = params
        .iter()
        .flat_map(|(name, m)| (0..m.len()).map(move |i| (name.clone(), i)))
        .collect();
    let picked: Vec<usize> = if entries.len() <= samples {
        (0..entries.len()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = sample(&mut rng, entries.len(), samples).into_vec();
        idx.sort_unstable();
        idx
    };

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        worst: None,
        noise_floor: f64::EPSILON * base.abs().max(1.0) / epsilon,
        entries: Vec::new(),
    };
    let mut probe = params.clone();
    for k in picked {
        let (name, index) = &entries[k];
        let original = params.get(name).expect("entry from params").data()[*index];
        probe.set_entry(name, *index, original + epsilon)?;
        let plus = evaluate(objective, &probe)?;
        probe.set_entry(name, *index, original - epsilon)?;
        let minus = evaluate(objective, &probe)?;
        probe.set_entry(name, *index, original)?;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite(format!(
                "loss while perturbing `{name}`[{index}]"
            )));
        }
        let numeric = (plus - minus) / (2.0 * epsilon);
        let analytic = grads.get(name).expect("gradient for every param").data()[*index];
        let rel = relative_error(analytic, numeric);
        let entry = EntryCheck {
            param: name.clone(),
            index: *index,
            analytic,
            numeric,
            rel_error: rel,
            abs_error: (analytic - numeric).abs(),
        };
        report.checked += 1;
        if report.worst.is_none() || rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst = Some(entry.clone());
        }
        report.entries.push(entry);
    }
    Ok(report)
}
