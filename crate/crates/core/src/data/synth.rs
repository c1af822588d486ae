//! Synthetic panel with planted momentum and lag-11 reversal.
//!
//! Each asset's excess return follows
//!
//! ```text
//! r_{t+1} = a·(r_t + r_{t−1} + r_{t−2})/3 + b·r_{t−11} + ε,   ε ~ N(0, σ²)
//! ```
//!
//! independently across assets. The `Ret` characteristic is `r_t` itself and
//! `MC` is a market cap compounding the returns; every other characteristic
//! is an AR(1) nuisance series unrelated to returns.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::month::Month;
use super::panel::{Panel, PanelRow};
use super::schema::{feature_index, Exchange, FEATURE_COUNT};
use crate::error::{Error, Result};

/// AR order of the return process.
pub const AR_ORDER: usize = 12;
const BURN_IN: usize = 60;
const NUISANCE_RHO: f64 = 0.8;
/// History scale used when there is no noise to set a stationary variance.
const NOISELESS_INIT_STD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_assets: usize,
    pub n_months: usize,
    pub momentum_coeff: f64,
    pub reversal_coeff: f64,
    pub noise_std: f64,
    pub seed: u64,
    pub start: Month,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_assets: 200,
            n_months: 240,
            momentum_coeff: 0.3,
            reversal_coeff: -0.1,
            noise_std: 0.05,
            seed: 0,
            start: Month::january(1970),
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_assets < 2 {
            return Err(Error::Config(format!(
                "n_assets must be ≥ 2, got {}",
                self.n_assets
            )));
        }
        if self.n_months < AR_ORDER + 2 {
            return Err(Error::Config(format!(
                "n_months must be ≥ {} (one window plus its target), got {}",
                AR_ORDER + 2,
                self.n_months
            )));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::Config(format!(
                "noise_std must be finite and ≥ 0, got {}",
                self.noise_std
            )));
        }
        if !(self.momentum_coeff.is_finite() && self.reversal_coeff.is_finite()) {
            return Err(Error::Config("signal coefficients must be finite".into()));
        }
        let rho = spectral_radius(&self.ar_coefficients());
        if rho >= 1.0 {
            return Err(Error::Config(format!(
                "return process is not stationary (spectral radius {rho:.6})"
            )));
        }
        Ok(())
    }

    /// `φ_1 … φ_12` of the equivalent AR(12) recursion.
    pub fn ar_coefficients(&self) -> [f64; AR_ORDER] {
        let mut phi = [0.0; AR_ORDER];
        for p in phi.iter_mut().take(3) {
            *p = self.momentum_coeff / 3.0;
        }
        phi[AR_ORDER - 1] += self.reversal_coeff;
        phi
    }
}

/// Analytic properties of a generated panel.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOracle {
    pub spec: SynthSpec,
    /// Best attainable R²_oos: explained share of the stationary return
    /// variance under the true conditional mean.
    pub r2_ceiling: f64,
    /// Stationary return variance (0 without noise).
    pub return_variance: f64,
    pub spectral_radius: f64,
}

impl SynthOracle {
    pub fn to_text(&self) -> String {
        let s = &self.spec;
        format!(
            "seed = {}\nn_assets = {}\nn_months = {}\nstart = {}\nmomentum_coeff = {}\nreversal_coeff = {}\nnoise_std = {}\nsignal_features = Ret\nr2_ceiling = {}\nreturn_variance = {}\nspectral_radius = {}\n",
            s.seed,
            s.n_assets,
            s.n_months,
            s.start,
            s.momentum_coeff,
            s.reversal_coeff,
            s.noise_std,
            self.r2_ceiling,
            self.return_variance,
            self.spectral_radius
        )
    }
}

/// Largest eigenvalue modulus of the AR companion matrix.
pub fn spectral_radius(phi: &[f64]) -> f64 {
    let p = phi.len();
    let mut c = DMatrix::<f64>::zeros(p, p);
    for (j, v) in phi.iter().enumerate() {
        c[(0, j)] = *v;
    }
    for i in 1..p {
        c[(i, i - 1)] = 1.0;
    }
    c.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Autocorrelations `ρ_1 … ρ_p` of a stationary AR(p) from the Yule-Walker
/// equations `ρ_k = Σ_j φ_j ρ_{|k−j|}`, `ρ_0 = 1`.
pub fn autocorrelations(phi: &[f64]) -> Result<Vec<f64>> {
    let p = phi.len();
    let mut a = DMatrix::<f64>::identity(p, p);
    let rhs = DVector::from_column_slice(phi);
    for k in 1..=p {
        for (j0, phi_j) in phi.iter().enumerate() {
            let j = j0 + 1;
            let lag = k.abs_diff(j);
            if lag > 0 {
                a[(k - 1, lag - 1)] -= phi_j;
            }
        }
    }
    let rho = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Config("Yule-Walker system is singular".into()))?;
    Ok(rho.iter().copied().collect())
}

/// `(ceiling, stationary variance)`. The explained share is `Σ φ_k ρ_k`;
/// with no noise the recursion is deterministic and the ceiling is 1 unless
/// there is no signal at all.
pub fn r2_ceiling(spec: &SynthSpec) -> Result<(f64, f64)> {
    let phi = spec.ar_coefficients();
    if phi.iter().all(|v| *v == 0.0) {
        return Ok((0.0, spec.noise_std * spec.noise_std));
    }
    if spec.noise_std == 0.0 {
        return Ok((1.0, 0.0));
    }
    let rho = autocorrelations(&phi)?;
    let explained: f64 = phi.iter().zip(&rho).map(|(f, r)| f * r).sum();
    let var = spec.noise_std * spec.noise_std / (1.0 - explained);
    Ok((explained, var))
}

pub fn gen_synthetic(spec: &SynthSpec) -> Result<(Panel, SynthOracle)> {
    spec.validate()?;
    let phi = spec.ar_coefficients();
    let (ceiling, variance) = r2_ceiling(spec)?;
    let init_std = if spec.noise_std > 0.0 {
        variance.sqrt()
    } else {
        NOISELESS_INIT_STD
    };
    let burn_in = if spec.noise_std > 0.0 { BURN_IN } else { 0 };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let ret_col = feature_index("Ret").expect("schema has Ret");
    let mc_col = feature_index("MC").expect("schema has MC");
    let innov = (1.0 - NUISANCE_RHO * NUISANCE_RHO).sqrt();
    let width = spec.n_assets.saturating_sub(1).to_string().len().max(4);

    let mut rows = Vec::with_capacity(spec.n_assets * spec.n_months);
    for a in 0..spec.n_assets {
        let asset_id = format!("S{a:0width$}");
        let u: f64 = rng.random();
        let exchange = if u < 0.4 {
            Exchange::Nyse
        } else if u < 0.6 {
            Exchange::Amex
        } else {
            Exchange::Nasdaq
        };
        let mut log_cap = (500f64).ln() + 1.5 * std_normal.sample(&mut rng);
        let mut nuisance: Vec<f64> = (0..FEATURE_COUNT)
            .map(|_| std_normal.sample(&mut rng))
            .collect();
        // most recent return last
        let mut hist: Vec<f64> = (0..AR_ORDER)
            .map(|_| init_std * std_normal.sample(&mut rng))
            .collect();
        for t in 0..burn_in + spec.n_months {
            let mean_signal: f64 = phi
                .iter()
                .enumerate()
                .map(|(lag, f)| f * hist[AR_ORDER - 1 - lag])
                .sum();
            let r = mean_signal + spec.noise_std * std_normal.sample(&mut rng);
            hist.remove(0);
            hist.push(r);
            for x in nuisance.iter_mut() {
                *x = NUISANCE_RHO * *x + innov * std_normal.sample(&mut rng);
            }
            if t < burn_in {
                continue;
            }
            log_cap += r;
            let cap = log_cap.exp();
            let mut features: Vec<Option<f64>> = nuisance.iter().map(|v| Some(*v)).collect();
            features[ret_col] = Some(r);
            features[mc_col] = Some(cap);
            rows.push(PanelRow {
                asset_id: asset_id.clone(),
                month: spec.start.offset((t - burn_in) as i32),
                excess_return: r,
                market_cap: cap,
                exchange,
                features,
            });
        }
    }
    let panel = Panel::from_rows(rows)?;
    let oracle = SynthOracle {
        spec: spec.clone(),
        r2_ceiling: ceiling,
        return_variance: variance,
        spectral_radius: spectral_radius(&phi),
    };
    Ok((panel, oracle))
}
