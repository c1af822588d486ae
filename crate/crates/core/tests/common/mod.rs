//! Helpers shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use deepseq::cli::{self, ExperimentConfig};
use deepseq::data::WindowSet;
use deepseq::eval::{Forecast, ForecastSet};
use deepseq::models::{ModelKind, ModelSpec, ParamSet, Pooling, SequenceBatch, TransformerSpec};
use deepseq::tensor::Matrix;

/// Every architecture shrunk to gradient-check size.
pub fn toy_spec(kind: ModelKind) -> ModelSpec {
    let mut s = ModelSpec::new(kind);
    s.input_dim = 3;
    s.seq_len = 4;
    s.hidden_dim = 4;
    s.num_layers = 2;
    s.dnn_layer_dims = vec![8, 6, 4];
    s.transformer = TransformerSpec {
        embed_dim: 8,
        ff_dim: 8,
        num_heads: 2,
        num_blocks: 1,
        positional_encoding: true,
        pooling: Pooling::Mean,
    };
    s
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, sd: f64) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            sd * z
        })
        .collect::<Vec<f64>>();
    Matrix::new(rows, cols, data).unwrap()
}

pub fn toy_batch(spec: &ModelSpec, batch: usize, seed: u64) -> SequenceBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xBA7C);
    let n = batch * spec.seq_len * spec.input_dim;
    let inputs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let targets: Vec<f64> = (0..batch)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            0.1 * z
        })
        .collect();
    SequenceBatch::new(batch, spec.seq_len, spec.input_dim, inputs, targets).unwrap()
}

/// Adds `N(0, sd²)` noise to every entry so biases and gains leave their
/// symmetric initial values.
pub fn jitter(params: &mut ParamSet, sd: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = params.names().cloned().collect();
    for name in names {
        let m = params.get(&name).unwrap().clone();
        for (i, v) in m.data().iter().enumerate() {
            let noise: f64 = StandardNormal.sample(&mut rng);
            params.set_entry(&name, i, v + sd * noise).unwrap();
        }
    }
}

pub fn forecasts(windows: &WindowSet, predicted: &[f64]) -> ForecastSet {
    ForecastSet::new(
        windows
            .keys()
            .iter()
            .zip(windows.targets())
            .zip(predicted)
            .map(|((k, r), p)| Forecast {
                asset_id: k.asset_id.clone(),
                month: k.target_month(),
                realized: *r,
                predicted: *p,
            })
            .collect(),
    )
    .unwrap()
}

/// A small two-model, two-refit experiment writing into `dir`.
pub fn pipeline_pairs(dir: &Path) -> Vec<(String, String)> {
    [
        ("output.dir", dir.to_str().unwrap()),
        ("seed", "3"),
        ("synth.n_assets", "40"),
        ("synth.n_months", "60"),
        ("models", "LSTM,DNN"),
        ("schedule.initial_train_years", "3"),
        ("schedule.refit_every", "1"),
        ("train.max_epochs", "2"),
        ("train.batch_size", "128"),
        ("model.hidden_dim", "8"),
        ("model.num_layers", "1"),
        ("model.dnn_layers", "16,8,4"),
    ]
    .iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

pub fn run_pipeline(pairs: &[(String, String)]) -> deepseq::Result<ExperimentConfig> {
    let cfg = ExperimentConfig::from_pairs(pairs)?;
    cli::synth(&cfg)?;
    cli::train(&cfg)?;
    cli::evaluate(&cfg)?;
    cli::run_backtests(&cfg)?;
    cli::report(&cfg)?;
    Ok(cfg)
}

pub fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "panic".into())
}

/// Scalar re-derivations of the recurrent cells and additive attention,
/// written loop by loop from the cell equations.
pub mod hand {
    use deepseq::models::{ModelKind, ParamSet, SequenceBatch};

    fn sigmoid(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    pub fn sequence(batch: &SequenceBatch, b: usize) -> Vec<Vec<f64>> {
        let (t, f) = (batch.seq_len(), batch.input_dim());
        (0..t)
            .map(|s| batch.inputs()[b * t * f + s * f..b * t * f + (s + 1) * f].to_vec())
            .collect()
    }

    fn w(p: &ParamSet, name: &str, i: usize, j: usize) -> f64 {
        p.get(name).unwrap().get(i, j)
    }

    /// `Σ_i x_i W_x[i][j] + Σ_k h_k W_h[k][j] + b[j]` for gate `g`.
    fn pre(p: &ParamSet, layer: &str, g: &str, x: &[f64], h: &[f64], j: usize) -> f64 {
        let mut s = w(p, &format!("{layer}.b_{g}"), 0, j);
        for (i, xi) in x.iter().enumerate() {
            s += xi * w(p, &format!("{layer}.w_{g}x"), i, j);
        }
        for (k, hk) in h.iter().enumerate() {
            s += hk * w(p, &format!("{layer}.w_{g}h"), k, j);
        }
        s
    }

    pub fn rnn(p: &ParamSet, xs: &[Vec<f64>], hidden: usize) -> Vec<f64> {
        let mut h = vec![0.0; hidden];
        for x in xs {
            h = (0..hidden)
                .map(|j| pre(p, "rnn.l0", "h", x, &h, j).tanh())
                .collect();
        }
        h
    }

    pub fn lstm_states(p: &ParamSet, xs: &[Vec<f64>], hidden: usize) -> Vec<Vec<f64>> {
        let (mut h, mut c) = (vec![0.0; hidden], vec![0.0; hidden]);
        let mut out = Vec::new();
        for x in xs {
            let mut nh = vec![0.0; hidden];
            for j in 0..hidden {
                let f = sigmoid(pre(p, "lstm.l0", "f", x, &h, j));
                let i = sigmoid(pre(p, "lstm.l0", "i", x, &h, j));
                let o = sigmoid(pre(p, "lstm.l0", "o", x, &h, j));
                let g = pre(p, "lstm.l0", "c", x, &h, j).tanh();
                c[j] = f * c[j] + i * g;
                nh[j] = o * c[j].tanh();
            }
            h = nh;
            out.push(h.clone());
        }
        out
    }

    pub fn gru(p: &ParamSet, xs: &[Vec<f64>], hidden: usize) -> Vec<f64> {
        let mut h = vec![0.0; hidden];
        for x in xs {
            let u: Vec<f64> = (0..hidden)
                .map(|j| sigmoid(pre(p, "gru.l0", "u", x, &h, j)))
                .collect();
            let s: Vec<f64> = (0..hidden)
                .map(|j| sigmoid(pre(p, "gru.l0", "s", x, &h, j)))
                .collect();
            let reset: Vec<f64> = (0..hidden).map(|k| s[k] * h[k]).collect();
            h = (0..hidden)
                .map(|j| {
                    let cand = pre(p, "gru.l0", "c", x, &reset, j).tanh();
                    u[j] * h[j] + (1.0 - u[j]) * cand
                })
                .collect();
        }
        h
    }

    /// `e_t = vᵀ tanh(W¹ h_t + W² h_T)`, `α = softmax(e)`, `z = Σ α_t h_t`.
    pub fn attention(p: &ParamSet, hs: &[Vec<f64>]) -> Vec<f64> {
        let n = hs[0].len();
        let last = hs.last().unwrap();
        let e: Vec<f64> = hs
            .iter()
            .map(|ht| {
                (0..n)
                    .map(|j| {
                        let mut a = 0.0;
                        for k in 0..n {
                            a += ht[k] * w(p, "att.w1", k, j) + last[k] * w(p, "att.w2", k, j);
                        }
                        w(p, "att.v", j, 0) * a.tanh()
                    })
                    .sum()
            })
            .collect();
        let m = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ex: Vec<f64> = e.iter().map(|v| (v - m).exp()).collect();
        let total: f64 = ex.iter().sum();
        (0..n)
            .map(|j| hs.iter().zip(&ex).map(|(h, a)| a / total * h[j]).sum())
            .collect()
    }

    pub fn forecast(kind: ModelKind, p: &ParamSet, xs: &[Vec<f64>]) -> f64 {
        let hidden = p.get("head.w").unwrap().rows();
        let z = match kind {
            ModelKind::Rnn => rnn(p, xs, hidden),
            ModelKind::Lstm => lstm_states(p, xs, hidden).pop().unwrap(),
            ModelKind::Gru => gru(p, xs, hidden),
            ModelKind::LstmAtt => attention(p, &lstm_states(p, xs, hidden)),
            _ => unreachable!("no scalar oracle for {kind}"),
        };
        w(p, "head.b", 0, 0)
            + z.iter()
                .enumerate()
                .map(|(j, zj)| zj * w(p, "head.w", j, 0))
                .sum::<f64>()
    }
}
