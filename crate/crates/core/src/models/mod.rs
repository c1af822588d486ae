//! The seven forecasting architectures. Each maps a `batch × T × F` feature
//! sequence to a representation `z` and a linear forecast `r̂ = z·w + b`.

pub mod attention;
mod checkpoint;
pub mod dnn;
mod params;
pub mod recurrent;
pub mod transformer;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use checkpoint::Checkpoint;
pub use params::{Init, ParamSet, ParamShape};
pub use recurrent::Cell;
pub use transformer::{Pooling, TransformerSpec};

use crate::autograd::{Bound, Tape, Var};
use crate::error::{Error, Result};
use crate::tensor::{Activation, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "DNN")]
    Dnn,
    #[serde(rename = "RNN")]
    Rnn,
    #[serde(rename = "LSTM")]
    Lstm,
    #[serde(rename = "GRU")]
    Gru,
    #[serde(rename = "Bi-LSTM")]
    BiLstm,
    #[serde(rename = "LSTM-ATT")]
    LstmAtt,
    #[serde(rename = "Transformer")]
    Transformer,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Dnn,
        ModelKind::Rnn,
        ModelKind::Lstm,
        ModelKind::Gru,
        ModelKind::BiLstm,
        ModelKind::LstmAtt,
        ModelKind::Transformer,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Dnn => "DNN",
            ModelKind::Rnn => "RNN",
            ModelKind::Lstm => "LSTM",
            ModelKind::Gru => "GRU",
            ModelKind::BiLstm => "Bi-LSTM",
            ModelKind::LstmAtt => "LSTM-ATT",
            ModelKind::Transformer => "Transformer",
        }
    }

    pub fn is_recurrent(self) -> bool {
        matches!(
            self,
            ModelKind::Rnn
                | ModelKind::Lstm
                | ModelKind::Gru
                | ModelKind::BiLstm
                | ModelKind::LstmAtt
        )
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match norm.as_str() {
            "dnn" => ModelKind::Dnn,
            "rnn" => ModelKind::Rnn,
            "lstm" => ModelKind::Lstm,
            "gru" => ModelKind::Gru,
            "bilstm" => ModelKind::BiLstm,
            "lstmatt" => ModelKind::LstmAtt,
            "transformer" => ModelKind::Transformer,
            _ => return Err(Error::Config(format!("unknown model kind `{s}`"))),
        })
    }
}

/// What the DNN sees: the whole flattened window or only the formation month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DnnInput {
    Window,
    Current,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub input_dim: usize,
    pub seq_len: usize,
    pub hidden_dim: usize,
    pub num_layers: usize,
    pub dnn_layer_dims: Vec<usize>,
    pub dnn_input: DnnInput,
    pub dnn_activation: Activation,
    pub transformer: TransformerSpec,
}

impl ModelSpec {
    /// Defaults: 51 features × 12 months, two recurrent layers of width 32,
    /// DNN widths 256/64/8, one transformer block with embedding 256 and
    /// feed-forward 64.
    pub fn new(kind: ModelKind) -> Self {
        ModelSpec {
            kind,
            input_dim: crate::data::FEATURE_COUNT,
            seq_len: crate::data::LOOKBACK,
            hidden_dim: 32,
            num_layers: 2,
            dnn_layer_dims: vec![256, 64, 8],
            dnn_input: DnnInput::Window,
            dnn_activation: Activation::Relu,
            transformer: TransformerSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.seq_len == 0 {
            return Err(Error::Config(
                "input_dim and seq_len must be positive".into(),
            ));
        }
        match self.kind {
            ModelKind::Dnn => {
                if self.dnn_layer_dims.len() != 3 || self.dnn_layer_dims.contains(&0) {
                    return Err(Error::Config(format!(
                        "DNN needs exactly three positive hidden widths, got {:?}",
                        self.dnn_layer_dims
                    )));
                }
            }
            ModelKind::Transformer => self.transformer.validate()?,
            _ => {
                if self.hidden_dim == 0 || self.num_layers == 0 {
                    return Err(Error::Config(
                        "recurrent models need positive hidden_dim and num_layers".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Width of the representation `z`.
    pub fn z_dim(&self) -> usize {
        match self.kind {
            ModelKind::Dnn => *self.dnn_layer_dims.last().unwrap_or(&0),
            ModelKind::BiLstm => 2 * self.hidden_dim,
            ModelKind::Transformer => self.transformer.embed_dim,
            _ => self.hidden_dim,
        }
    }

    pub fn dnn_input_width(&self) -> usize {
        match self.dnn_input {
            DnnInput::Window => self.seq_len * self.input_dim,
            DnnInput::Current => self.input_dim,
        }
    }
}

/// Inputs `batch × seq_len × input_dim` (oldest step first) and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceBatch {
    batch: usize,
    seq_len: usize,
    input_dim: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl SequenceBatch {
    pub fn new(
        batch: usize,
        seq_len: usize,
        input_dim: usize,
        inputs: Vec<f64>,
        targets: Vec<f64>,
    ) -> Result<Self> {
        if inputs.len() != batch * seq_len * input_dim || targets.len() != batch {
            return Err(Error::Invalid(format!(
                "batch {batch}x{seq_len}x{input_dim} got {} inputs and {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        if inputs.iter().chain(&targets).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sequence batch".into()));
        }
        Ok(SequenceBatch {
            batch,
            seq_len,
            input_dim,
            inputs,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.batch
    }

    pub fn is_empty(&self) -> bool {
        self.batch == 0
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// `batch × input_dim` features at step `t`.
    pub fn step(&self, t: usize) -> Matrix {
        let (f, stride) = (self.input_dim, self.seq_len * self.input_dim);
        let mut data = Vec::with_capacity(self.batch * f);
        for b in 0..self.batch {
            let start = b * stride + t * f;
            data.extend_from_slice(&self.inputs[start..start + f]);
        }
        Matrix::from_vec(self.batch, f, data)
    }

    /// `batch × (seq_len·input_dim)`
    pub fn flattened(&self) -> Matrix {
        Matrix::from_vec(
            self.batch,
            self.seq_len * self.input_dim,
            self.inputs.clone(),
        )
    }

    /// `(batch·seq_len) × input_dim`, rows grouped by sequence.
    pub fn tokens(&self) -> Matrix {
        Matrix::from_vec(
            self.batch * self.seq_len,
            self.input_dim,
            self.inputs.clone(),
        )
    }

    pub fn target_column(&self) -> Matrix {
        Matrix::from_vec(self.batch, 1, self.targets.clone())
    }
}

/// Forward-pass mode. Dropout on `z` is applied only in training.
pub enum Mode<'a> {
    Eval,
    Train {
        dropout: f64,
        rng: &'a mut ChaCha8Rng,
    },
}

#[derive(Debug, Clone)]
pub struct Forward {
    pub z: Var,
    pub forecast: Var,
    /// Attention weights when the architecture has them (`batch × T` for
    /// LSTM-ATT, one `T × T` per head and sequence for the transformer).
    pub attention: Vec<Var>,
}

#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    shapes: Vec<ParamShape>,
}

impl Model {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        spec.validate()?;
        let shapes = param_shapes(&spec);
        Ok(Model { spec, shapes })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    pub fn param_shapes(&self) -> &[ParamShape] {
        &self.shapes
    }

    pub fn parameter_count(&self) -> usize {
        self.shapes.iter().map(ParamShape::len).sum()
    }

    /// Glorot-uniform weights, zero biases (forget-gate biases 1), unit
    /// layer-norm gains.
    pub fn init_params(&self, seed: u64) -> ParamSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shapes: Vec<&ParamShape> = self.shapes.iter().collect();
        shapes.sort_by(|a, b| a.name.cmp(&b.name));
        let mut params = ParamSet::new();
        for s in shapes {
            params
                .insert(s.name.clone(), s.sample(&mut rng))
                .expect("finite init");
        }
        params
    }

    /// Every expected parameter present with the expected shape, nothing extra.
    pub fn check_params(&self, params: &ParamSet) -> Result<()> {
        for s in &self.shapes {
            let m = params.require(&s.name)?;
            if m.shape() != (s.rows, s.cols) {
                let err = Error::Shape {
                    op: "parameter shape",
                    left: m.shape(),
                    right: (s.rows, s.cols),
                };
                return Err(err.context(format!("parameter `{}`", s.name)));
            }
        }
        if params.len() != self.shapes.len() {
            let extra: Vec<_> = params
                .names()
                .filter(|n| !self.shapes.iter().any(|s| &s.name == *n))
                .cloned()
                .collect();
            return Err(Error::Invalid(format!("unexpected parameters {extra:?}")));
        }
        Ok(())
    }

    fn check_batch(&self, batch: &SequenceBatch) -> Result<()> {
        if batch.input_dim != self.spec.input_dim || batch.seq_len != self.spec.seq_len {
            return Err(Error::Shape {
                op: "batch vs model spec",
                left: (batch.seq_len, batch.input_dim),
                right: (self.spec.seq_len, self.spec.input_dim),
            });
        }
        if batch.is_empty() {
            return Err(Error::Invalid("empty batch".into()));
        }
        Ok(())
    }

    /// Records the representation `z` (`batch × z_dim`) on the tape.
    pub fn represent(
        &self,
        tape: &mut Tape,
        p: &Bound,
        batch: &SequenceBatch,
    ) -> Result<(Var, Vec<Var>)> {
        self.check_batch(batch)?;
        let spec = &self.spec;
        let (h, layers) = (spec.hidden_dim, spec.num_layers);
        let steps = |tape: &mut Tape| -> Vec<Var> {
            (0..batch.seq_len)
                .map(|t| tape.constant(batch.step(t)))
                .collect()
        };
        Ok(match spec.kind {
            ModelKind::Dnn => {
                let input = match spec.dnn_input {
                    DnnInput::Window => tape.constant(batch.flattened()),
                    DnnInput::Current => tape.constant(batch.step(batch.seq_len - 1)),
                };
                let z = dnn::forward(
                    tape,
                    p,
                    input,
                    spec.dnn_input_width(),
                    spec.dnn_layer_dims.len(),
                    spec.dnn_activation,
                )?;
                (z, vec![])
            }
            ModelKind::Rnn | ModelKind::Lstm | ModelKind::Gru => {
                let (cell, prefix) = cell_of(spec.kind);
                let xs = steps(tape);
                let hs = recurrent::stack(tape, p, cell, prefix, &xs, h, layers)?;
                (*hs.last().expect("seq_len > 0"), vec![])
            }
            ModelKind::BiLstm => {
                let xs = steps(tape);
                let fwd = recurrent::stack(tape, p, Cell::Lstm, "bilstm.fwd", &xs, h, layers)?;
                let rev: Vec<Var> = xs.iter().rev().copied().collect();
                let bwd = recurrent::stack(tape, p, Cell::Lstm, "bilstm.bwd", &rev, h, layers)?;
                let z = tape.concat_cols(&[*fwd.last().unwrap(), *bwd.last().unwrap()])?;
                (z, vec![])
            }
            ModelKind::LstmAtt => {
                let xs = steps(tape);
                let hs = recurrent::stack(tape, p, Cell::Lstm, "lstm", &xs, h, layers)?;
                let (z, alpha) = attention::attend(tape, p, "att", &hs)?;
                (z, vec![alpha])
            }
            ModelKind::Transformer => {
                let tokens = tape.constant(batch.tokens());
                let enc = transformer::encode(
                    tape,
                    p,
                    &spec.transformer,
                    tokens,
                    batch.len(),
                    batch.seq_len,
                )?;
                (enc.z, enc.attention)
            }
        })
    }

    pub fn forward(
        &self,
        tape: &mut Tape,
        p: &Bound,
        batch: &SequenceBatch,
        mode: Mode<'_>,
    ) -> Result<Forward> {
        let (z, attention) = self.represent(tape, p, batch)?;
        let head_input = match mode {
            Mode::Train { dropout, rng } if dropout > 0.0 => {
                let (r, c) = tape.value(z).shape();
                let keep = 1.0 - dropout;
                let mask: Vec<f64> = (0..r * c)
                    .map(|_| {
                        if rng.random::<f64>() < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let mask = tape.constant(Matrix::from_vec(r, c, mask));
                tape.mul(z, mask)?
            }
            _ => z,
        };
        let forecast = forecast_head(tape, p, head_input)?;
        Ok(Forward {
            z,
            forecast,
            attention,
        })
    }

    /// Eval-mode forecasts, one per batch row.
    pub fn predict(&self, params: &ParamSet, batch: &SequenceBatch) -> Result<Vec<f64>> {
        let mut tape = Tape::new();
        let bound = tape.bind(params)?;
        let out = self.forward(&mut tape, &bound, batch, Mode::Eval)?;
        let values = tape.value(out.forecast).data().to_vec();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{} forecast", self.kind())));
        }
        Ok(values)
    }
}

/// `r̂ = z·w + b` with identity output.
pub fn forecast_head(tape: &mut Tape, p: &Bound, z: Var) -> Result<Var> {
    let w = p.get("head.w")?;
    let b = p.get("head.b")?;
    let (zw, ww) = (tape.value(z).cols(), tape.value(w).rows());
    if zw != ww {
        return Err(Error::Shape {
            op: "forecast head",
            left: tape.value(z).shape(),
            right: tape.value(w).shape(),
        });
    }
    let y = tape.matmul(z, w)?;
    tape.add_row(y, b)
}

fn cell_of(kind: ModelKind) -> (Cell, &'static str) {
    match kind {
        ModelKind::Rnn => (Cell::Rnn, "rnn"),
        ModelKind::Gru => (Cell::Gru, "gru"),
        _ => (Cell::Lstm, "lstm"),
    }
}

fn param_shapes(spec: &ModelSpec) -> Vec<ParamShape> {
    let (f, h, l) = (spec.input_dim, spec.hidden_dim, spec.num_layers);
    let mut shapes = match spec.kind {
        ModelKind::Dnn => dnn::shapes(spec.dnn_input_width(), &spec.dnn_layer_dims),
        ModelKind::Rnn | ModelKind::Lstm | ModelKind::Gru => {
            let (cell, prefix) = cell_of(spec.kind);
            cell.stack_shapes(prefix, f, h, l)
        }
        ModelKind::BiLstm => {
            let mut s = Cell::Lstm.stack_shapes("bilstm.fwd", f, h, l);
            s.extend(Cell::Lstm.stack_shapes("bilstm.bwd", f, h, l));
            s
        }
        ModelKind::LstmAtt => {
            let mut s = Cell::Lstm.stack_shapes("lstm", f, h, l);
            s.extend(attention::shapes("att", h));
            s
        }
        ModelKind::Transformer => spec.transformer.shapes(f),
    };
    shapes.push(ParamShape::weight("head.w", spec.z_dim(), 1));
    shapes.push(ParamShape::bias("head.b", 1, 0.0));
    shapes
}
