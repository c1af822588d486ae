//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::data::{Month, SynthSpec};
use crate::error::{Error, Result};
use crate::models::{DnnInput, ModelKind, ModelSpec, Pooling, TransformerSpec};
use crate::optim::TrainConfig;
use crate::portfolio::WeightMode;
use crate::tensor::Activation;

/// Every recognized key with its default.
pub const DEFAULTS: &[(&str, &str)] = &[
    ("data.panel", ""),
    ("evaluate.reuse_forecasts", "false"),
    ("model.dnn_activation", "relu"),
    ("model.dnn_input", "window"),
    ("model.dnn_layers", "256,64,8"),
    ("model.embed_dim", "256"),
    ("model.ff_dim", "64"),
    ("model.hidden_dim", "32"),
    ("model.num_blocks", "1"),
    ("model.num_heads", "4"),
    ("model.num_layers", "2"),
    ("model.pooling", "mean"),
    ("model.positional_encoding", "true"),
    ("model.seq_len", "12"),
    ("models", "DNN,RNN,LSTM,GRU,Bi-LSTM,LSTM-ATT,Transformer"),
    ("output.dir", "out"),
    ("portfolio.modes", "equal,value"),
    ("schedule.initial_train_years", "17"),
    ("schedule.refit_every", "1"),
    ("seed", "0"),
    ("synth.momentum_coeff", "0.3"),
    ("synth.n_assets", "200"),
    ("synth.n_months", "240"),
    ("synth.noise_std", "0.05"),
    ("synth.reversal_coeff", "-0.1"),
    ("synth.start", "1970-01"),
    ("train.batch_size", "2048"),
    ("train.clip_norm", "5"),
    ("train.dropout", "0.2"),
    ("train.l2", "0.0005"),
    ("train.learning_rate", "0.001"),
    ("train.max_epochs", "100"),
    ("train.patience", "5"),
    ("train.validation_fraction", "0.1"),
    ("train.warm_start", "true"),
];

/// Keys that only say where results go and are left out of the hash.
const UNHASHED: &[&str] = &["output.dir"];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    values: BTreeMap<String, String>,
    pub panel: Option<PathBuf>,
    pub synth: SynthSpec,
    pub models: Vec<ModelKind>,
    pub train: TrainConfig,
    pub model_template: ModelSpec,
    pub initial_train_years: usize,
    pub refit_every: usize,
    pub portfolio_modes: Vec<WeightMode>,
    pub reuse_forecasts: bool,
    pub output_dir: PathBuf,
    pub seed: u64,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str, source: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: source.to_string(),
            line: n + 1,
            msg: format!("expected `key = value`, got `{line}`"),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Turns `--key value` / `--key=value` flags into pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let key = a
            .strip_prefix("--")
            .ok_or_else(|| Error::Config(format!("expected `--key value`, got `{a}`")))?;
        if let Some((k, v)) = key.split_once('=') {
            out.push((k.to_string(), v.to_string()));
        } else {
            let v = it
                .next()
                .ok_or_else(|| Error::Config(format!("flag `{a}` needs a value")))?;
            out.push((key.to_string(), v.clone()));
        }
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "`{key}`: expected true or false, got `{v}`"
        ))),
    }
}

fn parse_list<T>(v: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(f)
        .collect()
}

impl ExperimentConfig {
    /// Defaults, then the file (if any), then `overrides`, later wins.
    pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut pairs = Vec::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            pairs = parse_kv(&text, &path.display().to_string())
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        pairs.extend_from_slice(overrides);
        Self::from_pairs(&pairs)
    }

    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let mut values: BTreeMap<String, String> = DEFAULTS
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        for (k, v) in pairs {
            match values.get_mut(k) {
                Some(slot) => *slot = v.clone(),
                None => return Err(Error::Config(format!("unknown config key `{k}`"))),
            }
        }
        Self::build(values)
    }

    fn build(values: BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| values[k].as_str();
        let seed: u64 = parse("seed", get("seed"))?;
        let synth = SynthSpec {
            n_assets: parse("synth.n_assets", get("synth.n_assets"))?,
            n_months: parse("synth.n_months", get("synth.n_months"))?,
            momentum_coeff: parse("synth.momentum_coeff", get("synth.momentum_coeff"))?,
            reversal_coeff: parse("synth.reversal_coeff", get("synth.reversal_coeff"))?,
            noise_std: parse("synth.noise_std", get("synth.noise_std"))?,
            seed,
            start: get("synth.start")
                .parse::<Month>()
                .map_err(|e| Error::Config(format!("`synth.start`: {e}")))?,
        };
        let clip = get("train.clip_norm");
        let train = TrainConfig {
            learning_rate: parse("train.learning_rate", get("train.learning_rate"))?,
            dropout: parse("train.dropout", get("train.dropout"))?,
            l2: parse("train.l2", get("train.l2"))?,
            batch_size: parse("train.batch_size", get("train.batch_size"))?,
            max_epochs: parse("train.max_epochs", get("train.max_epochs"))?,
            patience: parse("train.patience", get("train.patience"))?,
            clip_norm: match clip.to_ascii_lowercase().as_str() {
                "none" | "off" | "" => None,
                _ => Some(parse("train.clip_norm", clip)?),
            },
            validation_fraction: parse(
                "train.validation_fraction",
                get("train.validation_fraction"),
            )?,
            warm_start: parse_bool("train.warm_start", get("train.warm_start"))?,
            seed,
        };
        train.validate()?;

        let transformer = TransformerSpec {
            embed_dim: parse("model.embed_dim", get("model.embed_dim"))?,
            ff_dim: parse("model.ff_dim", get("model.ff_dim"))?,
            num_heads: parse("model.num_heads", get("model.num_heads"))?,
            num_blocks: parse("model.num_blocks", get("model.num_blocks"))?,
            positional_encoding: parse_bool(
                "model.positional_encoding",
                get("model.positional_encoding"),
            )?,
            pooling: match get("model.pooling") {
                "mean" => Pooling::Mean,
                "last" => Pooling::Last,
                v => {
                    return Err(Error::Config(format!(
                        "`model.pooling`: mean or last, got `{v}`"
                    )))
                }
            },
        };
        let mut model_template = ModelSpec::new(ModelKind::Lstm);
        model_template.hidden_dim = parse("model.hidden_dim", get("model.hidden_dim"))?;
        model_template.num_layers = parse("model.num_layers", get("model.num_layers"))?;
        model_template.seq_len = parse("model.seq_len", get("model.seq_len"))?;
        model_template.dnn_layer_dims =
            parse_list(get("model.dnn_layers"), |s| parse("model.dnn_layers", s))?;
        model_template.dnn_input = match get("model.dnn_input") {
            "window" => DnnInput::Window,
            "current" => DnnInput::Current,
            v => {
                return Err(Error::Config(format!(
                    "`model.dnn_input`: window or current, got `{v}`"
                )))
            }
        };
        model_template.dnn_activation = match get("model.dnn_activation") {
            "relu" => Activation::Relu,
            "tanh" => Activation::Tanh,
            "sigmoid" => Activation::Sigmoid,
            "identity" => Activation::Identity,
            v => {
                return Err(Error::Config(format!(
                    "`model.dnn_activation`: relu, tanh, sigmoid or identity, got `{v}`"
                )))
            }
        };
        model_template.transformer = transformer;

        let models = parse_list(get("models"), |s| s.parse::<ModelKind>())?;
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = models.iter().find(|m| !seen.insert(**m)) {
            return Err(Error::Config(format!("model `{dup}` listed twice")));
        }
        for &kind in &models {
            ModelSpec {
                kind,
                ..model_template.clone()
            }
            .validate()?;
        }
        let portfolio_modes = parse_list(get("portfolio.modes"), |s| s.parse::<WeightMode>())?;
        let panel = Some(get("data.panel"))
            .filter(|s| !s.is_empty())
            .map(PathBuf::from);
        let cfg = ExperimentConfig {
            panel,
            synth,
            models,
            train,
            model_template,
            initial_train_years: parse(
                "schedule.initial_train_years",
                get("schedule.initial_train_years"),
            )?,
            refit_every: parse("schedule.refit_every", get("schedule.refit_every"))?,
            portfolio_modes,
            reuse_forecasts: parse_bool(
                "evaluate.reuse_forecasts",
                get("evaluate.reuse_forecasts"),
            )?,
            output_dir: PathBuf::from(get("output.dir")),
            seed,
            values: BTreeMap::new(),
        };
        if cfg.initial_train_years == 0 || cfg.refit_every == 0 {
            return Err(Error::Config(
                "schedule.initial_train_years and schedule.refit_every must be positive".into(),
            ));
        }
        Ok(ExperimentConfig { values, ..cfg })
    }

    pub fn model_spec(&self, kind: ModelKind) -> ModelSpec {
        ModelSpec {
            kind,
            ..self.model_template.clone()
        }
    }

    /// Effective `key = value` lines, sorted, excluding output location.
    pub fn canonical(&self) -> String {
        self.values
            .iter()
            .filter(|(k, _)| !UNHASHED.contains(&k.as_str()))
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    /// SHA-256 of [`ExperimentConfig::canonical`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn panel_path(&self) -> PathBuf {
        self.panel
            .clone()
            .unwrap_or_else(|| self.output_dir.join("panel.csv"))
    }
}
