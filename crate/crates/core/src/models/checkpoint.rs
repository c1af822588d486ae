use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Model, ModelSpec, ParamSet};
use crate::error::{Error, Result};
use crate::tensor::Matrix;

const FORMAT: &str = "deepseq-checkpoint/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StoredParam {
    name: String,
    shape: [usize; 2],
    values: Vec<f64>,
}

/// A model spec together with its parameters. Serialized as JSON with
/// shortest round-trip float formatting, so reloading is bit-exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    format: String,
    pub spec: ModelSpec,
    pub config_hash: String,
    params: Vec<StoredParam>,
}

impl Checkpoint {
    pub fn new(spec: ModelSpec, config_hash: impl Into<String>, params: &ParamSet) -> Self {
        let params = params
            .iter()
            .map(|(name, m)| StoredParam {
                name: name.clone(),
                shape: [m.rows(), m.cols()],
                values: m.data().to_vec(),
            })
            .collect();
        Checkpoint {
            format: FORMAT.to_string(),
            spec,
            config_hash: config_hash.into(),
            params,
        }
    }

    pub fn params(&self) -> Result<ParamSet> {
        let mut out = ParamSet::new();
        for p in &self.params {
            let m = Matrix::new(p.shape[0], p.shape[1], p.values.clone())
                .map_err(|e| e.context(format!("checkpoint parameter `{}`", p.name)))?;
            if out.get(&p.name).is_some() {
                return Err(Error::Data(format!(
                    "duplicate checkpoint parameter `{}`",
                    p.name
                )));
            }
            out.insert(p.name.clone(), m)?;
        }
        Ok(out)
    }

    /// Rebuilds the model and checks the parameters against it.
    pub fn restore(&self) -> Result<(Model, ParamSet)> {
        let model = Model::new(self.spec.clone())?;
        let params = self.params()?;
        model.check_params(&params)?;
        Ok((model, params))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text)
            .map_err(|e| Error::Data(format!("malformed checkpoint: {e}")))?;
        if ck.format != FORMAT {
            return Err(Error::Data(format!(
                "unsupported checkpoint format `{}` (expected `{FORMAT}`)",
                ck.format
            )));
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| e.context(path.display().to_string()))
    }
}
