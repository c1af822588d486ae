use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Uniform};

use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// Named weight matrices and bias rows, iterated in name order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet {
    entries: BTreeMap<String, Matrix>,
}

impl ParamSet {
    pub fn new() -> Self {
        ParamSet::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Matrix) -> Result<()> {
        let name = name.into();
        if !value.is_finite() {
            return Err(Error::NonFinite(format!("parameter `{name}`")));
        }
        self.entries.insert(name, value);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Matrix> {
        self.entries.get(name)
    }

    pub fn require(&self, name: &str) -> Result<&Matrix> {
        self.get(name)
            .ok_or_else(|| Error::Invalid(format!("missing parameter `{name}`")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Matrix)> {
        self.entries.iter()
    }

    pub(crate) fn iter_mut(&mut self) -> impl Iterator<Item = (&String, &mut Matrix)> {
        self.entries.iter_mut()
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of scalar entries.
    pub fn parameter_count(&self) -> usize {
        self.entries.values().map(Matrix::len).sum()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.entries.values().map(Matrix::sum_of_squares).sum()
    }

    pub fn set_entry(&mut self, name: &str, index: usize, value: f64) -> Result<()> {
        let m = self
            .entries
            .get_mut(name)
            .ok_or_else(|| Error::Invalid(format!("missing parameter `{name}`")))?;
        let cols = m.cols();
        m.set(index / cols, index % cols, value)
    }

    /// Overwrites a whole matrix, keeping its shape.
    pub fn replace(&mut self, name: &str, value: Matrix) -> Result<()> {
        let m = self
            .entries
            .get_mut(name)
            .ok_or_else(|| Error::Invalid(format!("missing parameter `{name}`")))?;
        if m.shape() != value.shape() {
            return Err(Error::Shape {
                op: "replace",
                left: m.shape(),
                right: value.shape(),
            });
        }
        *m = value;
        Ok(())
    }
}

/// How a freshly initialized matrix is filled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    /// Uniform on ±√(6 / (fan_in + fan_out)), with fan_in = rows, fan_out = cols.
    Glorot,
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamShape {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub init: Init,
}

impl ParamShape {
    pub(crate) fn weight(name: impl Into<String>, rows: usize, cols: usize) -> Self {
        ParamShape {
            name: name.into(),
            rows,
            cols,
            init: Init::Glorot,
        }
    }

    pub(crate) fn bias(name: impl Into<String>, cols: usize, value: f64) -> Self {
        ParamShape {
            name: name.into(),
            rows: 1,
            cols,
            init: Init::Constant(value),
        }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn sample(&self, rng: &mut impl Rng) -> Matrix {
        match self.init {
            Init::Constant(v) => Matrix::filled(self.rows, self.cols, v),
            Init::Glorot => {
                let bound = (6.0 / (self.rows + self.cols) as f64).sqrt();
                let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
                let data = (0..self.len()).map(|_| dist.sample(rng)).collect();
                Matrix::from_vec(self.rows, self.cols, data)
            }
        }
    }
}
