use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::models::ParamSet;
use crate::tensor::{ewise_unchecked, gemm, softmax_in_place, Activation, Ewise, Matrix};

/// Handle to a node recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    /// `a · bᵀ`
    MatMulNt(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    /// `a + row` broadcast over rows.
    AddRow(Var, Var),
    /// `a ⊙ row` broadcast over rows.
    MulRow(Var, Var),
    /// `a ⊙ col` broadcast over columns.
    MulCol(Var, Var),
    Scale(Var, f64),
    Activate(Var, Activation),
    SoftmaxRows(Var),
    ConcatCols(Vec<Var>),
    SliceCols(Var, usize),
    ConcatRows(Vec<Var>),
    SliceRows(Var, usize),
    Sum(Var),
    Mean(Var),
    Square(Var),
    MeanRowGroups(Var, usize),
    /// Per-row standardization; holds `1/σ` of every row. The node value is `x̂`.
    LayerNorm(Var, Vec<f64>),
}

#[derive(Debug)]
struct Node {
    value: Matrix,
    op: Op,
}

/// Forward record of matrix operations, replayed in reverse by [`Tape::backward`].
///
/// Nodes are appended in evaluation order, so every node's inputs have
/// smaller indices than the node itself.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    params: Vec<(String, Var)>,
}

/// Parameter name to tape variable, produced by [`Tape::bind`].
#[derive(Debug, Clone, Default)]
pub struct Bound {
    vars: BTreeMap<String, Var>,
}

impl Bound {
    pub fn get(&self, name: &str) -> Result<Var> {
        self.vars
            .get(name)
            .copied()
            .ok_or_else(|| Error::Invalid(format!("missing parameter `{name}`")))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.vars.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, Var)> {
        self.vars.iter().map(|(n, v)| (n, *v))
    }
}

/// Gradients keyed by parameter name, same shapes as the parameters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GradientSet {
    grads: BTreeMap<String, Matrix>,
}

impl GradientSet {
    pub fn get(&self, name: &str) -> Option<&Matrix> {
        self.grads.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Matrix)> {
        self.grads.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.grads.keys()
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }

    pub fn global_norm(&self) -> f64 {
        self.grads
            .values()
            .map(Matrix::sum_of_squares)
            .sum::<f64>()
            .sqrt()
    }

    /// Rescales so the global L2 norm is at most `max_norm`; returns the
    /// norm before clipping.
    pub fn clip_global_norm(&mut self, max_norm: f64) -> f64 {
        let norm = self.global_norm();
        if norm > max_norm && norm > 0.0 {
            let factor = max_norm / norm;
            for g in self.grads.values_mut() {
                g.data_mut().iter_mut().for_each(|v| *v *= factor);
            }
        }
        norm
    }

    /// Elementwise `self += other`; both sets must cover the same names.
    pub fn accumulate(&mut self, other: &GradientSet) -> Result<()> {
        if self.grads.is_empty() {
            self.grads = other.grads.clone();
            return Ok(());
        }
        for (name, g) in &other.grads {
            let mine = self
                .grads
                .get_mut(name)
                .ok_or_else(|| Error::Invalid(format!("gradient `{name}` not in accumulator")))?;
            if mine.shape() != g.shape() {
                return Err(Error::Shape {
                    op: "accumulate",
                    left: mine.shape(),
                    right: g.shape(),
                });
            }
            mine.data_mut()
                .iter_mut()
                .zip(g.data())
                .for_each(|(a, b)| *a += b);
        }
        Ok(())
    }

    pub(crate) fn insert(&mut self, name: String, grad: Matrix) {
        self.grads.insert(name, grad);
    }
}

fn shape_err(op: &'static str, a: &Matrix, b: &Matrix) -> Error {
    Error::Shape {
        op,
        left: a.shape(),
        right: b.shape(),
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    fn push(&mut self, value: Matrix, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf)
    }

    /// Records a trainable leaf.
    pub fn param(&mut self, name: impl Into<String>, value: Matrix) -> Result<Var> {
        let name = name.into();
        if self.params.iter().any(|(n, _)| *n == name) {
            return Err(Error::Invalid(format!("parameter `{name}` bound twice")));
        }
        let v = self.push(value, Op::Leaf);
        self.params.push((name, v));
        Ok(v)
    }

    /// Records every matrix of `params` as a trainable leaf.
    pub fn bind(&mut self, params: &ParamSet) -> Result<Bound> {
        let mut vars = BTreeMap::new();
        for (name, m) in params.iter() {
            let v = self.param(name.clone(), m.clone())?;
            vars.insert(name.clone(), v);
        }
        Ok(Bound { vars })
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        if x.cols() != y.rows() {
            return Err(shape_err("matmul", x, y));
        }
        let mut out = Matrix::zeros(x.rows(), y.cols());
        gemm(x, false, y, false, &mut out, 0.0);
        Ok(self.push(out, Op::MatMul(a, b)))
    }

    /// `a · bᵀ`
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        if x.cols() != y.cols() {
            return Err(shape_err("matmul_nt", x, y));
        }
        let mut out = Matrix::zeros(x.rows(), y.rows());
        gemm(x, false, y, true, &mut out, 0.0);
        Ok(self.push(out, Op::MatMulNt(a, b)))
    }

    fn ewise(&mut self, a: Var, b: Var, kind: Ewise) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        if x.shape() != y.shape() {
            return Err(shape_err("ewise", x, y));
        }
        let out = ewise_unchecked(x, y, kind);
        let op = match kind {
            Ewise::Add => Op::Add(a, b),
            Ewise::Sub => Op::Sub(a, b),
            Ewise::Mul => Op::Mul(a, b),
        };
        Ok(self.push(out, op))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.ewise(a, b, Ewise::Add)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.ewise(a, b, Ewise::Sub)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.ewise(a, b, Ewise::Mul)
    }

    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (x, r) = (self.value(a), self.value(row));
        if r.rows() != 1 || r.cols() != x.cols() {
            return Err(shape_err("add_row", x, r));
        }
        let mut out = x.clone();
        let cols = x.cols();
        for chunk in out.data_mut().chunks_mut(cols.max(1)) {
            chunk.iter_mut().zip(r.data()).for_each(|(v, b)| *v += b);
        }
        Ok(self.push(out, Op::AddRow(a, row)))
    }

    pub fn mul_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (x, r) = (self.value(a), self.value(row));
        if r.rows() != 1 || r.cols() != x.cols() {
            return Err(shape_err("mul_row", x, r));
        }
        let mut out = x.clone();
        let cols = x.cols();
        for chunk in out.data_mut().chunks_mut(cols.max(1)) {
            chunk.iter_mut().zip(r.data()).for_each(|(v, g)| *v *= g);
        }
        Ok(self.push(out, Op::MulRow(a, row)))
    }

    pub fn mul_col(&mut self, a: Var, col: Var) -> Result<Var> {
        let (x, c) = (self.value(a), self.value(col));
        if c.cols() != 1 || c.rows() != x.rows() {
            return Err(shape_err("mul_col", x, c));
        }
        let mut out = x.clone();
        let cols = x.cols();
        if cols > 0 {
            for (chunk, g) in out.data_mut().chunks_mut(cols).zip(c.data()) {
                chunk.iter_mut().for_each(|v| *v *= g);
            }
        }
        Ok(self.push(out, Op::MulCol(a, col)))
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        let out = self.value(a).map(|v| v * factor);
        self.push(out, Op::Scale(a, factor))
    }

    pub fn activate(&mut self, a: Var, kind: Activation) -> Var {
        let out = self.value(a).activate(kind);
        self.push(out, Op::Activate(a, kind))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.activate(a, Activation::Tanh)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.activate(a, Activation::Sigmoid)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.activate(a, Activation::Relu)
    }

    pub fn softmax_rows(&mut self, a: Var) -> Result<Var> {
        let x = self.value(a);
        if x.cols() == 0 {
            return Err(Error::Invalid("softmax over zero columns".into()));
        }
        let mut out = x.clone();
        let cols = x.cols();
        for row in out.data_mut().chunks_mut(cols) {
            softmax_in_place(row);
        }
        Ok(self.push(out, Op::SoftmaxRows(a)))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Invalid("concat of nothing".into()))?;
        let rows = self.value(*first).rows();
        let mut cols = 0;
        for p in parts {
            let m = self.value(*p);
            if m.rows() != rows {
                return Err(shape_err("concat_cols", self.value(*first), m));
            }
            cols += m.cols();
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for p in parts {
                data.extend_from_slice(self.value(*p).row(r));
            }
        }
        Ok(self.push(
            Matrix::from_vec(rows, cols, data),
            Op::ConcatCols(parts.to_vec()),
        ))
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let x = self.value(a);
        if start + len > x.cols() {
            return Err(Error::Invalid(format!(
                "column slice {start}..{} out of {} columns",
                start + len,
                x.cols()
            )));
        }
        let mut data = Vec::with_capacity(x.rows() * len);
        for r in 0..x.rows() {
            data.extend_from_slice(&x.row(r)[start..start + len]);
        }
        let out = Matrix::from_vec(x.rows(), len, data);
        Ok(self.push(out, Op::SliceCols(a, start)))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Invalid("concat of nothing".into()))?;
        let cols = self.value(*first).cols();
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            let m = self.value(*p);
            if m.cols() != cols {
                return Err(shape_err("concat_rows", self.value(*first), m));
            }
            rows += m.rows();
            data.extend_from_slice(m.data());
        }
        Ok(self.push(
            Matrix::from_vec(rows, cols, data),
            Op::ConcatRows(parts.to_vec()),
        ))
    }

    pub fn slice_rows(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let x = self.value(a);
        if start + len > x.rows() {
            return Err(Error::Invalid(format!(
                "row slice {start}..{} out of {} rows",
                start + len,
                x.rows()
            )));
        }
        let c = x.cols();
        let out = Matrix::from_vec(len, c, x.data()[start * c..(start + len) * c].to_vec());
        Ok(self.push(out, Op::SliceRows(a, start)))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).sum();
        self.push(Matrix::scalar(s), Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Result<Var> {
        let x = self.value(a);
        if x.is_empty() {
            return Err(Error::Invalid("mean of an empty matrix".into()));
        }
        let m = x.sum() / x.len() as f64;
        Ok(self.push(Matrix::scalar(m), Op::Mean(a)))
    }

    pub fn square(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|v| v * v);
        self.push(out, Op::Square(a))
    }

    /// Averages consecutive groups of `group` rows: `(n·group × c) → (n × c)`.
    pub fn mean_row_groups(&mut self, a: Var, group: usize) -> Result<Var> {
        let x = self.value(a);
        if group == 0 || !x.rows().is_multiple_of(group) {
            return Err(Error::Invalid(format!(
                "cannot pool {} rows in groups of {group}",
                x.rows()
            )));
        }
        let (n, c) = (x.rows() / group, x.cols());
        let mut data = vec![0.0; n * c];
        for r in 0..x.rows() {
            let dst = &mut data[(r / group) * c..(r / group + 1) * c];
            dst.iter_mut().zip(x.row(r)).for_each(|(d, v)| *d += v);
        }
        let inv = 1.0 / group as f64;
        data.iter_mut().for_each(|v| *v *= inv);
        Ok(self.push(Matrix::from_vec(n, c, data), Op::MeanRowGroups(a, group)))
    }

    /// Standardizes each row to zero mean and unit (population) variance.
    pub fn layer_norm(&mut self, a: Var, eps: f64) -> Result<Var> {
        let x = self.value(a);
        let c = x.cols();
        if c == 0 {
            return Err(Error::Invalid("layer norm over zero columns".into()));
        }
        let mut out = x.clone();
        let mut inv_std = Vec::with_capacity(x.rows());
        for row in out.data_mut().chunks_mut(c) {
            let mean = row.iter().sum::<f64>() / c as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / c as f64;
            let inv = 1.0 / (var + eps).sqrt();
            row.iter_mut().for_each(|v| *v = (*v - mean) * inv);
            inv_std.push(inv);
        }
        Ok(self.push(out, Op::LayerNorm(a, inv_std)))
    }

    /// Reverse sweep from a scalar `loss`, returning the gradient of every
    /// bound parameter. Parameters the loss does not reach get zeros.
    pub fn backward(&self, loss: Var) -> Result<GradientSet> {
        let adj = self.adjoints(loss)?;
        let mut grads = GradientSet::default();
        for (name, v) in &self.params {
            let shape = self.value(*v).shape();
            let g = match &adj[v.0] {
                Some(g) => g.clone(),
                None => Matrix::zeros(shape.0, shape.1),
            };
            if !g.is_finite() {
                return Err(Error::NonFinite(format!("gradient of `{name}`")));
            }
            grads.insert(name.clone(), g);
        }
        Ok(grads)
    }

    fn adjoints(&self, loss: Var) -> Result<Vec<Option<Matrix>>> {
        let lv = self.value(loss);
        if lv.shape() != (1, 1) {
            return Err(Error::Invalid(format!(
                "backward needs a scalar loss, got {:?}",
                lv.shape()
            )));
        }
        if !lv.is_finite() {
            return Err(Error::NonFinite("loss".into()));
        }
        let mut adj: Vec<Option<Matrix>> = Vec::with_capacity(loss.0 + 1);
        adj.resize_with(loss.0 + 1, || None);
        adj[loss.0] = Some(Matrix::scalar(1.0));

        for i in (0..=loss.0).rev() {
            let Some(g) = adj[i].take() else { continue };
            let node = &self.nodes[i];
            match &node.op {
                Op::Leaf => {
                    adj[i] = Some(g);
                }
                Op::MatMul(a, b) => {
                    let (x, y) = (self.value(*a), self.value(*b));
                    gemm_into(&mut adj[a.0], &g, false, y, true, x.shape());
                    gemm_into(&mut adj[b.0], x, true, &g, false, y.shape());
                }
                Op::MatMulNt(a, b) => {
                    let (x, y) = (self.value(*a), self.value(*b));
                    // c = x yᵀ: dx = g y, dy = gᵀ x
                    gemm_into(&mut adj[a.0], &g, false, y, false, x.shape());
                    gemm_into(&mut adj[b.0], &g, true, x, false, y.shape());
                }
                Op::Add(a, b) => {
                    add_into(&mut adj[a.0], &g);
                    add_into(&mut adj[b.0], &g);
                }
                Op::Sub(a, b) => {
                    add_into(&mut adj[a.0], &g);
                    add_scaled_into(&mut adj[b.0], &g, -1.0);
                }
                Op::Mul(a, b) => {
                    let (x, y) = (self.value(*a), self.value(*b));
                    add_into(&mut adj[a.0], &ewise_unchecked(&g, y, Ewise::Mul));
                    add_into(&mut adj[b.0], &ewise_unchecked(&g, x, Ewise::Mul));
                }
                Op::AddRow(a, row) => {
                    add_into(&mut adj[a.0], &g);
                    add_into(&mut adj[row.0], &column_sums(&g));
                }
                Op::MulRow(a, row) => {
                    let (x, r) = (self.value(*a), self.value(*row));
                    let c = x.cols();
                    let mut ga = g.clone();
                    let mut gr = vec![0.0; c];
                    for (gchunk, xchunk) in ga
                        .data_mut()
                        .chunks_mut(c.max(1))
                        .zip(x.data().chunks(c.max(1)))
                    {
                        for j in 0..c {
                            gr[j] += gchunk[j] * xchunk[j];
                            gchunk[j] *= r.data()[j];
                        }
                    }
                    add_into(&mut adj[a.0], &ga);
                    add_into(&mut adj[row.0], &Matrix::from_vec(1, c, gr));
                }
                Op::MulCol(a, col) => {
                    let (x, cv) = (self.value(*a), self.value(*col));
                    let c = x.cols();
                    let mut ga = g.clone();
                    let mut gc = vec![0.0; x.rows()];
                    if c > 0 {
                        for (r, (gchunk, xchunk)) in ga
                            .data_mut()
                            .chunks_mut(c)
                            .zip(x.data().chunks(c))
                            .enumerate()
                        {
                            let s = cv.data()[r];
                            for j in 0..c {
                                gc[r] += gchunk[j] * xchunk[j];
                                gchunk[j] *= s;
                            }
                        }
                    }
                    add_into(&mut adj[a.0], &ga);
                    add_into(&mut adj[col.0], &Matrix::from_vec(x.rows(), 1, gc));
                }
                Op::Scale(a, f) => add_scaled_into(&mut adj[a.0], &g, *f),
                Op::Activate(a, kind) => {
                    let y = &node.value;
                    let d: Vec<f64> = match kind {
                        Activation::Identity => g.data().to_vec(),
                        Activation::Tanh => zip_map(&g, y, |g, y| g * (1.0 - y * y)),
                        Activation::Sigmoid => zip_map(&g, y, |g, y| g * y * (1.0 - y)),
                        Activation::Relu => zip_map(&g, y, |g, y| if y > 0.0 { g } else { 0.0 }),
                    };
                    add_into(&mut adj[a.0], &Matrix::from_vec(y.rows(), y.cols(), d));
                }
                Op::SoftmaxRows(a) => {
                    let y = &node.value;
                    let c = y.cols();
                    let mut d = vec![0.0; y.len()];
                    for ((dr, gr), yr) in d
                        .chunks_mut(c)
                        .zip(g.data().chunks(c))
                        .zip(y.data().chunks(c))
                    {
                        let dot: f64 = gr.iter().zip(yr).map(|(a, b)| a * b).sum();
                        for j in 0..c {
                            dr[j] = yr[j] * (gr[j] - dot);
                        }
                    }
                    add_into(&mut adj[a.0], &Matrix::from_vec(y.rows(), c, d));
                }
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let (rows, cols) = self.value(*p).shape();
                        let mut d = Vec::with_capacity(rows * cols);
                        for r in 0..rows {
                            d.extend_from_slice(&g.row(r)[offset..offset + cols]);
                        }
                        add_into(&mut adj[p.0], &Matrix::from_vec(rows, cols, d));
                        offset += cols;
                    }
                }
                Op::SliceCols(a, start) => {
                    let (rows, cols) = self.value(*a).shape();
                    let slot = adj[a.0].get_or_insert_with(|| Matrix::zeros(rows, cols));
                    let len = g.cols();
                    let data = slot.data_mut();
                    for r in 0..rows {
                        let dst = &mut data[r * cols + start..r * cols + start + len];
                        dst.iter_mut().zip(g.row(r)).for_each(|(d, v)| *d += v);
                    }
                }
                Op::ConcatRows(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let (rows, cols) = self.value(*p).shape();
                        let d = g.data()[offset * cols..(offset + rows) * cols].to_vec();
                        add_into(&mut adj[p.0], &Matrix::from_vec(rows, cols, d));
                        offset += rows;
                    }
                }
                Op::SliceRows(a, start) => {
                    let (rows, cols) = self.value(*a).shape();
                    let slot = adj[a.0].get_or_insert_with(|| Matrix::zeros(rows, cols));
                    let dst = &mut slot.data_mut()[start * cols..start * cols + g.len()];
                    dst.iter_mut().zip(g.data()).for_each(|(d, v)| *d += v);
                }
                Op::Sum(a) => {
                    let (r, c) = self.value(*a).shape();
                    add_into(&mut adj[a.0], &Matrix::filled(r, c, g.data()[0]));
                }
                Op::Mean(a) => {
                    let (r, c) = self.value(*a).shape();
                    let v = g.data()[0] / (r * c) as f64;
                    add_into(&mut adj[a.0], &Matrix::filled(r, c, v));
                }
                Op::Square(a) => {
                    let x = self.value(*a);
                    let d = zip_map(&g, x, |g, x| 2.0 * g * x);
                    add_into(&mut adj[a.0], &Matrix::from_vec(x.rows(), x.cols(), d));
                }
                Op::MeanRowGroups(a, group) => {
                    let (rows, cols) = self.value(*a).shape();
                    let inv = 1.0 / *group as f64;
                    let mut d = Vec::with_capacity(rows * cols);
                    for r in 0..rows {
                        d.extend(g.row(r / group).iter().map(|v| v * inv));
                    }
                    add_into(&mut adj[a.0], &Matrix::from_vec(rows, cols, d));
                }
                Op::LayerNorm(a, inv_std) => {
                    let xhat = &node.value;
                    let c = xhat.cols();
                    let mut d = vec![0.0; xhat.len()];
                    for (r, dr) in d.chunks_mut(c).enumerate() {
                        let gr = g.row(r);
                        let xr = xhat.row(r);
                        let mean_g = gr.iter().sum::<f64>() / c as f64;
                        let mean_gx = gr.iter().zip(xr).map(|(a, b)| a * b).sum::<f64>() / c as f64;
                        for j in 0..c {
                            dr[j] = inv_std[r] * (gr[j] - mean_g - xr[j] * mean_gx);
                        }
                    }
                    add_into(&mut adj[a.0], &Matrix::from_vec(xhat.rows(), c, d));
                }
            }
        }
        Ok(adj)
    }
}

fn zip_map(a: &Matrix, b: &Matrix, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| f(x, y))
        .collect()
}

fn column_sums(g: &Matrix) -> Matrix {
    let c = g.cols();
    let mut out = vec![0.0; c];
    if c > 0 {
        for row in g.data().chunks(c) {
            out.iter_mut().zip(row).for_each(|(o, v)| *o += v);
        }
    }
    Matrix::from_vec(1, c, out)
}

fn add_into(slot: &mut Option<Matrix>, g: &Matrix) {
    match slot {
        Some(acc) => acc
            .data_mut()
            .iter_mut()
            .zip(g.data())
            .for_each(|(a, b)| *a += b),
        None => *slot = Some(g.clone()),
    }
}

fn add_scaled_into(slot: &mut Option<Matrix>, g: &Matrix, factor: f64) {
    match slot {
        Some(acc) => acc
            .data_mut()
            .iter_mut()
            .zip(g.data())
            .for_each(|(a, b)| *a += factor * b),
        None => *slot = Some(g.map(|v| v * factor)),
    }
}

fn gemm_into(
    slot: &mut Option<Matrix>,
    a: &Matrix,
    trans_a: bool,
    b: &Matrix,
    trans_b: bool,
    shape: (usize, usize),
) {
    match slot {
        Some(acc) => gemm(a, trans_a, b, trans_b, acc, 1.0),
        None => {
            let mut out = Matrix::zeros(shape.0, shape.1);
            gemm(a, trans_a, b, trans_b, &mut out, 0.0);
            *slot = Some(out);
        }
    }
}
