use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::Tensor;
use crate::{contract, math, Error, Result};

/// Handle to a node of a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    AddRow(Var, Var),
    MulCol(Var, Var),
    MatMul(Var, Var),
    Transpose(Var),
    Relu(Var),
    Log(Var),
    Exp(Var),
    Clamp(Var, f64, f64),
    SoftmaxRows(Var),
    Sum(Var),
    Mean(Var),
    ConcatCols(Vec<Var>),
    GatherRows(Var, Vec<usize>),
    GroupSumRows(Var, usize),
    NarrowCols(Var, usize),
    Reshape(Var),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Gradients produced by [`Graph::backward`], indexed by node.
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient of the loss with respect to `v`, if `v` requires grad.
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }
}

/// Arena-backed tape of differentiable operations.
#[derive(Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
    backward_done: bool,
}

fn finite(op: &'static str, t: Tensor) -> Result<Tensor> {
    if t.is_finite() {
        Ok(t)
    } else {
        Err(Error::NonFinite { op })
    }
}

fn same_shape(op: &'static str, a: &Tensor, b: &Tensor) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Shape { op, detail: format!("{:?} vs {:?}", a.shape(), b.shape()) });
    }
    Ok(())
}

// c[m×p] += a[m×n] · b[n×p]
fn matmul_into(a: &[f64], b: &[f64], c: &mut [f64], m: usize, n: usize, p: usize) {
    for i in 0..m {
        let crow = &mut c[i * p..(i + 1) * p];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let brow = &b[k * p..(k + 1) * p];
            for (cv, bv) in crow.iter_mut().zip(brow) {
                *cv += aik * bv;
            }
        }
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of recorded nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Drops every node so the graph can record a fresh pass.
    pub fn reset(&mut self) {
        self.nodes.clear();
        self.backward_done = false;
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node { value, op, requires_grad });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    /// A leaf whose gradient is tracked.
    pub fn param(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, true)
    }

    /// A leaf treated as a constant.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, false)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        same_shape("add", x, y)?;
        let data = x.data().iter().zip(y.data()).map(|(p, q)| p + q).collect();
        let out = finite("add", Tensor::new(x.shape().to_vec(), data)?)?;
        let rg = self.rg(&[a, b]);
        Ok(self.push(out, Op::Add(a, b), rg))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        same_shape("sub", x, y)?;
        let data = x.data().iter().zip(y.data()).map(|(p, q)| p - q).collect();
        let out = finite("sub", Tensor::new(x.shape().to_vec(), data)?)?;
        let rg = self.rg(&[a, b]);
        Ok(self.push(out, Op::Sub(a, b), rg))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        same_shape("mul", x, y)?;
        let data = x.data().iter().zip(y.data()).map(|(p, q)| p * q).collect();
        let out = finite("mul", Tensor::new(x.shape().to_vec(), data)?)?;
        let rg = self.rg(&[a, b]);
        Ok(self.push(out, Op::Mul(a, b), rg))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Result<Var> {
        let x = self.value(a);
        let data = x.data().iter().map(|p| p * s).collect();
        let out = finite("scale", Tensor::new(x.shape().to_vec(), data)?)?;
        let rg = self.rg(&[a]);
        Ok(self.push(out, Op::Scale(a, s), rg))
    }

    pub fn add_scalar(&mut self, a: Var, s: f64) -> Result<Var> {
        let x = self.value(a);
        let data = x.data().iter().map(|p| p + s).collect();
        let out = finite("add_scalar", Tensor::new(x.shape().to_vec(), data)?)?;
        let rg = self.rg(&[a]);
        Ok(self.push(out, Op::AddScalar(a), rg))
    }

    /// `1 - a`, elementwise.
    pub fn one_minus(&mut self, a: Var) -> Result<Var> {
        let neg = self.scale(a, -1.0)?;
        self.add_scalar(neg, 1.0)
    }

    /// Adds a `1 × c` row to every row of an `r × c` matrix.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (x, b) = (self.value(a), self.value(row));
        let (r, c) = x.expect_matrix("add_row")?;
        if b.numel() != c {
            return Err(Error::Shape { op: "add_row", detail: format!("row of {} for {c} columns", b.numel()) });
        }
        let mut data = x.data().to_vec();
        for i in 0..r {
            for (v, bv) in data[i * c..(i + 1) * c].iter_mut().zip(b.data()) {
                *v += bv;
            }
        }
        let out = finite("add_row", Tensor::matrix(r, c, data)?)?;
        let rg = self.rg(&[a, row]);
        Ok(self.push(out, Op::AddRow(a, row), rg))
    }

    /// Multiplies row `i` of an `r × c` matrix by entry `i` of an `r × 1` column.
    pub fn mul_col(&mut self, a: Var, col: Var) -> Result<Var> {
        let (x, w) = (self.value(a), self.value(col));
        let (r, c) = x.expect_matrix("mul_col")?;
        if w.numel() != r {
            return Err(Error::Shape { op: "mul_col", detail: format!("column of {} for {r} rows", w.numel()) });
        }
        let mut data = x.data().to_vec();
        for i in 0..r {
            let s = w.data()[i];
            for v in &mut data[i * c..(i + 1) * c] {
                *v *= s;
            }
        }
        let out = finite("mul_col", Tensor::matrix(r, c, data)?)?;
        let rg = self.rg(&[a, col]);
        Ok(self.push(out, Op::MulCol(a, col), rg))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        let (m, n) = x.expect_matrix("matmul")?;
        let (n2, p) = y.expect_matrix("matmul")?;
        if n != n2 {
            return Err(Error::Shape { op: "matmul", detail: format!("{m}x{n} by {n2}x{p}") });
        }
        let mut data = vec![0.0; m * p];
        matmul_into(x.data(), y.data(), &mut data, m, n, p);
        let out = finite("matmul", Tensor::matrix(m, p, data)?)?;
        let rg = self.rg(&[a, b]);
        Ok(self.push(out, Op::MatMul(a, b), rg))
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let x = self.value(a);
        let (r, c) = x.expect_matrix("transpose")?;
        let mut data = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                data[j * r + i] = x.data()[i * c + j];
            }
        }
        let out = Tensor::matrix(c, r, data)?;
        let rg = self.rg(&[a]);
        Ok(self.push(out, Op::Transpose(a), rg))
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        let x = self.value(a);
        let data = x.data().iter().map(|&p| if p > 0.0 { p } else { 0.0 }).collect();
        let out = Tensor::new(x.shape().to_vec(), data)?;
        let rg = self.rg(&[a]);
        Ok(self.push(out, Op::Relu(a), rg))
    }

    /// Natural log; non-positive inputs produce a non-finite error.
    pub fn log(&mut self, a: Var) -> Result<Var> {
        let x = self.value(a);
        let data = x.data().iter().map(|&p| math::ln(p)).collect();
        let out = finite("log", Tensor::new(x.shape().to_vec(), data)?)?;
        let rg = self.rg(&[a]);
        Ok(self.push(out, Op::Log(a), rg))
    }

    pub fn exp(&mut self, a: Var) -> Result<Var> {
        let x = self.value(a);
        let data = x.data().iter().map(|&p| math::exp(p)).collect();
        let out = finite("exp", Tensor::new(x.shape().to_vec(), data)?)?;
        let rg = self.rg(&[a]);
        Ok(self.push(out, Op::Exp(a), rg))
    }

    /// Clamps to `[lo, hi]`. The gradient passes through inside the closed
    /// interval and is zero outside it.
    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Result<Var> {
        if !(lo <= hi) {
            return Err(contract(format!("clamp bounds [{lo}, {hi}] are empty")));
        }
        let x = self.value(a);
        let data = x.data().iter().map(|&p| p.clamp(lo, hi)).collect();
        let out = Tensor::new(x.shape().to_vec(), data)?;
        let rg = self.rg(&[a]);
        Ok(self.push(out, Op::Clamp(a, lo, hi), rg))
    }

    /// Row-wise softmax with per-row max subtraction.
    pub fn softmax_rows(&mut self, a: Var) -> Result<Var> {
        let x = self.value(a);
        let (r, c) = x.expect_matrix("softmax_rows")?;
        if !x.is_finite() {
            return Err(Error::NonFinite { op: "softmax_rows" });
        }
        let mut data = x.data().to_vec();
        for i in 0..r {
            let row = &mut data[i * c..(i + 1) * c];
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for v in row.iter_mut() {
                *v = math::exp(*v - max);
                total += *v;
            }
            for v in row.iter_mut() {
                *v /= total;
            }
        }
        let out = Tensor::matrix(r, c, data)?;
        let rg = self.rg(&[a]);
        Ok(self.push(out, Op::SoftmaxRows(a), rg))
    }

    /// Sum of all entries, as a scalar.
    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let total: f64 = self.value(a).data().iter().sum();
        let out = finite("sum", Tensor::scalar(total))?;
        let rg = self.rg(&[a]);
        Ok(self.push(out, Op::Sum(a), rg))
    }

    pub fn mean(&mut self, a: Var) -> Result<Var> {
        let x = self.value(a);
        if x.numel() == 0 {
            return Err(contract("mean of an empty tensor"));
        }
        let total: f64 = x.data().iter().sum();
        let out = finite("mean", Tensor::scalar(total / x.numel() as f64))?;
        let rg = self.rg(&[a]);
        Ok(self.push(out, Op::Mean(a), rg))
    }

    /// Concatenates matrices with equal row counts along the column axis.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(contract("concat_cols needs at least one operand"));
        }
        let r = self.value(parts[0]).expect_matrix("concat_cols")?.0;
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let (pr, pc) = self.value(p).expect_matrix("concat_cols")?;
            if pr != r {
                return Err(Error::Shape { op: "concat_cols", detail: format!("{pr} rows vs {r}") });
            }
            widths.push(pc);
        }
        let total: usize = widths.iter().sum();
        let mut data = Vec::with_capacity(r * total);
        for i in 0..r {
            for &p in parts {
                data.extend_from_slice(self.value(p).row_slice(i));
            }
        }
        let out = Tensor::matrix(r, total, data)?;
        let rg = self.rg(parts);
        Ok(self.push(out, Op::ConcatCols(parts.to_vec()), rg))
    }

    /// Output row `i` is row `index[i]` of `a`.
    pub fn gather_rows(&mut self, a: Var, index: &[usize]) -> Result<Var> {
        let x = self.value(a);
        let (r, c) = x.expect_matrix("gather_rows")?;
        let mut data = Vec::with_capacity(index.len() * c);
        for &i in index {
            if i >= r {
                return Err(Error::Shape { op: "gather_rows", detail: format!("row {i} of {r}") });
            }
            data.extend_from_slice(x.row_slice(i));
        }
        let out = Tensor::matrix(index.len(), c, data)?;
        let rg = self.rg(&[a]);
        Ok(self.push(out, Op::GatherRows(a, index.to_vec()), rg))
    }

    /// Sums consecutive blocks of `group` rows: `(n·group) × c` to `n × c`.
    pub fn group_sum_rows(&mut self, a: Var, group: usize) -> Result<Var> {
        let x = self.value(a);
        let (r, c) = x.expect_matrix("group_sum_rows")?;
        if group == 0 || r % group != 0 {
            return Err(Error::Shape { op: "group_sum_rows", detail: format!("{r} rows in groups of {group}") });
        }
        let n = r / group;
        let mut data = vec![0.0; n * c];
        for i in 0..r {
            let dst = &mut data[(i / group) * c..(i / group + 1) * c];
            for (d, s) in dst.iter_mut().zip(x.row_slice(i)) {
                *d += s;
            }
        }
        let out = finite("group_sum_rows", Tensor::matrix(n, c, data)?)?;
        let rg = self.rg(&[a]);
        Ok(self.push(out, Op::GroupSumRows(a, group), rg))
    }

    /// Columns `start..start + len` of a matrix.
    pub fn narrow_cols(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let x = self.value(a);
        let (r, c) = x.expect_matrix("narrow_cols")?;
        if start + len > c || len == 0 {
            return Err(Error::Shape { op: "narrow_cols", detail: format!("columns {start}..{} of {c}", start + len) });
        }
        let mut data = Vec::with_capacity(r * len);
        for i in 0..r {
            data.extend_from_slice(&x.row_slice(i)[start..start + len]);
        }
        let out = Tensor::matrix(r, len, data)?;
        let rg = self.rg(&[a]);
        Ok(self.push(out, Op::NarrowCols(a, start), rg))
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Result<Var> {
        let out = self.value(a).reshaped(shape)?;
        let rg = self.rg(&[a]);
        Ok(self.push(out, Op::Reshape(a), rg))
    }

    /// Reverse sweep from a scalar `loss`. May be called once per recorded pass.
    pub fn backward(&mut self, loss: Var) -> Result<Gradients> {
        if self.backward_done {
            return Err(contract("backward already ran on this graph; reset it first"));
        }
        if loss.0 >= self.nodes.len() {
            return Err(contract("loss is not a node of this graph"));
        }
        if !self.value(loss).is_scalar() {
            return Err(contract(format!("backward needs a scalar loss, got shape {:?}", self.value(loss).shape())));
        }
        self.backward_done = true;

        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![1.0]);

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            self.propagate(idx, &g, &mut grads)?;
            grads[idx] = Some(g);
        }

        let grads = grads
            .into_iter()
            .zip(&self.nodes)
            .map(|(g, node)| match (g, &node.op) {
                (Some(g), Op::Leaf) if node.requires_grad => Tensor::new(node.value.shape().to_vec(), g).ok(),
                _ => None,
            })
            .collect();
        Ok(Gradients { grads })
    }

    fn accumulate(&self, grads: &mut [Option<Vec<f64>>], v: Var, f: impl FnOnce(&mut [f64])) {
        if !self.nodes[v.0].requires_grad {
            return;
        }
        let slot = grads[v.0].get_or_insert_with(|| vec![0.0; self.nodes[v.0].value.numel()]);
        f(slot);
    }

    fn propagate(&self, idx: usize, g: &[f64], grads: &mut [Option<Vec<f64>>]) -> Result<()> {
        let node = &self.nodes[idx];
        let out = &node.value;
        match &node.op {
            Op::Leaf => {}
            Op::Add(a, b) => {
                self.accumulate(grads, *a, |d| d.iter_mut().zip(g).for_each(|(d, g)| *d += g));
                self.accumulate(grads, *b, |d| d.iter_mut().zip(g).for_each(|(d, g)| *d += g));
            }
            Op::Sub(a, b) => {
                self.accumulate(grads, *a, |d| d.iter_mut().zip(g).for_each(|(d, g)| *d += g));
                self.accumulate(grads, *b, |d| d.iter_mut().zip(g).for_each(|(d, g)| *d -= g));
            }
            Op::Mul(a, b) => {
                let (x, y) = (self.value(*a).data(), self.value(*b).data());
                self.accumulate(grads, *a, |d| {
                    for ((d, g), y) in d.iter_mut().zip(g).zip(y) {
                        *d += g * y;
                    }
                });
                self.accumulate(grads, *b, |d| {
                    for ((d, g), x) in d.iter_mut().zip(g).zip(x) {
                        *d += g * x;
                    }
                });
            }
            Op::Scale(a, s) => {
                self.accumulate(grads, *a, |d| d.iter_mut().zip(g).for_each(|(d, g)| *d += g * s));
            }
            Op::AddScalar(a) | Op::Reshape(a) => {
                self.accumulate(grads, *a, |d| d.iter_mut().zip(g).for_each(|(d, g)| *d += g));
            }
            Op::AddRow(a, row) => {
                let c = out.cols();
                self.accumulate(grads, *a, |d| d.iter_mut().zip(g).for_each(|(d, g)| *d += g));
                self.accumulate(grads, *row, |d| {
                    for (i, gv) in g.iter().enumerate() {
                        d[i % c] += gv;
                    }
                });
            }
            Op::MulCol(a, col) => {
                let c = out.cols();
                let (x, w) = (self.value(*a).data(), self.value(*col).data());
                self.accumulate(grads, *a, |d| {
                    for (i, (d, gv)) in d.iter_mut().zip(g).enumerate() {
                        *d += gv * w[i / c];
                    }
                });
                self.accumulate(grads, *col, |d| {
                    for (i, (gv, xv)) in g.iter().zip(x).enumerate() {
                        d[i / c] += gv * xv;
                    }
                });
            }
            Op::MatMul(a, b) => {
                let (x, y) = (self.value(*a), self.value(*b));
                let (m, n) = (x.rows(), x.cols());
                let p = y.cols();
                // dA = G · Bᵀ
                self.accumulate(grads, *a, |d| {
                    for i in 0..m {
                        let grow = &g[i * p..(i + 1) * p];
                        for k in 0..n {
                            let brow = &y.data()[k * p..(k + 1) * p];
                            let dot: f64 = grow.iter().zip(brow).map(|(u, v)| u * v).sum();
                            d[i * n + k] += dot;
                        }
                    }
                });
                // dB = Aᵀ · G
                self.accumulate(grads, *b, |d| {
                    for i in 0..m {
                        let grow = &g[i * p..(i + 1) * p];
                        for k in 0..n {
                            let aik = x.data()[i * n + k];
                            if aik == 0.0 {
                                continue;
                            }
                            for (dv, gv) in d[k * p..(k + 1) * p].iter_mut().zip(grow) {
                                *dv += aik * gv;
                            }
                        }
                    }
                });
            }
            Op::Transpose(a) => {
                let (r, c) = (out.cols(), out.rows());
                self.accumulate(grads, *a, |d| {
                    for i in 0..r {
                        for j in 0..c {
                            d[i * c + j] += g[j * r + i];
                        }
                    }
                });
            }
            Op::Relu(a) => {
                let x = self.value(*a).data();
                self.accumulate(grads, *a, |d| {
                    for ((d, g), x) in d.iter_mut().zip(g).zip(x) {
                        if *x > 0.0 {
                            *d += g;
                        }
                    }
                });
            }
            Op::Log(a) => {
                let x = self.value(*a).data();
                self.accumulate(grads, *a, |d| {
                    for ((d, g), x) in d.iter_mut().zip(g).zip(x) {
                        *d += g / x;
                    }
                });
            }
            Op::Exp(a) => {
                self.accumulate(grads, *a, |d| {
                    for ((d, g), y) in d.iter_mut().zip(g).zip(out.data()) {
                        *d += g * y;
                    }
                });
            }
            Op::Clamp(a, lo, hi) => {
                let x = self.value(*a).data();
                self.accumulate(grads, *a, |d| {
                    for ((d, g), x) in d.iter_mut().zip(g).zip(x) {
                        if *x >= *lo && *x <= *hi {
                            *d += g;
                        }
                    }
                });
            }
            Op::SoftmaxRows(a) => {
                let (r, c) = (out.rows(), out.cols());
                let y = out.data();
                self.accumulate(grads, *a, |d| {
                    for i in 0..r {
                        let ys = &y[i * c..(i + 1) * c];
                        let gs = &g[i * c..(i + 1) * c];
                        let dot: f64 = ys.iter().zip(gs).map(|(u, v)| u * v).sum();
                        for j in 0..c {
                            d[i * c + j] += ys[j] * (gs[j] - dot);
                        }
                    }
                });
            }
            Op::Sum(a) => {
                self.accumulate(grads, *a, |d| d.iter_mut().for_each(|d| *d += g[0]));
            }
            Op::Mean(a) => {
                let n = self.value(*a).numel() as f64;
                self.accumulate(grads, *a, |d| d.iter_mut().for_each(|d| *d += g[0] / n));
            }
            Op::ConcatCols(parts) => {
                let (r, total) = (out.rows(), out.cols());
                let mut offset = 0;
                for &p in parts {
                    let w = self.value(p).cols();
                    self.accumulate(grads, p, |d| {
                        for i in 0..r {
                            for j in 0..w {
                                d[i * w + j] += g[i * total + offset + j];
                            }
                        }
                    });
                    offset += w;
                }
            }
            Op::GatherRows(a, index) => {
                let c = out.cols();
                self.accumulate(grads, *a, |d| {
                    for (k, &i) in index.iter().enumerate() {
                        for j in 0..c {
                            d[i * c + j] += g[k * c + j];
                        }
                    }
                });
            }
            Op::GroupSumRows(a, group) => {
                let c = out.cols();
                let r = self.value(*a).rows();
                self.accumulate(grads, *a, |d| {
                    for i in 0..r {
                        for j in 0..c {
                            d[i * c + j] += g[(i / group) * c + j];
                        }
                    }
                });
            }
            Op::NarrowCols(a, start) => {
                let (r, len) = (out.rows(), out.cols());
                let c = self.value(*a).cols();
                self.accumulate(grads, *a, |d| {
                    for i in 0..r {
                        for j in 0..len {
                            d[i * c + start + j] += g[i * len + j];
                        }
                    }
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::gradcheck;
    use crate::rng::seeded;
    use rand::Rng as _;

    fn random(rows: usize, cols: usize, seed: u64) -> Tensor {
        let mut rng = seeded(seed);
        let data = (0..rows * cols).map(|_| rng.gen_range(-5.0..5.0)).collect();
        Tensor::matrix(rows, cols, data).unwrap()
    }

    #[test]
    fn matmul_identity() {
        let mut g = Graph::new();
        let a = g.constant(Tensor::from_rows(&[[1.0, 0.0], [0.0, 1.0]]));
        let b = g.constant(Tensor::from_rows(&[[2.0, 3.0], [4.0, 5.0]]));
        let c = g.matmul(a, b).unwrap();
        assert_eq!(g.value(c).data(), &[2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn matmul_uniform_rows() {
        let mut g = Graph::new();
        let a = g.constant(Tensor::from_rows(&[[0.5, 0.5]]));
        let b = g.constant(Tensor::from_rows(&[[0.5], [0.5]]));
        let c = g.matmul(a, b).unwrap();
        assert_eq!(g.value(c).data(), &[0.5]);
    }

    #[test]
    fn matmul_matches_triple_loop() {
        let a = random(3, 4, 1);
        let b = random(4, 2, 2);
        let mut expected = [0.0f64; 6];
        for i in 0..3 {
            for j in 0..2 {
                for k in 0..4 {
                    expected[i * 2 + j] += a.get(i, k) * b.get(k, j);
                }
            }
        }
        let mut g = Graph::new();
        let (va, vb) = (g.constant(a), g.constant(b));
        let c = g.matmul(va, vb).unwrap();
        for (x, y) in g.value(c).data().iter().zip(expected) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn matmul_dimension_mismatch() {
        let mut g = Graph::new();
        let a = g.constant(Tensor::zeros(&[2, 3]));
        let b = g.constant(Tensor::zeros(&[2, 3]));
        assert!(matches!(g.matmul(a, b), Err(Error::Shape { op: "matmul", .. })));
    }

    #[test]
    fn softmax_examples() {
        let mut g = Graph::new();
        let a = g.constant(Tensor::from_rows(&[[0.0, 0.0]]));
        let s = g.softmax_rows(a).unwrap();
        assert_eq!(g.value(s).data(), &[0.5, 0.5]);

        let b = g.constant(Tensor::from_rows(&[[1000.0, 0.0]]));
        let s = g.softmax_rows(b).unwrap();
        let v = g.value(s).data();
        assert!((v[0] - 1.0).abs() < 1e-15);
        assert!(v[1] >= 0.0 && v[1] < 1e-12);
    }

    #[test]
    fn softmax_matches_direct_formula() {
        // exp(k - 3) / (e^-2 + e^-1 + 1), values computed at 40 digits.
        let expected = [
            0.090_030_573_170_380_458_0,
            0.244_728_471_054_797_652_5,
            0.665_240_955_774_821_889_5,
        ];
        let mut g = Graph::new();
        let a = g.constant(Tensor::from_rows(&[[1.0, 2.0, 3.0]]));
        let s = g.softmax_rows(a).unwrap();
        for (x, y) in g.value(s).data().iter().zip(expected) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let mut g = Graph::new();
        let a = g.constant(random(7, 5, 3));
        let s = g.softmax_rows(a).unwrap();
        let v = g.value(s);
        for i in 0..7 {
            let total: f64 = v.row_slice(i).iter().sum();
            assert!((total - 1.0).abs() < 1e-9);
            assert!(v.row_slice(i).iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn backward_of_sum_is_ones() {
        let mut g = Graph::new();
        let x = g.param(random(2, 3, 4));
        let s = g.sum(x).unwrap();
        let grads = g.backward(s).unwrap();
        assert!(grads.get(x).unwrap().data().iter().all(|&d| d == 1.0));
    }

    #[test]
    fn backward_of_sum_of_squares() {
        let mut g = Graph::new();
        let x = g.param(Tensor::row(&[1.0, 2.0, 3.0]));
        let sq = g.mul(x, x).unwrap();
        let s = g.sum(sq).unwrap();
        let grads = g.backward(s).unwrap();
        assert_eq!(grads.get(x).unwrap().data(), &[2.0, 4.0, 6.0]);
    }

    #[test]
    fn backward_twice_is_an_error() {
        let mut g = Graph::new();
        let x = g.param(Tensor::row(&[1.0]));
        let s = g.sum(x).unwrap();
        g.backward(s).unwrap();
        assert!(matches!(g.backward(s), Err(Error::Contract(_))));
        g.reset();
        let x = g.param(Tensor::row(&[1.0]));
        let s = g.sum(x).unwrap();
        assert!(g.backward(s).is_ok());
    }

    #[test]
    fn backward_needs_scalar() {
        let mut g = Graph::new();
        let x = g.param(Tensor::row(&[1.0, 2.0]));
        assert!(matches!(g.backward(x), Err(Error::Contract(_))));
    }

    #[test]
    fn softmax_log_sum_matches_finite_differences() {
        let x = random(3, 4, 5);
        let err = gradcheck(
            |g, x| {
                let s = g.softmax_rows(x)?;
                let l = g.log(s)?;
                let w = g.constant(random(3, 4, 6));
                let p = g.mul(l, w)?;
                g.sum(p)
            },
            &x,
            1e-5,
        )
        .unwrap();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn overflow_is_an_error() {
        let mut g = Graph::new();
        let x = g.constant(Tensor::row(&[1000.0]));
        assert!(matches!(g.exp(x), Err(Error::NonFinite { op: "exp" })));
        let z = g.constant(Tensor::row(&[0.0]));
        assert!(matches!(g.log(z), Err(Error::NonFinite { op: "log" })));
    }

    #[test]
    fn clamp_gradient_convention() {
        let mut g = Graph::new();
        let x = g.param(Tensor::row(&[-1.0, 0.0, 0.5, 1.0, 2.0]));
        let c = g.clamp(x, 0.0, 1.0).unwrap();
        let s = g.sum(c).unwrap();
        let grads = g.backward(s).unwrap();
        assert_eq!(grads.get(x).unwrap().data(), &[0.0, 1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn constants_get_no_gradient() {
        let mut g = Graph::new();
        let x = g.param(Tensor::row(&[1.0, 2.0]));
        let c = g.constant(Tensor::row(&[3.0, 4.0]));
        let p = g.mul(x, c).unwrap();
        let s = g.sum(p).unwrap();
        let grads = g.backward(s).unwrap();
        assert_eq!(grads.get(x).unwrap().data(), &[3.0, 4.0]);
        assert!(grads.get(c).is_none());
    }
}
