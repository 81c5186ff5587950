//! Permutation-invariant pairwise-identity loss.
//!
//! Row `i` of `P = softmax(logits)` is the predicted group distribution of
//! point `i`. With independent rows, the probability that points `i` and `j`
//! share a group is `S_ij = Σ_k P_ik P_jk`, i.e. `S = P Pᵀ`. The ground truth
//! only enters through `A_ij = [y_i == y_j]`, so neither the order of the
//! output columns nor the numeric values of the labels matter. The loss is
//! binary cross-entropy between `S` and `A` over all ordered pairs, plus
//! `α S_ij` to discourage everything collapsing into one group:
//!
//! ```text
//! L = Σ_ij [ -A_ij log S̃_ij - (1 - A_ij) log(1 - S̃_ij) + α S_ij ]
//! ```
//!
//! where `S̃ = clamp(S, eps, 1 - eps)`.

use alloc::format;
use alloc::vec::Vec;

use crate::diff::{Graph, Tensor, Var};
use crate::{contract, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    /// Plain double sum.
    Sum,
    /// Sum divided by `N²`.
    MeanPairs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub alpha: f64,
    pub clamp_eps: f64,
    pub reduction: Reduction,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig { alpha: 0.1, clamp_eps: 1e-7, reduction: Reduction::Sum }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(contract(format!("alpha must be non-negative, got {}", self.alpha)));
        }
        if !(self.clamp_eps > 0.0 && self.clamp_eps < 0.5) {
            return Err(contract(format!("clamp_eps must be in (0, 0.5), got {}", self.clamp_eps)));
        }
        Ok(())
    }
}

/// `S = P Pᵀ` for a row-stochastic `P`.
pub fn same_group_matrix(g: &mut Graph, probs: Var) -> Result<Var> {
    let p = g.value(probs);
    let (n, k) = p.expect_matrix("same_group_matrix")?;
    for i in 0..n {
        let total: f64 = p.row_slice(i).iter().sum();
        if (total - 1.0).abs() > 1e-6 || p.row_slice(i).iter().any(|&v| v < 0.0) {
            return Err(contract(format!("row {i} of the {n}x{k} probability matrix is not stochastic")));
        }
    }
    let pt = g.transpose(probs)?;
    g.matmul(probs, pt)
}

/// `A_ij = 1` when labels `i` and `j` are equal.
pub fn adjacency_from_labels(labels: &[usize]) -> Tensor {
    let n = labels.len();
    let data = (0..n * n).map(|idx| f64::from(u8::from(labels[idx / n] == labels[idx % n]))).collect();
    Tensor::new(alloc::vec![n, n], data).expect("n*n entries")
}

/// Records the loss on `g` and returns the scalar node.
pub fn pairwise_identity_loss(g: &mut Graph, logits: Var, labels: &[usize], cfg: &LossConfig) -> Result<Var> {
    cfg.validate()?;
    let (n, _) = g.value(logits).expect_matrix("pairwise_identity_loss")?;
    if labels.len() != n {
        return Err(contract(format!("{n} logit rows but {} labels", labels.len())));
    }
    let probs = g.softmax_rows(logits)?;
    let s = same_group_matrix(g, probs)?;
    let clamped = g.clamp(s, cfg.clamp_eps, 1.0 - cfg.clamp_eps)?;

    let adjacency = adjacency_from_labels(labels);
    let complement: Vec<f64> = adjacency.data().iter().map(|a| 1.0 - a).collect();
    let a = g.constant(adjacency);
    let not_a = g.constant(Tensor::matrix(n, n, complement)?);

    let log_same = g.log(clamped)?;
    let one_minus = g.one_minus(clamped)?;
    let log_diff = g.log(one_minus)?;
    let pos = g.mul(a, log_same)?;
    let neg = g.mul(not_a, log_diff)?;
    let bce = g.add(pos, neg)?;
    let bce = g.scale(bce, -1.0)?;
    let reg = g.scale(s, cfg.alpha)?;
    let per_pair = g.add(bce, reg)?;
    let total = g.sum(per_pair)?;
    match cfg.reduction {
        Reduction::Sum => Ok(total),
        Reduction::MeanPairs => g.scale(total, 1.0 / (n * n) as f64),
    }
}

/// Loss value for a logits matrix.
pub fn loss_value(logits: &Tensor, labels: &[usize], cfg: &LossConfig) -> Result<f64> {
    let mut g = Graph::new();
    let x = g.constant(logits.clone());
    let l = pairwise_identity_loss(&mut g, x, labels, cfg)?;
    Ok(g.value(l).data()[0])
}

/// Loss value and its gradient with respect to the logits.
pub fn loss_gradient(logits: &Tensor, labels: &[usize], cfg: &LossConfig) -> Result<(f64, Tensor)> {
    let mut g = Graph::new();
    let x = g.param(logits.clone());
    let l = pairwise_identity_loss(&mut g, x, labels, cfg)?;
    let value = g.value(l).data()[0];
    let grads = g.backward(l)?;
    let grad = grads.get(x).cloned().expect("logits require grad");
    Ok((value, grad))
}
