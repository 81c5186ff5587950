use alloc::string::String;
use alloc::vec::Vec;

use super::metrics::{adjusted_rand_index, pairwise_accuracy};
use crate::dataset::TrainingExample;
use crate::geometry::PieceGraph;
use crate::inference::{decode, DecodeConfig, DecodeMode};
use crate::model::PointNet;
use crate::postprocess::split_disconnected;
use crate::{contract, Result};

/// One held-out example, with its piece graph when available.
#[derive(Debug, Clone, Copy)]
pub struct EvalCase<'a> {
    pub example: &'a TrainingExample,
    pub graph: Option<&'a PieceGraph>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub source: String,
    pub pairwise_accuracy: f64,
    pub adjusted_rand_index: f64,
    pub predicted_groups: usize,
}

impl EvalRow {
    /// Scores a prediction, splitting disconnected groups first when a piece
    /// graph is given.
    pub fn score(source: &str, pred: &[usize], gt: &[usize], graph: Option<&PieceGraph>) -> Result<Self> {
        let pred = match graph {
            Some(graph) => split_disconnected(pred, graph)?.labels(pred.len()),
            None => pred.to_vec(),
        };
        let mut distinct = pred.clone();
        distinct.sort_unstable();
        distinct.dedup();
        Ok(EvalRow {
            source: String::from(source),
            pairwise_accuracy: pairwise_accuracy(&pred, gt)?,
            adjusted_rand_index: adjusted_rand_index(&pred, gt)?,
            predicted_groups: distinct.len(),
        })
    }
}

/// Per-example metrics and their means.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub pairwise_accuracy: f64,
    pub adjusted_rand_index: f64,
}

impl EvalReport {
    pub fn from_rows(rows: Vec<EvalRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(contract("evaluation needs at least one example"));
        }
        let n = rows.len() as f64;
        let pa = rows.iter().map(|r| r.pairwise_accuracy).sum::<f64>() / n;
        let ari = rows.iter().map(|r| r.adjusted_rand_index).sum::<f64>() / n;
        Ok(EvalReport { rows, pairwise_accuracy: pa, adjusted_rand_index: ari })
    }
}

/// Decodes each example with its own group count and scores it against
/// the ground truth.
pub fn evaluate(model: &PointNet, cases: &[EvalCase<'_>], mode: DecodeMode) -> Result<EvalReport> {
    let k = model.config().k;
    let rows = cases
        .iter()
        .map(|case| {
            let ex = case.example;
            let logits = model.logits(&ex.points, ex.group_count_feature(k))?;
            let cfg = DecodeConfig { mode, num_groups: ex.num_groups().min(k) };
            let pred = decode(&logits, &cfg)?;
            EvalRow::score(&ex.source, &pred.labels, &ex.labels.labels, case.graph)
        })
        .collect::<Result<Vec<_>>>()?;
    EvalReport::from_rows(rows)
}
