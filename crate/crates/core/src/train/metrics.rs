use alloc::collections::BTreeMap;
use alloc::format;

use crate::{contract, Result};

fn check(pred: &[usize], gt: &[usize]) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(contract(format!("label lengths differ: {} vs {}", pred.len(), gt.len())));
    }
    if pred.len() < 2 {
        return Err(contract("clustering metrics need at least two points"));
    }
    Ok(())
}

/// Fraction of unordered pairs `i < j` on which both labelings agree about
/// "same group".
pub fn pairwise_accuracy(pred: &[usize], gt: &[usize]) -> Result<f64> {
    check(pred, gt)?;
    let n = pred.len();
    let mut agree = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            if (pred[i] == pred[j]) == (gt[i] == gt[j]) {
                agree += 1;
            }
        }
    }
    Ok(agree as f64 / (n * (n - 1) / 2) as f64)
}

fn pairs(n: u64) -> f64 {
    (n * n.saturating_sub(1) / 2) as f64
}

/// Adjusted Rand index from the pair-counting contingency table.
///
/// When the chance-corrected denominator vanishes (both labelings all
/// singletons, or both a single cluster) the labelings are identical and
/// the index is 1.
pub fn adjusted_rand_index(pred: &[usize], gt: &[usize]) -> Result<f64> {
    check(pred, gt)?;
    let mut table: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, u64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, u64> = BTreeMap::new();
    for (&p, &g) in pred.iter().zip(gt) {
        *table.entry((p, g)).or_insert(0) += 1;
        *rows.entry(p).or_insert(0) += 1;
        *cols.entry(g).or_insert(0) += 1;
    }
    let index: f64 = table.values().map(|&c| pairs(c)).sum();
    let a: f64 = rows.values().map(|&c| pairs(c)).sum();
    let b: f64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(pred.len() as u64);
    let expected = a * b / total;
    let max = 0.5 * (a + b);
    let denom = max - expected;
    if denom == 0.0 {
        let same = table.len() == rows.len() && table.len() == cols.len();
        return Ok(if same { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / denom)
}
