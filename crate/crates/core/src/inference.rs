//! Decoding logits into group labels.
//!
//! Only the first `num_groups` columns are used; their softmax is
//! renormalized over those columns. Sampling draws every row independently
//! from a generator seeded per call and consumed in row order.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::dataset::GroupLabeling;
use crate::diff::Tensor;
use crate::rng::seeded;
use crate::{contract, math, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    Sample { seed: u64 },
    Argmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeConfig {
    pub mode: DecodeMode,
    pub num_groups: usize,
}

/// Softmax of the first `groups` entries of a logit row.
pub fn restricted_probs(row: &[f64], groups: usize) -> Vec<f64> {
    let row = &row[..groups];
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = row.iter().map(|&v| math::exp(v - max)).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn decode(logits: &Tensor, cfg: &DecodeConfig) -> Result<GroupLabeling> {
    let (n, k) = logits.expect_matrix("decode")?;
    if cfg.num_groups == 0 || cfg.num_groups > k {
        return Err(contract(format!("num_groups must be in 1..={k}, got {}", cfg.num_groups)));
    }
    if !logits.is_finite() {
        return Err(contract("logits must be finite"));
    }
    let g = cfg.num_groups;
    let labels = match cfg.mode {
        DecodeMode::Argmax => (0..n)
            .map(|i| {
                let row = &logits.row_slice(i)[..g];
                let mut best = 0;
                for (c, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = c;
                    }
                }
                best
            })
            .collect(),
        DecodeMode::Sample { seed } => {
            let mut rng = seeded(seed);
            (0..n)
                .map(|i| {
                    let probs = restricted_probs(logits.row_slice(i), g);
                    let u: f64 = rng.gen();
                    let mut acc = 0.0;
                    for (c, p) in probs.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            return c;
                        }
                    }
                    // u landed in the rounding slack above the final cumulative sum
                    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
                })
                .collect()
        }
    };
    GroupLabeling::new(labels, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominant_column_wins_in_both_modes() {
        let logits = Tensor::from_rows(&[[1000.0, 0.0, 0.0]]);
        for mode in [DecodeMode::Argmax, DecodeMode::Sample { seed: 5 }] {
            let out = decode(&logits, &DecodeConfig { mode, num_groups: 3 }).unwrap();
            assert_eq!(out.labels, [0]);
        }
    }

    #[test]
    fn argmax_tie_goes_low() {
        let logits = Tensor::from_rows(&[[0.0, 0.0]]);
        let out = decode(&logits, &DecodeConfig { mode: DecodeMode::Argmax, num_groups: 2 }).unwrap();
        assert_eq!(out.labels, [0]);
    }

    #[test]
    fn restriction_ignores_later_columns() {
        let logits = Tensor::from_rows(&[[0.0, 1.0, 50.0], [2.0, 1.0, 50.0]]);
        let out = decode(&logits, &DecodeConfig { mode: DecodeMode::Argmax, num_groups: 2 }).unwrap();
        assert_eq!(out.labels, [1, 0]);
        for seed in 0..20 {
            let out = decode(&logits, &DecodeConfig { mode: DecodeMode::Sample { seed }, num_groups: 2 }).unwrap();
            assert!(out.labels.iter().all(|&l| l < 2));
        }
    }

    #[test]
    fn group_count_bounds() {
        let logits = Tensor::zeros(&[2, 3]);
        for g in [0, 4] {
            assert!(decode(&logits, &DecodeConfig { mode: DecodeMode::Argmax, num_groups: g }).is_err());
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let logits = Tensor::matrix(4, 3, alloc::vec![0.1, 0.5, -0.3, 1.0, 0.0, 0.2, -1.0, 0.4, 0.4, 0.0, 0.0, 0.0]).unwrap();
        let cfg = DecodeConfig { mode: DecodeMode::Sample { seed: 17 }, num_groups: 3 };
        assert_eq!(decode(&logits, &cfg).unwrap(), decode(&logits, &cfg).unwrap());
    }
}
