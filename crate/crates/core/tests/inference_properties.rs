use prefracture_core::diff::Tensor;
use prefracture_core::inference::{decode, restricted_probs, DecodeConfig, DecodeMode};
use proptest::prelude::*;

/// Upper 0.001 quantile of the chi-square distribution with 3 degrees of freedom.
const CHI2_3DOF_999: f64 = 16.266;

fn sample_one(row: &[f64], groups: usize, seed: u64) -> usize {
    let t = Tensor::row(row);
    decode(&t, &DecodeConfig { mode: DecodeMode::Sample { seed }, num_groups: groups }).unwrap().labels[0]
}

#[test]
fn dominant_logit_wins_in_both_modes() {
    let t = Tensor::row(&[1000.0, 0.0, 0.0]);
    for mode in [DecodeMode::Argmax, DecodeMode::Sample { seed: 4 }] {
        assert_eq!(decode(&t, &DecodeConfig { mode, num_groups: 3 }).unwrap().labels, vec![0]);
    }
    let tie = Tensor::row(&[0.0, 0.0]);
    assert_eq!(decode(&tie, &DecodeConfig { mode: DecodeMode::Argmax, num_groups: 2 }).unwrap().labels, vec![0]);
}

#[test]
fn binary_sampling_frequency() {
    let row = [0.7f64.ln(), 0.3f64.ln()];
    let zeros = (0..10_000).filter(|&s| sample_one(&row, 2, s) == 0).count();
    let freq = zeros as f64 / 10_000.0;
    assert!((freq - 0.7).abs() < 0.014, "{freq}");
}

#[test]
fn restricted_sampling_passes_chi_square() {
    // a fifth column exists but is excluded by num_groups = 4
    let row = [0.3, -1.0, 1.2, 0.0, 5.0];
    let probs = restricted_probs(&row, 4);
    let n = 10_000;
    let t = Tensor::matrix(n, 5, row.iter().copied().cycle().take(5 * n).collect()).unwrap();
    let labels = decode(&t, &DecodeConfig { mode: DecodeMode::Sample { seed: 99 }, num_groups: 4 }).unwrap().labels;
    let mut counts = [0usize; 4];
    for l in labels {
        counts[l] += 1;
    }
    let mut chi2 = 0.0;
    for c in 0..4 {
        let expected = probs[c] * n as f64;
        let sigma = (n as f64 * probs[c] * (1.0 - probs[c])).sqrt();
        assert!((counts[c] as f64 - expected).abs() < 3.0 * sigma, "column {c}: {} vs {expected}", counts[c]);
        chi2 += (counts[c] as f64 - expected).powi(2) / expected;
    }
    assert!(chi2 < CHI2_3DOF_999, "chi-square {chi2}");
}

#[test]
fn invalid_group_counts() {
    let t = Tensor::zeros(&[2, 3]);
    for g in [0, 4] {
        assert!(decode(&t, &DecodeConfig { mode: DecodeMode::Argmax, num_groups: g }).is_err());
    }
}

proptest! {
    #[test]
    fn labels_in_range_and_deterministic(data in proptest::collection::vec(-10.0f64..10.0, 40), g in 1usize..=5, seed in any::<u64>()) {
        let t = Tensor::matrix(8, 5, data).unwrap();
        for mode in [DecodeMode::Argmax, DecodeMode::Sample { seed }] {
            let cfg = DecodeConfig { mode, num_groups: g };
            let a = decode(&t, &cfg).unwrap();
            prop_assert!(a.labels.iter().all(|&l| l < g));
            prop_assert_eq!(a.num_groups_requested, g);
            prop_assert_eq!(a, decode(&t, &cfg).unwrap());
        }
    }

    #[test]
    fn restricted_probs_are_distributions(row in proptest::collection::vec(-700.0f64..700.0, 6), g in 1usize..=6) {
        let p = restricted_probs(&row, g);
        prop_assert_eq!(p.len(), g);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
