use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::optim::{Adam, Optimizer, OptimizerKind, Sgd};
use crate::dataset::TrainingExample;
use crate::diff::Graph;
use crate::loss::{pairwise_identity_loss, LossConfig, Reduction};
use crate::model::{CloudStructure, ModelConfig, PointNet};
use crate::rng::seeded;
use crate::{contract, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Seeds the epoch shuffles; the model is initialized from `model.seed`.
    pub seed: u64,
    pub loss: LossConfig,
    pub model: ModelConfig,
    pub optimizer: OptimizerKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            epochs: 100,
            seed: 0,
            loss: LossConfig { reduction: Reduction::MeanPairs, ..LossConfig::default() },
            model: ModelConfig::default(),
            optimizer: OptimizerKind::Adam,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: PointNet,
    /// Mean loss per epoch.
    pub history: Vec<f64>,
}

pub fn train(examples: &[TrainingExample], cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_with_progress(examples, cfg, |_, _| {})
}

/// Trains one example per step, calling `progress(epoch, mean_loss)` after
/// each epoch.
///
/// The loss only sees the first `num_groups` logit columns of each example,
/// the same columns decoding uses.
pub fn train_with_progress(
    examples: &[TrainingExample],
    cfg: &TrainConfig,
    mut progress: impl FnMut(usize, f64),
) -> Result<TrainOutcome> {
    if examples.is_empty() {
        return Err(contract("training needs at least one example"));
    }
    if cfg.epochs == 0 {
        return Err(contract("epochs must be at least 1"));
    }
    if !(cfg.learning_rate > 0.0) {
        return Err(contract("learning rate must be positive"));
    }
    cfg.loss.validate()?;
    let mut model = PointNet::new(cfg.model.clone())?;
    let k = cfg.model.k;
    for ex in examples {
        if ex.num_groups() > k {
            return Err(contract(alloc::format!(
                "example {} asks for {} groups but the model has {k}",
                ex.source,
                ex.num_groups()
            )));
        }
    }
    let structures = examples
        .iter()
        .map(|ex| CloudStructure::build(&ex.points, &cfg.model))
        .collect::<Result<Vec<_>>>()?;

    let mut optimizer: alloc::boxed::Box<dyn Optimizer> = match cfg.optimizer {
        OptimizerKind::Adam => alloc::boxed::Box::new(Adam::new(cfg.learning_rate)),
        OptimizerKind::Sgd => alloc::boxed::Box::new(Sgd { learning_rate: cfg.learning_rate }),
    };
    let mut rng = seeded(cfg.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut step = 0;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let ex = &examples[i];
            let diverged = |e: Error| match e {
                Error::NonFinite { .. } => Error::Diverged { step },
                other => other,
            };
            let mut g = Graph::new();
            let bound = model.bind(&mut g, true);
            let feature = ex.group_count_feature(k);
            let logits = model.forward(&mut g, &bound, &structures[i], &ex.points, feature).map_err(diverged)?;
            let groups = ex.num_groups().max(1);
            let logits = if groups < k { g.narrow_cols(logits, 0, groups)? } else { logits };
            let loss = pairwise_identity_loss(&mut g, logits, &ex.labels.labels, &cfg.loss).map_err(diverged)?;
            let value = g.value(loss).data()[0];
            if !value.is_finite() {
                return Err(Error::Diverged { step });
            }
            let grads = g.backward(loss)?;
            let named: BTreeMap<String, _> = bound
                .iter()
                .filter_map(|(name, v)| grads.get(v).map(|t| (String::from(name), t.clone())))
                .collect();
            if named.values().any(|t| !t.is_finite()) {
                return Err(Error::Diverged { step });
            }
            optimizer.step(model.params_mut(), &named);
            total += value;
            step += 1;
        }
        let mean = total / examples.len() as f64;
        history.push(mean);
        progress(epoch, mean);
    }
    Ok(TrainOutcome { model, history })
}
