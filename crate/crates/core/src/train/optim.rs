use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::diff::Tensor;
use crate::math;
use crate::model::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    /// Adaptive moments with β₁ = 0.9, β₂ = 0.999.
    Adam,
}

/// Applies named gradients to parameters.
pub trait Optimizer {
    fn step(&mut self, params: &mut Params, grads: &BTreeMap<String, Tensor>);
}

#[derive(Debug, Clone)]
pub struct Sgd {
    pub learning_rate: f64,
}

impl Optimizer for Sgd {
    fn step(&mut self, params: &mut Params, grads: &BTreeMap<String, Tensor>) {
        for (name, g) in grads {
            if let Some(p) = params.get_mut(name) {
                for (w, d) in p.data_mut().iter_mut().zip(g.data()) {
                    *w -= self.learning_rate * d;
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: i32,
    moments: BTreeMap<String, (Vec<f64>, Vec<f64>)>,
}

impl Adam {
    pub fn new(learning_rate: f64) -> Self {
        Adam { learning_rate, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, moments: BTreeMap::new() }
    }
}

impl Optimizer for Adam {
    fn step(&mut self, params: &mut Params, grads: &BTreeMap<String, Tensor>) {
        self.t += 1;
        let c1 = 1.0 - math::powi(self.beta1, self.t);
        let c2 = 1.0 - math::powi(self.beta2, self.t);
        for (name, g) in grads {
            let Some(p) = params.get_mut(name) else { continue };
            let (m, v) = self
                .moments
                .entry(name.clone())
                .or_insert_with(|| (vec![0.0; g.numel()], vec![0.0; g.numel()]));
            for (((w, d), m), v) in p.data_mut().iter_mut().zip(g.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = self.beta1 * *m + (1.0 - self.beta1) * d;
                *v = self.beta2 * *v + (1.0 - self.beta2) * d * d;
                let mh = *m / c1;
                let vh = *v / c2;
                *w -= self.learning_rate * mh / (math::sqrt(vh) + self.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;

    #[test]
    fn first_adam_step_moves_by_learning_rate() {
        let cfg = ModelConfig { k: 2, neighbors: 1, channels: vec![2], seed: 0 };
        let mut params = Params::init(&cfg).unwrap();
        let before = params.get("head.b").unwrap().clone();
        let mut grads = BTreeMap::new();
        grads.insert(String::from("head.b"), Tensor::row(&[3.0, -0.5]));
        Adam::new(0.01).step(&mut params, &grads);
        let after = params.get("head.b").unwrap();
        assert!((after.data()[0] - (before.data()[0] - 0.01)).abs() < 1e-9);
        assert!((after.data()[1] - (before.data()[1] + 0.01)).abs() < 1e-9);
    }

    #[test]
    fn sgd_step() {
        let cfg = ModelConfig { k: 2, neighbors: 1, channels: vec![2], seed: 0 };
        let mut params = Params::init(&cfg).unwrap();
        let mut grads = BTreeMap::new();
        grads.insert(String::from("head.b"), Tensor::row(&[1.0, 2.0]));
        Sgd { learning_rate: 0.5 }.step(&mut params, &grads);
        assert_eq!(params.get("head.b").unwrap().data(), &[-0.5, -1.0]);
    }
}
