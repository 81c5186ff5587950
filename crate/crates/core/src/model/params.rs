use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use super::ModelConfig;
use crate::diff::Tensor;
use crate::rng::seeded;
use crate::{math, Error, Result};

/// Named parameter tensors of a [`super::PointNet`].
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    tensors: BTreeMap<String, Tensor>,
}

fn attention_specs(prefix: &str, c: usize, out: &mut Vec<(String, [usize; 2])>) {
    for (name, shape) in [
        ("q", [c, c]),
        ("k", [c, c]),
        ("v", [c, c]),
        ("pos1.w", [3, c]),
        ("pos1.b", [1, c]),
        ("pos2.w", [c, c]),
        ("pos2.b", [1, c]),
        ("score", [c, 1]),
        ("out.w", [c, c]),
        ("out.b", [1, c]),
    ] {
        out.push((format!("{prefix}.{name}"), shape));
    }
}

/// Every parameter name and shape implied by `config`, in initialization order.
pub(crate) fn specs(config: &ModelConfig) -> Vec<(String, [usize; 2])> {
    let ch = &config.channels;
    let mut out = vec![("embed.w".to_string(), [4, ch[0]]), ("embed.b".to_string(), [1, ch[0]])];
    for (s, &c) in ch.iter().enumerate() {
        if s > 0 {
            out.push((format!("down{s}.w"), [ch[s - 1], c]));
            out.push((format!("down{s}.b"), [1, c]));
        }
        attention_specs(&format!("enc{s}"), c, &mut out);
    }
    for s in (0..ch.len() - 1).rev() {
        out.push((format!("up{s}.w"), [ch[s] + ch[s + 1], ch[s]]));
        out.push((format!("up{s}.b"), [1, ch[s]]));
        attention_specs(&format!("dec{s}"), ch[s], &mut out);
    }
    out.push(("head.w".to_string(), [ch[0], config.k]));
    out.push(("head.b".to_string(), [1, config.k]));
    out
}

/// Number of scalars in a model with this configuration.
pub fn parameter_count(config: &ModelConfig) -> usize {
    specs(config).iter().map(|(_, s)| s[0] * s[1]).sum()
}

impl Params {
    /// Uniform initialization with variance `1 / fan_in`; biases start at zero.
    pub fn init(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = seeded(config.seed);
        let mut tensors = BTreeMap::new();
        for (name, [rows, cols]) in specs(config) {
            let data = if name.ends_with(".b") {
                vec![0.0; rows * cols]
            } else {
                let limit = math::sqrt(3.0 / rows as f64);
                (0..rows * cols).map(|_| rng.gen_range(-limit..limit)).collect()
            };
            tensors.insert(name, Tensor::matrix(rows, cols, data)?);
        }
        Ok(Params { tensors })
    }

    /// Wraps loaded tensors after checking them against `config`.
    pub fn from_tensors(config: &ModelConfig, tensors: BTreeMap<String, Tensor>) -> Result<Self> {
        config.validate()?;
        let specs = specs(config);
        for (name, shape) in &specs {
            let t = tensors.get(name).ok_or_else(|| Error::Shape {
                op: "checkpoint",
                detail: format!("missing tensor {name}"),
            })?;
            if t.shape() != shape {
                return Err(Error::Shape {
                    op: "checkpoint",
                    detail: format!("tensor {name} has shape {:?}, expected {shape:?}", t.shape()),
                });
            }
            if !t.is_finite() {
                return Err(Error::NonFinite { op: "checkpoint" });
            }
        }
        if let Some(extra) = tensors.keys().find(|k| !specs.iter().any(|(n, _)| n == *k)) {
            return Err(Error::Shape { op: "checkpoint", detail: format!("unexpected tensor {extra}") });
        }
        Ok(Params { tensors })
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.tensors.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.tensors.get_mut(name)
    }

    /// Tensors in name order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.tensors.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn scalar_count(&self) -> usize {
        self.tensors.values().map(Tensor::numel).sum()
    }

    /// All values concatenated in name order.
    pub fn flatten(&self) -> Vec<f64> {
        self.tensors.values().flat_map(|t| t.data().iter().copied()).collect()
    }

    /// Inverse of [`Params::flatten`].
    pub fn with_flat(&self, flat: &[f64]) -> Result<Self> {
        if flat.len() != self.scalar_count() {
            return Err(Error::Shape { op: "with_flat", detail: format!("{} values for {}", flat.len(), self.scalar_count()) });
        }
        let mut offset = 0;
        let mut tensors = BTreeMap::new();
        for (name, t) in &self.tensors {
            let n = t.numel();
            tensors.insert(name.clone(), Tensor::new(t.shape().to_vec(), flat[offset..offset + n].to_vec())?);
            offset += n;
        }
        Ok(Params { tensors })
    }

    pub fn into_tensors(self) -> BTreeMap<String, Tensor> {
        self.tensors
    }
}
