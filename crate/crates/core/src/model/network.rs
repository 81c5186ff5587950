use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{fps, fps_start, knn, knn_query, ModelConfig, Params};
use crate::diff::{Graph, Tensor, Var};
use crate::geometry::{dist2, Point3};
use crate::{contract, math, Error, Result};

/// Coarse level size relative to the finer one.
const DOWNSAMPLE: usize = 4;
/// Coarse points used when interpolating back up.
const INTERP_NEIGHBORS: usize = 3;

struct Level {
    n: usize,
    k: usize,
    neighbors: Vec<usize>,
    /// `i` repeated `k` times, aligned with `neighbors`.
    centers: Vec<usize>,
    /// `p_i - p_j` for every (center, neighbour) pair.
    relative: Tensor,
    /// Neighbours in the finer level pooled into each point of this level.
    pool: Option<(Vec<usize>, usize)>,
    /// Dense `n × n_coarser` inverse-distance weights.
    interp: Option<Tensor>,
}

/// Neighbourhoods, sampling and interpolation weights for one point cloud.
///
/// Everything here depends only on point positions, so it is computed once
/// per cloud and reused across forward passes.
pub struct CloudStructure {
    levels: Vec<Level>,
}

impl CloudStructure {
    pub fn build(points: &[Point3], config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        if points.is_empty() {
            return Err(contract("forward needs at least one point"));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(contract("input points must be finite"));
        }
        let mut level_points: Vec<Vec<Point3>> = Vec::new();
        let mut pools = Vec::new();
        level_points.push(points.to_vec());
        pools.push(None);
        for _ in 1..config.stages() {
            let prev = level_points.last().expect("level 0 exists");
            let m = prev.len().div_ceil(DOWNSAMPLE).max(1);
            let picked = fps(prev, m, fps_start(prev))?;
            let coarse: Vec<Point3> = picked.iter().map(|&i| prev[i]).collect();
            let kp = config.neighbors.min(prev.len());
            pools.push(Some((knn_query(prev, &coarse, kp)?, kp)));
            level_points.push(coarse);
        }

        let mut levels = Vec::with_capacity(level_points.len());
        for (s, (pts, pool)) in level_points.iter().zip(pools).enumerate() {
            let n = pts.len();
            let k = config.neighbors.min(n);
            let neighbors = knn(pts, k)?;
            let centers: Vec<usize> = (0..n).flat_map(|i| core::iter::repeat_n(i, k)).collect();
            let mut rel = Vec::with_capacity(n * k * 3);
            for (&i, &j) in centers.iter().zip(&neighbors) {
                rel.extend((0..3).map(|a| pts[i][a] - pts[j][a]));
            }
            let interp = match level_points.get(s + 1) {
                Some(coarse) => Some(interpolation(pts, coarse)?),
                None => None,
            };
            levels.push(Level { n, k, neighbors, centers, relative: Tensor::matrix(n * k, 3, rel)?, pool, interp });
        }
        Ok(CloudStructure { levels })
    }

    pub fn point_count(&self) -> usize {
        self.levels[0].n
    }

    /// Point count per level, finest first.
    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.n).collect()
    }
}

fn interpolation(fine: &[Point3], coarse: &[Point3]) -> Result<Tensor> {
    let k = INTERP_NEIGHBORS.min(coarse.len());
    let nearest = knn_query(coarse, fine, k)?;
    let mut w = alloc::vec![0.0; fine.len() * coarse.len()];
    for (i, p) in fine.iter().enumerate() {
        let idx = &nearest[i * k..(i + 1) * k];
        let inv: Vec<f64> = idx.iter().map(|&j| 1.0 / (math::sqrt(dist2(p, &coarse[j])) + 1e-8)).collect();
        let total: f64 = inv.iter().sum();
        for (&j, v) in idx.iter().zip(inv) {
            w[i * coarse.len() + j] = v / total;
        }
    }
    Tensor::matrix(fine.len(), coarse.len(), w)
}

/// Parameters of a [`PointNet`] recorded on a graph.
pub struct BoundParams {
    vars: BTreeMap<String, Var>,
}

impl BoundParams {
    fn get(&self, name: &str) -> Result<Var> {
        self.vars.get(name).copied().ok_or_else(|| contract(format!("parameter {name} is not bound")))
    }

    /// Graph node of each parameter, in name order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, Var)> {
        self.vars.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// The point network: configuration plus parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PointNet {
    config: ModelConfig,
    params: Params,
}

impl PointNet {
    /// Fresh network initialized from `config.seed`.
    pub fn new(config: ModelConfig) -> Result<Self> {
        let params = Params::init(&config)?;
        Ok(PointNet { config, params })
    }

    pub fn from_parts(config: ModelConfig, params: Params) -> Result<Self> {
        let params = Params::from_tensors(&config, params.into_tensors())?;
        Ok(PointNet { config, params })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    pub fn structure(&self, points: &[Point3]) -> Result<CloudStructure> {
        CloudStructure::build(points, &self.config)
    }

    /// Records every parameter on `g`, as trainable leaves or constants.
    pub fn bind(&self, g: &mut Graph, trainable: bool) -> BoundParams {
        let vars = self
            .params
            .iter()
            .map(|(name, t)| {
                let v = if trainable { g.param(t.clone()) } else { g.constant(t.clone()) };
                (String::from(name), v)
            })
            .collect();
        BoundParams { vars }
    }

    /// Binds parameters as slices of one `1 × P` row node laid out like
    /// [`Params::flatten`], so a single input carries every weight.
    pub fn bind_flat(&self, g: &mut Graph, flat: Var) -> Result<BoundParams> {
        let total = g.value(flat).numel();
        if total != self.params.scalar_count() {
            return Err(Error::Shape {
                op: "bind_flat",
                detail: format!("{total} values for {} parameters", self.params.scalar_count()),
            });
        }
        let flat = g.reshape(flat, &[1, total])?;
        let mut vars = BTreeMap::new();
        let mut offset = 0;
        for (name, t) in self.params.iter() {
            let n = t.numel();
            let part = g.narrow_cols(flat, offset, n)?;
            vars.insert(String::from(name), g.reshape(part, t.shape())?);
            offset += n;
        }
        Ok(BoundParams { vars })
    }

    /// Records a forward pass and returns the `n × k` logits node.
    pub fn forward(
        &self,
        g: &mut Graph,
        bound: &BoundParams,
        cloud: &CloudStructure,
        points: &[Point3],
        group_count_feature: f64,
    ) -> Result<Var> {
        if !group_count_feature.is_finite() {
            return Err(contract("group count feature must be finite"));
        }
        if points.len() != cloud.point_count() {
            return Err(contract("points do not match the cloud structure"));
        }
        let levels = &cloud.levels;
        let input: Vec<f64> = points.iter().flat_map(|p| [p[0], p[1], p[2], group_count_feature]).collect();
        let x = g.constant(Tensor::matrix(points.len(), 4, input)?);
        let h = linear(g, bound, "embed", x)?;
        let h = g.relu(h)?;
        let mut feat = attention(g, bound, "enc0", h, &levels[0])?;

        let mut skips = alloc::vec![feat];
        for (s, level) in levels.iter().enumerate().skip(1) {
            let (pool, kp) = level.pool.as_ref().expect("coarse levels carry pooling");
            let h = linear(g, bound, &format!("down{s}"), feat)?;
            let h = g.relu(h)?;
            let gathered = g.gather_rows(h, pool)?;
            let summed = g.group_sum_rows(gathered, *kp)?;
            let pooled = g.scale(summed, 1.0 / *kp as f64)?;
            feat = attention(g, bound, &format!("enc{s}"), pooled, level)?;
            skips.push(feat);
        }

        for s in (0..levels.len() - 1).rev() {
            let weights = g.constant(levels[s].interp.clone().expect("finer levels carry interpolation"));
            let up = g.matmul(weights, feat)?;
            let cat = g.concat_cols(&[skips[s], up])?;
            let h = linear(g, bound, &format!("up{s}"), cat)?;
            let h = g.relu(h)?;
            feat = attention(g, bound, &format!("dec{s}"), h, &levels[s])?;
        }
        linear(g, bound, "head", feat)
    }

    /// Logits for one cloud without gradient tracking.
    pub fn logits(&self, points: &[Point3], group_count_feature: f64) -> Result<Tensor> {
        let cloud = self.structure(points)?;
        let mut g = Graph::new();
        let bound = self.bind(&mut g, false);
        let out = self.forward(&mut g, &bound, &cloud, points, group_count_feature)?;
        Ok(g.value(out).clone())
    }
}

fn linear(g: &mut Graph, bound: &BoundParams, prefix: &str, x: Var) -> Result<Var> {
    let w = bound.get(&format!("{prefix}.w"))?;
    let b = bound.get(&format!("{prefix}.b"))?;
    let y = g.matmul(x, w)?;
    g.add_row(y, b)
}

/// Local attention over a level's k-NN graph with a residual connection.
///
/// For point `i` and neighbour `j`, with `δ` a learned encoding of
/// `p_i - p_j`, the score is `wᵀ relu(q_i - k_j + δ) / √c`; the scores are
/// softmax-normalized over the neighbourhood and weight `v_j + δ`.
fn attention(g: &mut Graph, bound: &BoundParams, prefix: &str, x: Var, level: &Level) -> Result<Var> {
    let c = g.value(x).cols();
    let p = |name: &str| bound.get(&format!("{prefix}.{name}"));

    let q = g.matmul(x, p("q")?)?;
    let k = g.matmul(x, p("k")?)?;
    let v = g.matmul(x, p("v")?)?;

    let rel = g.constant(level.relative.clone());
    let d = linear(g, bound, &format!("{prefix}.pos1"), rel)?;
    let d = g.relu(d)?;
    let delta = linear(g, bound, &format!("{prefix}.pos2"), d)?;

    let qi = g.gather_rows(q, &level.centers)?;
    let kj = g.gather_rows(k, &level.neighbors)?;
    let vj = g.gather_rows(v, &level.neighbors)?;

    let diff = g.sub(qi, kj)?;
    let diff = g.add(diff, delta)?;
    let hidden = g.relu(diff)?;
    let scores = g.matmul(hidden, p("score")?)?;
    let scores = g.scale(scores, 1.0 / math::sqrt(c as f64))?;
    let scores = g.reshape(scores, &[level.n, level.k])?;
    let weights = g.softmax_rows(scores)?;
    let weights = g.reshape(weights, &[level.n * level.k, 1])?;

    let values = g.add(vj, delta)?;
    let weighted = g.mul_col(values, weights)?;
    let agg = g.group_sum_rows(weighted, level.k)?;
    let out = linear(g, bound, &format!("{prefix}.out"), agg)?;
    let out = g.relu(out)?;
    g.add(x, out).map_err(|e| match e {
        Error::Shape { detail, .. } => Error::Shape { op: "attention", detail },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::seq::SliceRandom;
    use rand::Rng as _;

    fn cloud(n: usize, seed: u64) -> Vec<Point3> {
        let mut rng = seeded(seed);
        (0..n).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect()
    }

    #[test]
    fn single_point_shape() {
        let net = PointNet::new(ModelConfig::default()).unwrap();
        let out = net.logits(&[[0.0, 0.0, 0.0]], 0.125).unwrap();
        assert_eq!(out.shape(), &[1, 16]);
        assert!(out.is_finite());
    }

    #[test]
    fn level_sizes() {
        let net = PointNet::new(ModelConfig { channels: alloc::vec![8, 8, 8], ..ModelConfig::default() }).unwrap();
        let s = net.structure(&cloud(37, 1)).unwrap();
        assert_eq!(s.level_sizes(), alloc::vec![37, 10, 3]);
    }

    #[test]
    fn permutation_equivariance() {
        let net = PointNet::new(ModelConfig::default()).unwrap();
        let pts = cloud(30, 2);
        let base = net.logits(&pts, 0.25).unwrap();
        let mut perm: Vec<usize> = (0..pts.len()).collect();
        perm.shuffle(&mut seeded(3));
        let permuted: Vec<Point3> = perm.iter().map(|&i| pts[i]).collect();
        let out = net.logits(&permuted, 0.25).unwrap();
        for (row, &src) in perm.iter().enumerate() {
            for c in 0..16 {
                assert!((out.get(row, c) - base.get(src, c)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn conditioning_changes_logits() {
        let net = PointNet::new(ModelConfig::default()).unwrap();
        let pts = cloud(12, 4);
        assert_ne!(net.logits(&pts, 0.125).unwrap(), net.logits(&pts, 0.25).unwrap());
    }

    #[test]
    fn non_finite_inputs_are_rejected() {
        let net = PointNet::new(ModelConfig::default()).unwrap();
        assert!(net.logits(&[[f64::NAN, 0.0, 0.0]], 0.1).is_err());
        assert!(net.logits(&[[0.0, 0.0, 0.0]], f64::INFINITY).is_err());
    }
}
