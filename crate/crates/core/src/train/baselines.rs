//! Clustering heuristics used as comparison points for the learned model.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::dataset::GroupLabeling;
use crate::geometry::{centers_point_cloud, dist2, nearest_site, PieceSet, Point3};
use crate::model::fps;
use crate::rng::seeded;
use crate::{contract, math, Result};

const MAX_ITERATIONS: usize = 100;
const SHIFT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centers: Vec<Point3>,
    /// Sum of squared distances after each assignment step.
    pub objective: Vec<f64>,
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(contract(format!("k must be in 1..={n}, got {k}")));
    }
    Ok(())
}

/// Lloyd's algorithm with a seeded farthest-point initialization: a random
/// first center, then repeatedly the point farthest from all chosen centers.
pub fn kmeans(points: &[Point3], k: usize, seed: u64) -> Result<KMeansResult> {
    check_k(k, points.len())?;
    let start = seeded(seed).gen_range(0..points.len());
    let mut centers: Vec<Point3> = fps(points, k, start)?.into_iter().map(|i| points[i]).collect();
    let mut labels = vec![0; points.len()];
    let mut objective = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let mut cost = 0.0;
        for (l, p) in labels.iter_mut().zip(points) {
            *l = nearest_site(p, &centers);
            cost += dist2(p, &centers[*l]);
        }
        objective.push(cost);

        let mut sums = vec![[0.0; 3]; k];
        let mut counts = vec![0usize; k];
        for (&l, p) in labels.iter().zip(points) {
            counts[l] += 1;
            for a in 0..3 {
                sums[l][a] += p[a];
            }
        }
        let mut shift = 0.0f64;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let next = sums[c].map(|s| s / counts[c] as f64);
            shift = shift.max(math::sqrt(dist2(&next, &centers[c])));
            centers[c] = next;
        }
        if shift < SHIFT_TOLERANCE {
            break;
        }
    }
    Ok(KMeansResult { labels, centers, objective })
}

/// k-means on piece centers of mass.
pub fn baseline_kmeans(pieces: &PieceSet, k: usize, seed: u64) -> Result<GroupLabeling> {
    let (coms, _) = centers_point_cloud(pieces);
    let result = kmeans(&coms, k, seed)?;
    GroupLabeling::new(result.labels, k)
}

/// Coarse Voronoi grouping: `k` piece centers drawn at random act as
/// super-sites and every piece joins the nearest one.
pub fn baseline_supersites(pieces: &PieceSet, k: usize, seed: u64) -> Result<GroupLabeling> {
    let (coms, _) = centers_point_cloud(pieces);
    check_k(k, coms.len())?;
    let mut rng = seeded(seed);
    let sites: Vec<Point3> = rand::seq::index::sample(&mut rng, coms.len(), k).iter().map(|i| coms[i]).collect();
    let labels = coms.iter().map(|c| nearest_site(c, &sites)).collect();
    GroupLabeling::new(labels, k)
}
