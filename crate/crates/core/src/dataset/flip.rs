use alloc::format;
use alloc::vec::Vec;

use super::{normalize, GroupLabeling, TrainingExample};
use crate::geometry::{centers_point_cloud, dist2, fracture, voxelize, voxelize_on, PieceSet, Point3, TriMesh, VoxelGrid};
use crate::{contract, Error, Result};

/// Turns a (whole, fragments) pair into a labelled piece cloud.
///
/// The whole mesh is voxelized and fractured. Each fragment is voxelized on
/// the same grid, and a piece takes the index of the first fragment whose
/// voxel holding the piece's center of mass is occupied. Pieces whose center
/// of mass falls outside every fragment take the fragment with the nearest
/// occupied voxel center.
pub fn flip_example(
    whole: &TriMesh,
    fragments: &[TriMesh],
    num_sites: usize,
    resolution: usize,
    seed: u64,
) -> Result<(TrainingExample, PieceSet)> {
    if fragments.is_empty() {
        return Err(contract("flip needs at least one fragment"));
    }
    let grid = voxelize(whole, resolution)?;
    let pieces = fracture(&grid, num_sites, seed)?;

    let mut fragment_grids = Vec::with_capacity(fragments.len());
    for (i, f) in fragments.iter().enumerate() {
        let g = voxelize_on(f, &grid)?;
        if g.occupied_count() == 0 {
            return Err(Error::EmptyFragment { index: i });
        }
        fragment_grids.push(g);
    }

    let (coms, _) = centers_point_cloud(&pieces);
    let labels: Vec<usize> = coms.iter().map(|c| label_for(c, &fragment_grids)).collect();
    let (points, _) = normalize(&coms);
    let labeling = GroupLabeling::new(labels, fragments.len())?;
    let source = format!("{}:sites={num_sites}:res={resolution}:seed={seed}", whole.name());
    Ok((TrainingExample::new(points, labeling, source)?, pieces))
}

fn label_for(com: &Point3, fragments: &[VoxelGrid]) -> usize {
    if let Some(v) = fragments[0].voxel_at(com) {
        if let Some(f) = fragments.iter().position(|g| g.is_occupied(v)) {
            return f;
        }
    }
    nearest_fragment(com, fragments)
}

pub(crate) fn nearest_fragment(p: &Point3, fragments: &[VoxelGrid]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (f, g) in fragments.iter().enumerate() {
        for v in g.occupied() {
            let d = dist2(p, &g.center(v));
            if d < best.0 {
                best = (d, f);
            }
        }
    }
    best.1
}
