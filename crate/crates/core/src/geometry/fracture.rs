use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{dist2, Point3, VoxelGrid};
use crate::rng::seeded;
use crate::{contract, Result};

/// A connected set of voxels produced by fracturing.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub id: usize,
    /// Linear voxel indices, ascending.
    pub voxels: Vec<usize>,
    /// Mean of the member voxel centers.
    pub com: Point3,
    pub volume: f64,
}

/// Face adjacency between pieces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PieceGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl PieceGraph {
    /// Builds a graph from unordered pairs; self-loops are rejected.
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edges = BTreeSet::new();
        for (a, b) in pairs {
            if a == b || a >= n || b >= n {
                return Err(contract(format!("invalid piece edge ({a}, {b}) for {n} pieces")));
            }
            edges.insert((a.min(b), a.max(b)));
        }
        Ok(PieceGraph { n, edges })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Edges as `(low, high)` pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }
}

/// Grid plus the pieces it was split into.
#[derive(Debug, Clone, PartialEq)]
pub struct PieceSet {
    grid: VoxelGrid,
    pieces: Vec<Piece>,
    graph: PieceGraph,
}

impl PieceSet {
    /// Builds pieces from voxel lists, recomputing centers of mass, volumes
    /// and adjacency. Voxel lists must be non-empty, disjoint, occupied and
    /// cover every occupied voxel.
    pub fn from_voxel_lists(grid: VoxelGrid, lists: Vec<Vec<usize>>) -> Result<Self> {
        let mut owner = vec![usize::MAX; grid.len()];
        for (id, list) in lists.iter().enumerate() {
            if list.is_empty() {
                return Err(contract(format!("piece {id} has no voxels")));
            }
            for &v in list {
                if !grid.is_occupied(v) {
                    return Err(contract(format!("piece {id} claims unoccupied voxel {v}")));
                }
                if owner[v] != usize::MAX {
                    return Err(contract(format!("voxel {v} belongs to pieces {} and {id}", owner[v])));
                }
                owner[v] = id;
            }
        }
        if let Some(v) = grid.occupied().into_iter().find(|&v| owner[v] == usize::MAX) {
            return Err(contract(format!("occupied voxel {v} belongs to no piece")));
        }

        let cell = crate::math::powi(grid.voxel_size(), 3);
        let pieces: Vec<Piece> = lists
            .into_iter()
            .enumerate()
            .map(|(id, mut voxels)| {
                voxels.sort_unstable();
                let mut com = [0.0; 3];
                for &v in &voxels {
                    let c = grid.center(v);
                    for a in 0..3 {
                        com[a] += c[a];
                    }
                }
                let n = voxels.len() as f64;
                Piece { id, com: com.map(|s| s / n), volume: cell * n, voxels }
            })
            .collect();

        let mut pairs = BTreeSet::new();
        for p in &pieces {
            for &v in &p.voxels {
                for w in grid.face_neighbors(v) {
                    let o = owner[w];
                    if o != usize::MAX && o != p.id {
                        pairs.insert((p.id.min(o), p.id.max(o)));
                    }
                }
            }
        }
        let graph = PieceGraph::new(pieces.len(), pairs)?;
        Ok(PieceSet { grid, pieces, graph })
    }

    /// Builds pieces from a per-voxel site assignment, splitting every site's
    /// voxels into 6-connected components. Pieces are ordered by site and
    /// then by their smallest voxel index.
    pub fn from_assignment(grid: VoxelGrid, assignment: &[Option<usize>]) -> Result<Self> {
        if assignment.len() != grid.len() {
            return Err(contract("assignment length does not match the grid"));
        }
        let mut seen = vec![false; grid.len()];
        let mut components: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..grid.len() {
            let Some(site) = assignment[start] else { continue };
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut voxels = Vec::new();
            while let Some(v) = queue.pop_front() {
                voxels.push(v);
                for w in grid.face_neighbors(v) {
                    if !seen[w] && assignment[w] == Some(site) {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            voxels.sort_unstable();
            components.push((site, voxels));
        }
        // components were discovered in ascending order of their smallest voxel
        components.sort_by_key(|(site, voxels)| (*site, voxels[0]));
        Self::from_voxel_lists(grid, components.into_iter().map(|(_, v)| v).collect())
    }

    pub fn grid(&self) -> &VoxelGrid {
        &self.grid
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn graph(&self) -> &PieceGraph {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn total_volume(&self) -> f64 {
        self.pieces.iter().map(|p| p.volume).sum()
    }
}

/// Index of the site nearest to `p`; ties go to the lowest index.
pub fn nearest_site(p: &Point3, sites: &[Point3]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, s) in sites.iter().enumerate() {
        let d = dist2(p, s);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Voxel Voronoi fracture.
///
/// Sites are sampled without replacement from occupied voxel centers. Every
/// occupied voxel joins its nearest site, and each site's region is split
/// into connected components so that every piece is one solid.
pub fn fracture(grid: &VoxelGrid, num_sites: usize, seed: u64) -> Result<PieceSet> {
    let occupied = grid.occupied();
    if num_sites == 0 || num_sites > occupied.len() {
        return Err(contract(format!(
            "num_sites must be in 1..={} (occupied voxels), got {num_sites}",
            occupied.len()
        )));
    }
    let mut rng = seeded(seed);
    let picks = rand::seq::index::sample(&mut rng, occupied.len(), num_sites);
    let sites: Vec<Point3> = picks.iter().map(|i| grid.center(occupied[i])).collect();

    let mut assignment = vec![None; grid.len()];
    for &v in &occupied {
        assignment[v] = Some(nearest_site(&grid.center(v), &sites));
    }
    PieceSet::from_assignment(grid.clone(), &assignment)
}

/// Piece centers of mass as a point cloud; row `i` belongs to piece `i`.
pub fn centers_point_cloud(pieces: &PieceSet) -> (Vec<Point3>, Vec<usize>) {
    pieces.pieces().iter().map(|p| (p.com, p.id)).unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solid(n: usize) -> VoxelGrid {
        let mut g = VoxelGrid::empty([0.0; 3], 1.0, [n; 3]).unwrap();
        for i in 0..g.len() {
            g.set(i, true);
        }
        g
    }

    #[test]
    fn nearest_site_tie_breaks_low() {
        let sites = [[0.0, 0.0, 0.0], [10.0, 0.0, 0.0]];
        assert_eq!(nearest_site(&[4.9, 0.0, 0.0], &sites), 0);
        assert_eq!(nearest_site(&[5.1, 0.0, 0.0], &sites), 1);
        assert_eq!(nearest_site(&[5.0, 0.0, 0.0], &sites), 0);
    }

    #[test]
    fn com_is_mean_of_voxel_centers() {
        let mut g = VoxelGrid::empty([-0.5, -0.5, -0.5], 1.0, [2, 1, 1]).unwrap();
        g.set(0, true);
        g.set(1, true);
        let set = PieceSet::from_voxel_lists(g, vec![vec![0, 1]]).unwrap();
        assert_eq!(set.pieces()[0].com, [0.5, 0.0, 0.0]);
        let (cloud, ids) = centers_point_cloud(&set);
        assert_eq!(cloud.len(), 1);
        assert_eq!(ids, vec![0]);
    }

    #[test]
    fn disconnected_site_regions_are_split() {
        let mut g = VoxelGrid::empty([0.0; 3], 1.0, [3, 1, 1]).unwrap();
        for i in 0..3 {
            g.set(i, true);
        }
        let set = PieceSet::from_assignment(g, &[Some(0), Some(1), Some(0)]).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.pieces()[0].voxels, vec![0]);
        assert_eq!(set.pieces()[1].voxels, vec![2]);
        assert_eq!(set.pieces()[2].voxels, vec![1]);
        assert!(set.graph().contains(0, 2));
        assert!(set.graph().contains(1, 2));
        assert!(!set.graph().contains(0, 1));
    }

    #[test]
    fn site_count_out_of_range() {
        let g = solid(2);
        assert!(fracture(&g, 0, 1).is_err());
        assert!(fracture(&g, 9, 1).is_err());
        assert_eq!(fracture(&g, 8, 1).unwrap().len(), 8);
    }

    #[test]
    fn overlapping_pieces_are_rejected() {
        let g = solid(2);
        let lists = vec![vec![0, 1, 2, 3], vec![3, 4, 5, 6, 7]];
        assert!(PieceSet::from_voxel_lists(g.clone(), lists).is_err());
        assert!(PieceSet::from_voxel_lists(g, vec![vec![0, 1, 2]]).is_err());
    }
}
