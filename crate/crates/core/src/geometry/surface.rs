use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use super::{PieceSet, Point3, TriMesh};
use crate::{contract, Result};

/// Axis-aligned rectilinear lattice: cell `(i, j, k)` spans
/// `xs[i]..xs[i+1]`, `ys[j]..ys[j+1]`, `zs[k]..zs[k+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub planes: [Vec<f64>; 3],
}

impl Lattice {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, zs: Vec<f64>) -> Result<Self> {
        for axis in [&xs, &ys, &zs] {
            if axis.len() < 2 || axis.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(contract("lattice planes must be strictly increasing with at least two entries"));
            }
        }
        Ok(Lattice { planes: [xs, ys, zs] })
    }

    /// Regular lattice matching a voxel grid frame.
    pub fn uniform(origin: Point3, spacing: f64, dims: [usize; 3]) -> Self {
        let axis = |a: usize| (0..=dims[a]).map(|i| origin[a] + i as f64 * spacing).collect();
        Lattice { planes: [axis(0), axis(1), axis(2)] }
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.planes[0].len() - 1, self.planes[1].len() - 1, self.planes[2].len() - 1]
    }

    fn point(&self, p: [usize; 3]) -> Point3 {
        [self.planes[0][p[0]], self.planes[1][p[1]], self.planes[2][p[2]]]
    }
}

type Cell = [usize; 3];
type LatticeEdge = ([usize; 3], [usize; 3]);

struct Face {
    owner: Cell,
    corners: [[usize; 3]; 4],
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum VertexKey {
    Corner([usize; 3]),
    Center(usize),
    Midpoint(LatticeEdge, Cell),
}

/// Closed boundary surface of a union of lattice cells.
///
/// Every cell face between an occupied and an empty cell becomes two
/// outward-facing triangles. Where two occupied cells touch only along an
/// edge, that edge would be shared by four triangles; each of the two cells
/// gets its own copy of the edge midpoint instead, and the faces on that edge
/// are fanned around their centers. The result always has every edge shared
/// by exactly two triangles.
pub fn boundary_mesh(name: &str, lattice: &Lattice, cells: &BTreeSet<Cell>) -> Result<TriMesh> {
    if cells.is_empty() {
        return Err(contract("boundary mesh of an empty cell set"));
    }
    let dims = lattice.dims();
    if let Some(c) = cells.iter().find(|c| (0..3).any(|a| c[a] >= dims[a])) {
        return Err(contract(format!("cell {c:?} outside lattice {dims:?}")));
    }
    let occupied = |c: [isize; 3]| -> bool {
        (0..3).all(|a| c[a] >= 0 && (c[a] as usize) < dims[a]) && cells.contains(&[c[0] as usize, c[1] as usize, c[2] as usize])
    };

    let mut faces = Vec::new();
    for &cell in cells {
        for axis in 0..3 {
            for positive in [false, true] {
                let mut n = cell.map(|v| v as isize);
                n[axis] += if positive { 1 } else { -1 };
                if occupied(n) {
                    continue;
                }
                let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
                let mut base = cell;
                base[axis] += usize::from(positive);
                let corner = |du: usize, dv: usize| {
                    let mut p = base;
                    p[u] += du;
                    p[v] += dv;
                    p
                };
                // counter-clockwise when seen from the empty side
                let mut corners = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)];
                if !positive {
                    corners.reverse();
                }
                faces.push(Face { owner: cell, corners });
            }
        }
    }

    let edge_key = |a: [usize; 3], b: [usize; 3]| if a < b { (a, b) } else { (b, a) };
    let mut edge_use: BTreeMap<LatticeEdge, u32> = BTreeMap::new();
    for f in &faces {
        for k in 0..4 {
            *edge_use.entry(edge_key(f.corners[k], f.corners[(k + 1) % 4])).or_insert(0) += 1;
        }
    }

    let mut index: BTreeMap<VertexKey, usize> = BTreeMap::new();
    let mut vertices: Vec<Point3> = Vec::new();
    let mut vertex = |key: VertexKey, pos: Point3| -> usize {
        *index.entry(key).or_insert_with(|| {
            vertices.push(pos);
            vertices.len() - 1
        })
    };

    let mut triangles = Vec::with_capacity(faces.len() * 2);
    for (fi, f) in faces.iter().enumerate() {
        let pos = f.corners.map(|c| lattice.point(c));
        let ids = [0, 1, 2, 3].map(|k| vertex(VertexKey::Corner(f.corners[k]), pos[k]));
        let split: [bool; 4] =
            [0, 1, 2, 3].map(|k| edge_use[&edge_key(f.corners[k], f.corners[(k + 1) % 4])] > 2);
        if !split.iter().any(|&s| s) {
            triangles.push([ids[0], ids[1], ids[2]]);
            triangles.push([ids[0], ids[2], ids[3]]);
            continue;
        }
        let center = mean(&pos);
        let c = vertex(VertexKey::Center(fi), center);
        for k in 0..4 {
            let (a, b) = (ids[k], ids[(k + 1) % 4]);
            if split[k] {
                let key = edge_key(f.corners[k], f.corners[(k + 1) % 4]);
                let mid = mean(&[pos[k], pos[(k + 1) % 4]]);
                let m = vertex(VertexKey::Midpoint(key, f.owner), mid);
                triangles.push([a, m, c]);
                triangles.push([m, b, c]);
            } else {
                triangles.push([a, b, c]);
            }
        }
    }
    TriMesh::new(name, vertices, triangles)
}

fn mean(points: &[Point3]) -> Point3 {
    let n = points.len() as f64;
    let mut m = [0.0; 3];
    for p in points {
        for a in 0..3 {
            m[a] += p[a];
        }
    }
    m.map(|v| v / n)
}

/// Boundary mesh of the union of the given pieces' voxels.
pub fn piece_mesh(pieces: &PieceSet, piece_ids: &[usize]) -> Result<TriMesh> {
    if piece_ids.is_empty() {
        return Err(contract("piece_mesh needs at least one piece"));
    }
    let grid = pieces.grid();
    let mut cells = BTreeSet::new();
    for &id in piece_ids {
        let piece = pieces
            .pieces()
            .get(id)
            .ok_or_else(|| contract(format!("piece {id} does not exist ({} pieces)", pieces.len())))?;
        cells.extend(piece.voxels.iter().map(|&v| grid.coords(v)));
    }
    let lattice = Lattice::uniform(grid.origin(), grid.voxel_size(), grid.dims());
    boundary_mesh("pieces", &lattice, &cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cells(list: &[[usize; 3]]) -> BTreeSet<Cell> {
        list.iter().copied().collect()
    }

    fn unit_lattice(n: usize) -> Lattice {
        Lattice::uniform([0.0; 3], 1.0, [n; 3])
    }

    #[test]
    fn single_voxel_is_a_cube() {
        let m = boundary_mesh("v", &unit_lattice(3), &cells(&[[1, 1, 1]])).unwrap();
        assert_eq!(m.triangles().len(), 12);
        assert!(m.is_watertight());
        assert!((m.volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_face_adjacent_voxels() {
        let m = boundary_mesh("v", &unit_lattice(3), &cells(&[[0, 0, 0], [1, 0, 0]])).unwrap();
        assert_eq!(m.triangles().len(), 20);
        assert!(m.is_watertight());
        assert!((m.volume() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn edge_contact_stays_watertight() {
        let m = boundary_mesh("v", &unit_lattice(3), &cells(&[[0, 0, 0], [1, 1, 0]])).unwrap();
        assert!(m.is_watertight());
        assert!((m.volume() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn pinched_tunnel_stays_watertight() {
        // two diagonal voxels joined above and below by full layers
        let mut list = alloc::vec![[0, 0, 1], [1, 1, 1]];
        for x in 0..2 {
            for y in 0..2 {
                list.push([x, y, 0]);
                list.push([x, y, 2]);
            }
        }
        let m = boundary_mesh("v", &unit_lattice(3), &cells(&list)).unwrap();
        assert!(m.is_watertight());
        assert!((m.volume() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rectilinear_lattice_volume() {
        let lat = Lattice::new(alloc::vec![0.0, 0.5, 2.0], alloc::vec![0.0, 1.0], alloc::vec![0.0, 0.25, 1.0]).unwrap();
        let all = cells(&[[0, 0, 0], [1, 0, 0], [0, 0, 1], [1, 0, 1]]);
        let m = boundary_mesh("box", &lat, &all).unwrap();
        assert!(m.is_watertight());
        assert!((m.volume() - 2.0).abs() < 1e-12);
    }
}
