use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{Point3, TriMesh};
use crate::{contract, math, Error, Result};

/// Regular grid of cubic voxels with an occupancy bitset.
///
/// Linear index of voxel `(x, y, z)` is `x + nx * (y + ny * z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    origin: Point3,
    voxel_size: f64,
    dims: [usize; 3],
    bits: Vec<u64>,
}

impl VoxelGrid {
    /// Empty grid covering `[lo, hi]` with `resolution` voxels along the
    /// longest axis plus one voxel of padding on every side.
    pub fn fit(lo: Point3, hi: Point3, resolution: usize) -> Result<Self> {
        if resolution < 4 {
            return Err(contract(format!("resolution {resolution} is below the minimum of 4")));
        }
        let extent = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
        let longest = extent.iter().copied().fold(0.0, f64::max);
        if !(longest > 0.0) || !longest.is_finite() {
            return Err(contract("mesh bounds are empty or not finite"));
        }
        let voxel_size = longest / resolution as f64;
        let mut dims = [0; 3];
        for a in 0..3 {
            let cells = math::ceil(extent[a] / voxel_size - 1e-9).max(1.0) as usize;
            dims[a] = cells + 2;
        }
        let origin = [lo[0] - voxel_size, lo[1] - voxel_size, lo[2] - voxel_size];
        Self::empty(origin, voxel_size, dims)
    }

    pub fn empty(origin: Point3, voxel_size: f64, dims: [usize; 3]) -> Result<Self> {
        if !(voxel_size > 0.0) || dims.contains(&0) {
            return Err(contract("voxel grid needs a positive size and non-zero dims"));
        }
        let n = dims[0] * dims[1] * dims[2];
        Ok(VoxelGrid { origin, voxel_size, dims, bits: vec![0; n.div_ceil(64)] })
    }

    /// Same frame, no occupied voxels.
    pub fn cleared(&self) -> Self {
        VoxelGrid { bits: vec![0; self.bits.len()], ..self.clone() }
    }

    pub fn origin(&self) -> Point3 {
        self.origin
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn linear(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    pub fn coords(&self, index: usize) -> [usize; 3] {
        let [nx, ny, _] = self.dims;
        [index % nx, (index / nx) % ny, index / (nx * ny)]
    }

    pub fn center(&self, index: usize) -> Point3 {
        let c = self.coords(index);
        let s = self.voxel_size;
        [
            self.origin[0] + (c[0] as f64 + 0.5) * s,
            self.origin[1] + (c[1] as f64 + 0.5) * s,
            self.origin[2] + (c[2] as f64 + 0.5) * s,
        ]
    }

    /// Voxel containing `p`, if `p` lies inside the grid. Voxels are
    /// half-open, and a point within rounding distance of a voxel face
    /// counts as lying on it.
    pub fn voxel_at(&self, p: &Point3) -> Option<usize> {
        let mut c = [0usize; 3];
        for a in 0..3 {
            let f = math::floor((p[a] - self.origin[a]) / self.voxel_size + 1e-9);
            if f < 0.0 || f >= self.dims[a] as f64 {
                return None;
            }
            c[a] = f as usize;
        }
        Some(self.linear(c[0], c[1], c[2]))
    }

    pub fn is_occupied(&self, index: usize) -> bool {
        index < self.len() && self.bits[index / 64] >> (index % 64) & 1 == 1
    }

    pub fn set(&mut self, index: usize, occupied: bool) {
        let mask = 1u64 << (index % 64);
        if occupied {
            self.bits[index / 64] |= mask;
        } else {
            self.bits[index / 64] &= !mask;
        }
    }

    /// Occupied voxels in ascending linear order.
    pub fn occupied(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_occupied(i)).collect()
    }

    pub fn occupied_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Linear indices of the face neighbours of `index` that lie in the grid.
    pub fn face_neighbors(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        let c = self.coords(index);
        let strides = [1, self.dims[0], self.dims[0] * self.dims[1]];
        (0..6).filter_map(move |k| {
            let a = k / 2;
            if k % 2 == 0 {
                (c[a] > 0).then(|| index - strides[a])
            } else {
                (c[a] + 1 < self.dims[a]).then(|| index + strides[a])
            }
        })
    }
}

/// Voxelizes a watertight mesh on a fitted grid.
pub fn voxelize(mesh: &TriMesh, resolution: usize) -> Result<VoxelGrid> {
    let (lo, hi) = mesh.bounds();
    let grid = VoxelGrid::fit(lo, hi, resolution)?;
    voxelize_on(mesh, &grid)
}

/// Voxelizes a watertight mesh on the frame of an existing grid.
///
/// A voxel is occupied when an axis-aligned ray from its center crosses the
/// surface an odd number of times. Rows whose ray grazes an edge or vertex
/// are shifted sideways by a tiny fixed offset and cast again.
pub fn voxelize_on(mesh: &TriMesh, frame: &VoxelGrid) -> Result<VoxelGrid> {
    if !mesh.is_watertight() {
        return Err(Error::NotWatertight { open_edges: mesh.open_edges() });
    }
    let mut grid = frame.cleared();
    let [nx, ny, nz] = grid.dims;
    let s = grid.voxel_size;
    let o = grid.origin;

    let v = mesh.vertices();
    // bucket triangles by the rows whose (y, z) centers fall in their yz bounding box
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); ny * nz];
    let index_range = |lo: f64, hi: f64, axis: usize, n: usize| {
        let first = math::ceil((lo - o[axis]) / s - 0.5 - 1e-6).max(0.0) as usize;
        let last = math::floor((hi - o[axis]) / s - 0.5 + 1e-6);
        if last < 0.0 {
            return (1, 0);
        }
        (first, (last as usize).min(n - 1))
    };
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let ys = tri.map(|i| v[i][1]);
        let zs = tri.map(|i| v[i][2]);
        let (y0, y1) = index_range(ys.iter().copied().fold(f64::INFINITY, f64::min), ys.iter().copied().fold(f64::NEG_INFINITY, f64::max), 1, ny);
        let (z0, z1) = index_range(zs.iter().copied().fold(f64::INFINITY, f64::min), zs.iter().copied().fold(f64::NEG_INFINITY, f64::max), 2, nz);
        for z in z0..=z1 {
            for y in y0..=y1 {
                rows[y + ny * z].push(t);
            }
        }
    }

    let eps = 1e-9 * s;
    let mut crossings = Vec::new();
    for z in 0..nz {
        for y in 0..ny {
            let bucket = &rows[y + ny * z];
            if bucket.is_empty() {
                continue;
            }
            let py = o[1] + (y as f64 + 0.5) * s;
            let pz = o[2] + (z as f64 + 0.5) * s;
            let mut attempt = 0u32;
            loop {
                let (dy, dz) = perturbation(attempt, eps);
                crossings.clear();
                if row_crossings(mesh, bucket, py + dy, pz + dz, s, &mut crossings) {
                    break;
                }
                attempt += 1;
                if attempt > 64 {
                    return Err(contract(format!("could not find a clean ray for voxel row y={y} z={z}")));
                }
            }
            crossings.sort_by(f64::total_cmp);
            for x in 0..nx {
                let px = o[0] + (x as f64 + 0.5) * s;
                let after = crossings.len() - crossings.partition_point(|&c| c <= px);
                if after % 2 == 1 {
                    let idx = grid.linear(x, y, z);
                    grid.set(idx, true);
                }
            }
        }
    }
    Ok(grid)
}

fn perturbation(attempt: u32, eps: f64) -> (f64, f64) {
    if attempt == 0 {
        return (0.0, 0.0);
    }
    // irrational-ish directions so successive retries do not line up with mesh features
    let k = attempt as f64;
    (eps * k * 0.754_877_666_246_692_7, eps * k * 0.569_840_290_998_053_3)
}

/// Collects x coordinates where the line `(t, py, pz)` crosses the mesh.
/// Returns false when the line passes through an edge or vertex.
fn row_crossings(mesh: &TriMesh, bucket: &[usize], py: f64, pz: f64, scale: f64, out: &mut Vec<f64>) -> bool {
    let v = mesh.vertices();
    let tol = 1e-14 * scale * scale;
    for &t in bucket {
        let [a, b, c] = mesh.triangles()[t].map(|i| v[i]);
        let det = (b[1] - a[1]) * (c[2] - a[2]) - (b[2] - a[2]) * (c[1] - a[1]);
        let e0 = edge_fn(b, c, py, pz);
        let e1 = edge_fn(c, a, py, pz);
        let e2 = edge_fn(a, b, py, pz);
        if math::abs(det) <= tol {
            // triangle parallel to the ray: only a problem if the ray touches it
            let inside_box = py >= a[1].min(b[1]).min(c[1]) - tol
                && py <= a[1].max(b[1]).max(c[1]) + tol
                && pz >= a[2].min(b[2]).min(c[2]) - tol
                && pz <= a[2].max(b[2]).max(c[2]) + tol;
            if inside_box && (math::abs(e0) <= tol || math::abs(e1) <= tol || math::abs(e2) <= tol) {
                return false;
            }
            continue;
        }
        if math::abs(e0) <= tol || math::abs(e1) <= tol || math::abs(e2) <= tol {
            let same = (e0 >= -tol && e1 >= -tol && e2 >= -tol) || (e0 <= tol && e1 <= tol && e2 <= tol);
            if same {
                return false;
            }
            continue;
        }
        let inside = (e0 > 0.0 && e1 > 0.0 && e2 > 0.0) || (e0 < 0.0 && e1 < 0.0 && e2 < 0.0);
        if inside {
            if a[0] == b[0] && b[0] == c[0] {
                // exact for faces perpendicular to the ray, so shared faces agree
                out.push(a[0]);
            } else {
                let (w0, w1, w2) = (e0 / det, e1 / det, e2 / det);
                out.push(w0 * a[0] + w1 * b[0] + w2 * c[0]);
            }
        }
    }
    true
}

// twice the signed area of (p, q, r) in the yz plane, r = (py, pz)
fn edge_fn(p: Point3, q: Point3, py: f64, pz: f64) -> f64 {
    (q[1] - p[1]) * (pz - p[2]) - (q[2] - p[2]) * (py - p[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mesh::tests::unit_cube;

    #[test]
    fn unit_cube_resolution_four() {
        let grid = voxelize(&unit_cube(), 4).unwrap();
        assert_eq!(grid.dims(), [6, 6, 6]);
        assert_eq!(grid.occupied_count(), 64);
        for i in grid.occupied() {
            let c = grid.center(i);
            assert!(c.iter().all(|&x| x > 0.0 && x < 1.0));
        }
    }

    #[test]
    fn non_watertight_is_rejected() {
        let cube = unit_cube();
        let open = TriMesh::new("plane", cube.vertices().to_vec(), cube.triangles()[..2].to_vec()).unwrap();
        assert!(matches!(voxelize(&open, 8), Err(Error::NotWatertight { .. })));
    }

    #[test]
    fn resolution_below_four_is_rejected() {
        assert!(voxelize(&unit_cube(), 3).is_err());
    }

    #[test]
    fn linear_index_layout() {
        let g = VoxelGrid::empty([0.0; 3], 1.0, [3, 4, 5]).unwrap();
        assert_eq!(g.linear(1, 2, 3), 1 + 3 * (2 + 4 * 3));
        assert_eq!(g.coords(g.linear(2, 3, 4)), [2, 3, 4]);
        assert_eq!(g.face_neighbors(0).count(), 3);
        assert_eq!(g.face_neighbors(g.linear(1, 1, 1)).count(), 6);
    }
}
