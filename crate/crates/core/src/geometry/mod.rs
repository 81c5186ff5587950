//! Meshes, voxelization, voxel Voronoi fracturing and surface extraction.

mod fracture;
mod mesh;
mod surface;
mod voxel;

pub use fracture::{centers_point_cloud, fracture, nearest_site, Piece, PieceGraph, PieceSet};
pub use mesh::{Point3, TriMesh};
pub use surface::{boundary_mesh, piece_mesh, Lattice};
pub use voxel::{voxelize, voxelize_on, VoxelGrid};

pub(crate) fn dist2(a: &Point3, b: &Point3) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}
