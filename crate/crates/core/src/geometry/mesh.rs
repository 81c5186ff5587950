use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{contract, Result};

pub type Point3 = [f64; 3];

/// Indexed triangle mesh.
///
/// Construction validates indices and rejects degenerate triangles. The
/// watertight flag is computed once: a mesh is watertight when every
/// undirected edge is used by exactly two triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    name: String,
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
    watertight: bool,
}

const DEGENERATE_AREA: f64 = 1e-12;

impl TriMesh {
    pub fn new(name: impl Into<String>, vertices: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(contract("mesh has no triangles"));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i >= vertices.len()) {
                return Err(contract(format!("triangle {t} references vertex {bad} of {}", vertices.len())));
            }
            if triangle_area(&vertices, tri) <= DEGENERATE_AREA {
                return Err(contract(format!("triangle {t} is degenerate")));
            }
        }
        let watertight = open_edge_count(&triangles) == 0;
        Ok(TriMesh { name: name.into(), vertices, triangles, watertight })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_watertight(&self) -> bool {
        self.watertight
    }

    /// Edges not shared by exactly two triangles.
    pub fn open_edges(&self) -> usize {
        open_edge_count(&self.triangles)
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bounds(&self) -> (Point3, Point3) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for a in 0..3 {
                lo[a] = lo[a].min(v[a]);
                hi[a] = hi[a].max(v[a]);
            }
        }
        (lo, hi)
    }

    /// Signed enclosed volume (positive for outward-facing triangles).
    pub fn volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let (a, b, c) = (self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]);
                let cross = [
                    b[1] * c[2] - b[2] * c[1],
                    b[2] * c[0] - b[0] * c[2],
                    b[0] * c[1] - b[1] * c[0],
                ];
                a[0] * cross[0] + a[1] * cross[1] + a[2] * cross[2]
            })
            .sum::<f64>()
            / 6.0
    }
}

fn triangle_area(vertices: &[Point3], tri: &[usize; 3]) -> f64 {
    let (a, b, c) = (vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    0.5 * crate::math::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2])
}

fn open_edge_count(triangles: &[[usize; 3]]) -> usize {
    let mut uses: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for t in triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            *uses.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    uses.values().filter(|&&n| n != 2).count()
}
