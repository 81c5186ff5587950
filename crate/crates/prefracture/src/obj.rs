//! Wavefront OBJ meshes: `v` and `f` records only.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use prefracture_core::geometry::{Point3, TriMesh};

use crate::error::{Error, Result};

/// Parses OBJ text. Polygon faces are fan-triangulated; texture and normal
/// indices (`f 1/2/3 ...`) and negative relative indices are accepted.
pub fn parse_obj(text: &str, name: &str, path: &Path) -> Result<TriMesh> {
    let parse_err = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
    let mut vertices: Vec<Point3> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                let coords: Vec<&str> = fields.collect();
                if coords.len() < 3 {
                    return Err(parse_err(line_no, format!("vertex needs 3 coordinates, found {}", coords.len())));
                }
                let mut p = [0.0; 3];
                for (a, text) in coords[..3].iter().enumerate() {
                    p[a] = text
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| parse_err(line_no, format!("invalid coordinate {text:?}")))?;
                }
                vertices.push(p);
            }
            Some("f") => {
                let mut ids = Vec::new();
                for field in fields {
                    let index = field.split('/').next().unwrap_or("");
                    let value: i64 =
                        index.parse().map_err(|_| parse_err(line_no, format!("invalid face index {field:?}")))?;
                    let resolved = match value {
                        v if v > 0 && v as usize <= vertices.len() => v as usize - 1,
                        v if v < 0 && v.unsigned_abs() as usize <= vertices.len() => vertices.len() - v.unsigned_abs() as usize,
                        _ => {
                            return Err(parse_err(
                                line_no,
                                format!("face index {value} out of range ({} vertices so far)", vertices.len()),
                            ))
                        }
                    };
                    ids.push(resolved);
                }
                if ids.len() < 3 {
                    return Err(parse_err(line_no, format!("face needs at least 3 vertices, found {}", ids.len())));
                }
                for k in 1..ids.len() - 1 {
                    triangles.push([ids[0], ids[k], ids[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriMesh::new(name, vertices, triangles).map_err(|e| Error::data(path, e))
}

/// Reads an OBJ file; the mesh is named after the file stem.
pub fn read_obj(path: &Path) -> Result<TriMesh> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_obj(&text, &name, path)
}

/// OBJ text with shortest round-trip coordinates and 1-based indices.
pub fn obj_string(mesh: &TriMesh) -> String {
    let mut out = String::new();
    writeln!(out, "o {}", mesh.name()).unwrap();
    for v in mesh.vertices() {
        writeln!(out, "v {} {} {}", v[0], v[1], v[2]).unwrap();
    }
    for t in mesh.triangles() {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
    out
}

pub fn write_obj(path: &Path, mesh: &TriMesh) -> Result<()> {
    fs::write(path, obj_string(mesh)).map_err(|e| Error::io(path, e))
}
