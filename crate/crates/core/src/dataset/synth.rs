//! Synthetic shapes with known weak points.
//!
//! Every shape is a handful of axis-aligned box primitives joined by thin
//! box necks. The ground-truth fragments are the primitives; each neck is
//! attached to the larger of the two primitives it joins (the first one on a
//! volume tie). Dimensions are drawn from the ranges documented on each
//! family, all in model units.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::geometry::{boundary_mesh, Lattice, Point3, TriMesh};
use crate::rng::{seeded, Rng};
use crate::{contract, Result};

/// Shape families.
///
/// - `Dumbbell`: two cubes (side 0.5..1.0) joined along x by a neck
///   (length 0.2..0.5, width 0.12..0.25).
/// - `Hourglass`: two stepped bulbs stacked along z (width 0.7..1.0, height
///   0.4..0.6, each with a 0.6-scaled shoulder) joined by a waist (width
///   0.12..0.2, length 0.15..0.3).
/// - `LBracket`: a horizontal arm (length 1.2..1.8) and a vertical arm
///   (length 1.0..1.6), both of thickness 0.35..0.55, joined at the corner by
///   a neck (length 0.15..0.3, width 0.12..0.2).
/// - `Multilobe`: a body box (sides 1.0..1.4) with 1..=4 cube lobes (side
///   0.45..0.75) on distinct body faces, each hung on a neck (length
///   0.15..0.3, width 0.12..0.2). Lobes are much smaller than the body, so
///   the groups are strongly unbalanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Family {
    Dumbbell,
    Hourglass,
    LBracket,
    Multilobe,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Dumbbell, Family::Hourglass, Family::LBracket, Family::Multilobe];

    pub fn name(self) -> &'static str {
        match self {
            Family::Dumbbell => "dumbbell",
            Family::Hourglass => "hourglass",
            Family::LBracket => "lbracket",
            Family::Multilobe => "multilobe",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Box given by its min and max corners.
pub type Aabb = (Point3, Point3);

/// A generated whole mesh with its ground-truth fragments.
#[derive(Debug, Clone)]
pub struct SynthShape {
    pub family: Family,
    pub whole: TriMesh,
    pub fragments: Vec<TriMesh>,
}

/// Generates one shape of `family` with dimensions drawn from `seed`.
pub fn synth_shape(family: Family, seed: u64) -> Result<SynthShape> {
    let mut rng = seeded(seed);
    let parts = match family {
        Family::Dumbbell => dumbbell(&mut rng),
        Family::Hourglass => hourglass(&mut rng),
        Family::LBracket => lbracket(&mut rng),
        Family::Multilobe => {
            let lobes = rng.gen_range(2..=5);
            multilobe(&mut rng, lobes)
        }
    };
    assemble(family, &format!("{}_{seed}", family.name()), parts)
}

/// A multilobe shape with exactly `lobes` fragments (body included).
pub fn synth_multilobe(lobes: usize, seed: u64) -> Result<SynthShape> {
    if !(2..=7).contains(&lobes) {
        return Err(contract(format!("multilobe supports 2..=7 lobes, got {lobes}")));
    }
    let mut rng = seeded(seed);
    let parts = multilobe(&mut rng, lobes);
    assemble(Family::Multilobe, &format!("multilobe{lobes}_{seed}"), parts)
}

/// One fragment: a primitive plus the necks attached to it.
struct Part {
    boxes: Vec<Aabb>,
}

struct Neck {
    between: (usize, usize),
    aabb: Aabb,
}

fn volume(b: &Aabb) -> f64 {
    (b.1[0] - b.0[0]) * (b.1[1] - b.0[1]) * (b.1[2] - b.0[2])
}

fn assemble(family: Family, name: &str, (primitives, necks): (Vec<Vec<Aabb>>, Vec<Neck>)) -> Result<SynthShape> {
    let mut parts: Vec<Part> = primitives.into_iter().map(|boxes| Part { boxes }).collect();
    let part_volume = |p: &Part| p.boxes.iter().map(volume).sum::<f64>();
    let volumes: Vec<f64> = parts.iter().map(part_volume).collect();
    for neck in necks {
        let (a, b) = neck.between;
        let owner = if volumes[b] > volumes[a] { b } else { a };
        parts[owner].boxes.push(neck.aabb);
    }
    let all: Vec<Aabb> = parts.iter().flat_map(|p| p.boxes.iter().copied()).collect();
    let whole = box_union_mesh(name, &all)?;
    let fragments = parts
        .iter()
        .enumerate()
        .map(|(i, p)| box_union_mesh(&format!("{name}_frag{i}"), &p.boxes))
        .collect::<Result<Vec<_>>>()?;
    Ok(SynthShape { family, whole, fragments })
}

const PLANE_TOLERANCE: f64 = 1e-9;

/// Closed mesh of a union of axis-aligned boxes.
pub fn box_union_mesh(name: &str, boxes: &[Aabb]) -> Result<TriMesh> {
    if boxes.is_empty() {
        return Err(contract("box union needs at least one box"));
    }
    let planes: [Vec<f64>; 3] = [0, 1, 2].map(|a| {
        let mut v: Vec<f64> = boxes.iter().flat_map(|b| [b.0[a], b.1[a]]).collect();
        v.sort_by(f64::total_cmp);
        // box faces computed along different paths can differ by rounding
        v.dedup_by(|b, a| *b - *a < PLANE_TOLERANCE);
        v
    });
    let lattice = Lattice::new(planes[0].clone(), planes[1].clone(), planes[2].clone())?;
    let dims = lattice.dims();
    let mut cells = BTreeSet::new();
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let c = [
                    0.5 * (planes[0][i] + planes[0][i + 1]),
                    0.5 * (planes[1][j] + planes[1][j + 1]),
                    0.5 * (planes[2][k] + planes[2][k + 1]),
                ];
                let inside = boxes.iter().any(|b| (0..3).all(|a| c[a] > b.0[a] && c[a] < b.1[a]));
                if inside {
                    cells.insert([i, j, k]);
                }
            }
        }
    }
    boundary_mesh(name, &lattice, &cells)
}

fn centered(center: Point3, size: Point3) -> Aabb {
    (
        [0, 1, 2].map(|a| center[a] - 0.5 * size[a]),
        [0, 1, 2].map(|a| center[a] + 0.5 * size[a]),
    )
}

fn dumbbell(rng: &mut Rng) -> (Vec<Vec<Aabb>>, Vec<Neck>) {
    let a = rng.gen_range(0.5..1.0);
    let b = rng.gen_range(0.5..1.0);
    let len = rng.gen_range(0.2..0.5);
    let w = rng.gen_range(0.12..0.25);
    let left = centered([-0.5 * a, 0.0, 0.0], [a, a, a]);
    let right = centered([len + 0.5 * b, 0.0, 0.0], [b, b, b]);
    let neck = ([0.0, -0.5 * w, -0.5 * w], [len, 0.5 * w, 0.5 * w]);
    (alloc::vec![alloc::vec![left], alloc::vec![right]], alloc::vec![Neck { between: (0, 1), aabb: neck }])
}

fn hourglass(rng: &mut Rng) -> (Vec<Vec<Aabb>>, Vec<Neck>) {
    let waist_len = rng.gen_range(0.15..0.3);
    let waist_w = rng.gen_range(0.12..0.2);
    let mut bulbs = Vec::new();
    for dir in [-1.0, 1.0] {
        let w = rng.gen_range(0.7..1.0);
        let h = rng.gen_range(0.4..0.6);
        let shoulder_h = 0.5 * h;
        // shoulder touches the waist; base sits beyond it
        let z_shoulder = dir * (0.5 * waist_len + 0.5 * shoulder_h);
        let z_base = dir * (0.5 * waist_len + shoulder_h + 0.5 * h);
        let shoulder = centered([0.0, 0.0, z_shoulder], [0.6 * w, 0.6 * w, shoulder_h]);
        let base = centered([0.0, 0.0, z_base], [w, w, h]);
        bulbs.push(alloc::vec![base, shoulder]);
    }
    let waist = centered([0.0; 3], [waist_w, waist_w, waist_len]);
    (bulbs, alloc::vec![Neck { between: (0, 1), aabb: waist }])
}

fn lbracket(rng: &mut Rng) -> (Vec<Vec<Aabb>>, Vec<Neck>) {
    let t = rng.gen_range(0.35..0.55);
    let la = rng.gen_range(1.2..1.8);
    let lb = rng.gen_range(1.0..1.6);
    let gap = rng.gen_range(0.15..0.3);
    let w = rng.gen_range(0.12..0.2);
    let horizontal = ([0.0, 0.0, 0.0], [la, t, t]);
    let vertical = ([0.0, 0.0, t + gap], [t, t, t + gap + lb]);
    let c = 0.5 * t;
    let neck = ([c - 0.5 * w, c - 0.5 * w, t], [c + 0.5 * w, c + 0.5 * w, t + gap]);
    (alloc::vec![alloc::vec![horizontal], alloc::vec![vertical]], alloc::vec![Neck { between: (0, 1), aabb: neck }])
}

fn multilobe(rng: &mut Rng, lobes: usize) -> (Vec<Vec<Aabb>>, Vec<Neck>) {
    let body_size = [rng.gen_range(1.0..1.4), rng.gen_range(1.0..1.4), rng.gen_range(1.0..1.4)];
    let mut primitives = alloc::vec![alloc::vec![centered([0.0; 3], body_size)]];
    let mut necks = Vec::new();
    let mut faces: Vec<usize> = (0..6).collect();
    faces.shuffle(rng);
    for (i, &face) in faces.iter().take(lobes - 1).enumerate() {
        let axis = face / 2;
        let sign = if face % 2 == 0 { -1.0 } else { 1.0 };
        let side = rng.gen_range(0.45..0.75);
        let len = rng.gen_range(0.15..0.3);
        let w = rng.gen_range(0.12..0.2);
        let half = 0.5 * body_size[axis];
        let mut lobe_center = [0.0; 3];
        lobe_center[axis] = sign * (half + len + 0.5 * side);
        let mut neck_center = [0.0; 3];
        neck_center[axis] = sign * (half + 0.5 * len);
        let mut neck_size = [w; 3];
        neck_size[axis] = len;
        primitives.push(alloc::vec![centered(lobe_center, [side; 3])]);
        necks.push(Neck { between: (0, i + 1), aabb: centered(neck_center, neck_size) });
    }
    (primitives, necks)
}

/// Names of all families, for help text.
pub fn family_names() -> String {
    let names: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
    names.join(", ")
}
