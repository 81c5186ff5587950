//! Pipeline stages over files: each function reads its inputs, runs one
//! stage and writes its outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use prefracture_core::dataset::synth::{synth_shape, Family};
use prefracture_core::dataset::{flip_example, group_count_feature, normalize, GroupLabeling, TrainingExample};
use prefracture_core::geometry::{centers_point_cloud, fracture, voxelize, PieceSet};
use prefracture_core::inference::{decode, DecodeConfig, DecodeMode};
use prefracture_core::model::PointNet;
use prefracture_core::postprocess::{merge_group_meshes, split_disconnected, summarize};
use prefracture_core::train::{evaluate, EvalCase, EvalReport, EvalRow};

use crate::error::{Error, Result};
use crate::formats::{self, GroupManifest};
use crate::obj::{read_obj, write_obj};

/// Suffix of the pieces manifest written next to a flipped example.
pub const PIECES_SUFFIX: &str = ".pieces.json";

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Files in `dir` with the given extension, sorted by name.
pub fn sorted_files(dir: &Path, extension: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == extension) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub fn fracture_mesh(mesh: &Path, sites: usize, resolution: usize, seed: u64, out: &Path) -> Result<PieceSet> {
    let mesh = read_obj(mesh)?;
    let grid = voxelize(&mesh, resolution)?;
    let pieces = fracture(&grid, sites, seed)?;
    formats::write_pieces(out, &pieces)?;
    Ok(pieces)
}

/// Writes `count` shapes as `<out>/<family>_<seed>/whole.obj` plus
/// `fragments/fragment_NN.obj`, with seeds `seed, seed + 1, ...`.
pub fn synth_dataset(family: Family, count: usize, seed: u64, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs = Vec::with_capacity(count);
    for i in 0..count as u64 {
        let shape = synth_shape(family, seed + i)?;
        let dir = out_dir.join(format!("{}_{}", family.name(), seed + i));
        let frag_dir = dir.join("fragments");
        create_dir(&frag_dir)?;
        write_obj(&dir.join("whole.obj"), &shape.whole)?;
        for (f, mesh) in shape.fragments.iter().enumerate() {
            write_obj(&frag_dir.join(format!("fragment_{f:02}.obj")), mesh)?;
        }
        dirs.push(dir);
    }
    Ok(dirs)
}

/// Default pieces manifest path for an example written to `out`.
pub fn pieces_path_for(out: &Path) -> PathBuf {
    let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = name.strip_suffix(".json").unwrap_or(&name);
    out.with_file_name(format!("{stem}{PIECES_SUFFIX}"))
}

/// Flips a whole mesh and a directory of fragment meshes (fragment index =
/// position in name order) into a training example and its pieces manifest.
pub fn flip_files(
    whole: &Path,
    fragments_dir: &Path,
    sites: usize,
    resolution: usize,
    seed: u64,
    out: &Path,
    pieces_out: &Path,
) -> Result<(TrainingExample, PieceSet)> {
    let whole_mesh = read_obj(whole)?;
    let fragment_files = sorted_files(fragments_dir, "obj")?;
    if fragment_files.is_empty() {
        return Err(Error::format(fragments_dir, "no fragment .obj files"));
    }
    let fragments = fragment_files.iter().map(|p| read_obj(p)).collect::<Result<Vec<_>>>()?;
    let (example, pieces) = flip_example(&whole_mesh, &fragments, sites, resolution, seed)?;
    formats::write_example(out, &example)?;
    formats::write_pieces(pieces_out, &pieces)?;
    Ok((example, pieces))
}

/// Training examples in `dir`: every `.json` file except pieces manifests.
pub fn load_examples(dir: &Path) -> Result<Vec<TrainingExample>> {
    let files: Vec<PathBuf> = sorted_files(dir, "json")?
        .into_iter()
        .filter(|p| !p.to_string_lossy().ends_with(PIECES_SUFFIX))
        .collect();
    if files.is_empty() {
        return Err(Error::format(dir, "no training examples"));
    }
    files.iter().map(|p| formats::read_example(p)).collect()
}

/// Predicts group labels for a piece set from its normalized centers of mass.
pub fn cluster_pieces(model: &PointNet, pieces: &PieceSet, groups: usize, mode: DecodeMode) -> Result<GroupLabeling> {
    let (coms, _) = centers_point_cloud(pieces);
    let (points, _) = normalize(&coms);
    let k = model.config().k;
    let logits = model.logits(&points, group_count_feature(groups, k))?;
    Ok(decode(&logits, &DecodeConfig { mode, num_groups: groups })?)
}

/// Splits labels into connected groups and writes `group_N.obj` meshes
/// plus `groups.json` into `out_dir`.
pub fn export_groups(pieces: &PieceSet, labels: &[usize], out_dir: &Path) -> Result<GroupManifest> {
    let groups = split_disconnected(labels, pieces.graph())?;
    let meshes = merge_group_meshes(&groups, pieces)?;
    create_dir(out_dir)?;
    let mut files = Vec::with_capacity(meshes.len());
    for (i, mesh) in meshes.iter().enumerate() {
        let file = format!("group_{i}.obj");
        write_obj(&out_dir.join(&file), mesh)?;
        files.push(file);
    }
    let manifest = GroupManifest::new(&summarize(&groups, pieces), &files);
    formats::write_group_manifest(&out_dir.join("groups.json"), &manifest)?;
    Ok(manifest)
}

/// Scores predicted against ground-truth label files, splitting predicted
/// groups along each pieces manifest when one is given.
pub fn evaluate_files(pred: &[PathBuf], gt: &[PathBuf], pieces: &[PathBuf]) -> Result<EvalReport> {
    let rows = pred
        .iter()
        .zip(gt)
        .enumerate()
        .map(|(i, (p, g))| {
            let (pred_labels, _) = formats::read_any_labels(p)?;
            let (gt_labels, source) = formats::read_any_labels(g)?;
            let set = pieces.get(i).map(|path| formats::read_pieces(path)).transpose()?;
            EvalRow::score(&source, &pred_labels, &gt_labels, set.as_ref().map(PieceSet::graph))
                .map_err(|e| Error::data(p, e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_rows(rows)?)
}

/// [`evaluate`] split across threads. Rows keep the input order, so the
/// report equals the single-threaded one.
pub fn evaluate_parallel(model: &PointNet, cases: &[EvalCase<'_>], mode: DecodeMode) -> Result<EvalReport> {
    let threads = thread::available_parallelism().map_or(1, |n| n.get()).min(cases.len().max(1));
    let chunk = cases.len().div_ceil(threads).max(1);
    let parts: Vec<_> = thread::scope(|s| {
        let handles: Vec<_> =
            cases.chunks(chunk).map(|part| s.spawn(move || evaluate(model, part, mode))).collect();
        handles.into_iter().map(|h| h.join().expect("evaluation thread panicked")).collect()
    });
    let mut rows = Vec::with_capacity(cases.len());
    for part in parts {
        rows.extend(part?.rows);
    }
    Ok(EvalReport::from_rows(rows)?)
}
