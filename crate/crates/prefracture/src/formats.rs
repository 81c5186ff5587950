//! Versioned JSON artifacts and the loss-history CSV.
//!
//! Every JSON file carries `"format_version": 1`. Readers reject other
//! versions before looking at any other field.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use prefracture_core::dataset::{GroupLabeling, TrainingExample};
use prefracture_core::diff::Tensor;
use prefracture_core::geometry::{PieceSet, Point3, VoxelGrid};
use prefracture_core::inference::DecodeMode;
use prefracture_core::model::{ModelConfig, Params, PointNet};
use prefracture_core::postprocess::GroupSummary;
use prefracture_core::train::{EvalReport, EvalRow};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse { path: path.to_path_buf(), line: e.line(), message: e.to_string() })?;
    match value.get("format_version") {
        None => return Err(Error::format(path, "missing field `format_version`")),
        Some(v) if v.as_u64() != Some(u64::from(FORMAT_VERSION)) => {
            return Err(Error::format(path, format!("unsupported format_version {v} (this build reads {FORMAT_VERSION})")))
        }
        Some(_) => {}
    }
    serde_json::from_value(value).map_err(|e| Error::format(path, e.to_string()))
}

fn write_json<T: Serialize>(path: &Path, value: &T, pretty: bool) -> Result<()> {
    let mut text = if pretty { serde_json::to_string_pretty(value) } else { serde_json::to_string(value) }
        .expect("artifact types serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub origin: Point3,
    pub voxel_size: f64,
    pub dims: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceRecord {
    pub id: usize,
    pub com: Point3,
    pub volume: f64,
    /// Linear voxel indices `x + nx * (y + ny * z)`.
    pub voxels: Vec<usize>,
}

/// Pieces manifest: grid frame, pieces and their face adjacency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceSetFile {
    pub format_version: u32,
    pub grid: GridRecord,
    pub pieces: Vec<PieceRecord>,
    pub adjacency: Vec<[usize; 2]>,
}

impl PieceSetFile {
    pub fn from_pieces(set: &PieceSet) -> Self {
        let g = set.grid();
        PieceSetFile {
            format_version: FORMAT_VERSION,
            grid: GridRecord { origin: g.origin(), voxel_size: g.voxel_size(), dims: g.dims() },
            pieces: set
                .pieces()
                .iter()
                .map(|p| PieceRecord { id: p.id, com: p.com, volume: p.volume, voxels: p.voxels.clone() })
                .collect(),
            adjacency: set.graph().edges().map(|(a, b)| [a, b]).collect(),
        }
    }

    /// Rebuilds the piece set; occupancy is the union of the piece voxels
    /// and the stored adjacency must match the recomputed one.
    pub fn into_pieces(self, path: &Path) -> Result<PieceSet> {
        let mut grid = VoxelGrid::empty(self.grid.origin, self.grid.voxel_size, self.grid.dims)
            .map_err(|e| Error::data(path, e))?;
        let mut lists = Vec::with_capacity(self.pieces.len());
        for (i, p) in self.pieces.into_iter().enumerate() {
            if p.id != i {
                return Err(Error::format(path, format!("piece at position {i} has id {}", p.id)));
            }
            if let Some(&v) = p.voxels.iter().find(|&&v| v >= grid.len()) {
                return Err(Error::format(path, format!("piece {i} voxel {v} is outside the grid")));
            }
            for &v in &p.voxels {
                grid.set(v, true);
            }
            lists.push(p.voxels);
        }
        let set = PieceSet::from_voxel_lists(grid, lists).map_err(|e| Error::data(path, e))?;
        let mut stored: Vec<(usize, usize)> = self.adjacency.iter().map(|e| (e[0].min(e[1]), e[0].max(e[1]))).collect();
        stored.sort_unstable();
        stored.dedup();
        if !stored.iter().copied().eq(set.graph().edges()) {
            return Err(Error::format(path, "adjacency does not match the piece voxels"));
        }
        Ok(set)
    }
}

pub fn write_pieces(path: &Path, set: &PieceSet) -> Result<()> {
    write_json(path, &PieceSetFile::from_pieces(set), false)
}

pub fn read_pieces(path: &Path) -> Result<PieceSet> {
    read_json::<PieceSetFile>(path)?.into_pieces(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleFile {
    pub format_version: u32,
    pub points: Vec<Point3>,
    pub labels: Vec<usize>,
    pub num_groups: usize,
    pub source: String,
}

pub fn write_example(path: &Path, ex: &TrainingExample) -> Result<()> {
    let file = ExampleFile {
        format_version: FORMAT_VERSION,
        points: ex.points.clone(),
        labels: ex.labels.labels.clone(),
        num_groups: ex.labels.num_groups_requested,
        source: ex.source.clone(),
    };
    write_json(path, &file, false)
}

pub fn read_example(path: &Path) -> Result<TrainingExample> {
    let f: ExampleFile = read_json(path)?;
    let labels = GroupLabeling::new(f.labels, f.num_groups).map_err(|e| Error::data(path, e))?;
    TrainingExample::new(f.points, labels, f.source).map_err(|e| Error::data(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfigRecord {
    pub k: usize,
    pub neighbors: usize,
    pub channels: Vec<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

/// Model configuration plus named parameter tensors, in name order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointFile {
    pub format_version: u32,
    pub config: ModelConfigRecord,
    pub tensors: BTreeMap<String, TensorRecord>,
}

pub fn write_checkpoint(path: &Path, model: &PointNet) -> Result<()> {
    let c = model.config();
    let file = CheckpointFile {
        format_version: FORMAT_VERSION,
        config: ModelConfigRecord { k: c.k, neighbors: c.neighbors, channels: c.channels.clone(), seed: c.seed },
        tensors: model
            .params()
            .iter()
            .map(|(name, t)| (name.to_string(), TensorRecord { shape: t.shape().to_vec(), data: t.data().to_vec() }))
            .collect(),
    };
    write_json(path, &file, false)
}

pub fn read_checkpoint(path: &Path) -> Result<PointNet> {
    let f: CheckpointFile = read_json(path)?;
    let config = ModelConfig { k: f.config.k, neighbors: f.config.neighbors, channels: f.config.channels, seed: f.config.seed };
    let mut tensors = BTreeMap::new();
    for (name, t) in f.tensors {
        let tensor = Tensor::new(t.shape, t.data)
            .map_err(|e| Error::format(path, format!("tensor {name}: {e}")))?;
        tensors.insert(name, tensor);
    }
    let params = Params::from_tensors(&config, tensors).map_err(|e| Error::data(path, e))?;
    PointNet::from_parts(config, params).map_err(|e| Error::data(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeRecord {
    Argmax,
    Sample,
}

/// Decoded labels for one piece set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelsFile {
    pub format_version: u32,
    pub labels: Vec<usize>,
    pub num_groups: usize,
    pub mode: ModeRecord,
    pub seed: Option<u64>,
}

impl LabelsFile {
    pub fn new(labeling: &GroupLabeling, mode: DecodeMode) -> Self {
        let (mode, seed) = match mode {
            DecodeMode::Argmax => (ModeRecord::Argmax, None),
            DecodeMode::Sample { seed } => (ModeRecord::Sample, Some(seed)),
        };
        LabelsFile {
            format_version: FORMAT_VERSION,
            labels: labeling.labels.clone(),
            num_groups: labeling.num_groups_requested,
            mode,
            seed,
        }
    }
}

pub fn write_labels(path: &Path, labels: &LabelsFile) -> Result<()> {
    write_json(path, labels, true)
}

pub fn read_labels(path: &Path) -> Result<LabelsFile> {
    read_json(path)
}

/// Labels from either a labels file or a training example file.
pub fn read_any_labels(path: &Path) -> Result<(Vec<usize>, String)> {
    #[derive(Deserialize)]
    struct Labels {
        labels: Vec<usize>,
        source: Option<String>,
    }
    let l: Labels = read_json(path)?;
    Ok((l.labels, l.source.unwrap_or_else(|| path.display().to_string())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRecord {
    /// Mesh file name relative to the manifest.
    pub file: String,
    pub pieces: Vec<usize>,
    pub volume: f64,
    pub com: Point3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupManifest {
    pub format_version: u32,
    pub groups: Vec<GroupRecord>,
}

impl GroupManifest {
    pub fn new(summaries: &[GroupSummary], files: &[String]) -> Self {
        GroupManifest {
            format_version: FORMAT_VERSION,
            groups: summaries
                .iter()
                .zip(files)
                .map(|(s, f)| GroupRecord { file: f.clone(), pieces: s.pieces.clone(), volume: s.volume, com: s.com })
                .collect(),
        }
    }
}

pub fn write_group_manifest(path: &Path, manifest: &GroupManifest) -> Result<()> {
    write_json(path, manifest, true)
}

pub fn read_group_manifest(path: &Path) -> Result<GroupManifest> {
    read_json(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRowRecord {
    pub source: String,
    pub pairwise_accuracy: f64,
    pub adjusted_rand_index: f64,
    pub predicted_groups: usize,
}

/// Aggregate metrics plus one row per evaluated example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReportFile {
    pub format_version: u32,
    pub pairwise_accuracy: f64,
    pub adjusted_rand_index: f64,
    pub rows: Vec<EvalRowRecord>,
}

impl From<&EvalReport> for EvalReportFile {
    fn from(r: &EvalReport) -> Self {
        let row = |r: &EvalRow| EvalRowRecord {
            source: r.source.clone(),
            pairwise_accuracy: r.pairwise_accuracy,
            adjusted_rand_index: r.adjusted_rand_index,
            predicted_groups: r.predicted_groups,
        };
        EvalReportFile {
            format_version: FORMAT_VERSION,
            pairwise_accuracy: r.pairwise_accuracy,
            adjusted_rand_index: r.adjusted_rand_index,
            rows: r.rows.iter().map(row).collect(),
        }
    }
}

pub fn report_json(report: &EvalReport) -> String {
    serde_json::to_string_pretty(&EvalReportFile::from(report)).expect("reports serialize")
}

pub fn write_report(path: &Path, report: &EvalReport) -> Result<()> {
    write_json(path, &EvalReportFile::from(report), true)
}

pub fn read_report(path: &Path) -> Result<EvalReportFile> {
    read_json(path)
}

/// `epoch,mean_loss` rows, one per epoch.
pub fn history_csv(history: &[f64]) -> String {
    let mut out = String::from("epoch,mean_loss\n");
    for (epoch, loss) in history.iter().enumerate() {
        out.push_str(&format!("{epoch},{loss}\n"));
    }
    out
}

pub fn write_history(path: &Path, history: &[f64]) -> Result<()> {
    fs::write(path, history_csv(history)).map_err(|e| Error::io(path, e))
}
