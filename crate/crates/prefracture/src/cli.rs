//! Command-line entry point.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for file, format and
//! data errors.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prefracture_core::dataset::synth::Family;
use prefracture_core::diff::{gradcheck, Tensor};
use prefracture_core::inference::DecodeMode;
use prefracture_core::loss::{pairwise_identity_loss, LossConfig};
use prefracture_core::model::{ModelConfig, PointNet};
use prefracture_core::rng::seeded;
use prefracture_core::train::{train_with_progress, OptimizerKind, TrainConfig};
use rand::Rng as _;

use crate::error::Error;
use crate::formats::{self, LabelsFile};
use crate::pipeline;

#[derive(Debug, Parser)]
#[command(name = "prefracture", version, about = "Learned prefracture: fracture meshes into pieces and cluster them into groups")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Voxelize a watertight OBJ mesh and split it into Voronoi pieces.
    ///
    /// Writes a pieces manifest: {"format_version":1, "grid":{origin,
    /// voxel_size, dims}, "pieces":[{id, com, volume, voxels}],
    /// "adjacency":[[i,j],...]} with voxel index x + nx*(y + ny*z).
    Fracture(FractureArgs),
    /// Generate synthetic shapes with ground-truth fragments.
    ///
    /// Each shape goes to <out-dir>/<family>_<seed>/whole.obj with its
    /// fragments in fragments/fragment_NN.obj.
    Synth(SynthArgs),
    /// Turn a whole mesh and its fragments into a labelled training example.
    ///
    /// Writes {"format_version":1, "points", "labels", "num_groups",
    /// "source"} to --out and the pieces manifest next to it.
    Flip(FlipArgs),
    /// Train the point network on every example in a directory.
    ///
    /// Writes a checkpoint {"format_version":1, "config", "tensors"} and a
    /// loss history CSV with header epoch,mean_loss.
    Train(TrainArgs),
    /// Predict group labels for a pieces manifest.
    ///
    /// Writes {"format_version":1, "labels", "num_groups", "mode", "seed"}.
    Cluster(ClusterArgs),
    /// Split labels into connected groups and export one OBJ per group.
    ///
    /// Writes group_N.obj files and groups.json with each group's file,
    /// pieces, volume and center of mass.
    Post(PostArgs),
    /// Compare predicted labels against ground truth and print a JSON report.
    ///
    /// Either argument may be a labels file or a training example.
    Eval(EvalArgs),
    /// Check analytic gradients of the loss and the network against finite
    /// differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Args)]
struct FractureArgs {
    /// Watertight input mesh (OBJ).
    #[arg(long)]
    mesh: PathBuf,
    /// Number of Voronoi sites.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    sites: u64,
    /// Voxels along the longest mesh axis.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(4..))]
    resolution: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output pieces manifest.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Dumbbell,
    Hourglass,
    Lbracket,
    Multilobe,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Dumbbell => Family::Dumbbell,
            FamilyArg::Hourglass => Family::Hourglass,
            FamilyArg::Lbracket => Family::LBracket,
            FamilyArg::Multilobe => Family::Multilobe,
        }
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    count: u64,
    /// Seed of the first shape; shape i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct FlipArgs {
    /// Whole mesh (OBJ).
    #[arg(long)]
    whole: PathBuf,
    /// Directory of fragment OBJ files; fragment indices follow name order.
    #[arg(long)]
    fragments_dir: PathBuf,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    sites: u64,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(4..))]
    resolution: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output training example (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Output pieces manifest [default: <out stem>.pieces.json].
    #[arg(long)]
    pieces_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OptimizerArg {
    Adam,
    Sgd,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Directory of training examples; *.pieces.json files are skipped.
    #[arg(long)]
    data_dir: PathBuf,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    epochs: u64,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    /// Weight of the same-group regularizer.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Output width: the largest group count the model can produce.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(2..))]
    k: u64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    neighbors: u64,
    /// Feature width per encoder stage.
    #[arg(long, value_delimiter = ',', default_values_t = [32usize, 64])]
    channels: Vec<usize>,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Adam)]
    optimizer: OptimizerArg,
    /// Seeds both the initialization and the epoch shuffles.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_checkpoint: PathBuf,
    /// Output loss history CSV.
    #[arg(long)]
    history: PathBuf,
    /// Print the mean loss after every epoch.
    #[arg(long)]
    verbose: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Argmax,
    Sample,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[arg(long)]
    pieces: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Number of groups to ask for.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    groups: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Argmax)]
    mode: ModeArg,
    /// Sampling seed; required with --mode sample.
    #[arg(long, required_if_eq("mode", "sample"))]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PostArgs {
    #[arg(long)]
    pieces: PathBuf,
    /// Labels file from `cluster` or a training example.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Predicted labels; repeat to evaluate several examples.
    #[arg(long, required = true)]
    pred: Vec<PathBuf>,
    /// Ground-truth labels, one per --pred.
    #[arg(long, required = true)]
    gt: Vec<PathBuf>,
    /// Pieces manifests used to split disconnected predicted groups, one per
    /// --pred.
    #[arg(long)]
    pieces: Vec<PathBuf>,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl From<prefracture_core::Error> for Failure {
    fn from(e: prefracture_core::Error) -> Self {
        Failure::Data(Error::Core(e))
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Fracture(a) => {
            let set = pipeline::fracture_mesh(&a.mesh, a.sites as usize, a.resolution as usize, a.seed, &a.out)?;
            eprintln!("{} pieces, {} adjacencies -> {}", set.len(), set.graph().edge_count(), a.out.display());
        }
        Command::Synth(a) => {
            let dirs = pipeline::synth_dataset(a.family.into(), a.count as usize, a.seed, &a.out_dir)?;
            for d in dirs {
                println!("{}", d.display());
            }
        }
        Command::Flip(a) => {
            let pieces_out = a.pieces_out.unwrap_or_else(|| pipeline::pieces_path_for(&a.out));
            let (ex, _) = pipeline::flip_files(
                &a.whole,
                &a.fragments_dir,
                a.sites as usize,
                a.resolution as usize,
                a.seed,
                &a.out,
                &pieces_out,
            )?;
            eprintln!("{} pieces in {} groups -> {}", ex.points.len(), ex.num_groups(), a.out.display());
        }
        Command::Train(a) => train(a)?,
        Command::Cluster(a) => {
            let pieces = formats::read_pieces(&a.pieces)?;
            let model = formats::read_checkpoint(&a.checkpoint)?;
            let groups = a.groups as usize;
            if groups > model.config().k {
                return Err(Failure::Usage(format!(
                    "--groups {groups} exceeds the model's output width {}",
                    model.config().k
                )));
            }
            let mode = match a.mode {
                ModeArg::Argmax => DecodeMode::Argmax,
                ModeArg::Sample => DecodeMode::Sample { seed: a.seed.expect("clap requires a seed for sampling") },
            };
            let labels = pipeline::cluster_pieces(&model, &pieces, groups, mode)?;
            formats::write_labels(&a.out, &LabelsFile::new(&labels, mode))?;
        }
        Command::Post(a) => {
            let pieces = formats::read_pieces(&a.pieces)?;
            let (labels, _) = formats::read_any_labels(&a.labels)?;
            if labels.len() != pieces.len() {
                return Err(Error::format(
                    &a.labels,
                    format!("{} labels for {} pieces", labels.len(), pieces.len()),
                )
                .into());
            }
            let manifest = pipeline::export_groups(&pieces, &labels, &a.out_dir)?;
            eprintln!("{} groups -> {}", manifest.groups.len(), a.out_dir.display());
        }
        Command::Eval(a) => {
            if a.pred.len() != a.gt.len() {
                return Err(Failure::Usage(format!("{} --pred files but {} --gt files", a.pred.len(), a.gt.len())));
            }
            if !a.pieces.is_empty() && a.pieces.len() != a.pred.len() {
                return Err(Failure::Usage(format!("{} --pieces files for {} --pred files", a.pieces.len(), a.pred.len())));
            }
            let report = pipeline::evaluate_files(&a.pred, &a.gt, &a.pieces)?;
            println!("{}", formats::report_json(&report));
            if let Some(out) = a.out {
                formats::write_report(&out, &report)?;
            }
        }
        Command::Gradcheck(a) => gradchecks(a.seed)?,
    }
    Ok(())
}

fn train(a: TrainArgs) -> Result<(), Failure> {
    if !(a.lr > 0.0 && a.lr.is_finite()) {
        return Err(Failure::Usage(format!("--lr must be positive, got {}", a.lr)));
    }
    let examples = pipeline::load_examples(&a.data_dir)?;
    let model = ModelConfig { k: a.k as usize, neighbors: a.neighbors as usize, channels: a.channels, seed: a.seed };
    model.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let defaults = TrainConfig::default();
    let cfg = TrainConfig {
        learning_rate: a.lr,
        epochs: a.epochs as usize,
        seed: a.seed,
        loss: LossConfig { alpha: a.alpha, ..defaults.loss },
        model,
        optimizer: match a.optimizer {
            OptimizerArg::Adam => OptimizerKind::Adam,
            OptimizerArg::Sgd => OptimizerKind::Sgd,
        },
    };
    cfg.loss.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let verbose = a.verbose;
    let outcome = train_with_progress(&examples, &cfg, |epoch, loss| {
        if verbose {
            eprintln!("epoch {epoch}: {loss}");
        }
    })?;
    formats::write_checkpoint(&a.out_checkpoint, &outcome.model)?;
    formats::write_history(&a.history, &outcome.history)?;
    let first = outcome.history[0];
    let last = outcome.history[outcome.history.len() - 1];
    eprintln!("{} examples, mean loss {first} -> {last}", examples.len());
    Ok(())
}

const LOSS_TOLERANCE: f64 = 1e-4;
const MODEL_TOLERANCE: f64 = 1e-3;

fn gradchecks(seed: u64) -> Result<(), Failure> {
    let mut rng = seeded(seed);
    let logits = Tensor::matrix(5, 3, (0..15).map(|_| rng.gen_range(-3.0..3.0)).collect())?;
    let labels: Vec<usize> = (0..5).map(|_| rng.gen_range(0..3)).collect();
    let cfg = LossConfig::default();
    let loss_err = gradcheck(|g, x| pairwise_identity_loss(g, x, &labels, &cfg), &logits, 1e-5)?;

    let model = PointNet::new(ModelConfig { k: 4, neighbors: 4, channels: vec![6, 8], seed })?;
    let points: Vec<[f64; 3]> =
        (0..8).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    let point_labels: Vec<usize> = (0..8).map(|_| rng.gen_range(0..3)).collect();
    let structure = model.structure(&points)?;
    // move biases off zero so no relu sits exactly on its kink
    let flat: Vec<f64> = model.params().flatten().into_iter().map(|v| v + rng.gen_range(-0.05..0.05)).collect();
    let model_err = gradcheck(
        |g, x| {
            let bound = model.bind_flat(g, x)?;
            let out = model.forward(g, &bound, &structure, &points, 0.5)?;
            pairwise_identity_loss(g, out, &point_labels, &cfg)
        },
        &Tensor::row(&flat),
        1e-5,
    )?;

    let verdict = |err: f64, tol: f64| if err < tol { "ok" } else { "FAILED" };
    println!("loss  max relative error {loss_err:.3e} (< {LOSS_TOLERANCE:e}) {}", verdict(loss_err, LOSS_TOLERANCE));
    println!("model max relative error {model_err:.3e} (< {MODEL_TOLERANCE:e}) {}", verdict(model_err, MODEL_TOLERANCE));
    if loss_err < LOSS_TOLERANCE && model_err < MODEL_TOLERANCE {
        Ok(())
    } else {
        Err(Error::Core(prefracture_core::Error::Contract("gradient check exceeded its tolerance".into())).into())
    }
}
