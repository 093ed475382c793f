use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "ed-align", version, about = "Embedded-deformation mesh registration toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Decimate a mesh with quadric edge collapses.
    Simplify(SimplifyArgs),
    /// Report the pooling hierarchy of a mesh.
    Coarsen(CoarsenArgs),
    /// Dump or compare vertex bindings.
    Bind(BindArgs),
    /// Apply a set of node transforms to a mesh.
    Deform(DeformArgs),
    /// Register a source mesh onto a target mesh.
    Register(RegisterArgs),
    /// Raw and bounded MMD between two numeric matrices.
    Mmd(MmdArgs),
    /// Train the autoencoder toy and write its per-epoch trace.
    EiaeDemo(EiaeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simplify(_) => "simplify",
            Command::Coarsen(_) => "coarsen",
            Command::Bind(_) => "bind",
            Command::Deform(_) => "deform",
            Command::Register(_) => "register",
            Command::Mmd(_) => "mmd",
            Command::EiaeDemo(_) => "eiae-demo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Trace,
    Knn,
}

/// Hierarchy and binding flags shared by several subcommands.
#[derive(Debug, Args, Serialize)]
pub struct RigArgs {
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "binding", value_enum, default_value_t = Method::Trace)]
    pub method: Method,
    #[arg(long, default_value_t = 4)]
    pub knn_k: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SimplifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub target_verts: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to `<out>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CoarsenArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BindArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Method::Trace)]
    pub method: Method,
    #[arg(long, default_value_t = 4)]
    pub knn_k: usize,
    /// List the vertices whose control sets differ from this method's.
    #[arg(long, value_enum)]
    pub compare: Option<Method>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DeformArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub rig: RigArgs,
    /// Node transforms to apply.
    #[arg(long, required_unless_present = "emit_identity")]
    pub transforms: Option<PathBuf>,
    /// Write identity transforms for the mesh's graph to this path.
    #[arg(long, conflicts_with = "transforms")]
    pub emit_identity: Option<PathBuf>,
    #[arg(long, required_unless_present = "emit_identity")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RegisterArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    /// Cyclic iterations; 40% of `--iters` when absent.
    #[arg(long)]
    pub cycle_iters: Option<usize>,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub no_cycle: bool,
    #[arg(long, value_enum, default_value_t = Method::Trace)]
    pub binding: Method,
    #[arg(long, default_value_t = 4)]
    pub knn_k: usize,
    #[arg(long, default_value_t = 0.005)]
    pub lambda_arap: f64,
    #[arg(long, default_value_t = 0.005)]
    pub lambda_edge: f64,
    #[arg(long, default_value_t = 0.005)]
    pub lambda_lap: f64,
    #[arg(long, default_value_t = 0.01)]
    pub beta: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MmdArgs {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    pub beta: f64,
    /// Kernel bandwidths; the default five-kernel set when absent.
    #[arg(long, value_delimiter = ',')]
    pub sigmas: Option<Vec<f64>>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EiaeArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub epochs: usize,
    /// Canonical dimension.
    #[arg(long = "e", default_value_t = 10)]
    pub canonical_dim: usize,
    #[arg(long, default_value_t = 64)]
    pub hidden: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.008)]
    pub lambda_f: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}
