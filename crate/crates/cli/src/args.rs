use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use framelab::optimize::{Manifold, ObjectiveKind};
use framelab::ScalarField;

#[derive(Debug, Parser)]
#[command(
    name = "framelab",
    version,
    about = "Measures, constructions, optimizers and checks for finite frames"
)]
pub struct Cli {
    /// Require explicit seeds and omit wall-clock timestamps so outputs are byte-identical across runs.
    #[arg(long, global = true)]
    pub deterministic: bool,

    /// Worker threads for multi-start optimization and verification.
    #[arg(long, global = true, value_name = "J")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute every measure, bound and predicate of a frame file.
    Analyze(AnalyzeArgs),
    /// Build a frame and write it as JSON.
    Construct(ConstructArgs),
    /// Write the canonical Naimark complement of a Parseval frame.
    Complement(ComplementArgs),
    /// Maximize a frame functional from several random starts.
    Optimize(OptimizeArgs),
    /// Run named numerical checks on a frame file or a randomized suite.
    Verify(VerifyArgs),
    /// Compare analytic and finite-difference gradients of an objective.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for ScalarField {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Real => ScalarField::Real,
            FieldArg::Complex => ScalarField::Complex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ManifoldArg {
    Parseval,
    EqualNorm,
}

impl From<ManifoldArg> for Manifold {
    fn from(m: ManifoldArg) -> Self {
        match m {
            ManifoldArg::Parseval => Manifold::Parseval,
            ManifoldArg::EqualNorm => Manifold::EqualNorm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ObjectiveArg {
    /// Total coherence.
    Tc,
    /// Total k-volume.
    Vk,
    /// Total complementary k-volume.
    Cvk,
    /// k-nuclear energy.
    Ne,
    /// Negated equiangular distance.
    NegEad,
    /// Negated Gram variance.
    NegGramVariance,
}

impl ObjectiveArg {
    pub fn with_k(self, k: Option<usize>) -> Result<ObjectiveKind, String> {
        let need = |k: Option<usize>| k.ok_or_else(|| format!("objective {self:?} needs --k").to_lowercase());
        Ok(match self {
            ObjectiveArg::Tc => ObjectiveKind::TotalCoherence,
            ObjectiveArg::Vk => ObjectiveKind::TotalVolume(need(k)?),
            ObjectiveArg::Cvk => ObjectiveKind::TotalCompVolume(need(k)?),
            ObjectiveArg::Ne => ObjectiveKind::NuclearEnergy(need(k)?),
            ObjectiveArg::NegEad => ObjectiveKind::NegEad,
            ObjectiveArg::NegGramVariance => ObjectiveKind::NegGramVariance,
        })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Frame JSON file.
    pub input: PathBuf,
    /// Subset sizes for the k-dependent measures (default 1,2 clipped to M).
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    /// Report JSON path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the flat CSV export here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ConstructKind {
    OnbPadded,
    Simplex,
    Harmonic,
    #[value(alias = "paper42")]
    Offset42,
    MercedesBenz,
    RandomParseval,
    RandomEqualNorm,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstructArgs {
    pub kind: ConstructKind,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// DFT rows for the harmonic frame, 0-based.
    #[arg(long, value_delimiter = ',')]
    pub rows: Vec<usize>,
    #[arg(long, value_enum, default_value_t = FieldArg::Real)]
    pub field: FieldArg,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Frame JSON path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ComplementArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct OptimizeArgs {
    #[arg(long, value_enum)]
    pub objective: ObjectiveArg,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = FieldArg::Real)]
    pub field: FieldArg,
    #[arg(long, value_enum, default_value_t = ManifoldArg::Parseval)]
    pub manifold: ManifoldArg,
    /// Number of random starts; start i uses seed `seed + i`.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    /// Base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Iteration budget per smoothing stage.
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub grad_tol: f64,
    /// Smoothing schedule, strictly decreasing.
    #[arg(long, value_delimiter = ',')]
    pub eps_schedule: Vec<f64>,
    /// Directory for traces, best frame and summary.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Check a frame file instead of running the randomized suite.
    #[arg(long)]
    pub frame: Option<PathBuf>,
    /// Restrict to these checks.
    #[arg(long = "check", value_delimiter = ',')]
    pub checks: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7,8")]
    pub m_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7")]
    pub n_list: Vec<usize>,
    /// Subset sizes; every admissible k when omitted.
    #[arg(long, value_delimiter = ',')]
    pub k_list: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report JSON path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a JUnit XML rendering here.
    #[arg(long)]
    pub junit: Option<PathBuf>,
    /// Print the check registry and exit.
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct GradcheckArgs {
    #[arg(long, value_enum)]
    pub objective: ObjectiveArg,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = FieldArg::Real)]
    pub field: FieldArg,
    #[arg(long, value_enum, default_value_t = ManifoldArg::Parseval)]
    pub manifold: ManifoldArg,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Smoothing parameter.
    #[arg(long, default_value_t = 1e-2)]
    pub eps: f64,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-6)]
    pub h: f64,
    /// Frame file to differentiate at instead of a random start.
    #[arg(long)]
    pub frame: Option<PathBuf>,
}
