//! `bifkit`: reproducible experiments on normal forms, the Hénon family and
//! heteroclinic return maps.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "bifkit", version, about = "Normal forms, Henon bifurcations and heteroclinic return maps")]
struct Cli {
    /// Directory for CSV, SVG, JSON and manifest files.
    #[arg(long, global = true, default_value = "bifkit-out")]
    out_dir: PathBuf,
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized corpora.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Double-double arithmetic for the cycle model (precision cap 1e30 instead of 1e15).
    #[arg(long, global = true)]
    extended_precision: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lyapunov coefficient along the Neimark-Sacker curve, three ways.
    LyapScan(LyapScanArgs),
    /// Saddle-node, period-doubling and Neimark-Sacker curves of the Hénon map.
    HenonDiagram(HenonDiagramArgs),
    /// Invariant-circle sweep across the Neimark-Sacker curve.
    HenonCircle(HenonCircleArgs),
    /// Lyapunov coefficient of a single jet.
    NfLc(NfLcArgs),
    /// Convergence of cycle return maps to the Hénon family.
    CycleVerify(CycleVerifyArgs),
}

#[derive(Args, Debug)]
pub struct LyapScanArgs {
    /// Midpoint-grid size on (0, π).
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u32).range(2..))]
    pub samples: u32,
    /// CSV file name inside the output directory.
    #[arg(long, default_value = "lyap_scan.csv")]
    pub out: String,
}

#[derive(Args, Debug)]
pub struct HenonDiagramArgs {
    /// M₂ band to draw.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [-1.5, 1.5], allow_negative_numbers = true)]
    pub m2_range: Vec<f64>,
    /// Samples per curve.
    #[arg(long, default_value_t = 400, value_parser = clap::value_parser!(u32).range(2..))]
    pub resolution: u32,
}

#[derive(Args, Debug)]
pub struct HenonCircleArgs {
    /// M₁ on the Neimark-Sacker curve.
    #[arg(long, allow_negative_numbers = true)]
    pub m1: f64,
    /// Offsets δ = M₂ − 1, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub deltas: Option<Vec<f64>>,
    /// Sweep in reverse time for repelling circles (default offsets become negative).
    #[arg(long)]
    pub repelling: bool,
    #[arg(long, default_value_t = 5000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 20000)]
    pub detect_samples: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Preset {
    Henon,
}

#[derive(Args, Debug)]
pub struct NfLcArgs {
    /// Jet JSON file ({"degree": 3, "p,q": [re, im], ...}).
    #[arg(long, conflicts_with = "preset")]
    pub jet: Option<PathBuf>,
    /// Built-in jet.
    #[arg(long)]
    pub preset: Option<Preset>,
    /// Rotation angle ψ of the multiplier e^{iψ}.
    #[arg(long)]
    pub psi: f64,
    /// Also evaluate this many random adapted jets at ψ (uses --seed).
    #[arg(long, default_value_t = 0)]
    pub random: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionaryArg {
    Literal,
    Conjugate,
}

#[derive(Args, Debug)]
pub struct CycleVerifyArgs {
    /// Cycle model TOML (default: the built-in reference configuration).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Hénon target M₁,M₂.
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "1.0,1.02", allow_negative_numbers = true)]
    pub target: Vec<f64>,
    /// `auto`, or explicit pairs like `6:5,7:6`.
    #[arg(long, default_value = "auto")]
    pub ij_sequence: String,
    /// Smallest j for the automatic sequence.
    #[arg(long, default_value_t = 5)]
    pub j_min: u32,
    /// Parameter dictionary used to aim at the target.
    #[arg(long, value_enum, default_value = "literal")]
    pub dictionary: DictionaryArg,
}

/// Exit statuses beyond clap's own usage errors (2).
pub enum Failure {
    Usage(String),
    Validation(String),
    Numerical(String),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Validation(_) => 3,
            Failure::Numerical(_) => 4,
            Failure::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Validation(m) => write!(f, "validation failure: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Io(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<bifkit::Error> for Failure {
    fn from(e: bifkit::Error) -> Self {
        use bifkit::Error::*;
        match e {
            OutOfDomain { .. } | PsiOutOfRange(_) | Resonance { .. } | Margin { .. } | TargetOutsideBox { .. }
            | InvalidConfig(_) | NegativeOrientation { .. } | BelowKappa { .. } | Toml(_) | Json(_) | NotAdapted(_)
            | NotElliptic(_) | DegreeMismatch(..) | UnsupportedDegree(_) | NonzeroConstant(_) | Inadmissible(_)
            | Coupled | PrecisionCap { .. } | Empty(_) => Failure::Validation(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.into())
    }
}

pub struct Globals {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub extended: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("{}", Failure::Usage("--threads must be positive".into()));
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool is configured once");
    }
    let g = Globals {
        out_dir: cli.out_dir,
        seed: cli.seed,
        extended: cli.extended_precision,
    };
    let result = match &cli.command {
        Command::LyapScan(a) => commands::lyap_scan(&g, a),
        Command::HenonDiagram(a) => commands::henon_diagram(&g, a),
        Command::HenonCircle(a) => commands::henon_circle(&g, a),
        Command::NfLc(a) => commands::nf_lc(&g, a),
        Command::CycleVerify(a) => commands::cycle_verify(&g, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("bifkit: {f}");
            ExitCode::from(f.code())
        }
    }
}
