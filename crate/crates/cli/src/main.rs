use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod cmd;

/// Quantum locally recoverable codes: parameters, construction, distance, simulation.
#[derive(Parser, Debug)]
#[command(name = "qlrc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Code parameters and every applicable bound, with hypothesis flags
    Params(CodeOpts),
    /// Build a code and print its descriptor
    Construct {
        #[command(flatten)]
        code: CodeOpts,
        /// Include a generator matrix of C
        #[arg(long)]
        generator: bool,
    },
    /// Exact distance by enumeration, with a minimum-weight witness
    Distance {
        #[command(flatten)]
        code: CodeOpts,
        /// Enumeration cap (number of codewords visited)
        #[arg(long, default_value_t = qlrc::classical::DEFAULT_CAP)]
        cap: u128,
    },
    /// Seeded decode or local-recovery trials
    Simulate(SimOpts),
    /// Bound values over a (q, r, ell, s) grid
    BoundsTable(TableOpts),
    /// Random qLRC ensemble statistics or a sampled bipartite graph
    Ensemble(EnsembleOpts),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Qtb,
    Fqtb,
    /// Classical full-length Reed-Solomon (distance only)
    Rs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct OutOpts {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to PATH instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report wall-clock time (stderr, and mean_ms in simulate)
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug, Clone)]
pub struct CodeOpts {
    /// Defaults to fqtb when s > 1
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub ell: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    /// JSON code descriptor; replaces the inline flags
    #[arg(long, conflicts_with_all = ["q", "r", "ell", "s", "family"])]
    pub descriptor: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutOpts,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    /// X errors only
    X,
    /// Z errors only
    Z,
    /// Uniform nonidentity Paulis
    Mixed,
    /// Known positions restored by local recovery
    Erasure,
}

#[derive(Args, Debug, Clone)]
pub struct SimOpts {
    #[command(flatten)]
    pub code: CodeOpts,
    #[arg(long, value_enum, default_value_t = Model::Mixed)]
    pub model: Model,
    /// Error weight (in blocks when folded); defaults to the decode radius
    #[arg(long)]
    pub weight: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Permit weights above the radius; failures are reported, not fatal
    #[arg(long)]
    pub allow_overload: bool,
    /// One CSV row per trial instead of a summary
    #[arg(long)]
    pub per_trial: bool,
}

#[derive(Args, Debug, Clone)]
pub struct TableOpts {
    #[arg(long, value_delimiter = ',', required = true)]
    pub q: Vec<u64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub r: Vec<usize>,
    /// Defaults to every valid ell
    #[arg(long, value_delimiter = ',')]
    pub ell: Vec<usize>,
    /// Defaults to every divisor of (q-1)/r
    #[arg(long, value_delimiter = ',')]
    pub s: Vec<usize>,
    #[command(flatten)]
    pub out: OutOpts,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum EnsembleKind {
    /// Pr[d >= dmin] over random qLRC samples against the GV-type bound
    Gv,
    /// A sampled Δ-regular bipartite graph with its measured λ
    Graph,
}

#[derive(Args, Debug, Clone)]
pub struct EnsembleOpts {
    #[arg(long, value_enum, default_value_t = EnsembleKind::Gv)]
    pub kind: EnsembleKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub ell: Option<usize>,
    #[arg(long)]
    pub q: Option<u64>,
    /// Target distance for gv
    #[arg(long, default_value_t = 2)]
    pub dmin: usize,
    /// Left degree for graph
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = qlrc::classical::DEFAULT_CAP)]
    pub cap: u128,
    #[command(flatten)]
    pub out: OutOpts,
}

/// Failure with its exit status: 2 validation, 3 cap exceeded, 4 decode-contract violation.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn validation(msg: impl Into<String>) -> Self {
        Failure { code: 2, message: msg.into() }
    }
}

impl From<qlrc::Error> for Failure {
    fn from(e: qlrc::Error) -> Self {
        match e {
            qlrc::Error::CapExceeded { required, cap } => Failure {
                code: 3,
                message: format!("enumeration needs {required} evaluations, cap is {cap}; rerun with --cap {required}"),
            },
            other => Failure::validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::validation(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::validation(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::validation(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Params(c) => cmd::params(&c),
        Command::Construct { code, generator } => cmd::construct(&code, generator),
        Command::Distance { code, cap } => cmd::distance(&code, cap),
        Command::Simulate(o) => cmd::simulate(&o),
        Command::BoundsTable(o) => cmd::bounds_table(&o),
        Command::Ensemble(o) => cmd::ensemble(&o),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
