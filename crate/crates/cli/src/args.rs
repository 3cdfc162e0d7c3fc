use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "mss", version, about = "Magic secret sharing simulator", args_override_self = true)]
pub struct Cli {
    /// Output format; scans and tables default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Read every angle argument in degrees instead of radians.
    #[arg(long, global = true)]
    pub degrees: bool,

    /// Plain-text `key = value` file supplying default flags; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the protocol once and print its transcript.
    Run(RunArgs),
    /// Compare closed-form and simulated magic over a φ grid.
    Scan(ScanArgs),
    /// Check a dealer gate for security and faithfulness.
    GateCheck(GateCheckArgs),
    /// Wigner-distance magic of a single- or two-qubit state.
    MagicEval(MagicEvalArgs),
    /// Steering certification of the recipient's magic.
    Certify(CertifyArgs),
    /// Shot-sampled experiment with tomography and bootstrap errors.
    Experiment(ExperimentArgs),
    /// List the stabilizer states and their Wigner vectors.
    DumpStabilizers(DumpArgs),
    /// Protocol commands grouped: run, scan, gate-check.
    #[command(subcommand)]
    Protocol(ProtocolCommand),
    /// Magic commands grouped: eval.
    #[command(subcommand)]
    Magic(MagicCommand),
}

#[derive(Debug, Subcommand)]
pub enum ProtocolCommand {
    Run(RunArgs),
    Scan(ScanArgs),
    GateCheck(GateCheckArgs),
}

#[derive(Debug, Subcommand)]
pub enum MagicCommand {
    Eval(MagicEvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    /// Correct every `−` broadcast.
    Every,
    /// Correct only the last intermediate's outcome.
    Last,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct RunArgs {
    /// Secret phase.
    #[arg(long, allow_negative_numbers = true)]
    pub phi: f64,
    /// Number of parties, 3 to 6.
    #[arg(long, short = 'n', alias = "parties", default_value_t = 3)]
    pub n: usize,
    /// Forced outcomes such as `+-+`, one per measuring party.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "seed")]
    pub outcomes: Option<String>,
    /// Sample outcomes from the Born rule with this seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Convention::Every)]
    pub convention: Convention,
    /// Write output to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct ScanArgs {
    /// `start:stop:steps`, endpoints included.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long, short = 'n', alias = "parties", default_value_t = 3)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// P(φ) = diag(1, e^{iφ}).
    Phase,
    /// e^{i(φ/2)X}.
    XRotation,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct GateCheckArgs {
    /// Eight comma-separated reals `re,im` for G00, G01, G10, G11.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "family", required_unless_present = "family")]
    pub matrix: Option<String>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Comma-separated probe angles; defaults to 16 points spread over (0, 2π).
    #[arg(long, allow_hyphen_values = true)]
    pub probes: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NamedState {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
    T,
    Mixed,
    Bell,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct MagicEvalArgs {
    /// Evaluate P(φ)|+⟩.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["bloch", "state"])]
    pub phi: Option<f64>,
    /// Evaluate the state with this Bloch vector, `x,y,z`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "state")]
    pub bloch: Option<String>,
    #[arg(long, value_enum)]
    pub state: Option<NamedState>,
    /// With --phi, use the two-qubit state (|00⟩ + e^{iφ}|11⟩)/√2.
    #[arg(long, requires = "phi")]
    pub two_qubit: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct CertifyArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub phi: f64,
    /// Certify from sampled tomography with this many shots per circuit.
    #[arg(long, requires = "seed")]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `p1,p2,readout`.
    #[arg(long, default_value = "0,0,0")]
    pub noise: String,
    #[arg(long, default_value_t = 2000)]
    pub n_boot: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct ExperimentArgs {
    /// Comma-separated angles.
    #[arg(long, allow_hyphen_values = true, default_value = "0.39269908169872414,0.7853981633974483,1.0471975511965976,2.356194490192345")]
    pub phis: String,
    #[arg(long, default_value_t = 4096)]
    pub shots: u64,
    /// `p1,p2,readout`.
    #[arg(long, default_value = "0,0,0")]
    pub noise: String,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub n_boot: usize,
    /// Directory receiving table.csv, detail.json and plot.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct DumpArgs {
    #[arg(long, default_value_t = 1)]
    pub qubits: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
