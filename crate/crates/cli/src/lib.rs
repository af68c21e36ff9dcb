//! Command-line front end: `augment`, `synth-extreme`, `eval` and `preview`.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data or I/O errors.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
pub mod preview;

pub use commands::{image_files, read_ops_log, AugmentSummary, ConfigEcho};

/// Environment variable capping the number of worker threads (0 = auto).
pub const THREADS_ENV: &str = "MMSL_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "mmsl",
    version,
    about = "Multi-mode augmentation and re-ID evaluation tools"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Augment every image in a directory, writing PNGs and per-image op logs.
    Augment(AugmentArgs),
    /// Apply one random op to every gallery image and write a manifest.
    SynthExtreme(SynthArgs),
    /// Score query embeddings against a gallery (CMC and mAP).
    Eval(EvalArgs),
    /// Transform one image and render a side-by-side panel.
    Preview(PreviewArgs),
}

/// Pipeline settings shared by `augment` and `preview`. Flags override the
/// config file, which overrides the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct PipelineFlags {
    /// JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub rows: Option<u32>,
    #[arg(long)]
    pub cols: Option<u32>,
    /// Probability of the global branch.
    #[arg(long)]
    pub pg: Option<f64>,
    /// Cumulative threshold for the local branch (p_g <= p_t).
    #[arg(long)]
    pub pt: Option<f64>,
    /// Number of cells transformed by the local branch.
    #[arg(long)]
    pub cells: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
    /// Human-readable summary instead of JSON.
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Gallery directory (Market-1501 style file names).
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Euclidean,
    Cosine,
}

impl From<MetricArg> for mmsl_core::eval::Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Euclidean => mmsl_core::eval::Metric::Euclidean,
            MetricArg::Cosine => mmsl_core::eval::Metric::Cosine,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Query embeddings (EMB1 binary).
    #[arg(long)]
    pub query: PathBuf,
    /// Query labels CSV (`name,pid,camid,junk`).
    #[arg(long)]
    pub query_labels: PathBuf,
    #[arg(long)]
    pub gallery: PathBuf,
    #[arg(long)]
    pub gallery_labels: PathBuf,
    #[arg(long, value_enum)]
    pub metric: MetricArg,
    /// Comma-separated CMC ranks to report.
    #[arg(long, value_delimiter = ',', default_value = "1,5,10")]
    pub ranks: Vec<usize>,
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Args)]
pub struct PreviewArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Where to write the transformed image; the panel goes next to it as
    /// `<stem>.panel.png`.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

pub(crate) fn data_err(e: impl fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

pub(crate) fn usage_err(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(err, "error: {e}");
        return e.exit_code();
    }
    let result = match cli.command {
        Command::Augment(a) => commands::augment(&a, out, err),
        Command::SynthExtreme(a) => commands::synth_extreme(&a, out),
        Command::Eval(a) => commands::eval(&a, out),
        Command::Preview(a) => commands::preview(&a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        usage_err(format!(
            "{THREADS_ENV} must be a non-negative integer, got {raw:?}"
        ))
    })?;
    if n > 0 {
        // Already initialised when run() is called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

/// True when `a` and `b` name the same existing directory.
pub(crate) fn same_dir(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}
