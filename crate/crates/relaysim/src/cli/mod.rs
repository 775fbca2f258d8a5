//! Command-line driver: JSON configurations in, CSV/SVG artifacts out.
//!
//! Subcommands map one-to-one onto library capabilities: `simulate` dumps
//! frames, `detect` runs detectors on simulated frames, `sweep` and
//! `tolerance-study` drive the experiment harness, `tune` searches for
//! proposal scales, and `plot` renders SVG charts from previously written
//! CSV tables without recomputing any statistics.
//!
//! Every command reads one JSON configuration (`--config`) and writes its
//! artifacts into `--out`, exiting 0 only when every artifact was written
//! and re-validated; partially written artifacts are removed on failure.
//! `--seed` overrides the configuration's master seed, `--threads` (or the
//! `RELAYSIM_THREADS` environment variable) caps harness parallelism, and
//! `--quiet` silences progress output. All randomness descends from the
//! master seed: reruns with identical configurations produce byte-identical
//! artifacts regardless of thread count.

mod commands;
mod plot;
mod svg;

pub use commands::{DetectConfig, PlotConfig, SimulateConfig, TuneConfig};

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::harness::{ExperimentPlan, ToleranceStudyConfig};
use crate::Result;

/// Print a progress line unless `--quiet` was given.
macro_rules! note {
    ($quiet:expr, $($arg:tt)*) => {
        if !$quiet {
            println!($($arg)*);
        }
    };
}
pub(crate) use note;

/// Parsed command line.
#[derive(Debug, Parser)]
#[command(
    name = "relaysim",
    version,
    about = "Simulate two-hop relay networks and detect symbols sent through \
             nonlinear relays under imperfect channel knowledge",
    after_help = "Each subcommand reads one JSON configuration (--config) and writes its \
                  artifacts into --out, exiting 0 only when every artifact was written and \
                  validated. See docs/file_formats.md for configuration and table schemas."
)]
pub struct Cli {
    /// The operation to perform.
    #[command(subcommand)]
    pub command: Command,
}

/// The operation to perform.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw frames (codeword, channels, observation) and dump them as CSV
    Simulate(RunArgs),
    /// Run detectors on freshly simulated frames and dump decision rows
    Detect(RunArgs),
    /// Measure symbol error rates over a relay-count x SNR grid
    Sweep(RunArgs),
    /// Compare likelihood-free weighting/metric variants across tolerances
    ToleranceStudy(RunArgs),
    /// Search for random-walk proposal scales with pilot chains
    Tune(RunArgs),
    /// Render SVG charts from previously written CSV tables
    Plot(RunArgs),
}

impl Command {
    /// The shared flags of whichever subcommand was chosen.
    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Simulate(a)
            | Command::Detect(a)
            | Command::Sweep(a)
            | Command::ToleranceStudy(a)
            | Command::Tune(a)
            | Command::Plot(a) => a,
        }
    }
}

/// Flags every subcommand accepts.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// Path to this subcommand's JSON configuration
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,

    /// Directory to write artifacts into (created if missing)
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    /// Override the configuration's master seed
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,

    /// Worker threads for the experiment harness (default: one per core)
    #[arg(long, env = "RELAYSIM_THREADS", value_name = "N")]
    pub threads: Option<usize>,

    /// Suppress progress output on stdout
    #[arg(long)]
    pub quiet: bool,
}

/// Parse the process arguments, run, and exit with the resulting status.
pub fn main() -> ! {
    // Library warnings (tuner non-convergence, covariance fallbacks) go to
    // stderr; RUST_LOG overrides the level.
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    let cli = Cli::parse();
    std::process::exit(run(&cli));
}

/// Run a parsed invocation: `0` on success, `1` on failure. (Usage errors
/// are caught earlier by the parser itself, which exits `2`.)
pub fn run(cli: &Cli) -> i32 {
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Load the subcommand's configuration, apply flag overrides, and execute
/// it. On success, all of the subcommand's artifacts exist in `--out` and
/// have been re-read and validated.
pub fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Simulate(a) => {
            let mut cfg: SimulateConfig = load_config(&a.config)?;
            if let Some(seed) = a.seed {
                cfg.master_seed = seed;
            }
            with_thread_pool(a.threads, || commands::run_simulate(&cfg, &a.out, a.quiet))
        }
        Command::Detect(a) => {
            let mut cfg: DetectConfig = load_config(&a.config)?;
            if let Some(seed) = a.seed {
                cfg.master_seed = seed;
            }
            with_thread_pool(a.threads, || commands::run_detect(&cfg, &a.out, a.quiet))
        }
        Command::Sweep(a) => {
            let mut plan: ExperimentPlan = load_config(&a.config)?;
            if let Some(seed) = a.seed {
                plan.master_seed = seed;
            }
            with_thread_pool(a.threads, || commands::run_sweep(&plan, &a.out, a.quiet))
        }
        Command::ToleranceStudy(a) => {
            let mut cfg: ToleranceStudyConfig = load_config(&a.config)?;
            if let Some(seed) = a.seed {
                cfg.master_seed = seed;
            }
            with_thread_pool(a.threads, || commands::run_tolerance_study(&cfg, &a.out, a.quiet))
        }
        Command::Tune(a) => {
            let mut cfg: TuneConfig = load_config(&a.config)?;
            if let Some(seed) = a.seed {
                cfg.master_seed = seed;
            }
            with_thread_pool(a.threads, || commands::run_tune(&cfg, &a.out, a.quiet))
        }
        Command::Plot(a) => {
            let cfg: PlotConfig = load_config(&a.config)?;
            if a.seed.is_some() {
                eprintln!("note: plot draws no random numbers, ignoring --seed");
            }
            let config_dir = a.config.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
            with_thread_pool(a.threads, || commands::run_plot(&cfg, &config_dir, &a.out, a.quiet))
        }
    }
}

/// Read and deserialize a JSON configuration, prefixing errors with the
/// file path; parse errors keep serde's line/column and field diagnostics.
fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Run `body`, optionally inside a dedicated worker pool of `n` threads so
/// the harness's parallel loops are capped. `None` keeps the default pool.
fn with_thread_pool<T: Send>(
    threads: Option<usize>,
    body: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    match threads {
        None => body(),
        Some(0) => Err(Error::invalid("--threads must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("could not build a {n}-thread pool: {e}")))?;
            pool.install(body)
        }
    }
}

/// Removes tracked files on drop unless the run committed.
///
/// Commands register every artifact path before writing it; when a command
/// errors out part-way, the guard deletes whatever was already written so a
/// failed run never leaves a partial artifact set behind.
pub(crate) struct OutputGuard {
    tracked: Vec<PathBuf>,
    committed: bool,
}

impl OutputGuard {
    pub(crate) fn new() -> OutputGuard {
        OutputGuard { tracked: Vec::new(), committed: false }
    }

    /// Register an artifact about to be written, returning its path.
    pub(crate) fn track(&mut self, path: PathBuf) -> PathBuf {
        self.tracked.push(path.clone());
        path
    }

    /// Declare the run successful: tracked files stay on disk.
    pub(crate) fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for path in &self.tracked {
            if std::fs::remove_file(path).is_ok() {
                eprintln!("removed partial artifact {}", path.display());
            }
        }
    }
}
