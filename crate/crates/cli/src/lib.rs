//! Command-line front end: profile tables, verification suites, the
//! profile figure data, the exhaustive oracle and the shape optimizer.
//!
//! Exit codes: 0 on success, 1 when a checked invariant fails, 2 for usage
//! errors (bad flags, unknown config keys, inputs outside a routine's
//! domain).

// `!(x >= y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod report;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::List;
use crate::report::Format;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(isocube::Error),
    Io(String),
}

impl std::error::Error for CliError {}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<isocube::Error> for CliError {
    fn from(e: isocube::Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "isocube", version, about = "Isoperimetric profiles of the unit cube and their Gaussian bounds")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long, global = true)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Flat key=value file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate profile curves from the requested sources.
    Profile(ProfileArgs),
    /// Run a verification suite: transport, lemmas, oracle, optimizer or all.
    Verify(VerifyArgs),
    /// Curves for d = 1, 2, 3 and the Gaussian bound, with the figure's checks.
    Figure1,
    /// Exhaustive minimum discrete perimeter on a small grid.
    Oracle(OracleArgs),
    /// Numerical upper bounds by perimeter minimisation.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(short = 'd', long)]
    pub dimension: Option<usize>,
    /// Uniform grid size on [0, 1], endpoints included.
    #[arg(long)]
    pub points: Option<usize>,
    /// Explicit comma-separated volumes (instead of --points).
    #[arg(long)]
    pub lambdas: Option<List<f64>>,
    /// Comma-separated subset of exact, candidate, lower_bound, numerical.
    #[arg(long)]
    pub sources: Option<List<commands::Source>>,
    /// Grid size per side for the numerical source.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub suite: Option<commands::Suite>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(short = 'd', long)]
    pub dimension: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    /// Number of filled cells; all counts when omitted.
    #[arg(short = 'k', long)]
    pub k: Option<usize>,
    /// Report one optimum per symmetry orbit (raises the cell cap).
    #[arg(long)]
    pub symmetry: bool,
    /// Compare the d=2, n=4 table with the stored golden file.
    #[arg(long)]
    pub golden: bool,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(short = 'd', long)]
    pub dimension: Option<usize>,
    /// Single volume; use --lambdas for a sweep.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub lambdas: Option<List<f64>>,
    #[arg(long)]
    pub grid: Option<usize>,
    /// slab, corner_ball, random or best_candidate.
    #[arg(long)]
    pub init: Option<commands::InitName>,
    /// Interface widths in grid cells, strictly decreasing.
    #[arg(long)]
    pub epsilon: Option<List<f64>>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Threshold-dynamics diffusion length in cells.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub refine_steps: Option<usize>,
    /// Write the final field (single volume only).
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// binary or text.
    #[arg(long)]
    pub dump_format: Option<commands::DumpFormat>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Output goes to `--out` or `stdout`; diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match commands::execute(&cli) {
        Ok((report, format)) => {
            let text = report.render(format);
            let written = match &cli.common.out {
                Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "i/o error: {e}");
                return 2;
            }
            for c in report.checks.iter().filter(|c| !c.passed) {
                let _ = writeln!(stderr, "check failed: {} (value {}) {}", c.name, c.value, c.detail);
            }
            if report.failed() {
                1
            } else {
                0
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            2
        }
    }
}
