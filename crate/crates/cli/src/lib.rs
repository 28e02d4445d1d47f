//! Command-line front-end: reads a JSON problem document and runs
//! `validate`, `curvature`, `scan` or `berwald` on it.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 validation failure,
//! 3 precondition failure, 4 numerical failure.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use abflag_core::{Convention, Method};
use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{Outcome, OutputFormat, Overrides, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(
    name = "abflag",
    version,
    about = "Flag curvature of invariant (alpha+beta)^2/alpha metrics on Lie groups and homogeneous spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Run every structural check on the config.
    Validate(Common),
    /// Flag curvature for each flag listed in the config.
    Curvature(Common),
    /// Flag curvature over seeded random flags.
    Scan(Common),
    /// Obstructions to a parallel drift vector (Lie groups only).
    Berwald(Common),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConventionArg {
    OracleAligned,
    PaperVerbatim,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    General,
    NaturallyReductive,
    BiInvariant,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputArg {
    Table,
    Json,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON problem document.
    config: PathBuf,
    #[arg(long, value_enum)]
    convention: Option<ConventionArg>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Step of the finite-difference g_Y oracle.
    #[arg(long)]
    fd_step: Option<f64>,
    /// Number of random flags (scan) or drift samples (berwald)
    #[arg(long)]
    samples: Option<usize>,
    /// Seed of the flag sampler
    #[arg(long)]
    seed: Option<u64>,
    /// Skip validation gates (only with --convention paper-verbatim).
    #[arg(long)]
    force: bool,
    #[arg(long, value_enum, default_value = "table")]
    output: OutputArg,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            convention: self.convention.map(|c| match c {
                ConventionArg::OracleAligned => Convention::OracleAligned,
                ConventionArg::PaperVerbatim => Convention::Verbatim,
            }),
            method: self.method.map(|m| match m {
                MethodArg::General => Method::General,
                MethodArg::NaturallyReductive => Method::NaturallyReductive,
                MethodArg::BiInvariant => Method::BiInvariant,
            }),
            fd_step: self.fd_step,
            samples: self.samples,
            seed: self.seed,
            force: self.force,
        }
    }

    fn format(&self) -> OutputFormat {
        match self.output {
            OutputArg::Table => OutputFormat::Table,
            OutputArg::Json => OutputFormat::Json,
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let (common, which) = match &cli.command {
        Sub::Validate(c) => (c, "validate"),
        Sub::Curvature(c) => (c, "curvature"),
        Sub::Scan(c) => (c, "scan"),
        Sub::Berwald(c) => (c, "berwald"),
    };
    let outcome = execute(which, common);
    for n in &outcome.notices {
        let _ = writeln!(err, "{n}");
    }
    let _ = write!(out, "{}", outcome.stdout);
    outcome.code
}

fn execute(which: &str, common: &Common) -> Outcome {
    let fail = |e: abflag_core::Error| Outcome {
        code: commands::exit_code(&e),
        stdout: String::new(),
        notices: vec![format!("error: {e}")],
    };
    let mut cfg = match config::load_config(&common.config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if let Err(e) = common.overrides().apply(&mut cfg) {
        return fail(e);
    }
    let fmt = common.format();
    match which {
        "validate" => commands::cmd_validate(&cfg, fmt),
        "curvature" => commands::cmd_curvature(&cfg, fmt, common.force),
        "scan" => commands::cmd_scan(&cfg, fmt, common.force),
        _ => commands::cmd_berwald(&cfg, fmt),
    }
}
