//! The `stabset` command line: argument parsing, dispatch and report
//! rendering. Every command builds a JSON report; the text format is derived
//! from it.

mod campaign;
mod commands;
mod render;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use stabset_core::Error;

pub use campaign::{campaign, CampaignReport, PropertyOutcome};
pub use render::render_text;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Seed used when `--seed` is absent.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "stabset",
    version,
    about = "Fixed, orbit, stable and attracting sets of self-maps"
)]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Campaign seed; `subst fixpoint` reads it as the seed letter.
    #[arg(long, global = true)]
    pub seed: Option<String>,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Prefix length or word-length bound.
    #[arg(long, global = true)]
    pub length: Option<usize>,
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Finite self-maps and the staircase example on ℤ².
    #[command(subcommand)]
    Fmap(FmapCommand),
    /// Rational matrices.
    #[command(subcommand)]
    Linear(LinearCommand),
    /// The truncated operator on the paired basis.
    #[command(subcommand)]
    Hilbert(HilbertCommand),
    /// Substitutions on finite and infinite words.
    #[command(subcommand)]
    Subst(SubstCommand),
    /// Families of self-maps, episturmian and Kolakoski words.
    #[command(subcommand)]
    Monoid(MonoidCommand),
    /// Free-group endomorphisms.
    #[command(subcommand)]
    Freegroup(FreegroupCommand),
    /// Piecewise-affine maps of [0,1].
    #[command(subcommand)]
    Interval(IntervalCommand),
    /// Seeded randomized property suites over every module.
    Campaign(CampaignArgs),
}

#[derive(Debug, Subcommand)]
pub enum FmapCommand {
    /// Fix, Orb, Stab and Atrac of a map given as {"succ": [...]}.
    Analyze { file: PathBuf },
    /// A backward chain from one point.
    Chain {
        file: PathBuf,
        #[arg(long)]
        x: usize,
    },
    /// Classify a point of the staircase map.
    Example21 {
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, default_value_t = 0)]
        m: i64,
    },
    /// Four sets of the staircase map cut to a finite window.
    Truncate {
        #[arg(long)]
        window: i64,
    },
}

#[derive(Debug, Subcommand)]
pub enum LinearCommand {
    /// Kernel and image chains, stable subspace and the Fitting split.
    Analyze { file: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HilbertCheck {
    Shift,
    Kernel,
    Preimage,
    Norm,
    Diverge,
    All,
}

#[derive(Debug, Subcommand)]
pub enum HilbertCommand {
    Verify {
        #[arg(long)]
        kmax: u64,
        #[arg(long)]
        nmax: u64,
        #[arg(long, value_enum, default_value_t = HilbertCheck::All)]
        check: HilbertCheck,
    },
}

#[derive(Debug, Subcommand)]
pub enum SubstCommand {
    /// Mortality, fixed-point specs and the finite-word sets up to --length.
    Analyze { file: PathBuf },
    /// Prefix of the fixed point seeded by the letter given as --seed.
    Fixpoint { file: PathBuf },
    /// Orb, Stab and Atrac membership of one finite word.
    Member {
        file: PathBuf,
        #[arg(long)]
        word: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum MonoidCommand {
    /// Stab and Atrac of a family of maps on a finite set.
    Finite { file: PathBuf },
    /// Episturmian prefix of a directive, then desubstituted back.
    Epi {
        #[arg(long)]
        directive: String,
        #[arg(long)]
        alphabet: Option<String>,
    },
    Kolakoski {
        /// Digits to compare the generated prefix against.
        #[arg(long, default_value = "2211212211")]
        against: String,
    },
    /// Iterated run-length decoding of a digit word.
    Smooth {
        #[arg(long)]
        word: String,
        #[arg(long, default_value = "12")]
        sigma: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum FreegroupCommand {
    Rankchain {
        file: PathBuf,
        #[arg(long, default_value_t = 6)]
        n: usize,
    },
    Member {
        file: PathBuf,
        #[arg(long)]
        word: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum IntervalCommand {
    Atrac {
        file: PathBuf,
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
    Chain {
        file: PathBuf,
        #[arg(long)]
        x: String,
    },
    /// Search the grid of the n-th image for a point of Stab outside Orb.
    Separate {
        file: PathBuf,
        #[arg(long, default_value_t = 64)]
        den: u32,
    },
}

#[derive(Debug, Args)]
pub struct CampaignArgs {
    /// Instances per property; 0 runs nothing.
    #[arg(long, default_value_t = 40)]
    pub sizes: usize,
}

/// Exit code and the report to print.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
}

/// Command output before it is wrapped: the payload and whether every
/// verification it ran passed.
pub(crate) struct Answer {
    pub value: Value,
    pub passed: bool,
}

impl Answer {
    pub fn ok(value: Value) -> Self {
        Answer { value, passed: true }
    }

    pub fn checked(value: Value, passed: bool) -> Self {
        Answer { value, passed }
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

impl Cli {
    pub(crate) fn numeric_seed(&self) -> Result<u64, Error> {
        match &self.seed {
            None => Ok(DEFAULT_SEED),
            Some(s) => s
                .parse()
                .map_err(|_| Error::Input(format!("seed must be an integer, got {s:?}"))),
        }
    }

    pub(crate) fn depth_or(&self, default: usize) -> Result<usize, Error> {
        positive("depth", self.depth, default)
    }

    pub(crate) fn length_or(&self, default: usize) -> Result<usize, Error> {
        positive("length", self.length, default)
    }
}

fn positive(name: &str, value: Option<usize>, default: usize) -> Result<usize, Error> {
    match value {
        Some(0) => Err(Error::Input(format!("--{name} must be positive"))),
        Some(v) => Ok(v),
        None => Ok(default),
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Fmap(c) => match c {
            FmapCommand::Analyze { .. } => "fmap analyze",
            FmapCommand::Chain { .. } => "fmap chain",
            FmapCommand::Example21 { .. } => "fmap example21",
            FmapCommand::Truncate { .. } => "fmap truncate",
        },
        Command::Linear(_) => "linear analyze",
        Command::Hilbert(_) => "hilbert verify",
        Command::Subst(c) => match c {
            SubstCommand::Analyze { .. } => "subst analyze",
            SubstCommand::Fixpoint { .. } => "subst fixpoint",
            SubstCommand::Member { .. } => "subst member",
        },
        Command::Monoid(c) => match c {
            MonoidCommand::Finite { .. } => "monoid finite",
            MonoidCommand::Epi { .. } => "monoid epi",
            MonoidCommand::Kolakoski { .. } => "monoid kolakoski",
            MonoidCommand::Smooth { .. } => "monoid smooth",
        },
        Command::Freegroup(c) => match c {
            FreegroupCommand::Rankchain { .. } => "freegroup rankchain",
            FreegroupCommand::Member { .. } => "freegroup member",
        },
        Command::Interval(c) => match c {
            IntervalCommand::Atrac { .. } => "interval atrac",
            IntervalCommand::Chain { .. } => "interval chain",
            IntervalCommand::Separate { .. } => "interval separate",
        },
        Command::Campaign(_) => "campaign",
    }
}

/// Runs one parsed command. A report is produced on every path.
pub fn run(cli: &Cli) -> Outcome {
    let command = command_name(&cli.command);
    match commands::dispatch(cli) {
        Ok(Answer { value, passed }) => Outcome {
            code: if passed { EXIT_OK } else { EXIT_FAILED },
            report: json!({
                "command": command,
                "status": if passed { "ok" } else { "failed" },
                "result": value,
            }),
        },
        Err(e) => {
            let (code, status) = match e {
                Error::Verification(_) => (EXIT_FAILED, "failed"),
                Error::Input(_) | Error::Precondition(_) => (EXIT_INPUT, "input_error"),
            };
            Outcome {
                code,
                report: json!({ "command": command, "status": status, "error": e.to_string() }),
            }
        }
    }
}

/// Parses `args` (program name first) and runs; usage errors become exit 2.
pub fn run_args<I, T>(args: I) -> (Outcome, Format)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => (run(&cli), cli.format),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            (
                Outcome {
                    code,
                    report: json!({ "status": "usage", "message": e.to_string() }),
                },
                Format::Text,
            )
        }
    }
}

/// The report as printed: pretty JSON or the derived text form.
pub fn format_report(outcome: &Outcome, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(&outcome.report).expect("values serialize"),
        Format::Text => match outcome.report.get("message").and_then(Value::as_str) {
            Some(usage) if outcome.report.get("status") == Some(&json!("usage")) => usage.trim_end().to_string(),
            _ => render_text(&outcome.report),
        },
    }
}
