//! Command-line front end: argument parsing, exit codes and output routing.
//! The subcommands live in [`commands`].

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use nocon::compat::{DEFAULT_MAX_ITERS, DEFAULT_TOL};
use nocon::linalg::Rational;
use nocon::noncontext::MEMBERSHIP_TOL;
use nocon::scenario::Direction;

mod commands;
pub mod doc;
pub mod report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_POSITIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nocon", version, about = "Generalized-noncontextuality analysis of prepare-measure scenarios")]
struct Cli {
    /// Print a structured JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Exit with status 1 on a "contextual" or "incompatible" verdict.
    #[arg(long, global = true)]
    fail_on_positive: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DirectionArg {
    ToFlagged,
    ToOriginal,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Direction {
        match d {
            DirectionArg::ToFlagged => Direction::ToFlagged,
            DirectionArg::ToOriginal => Direction::ToOriginal,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a scenario and check its POVMs and declared equivalences.
    Validate { file: PathBuf },
    /// Discover the operational equivalences of a scenario.
    Equivalences {
        file: PathBuf,
        /// Largest denominator for rational coefficients.
        #[arg(long, default_value_t = 1000)]
        max_den: u64,
    },
    /// Flag-convexify a scenario into a single measurement.
    Flagconv {
        file: PathBuf,
        /// Flag distribution p(t), e.g. `1/3,2/3` (default: the document's, else uniform).
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<Rational>>,
        /// Output scenario file (default: standard output).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Enumerate the noncontextuality inequalities of a scenario.
    Facets {
        file: PathBuf,
        /// Only classes that are not implied by nonnegativity and normalization.
        #[arg(long)]
        nontrivial_only: bool,
        /// Also rewrite each class on these coordinates, e.g. `'p(0|1)' 'p(+|1)'`.
        #[arg(long, num_args = 1..)]
        express_on: Vec<String>,
    },
    /// Decide whether a data table admits a noncontextual model.
    Membership {
        file: PathBuf,
        /// Data table (`.nct`).
        #[arg(long, conflicts_with = "born", required_unless_present = "born")]
        table: Option<PathBuf>,
        /// Use the Born-rule table of the scenario itself.
        #[arg(long)]
        born: bool,
        /// Per-entry slack for float tables.
        #[arg(long, default_value_t = MEMBERSHIP_TOL)]
        tol: f64,
    },
    /// Test whether the scenario's measurements are compatible.
    Compat {
        file: PathBuf,
        /// Search for a parent POVM (heuristic; failure is inconclusive).
        #[arg(long)]
        search: bool,
        /// Verify a claimed parent (`.ncp`).
        #[arg(long, conflicts_with = "search")]
        verify: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
        max_iters: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Move an ontological model to or from a flag-convexified scenario.
    Transfer {
        model: PathBuf,
        #[arg(long, value_enum)]
        direction: DirectionArg,
        /// Flag distribution p(t), e.g. `1/2,1/2`.
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<Rational>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// What a subcommand produced.
pub struct Outcome {
    pub text: String,
    pub json: serde_json::Value,
    /// A "contextual" or "incompatible" verdict.
    pub positive: bool,
}

/// Runs the CLI on `argv` (including the program name) and returns the exit
/// code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Validate { file } => commands::validate(&file),
        Command::Equivalences { file, max_den } => commands::equivalences(&file, max_den),
        Command::Flagconv { file, weights, output } => commands::flagconv(&file, weights, output.as_deref()),
        Command::Facets { file, nontrivial_only, express_on } => commands::facets(&file, nontrivial_only, &express_on),
        Command::Membership { file, table, born: _, tol } => commands::membership(&file, table.as_deref(), tol),
        Command::Compat { file, search, verify, max_iters, tol } => {
            commands::compat(&file, search, verify.as_deref(), max_iters, tol)
        }
        Command::Transfer { model, direction, weights, output } => {
            commands::transfer(&model, direction.into(), weights, output.as_deref())
        }
    };
    match result {
        Ok(outcome) => {
            let written = if cli.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&outcome.json).expect("reports serialize"))
            } else {
                write!(out, "{}", outcome.text)
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: cannot write output: {e}");
                return EXIT_INPUT;
            }
            if cli.fail_on_positive && outcome.positive {
                EXIT_POSITIVE
            } else {
                EXIT_OK
            }
        }
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}
