//! Command definitions and orchestration, kept out of `main` so the commands
//! can be driven in-process.

use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conddisc::field::FieldTower;
use conddisc::induct::{analyze, Config, InductionReport};
use conddisc::newton::{puiseux_roots, ExactPoly};
use conddisc::puiseux::Q;
use conddisc::tree::{MetricTree, RootTable};
use conddisc::Error;

use crate::families::{expression, Family};
use crate::parse::{expand, format_raw, ParseError};
use crate::report::{InputEcho, ReportDocument, Timings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "conddisc",
    version,
    about = "Artin conductor and minimal discriminant of y^2 = f(x) over F_p((t))"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the replacement induction on a polynomial and report both invariants.
    Analyze(AnalyzeArgs),
    /// Print a member of one of the standard example families.
    Example(ExampleArgs),
    /// Render the metric tree of the roots of a polynomial.
    Tree(TreeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TreeFormat {
    Dot,
    Ascii,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct Caps {
    /// Upper bound on the working precision, in powers of t.
    #[arg(long, default_value_t = conddisc::induct::DEFAULT_MAX_PRECISION, value_parser = clap::value_parser!(i64).range(1..))]
    pub max_precision: i64,
    /// Largest degree of a finite-field extension the run may create.
    #[arg(long, default_value_t = conddisc::field::DEFAULT_MAX_EXTENSION as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_extension: u64,
}

/// Everything that determines one analysis run.
#[derive(Args, Debug, Clone)]
pub struct AnalyzeArgs {
    /// Characteristic of the residue field: an odd prime exceeding deg f.
    #[arg(long)]
    pub prime: u64,
    /// The polynomial f(x) in x and t, e.g. "x^6 - t" or "(x-1)*(x^2-t)".
    #[arg(
        long,
        required_unless_present = "poly_file",
        conflicts_with = "poly_file"
    )]
    pub poly: Option<String>,
    /// Read the polynomial expression from a file instead.
    #[arg(long)]
    pub poly_file: Option<PathBuf>,
    /// Also write the JSON report to this path.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Output format on stdout.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Print the replacement ledger to stderr and record timings in the report.
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub caps: Caps,
    /// Largest recursion depth of the replacement induction.
    #[arg(long, default_value_t = conddisc::induct::DEFAULT_MAX_DEPTH as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_depth: u64,
}

#[derive(Args, Debug, Clone)]
pub struct ExampleArgs {
    /// eisenstein, pairs, triple, collision or chain.
    #[arg(long)]
    pub family: Family,
    /// Genus parameter of the family.
    #[arg(short = 'g', long = "genus", default_value_t = 2)]
    pub g: u64,
    #[arg(long, default_value_t = 101)]
    pub prime: u64,
    /// Print the expanded polynomial instead of the factored form.
    #[arg(long)]
    pub expanded: bool,
}

#[derive(Args, Debug, Clone)]
pub struct TreeArgs {
    #[arg(long)]
    pub poly: String,
    #[arg(long, default_value_t = 101)]
    pub prime: u64,
    #[arg(long, value_enum, default_value_t = TreeFormat::Ascii)]
    pub format: TreeFormat,
    #[command(flatten)]
    pub caps: Caps,
}

/// A failed command, classified for the exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Input(String),
    Cap(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Cap(_) => EXIT_CAP,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {}", m),
            CliError::Cap(m) => write!(f, "resource cap reached: {}", m),
            CliError::Internal(m) => write!(f, "internal error (please report): {}", m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_cap() {
            CliError::Cap(e.to_string())
        } else if e.is_invariant() {
            CliError::Internal(e.to_string())
        } else {
            match e {
                Error::InvalidPrime(_)
                | Error::WildCharacteristic { .. }
                | Error::WildRamification { .. }
                | Error::NotSquarefree(_)
                | Error::NonUnitLeadingCoefficient
                | Error::InvalidInput(_) => CliError::Input(e.to_string()),
                _ => CliError::Internal(e.to_string()),
            }
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        match e {
            ParseError::Syntax(s) => CliError::Input(s.to_string()),
            ParseError::Poly(e) => e.into(),
        }
    }
}

/// What a command produced: text for stdout and stderr, and an exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(e: CliError) -> Outcome {
        Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {}\n", e),
        }
    }
}

fn read_source(args: &AnalyzeArgs) -> Result<String, CliError> {
    match (&args.poly, &args.poly_file) {
        (Some(p), _) => Ok(p.clone()),
        (None, Some(path)) => std::fs::read_to_string(path)
            .map(|s| s.trim().to_string())
            .map_err(|e| CliError::Input(format!("cannot read {}: {}", path.display(), e))),
        (None, None) => Err(CliError::Input("no polynomial given".into())),
    }
}

/// Parses the input and runs the full induction.
pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(ReportDocument, InductionReport), CliError> {
    let src = read_source(args)?;
    let t0 = Instant::now();
    let raw = expand(&src, args.prime)?;
    let f = ExactPoly::parse_and_normalize(args.prime, &raw)?;
    let t1 = Instant::now();
    let cfg = Config {
        max_depth: args.max_depth as usize,
        max_precision: args.caps.max_precision,
        max_extension: args.caps.max_extension as usize,
        ..Config::default()
    };
    let r = analyze(&f, &cfg)?;
    let t2 = Instant::now();
    if r.minus_art > r.disc {
        // verify_inequality already refuses this; kept as a last line of defence
        return Err(CliError::Internal(format!(
            "−Art = {} exceeds ν(Δ) = {}",
            r.minus_art, r.disc
        )));
    }
    let echo = InputEcho {
        poly: src,
        prime: args.prime,
        expanded: format_raw(&raw),
    };
    let mut doc = ReportDocument::new(echo, &r);
    if args.trace {
        doc.timings = Some(Timings {
            parse_us: (t1 - t0).as_micros() as u64,
            analyze_us: (t2 - t1).as_micros() as u64,
        });
    }
    Ok((doc, r))
}

fn run_analyze(args: &AnalyzeArgs) -> Result<Outcome, CliError> {
    let (doc, _) = cmd_analyze(args)?;
    let json = doc.to_json();
    if let Some(path) = &args.json {
        std::fs::write(path, &json)
            .map_err(|e| CliError::Input(format!("cannot write {}: {}", path.display(), e)))?;
    }
    let stdout = match args.format {
        Format::Json => json,
        Format::Text => doc.to_text(),
        Format::Dot => doc.to_dot(),
    };
    let mut out = Outcome::ok(stdout);
    if args.trace {
        out.stderr = doc
            .steps
            .iter()
            .map(|s| serde_json::to_string(s).expect("step serializes") + "\n")
            .collect();
    }
    Ok(out)
}

/// The family member as a factored expression (or expanded, on request).
pub fn cmd_example(args: &ExampleArgs) -> Result<String, CliError> {
    let e = expression(args.family, args.g, args.prime).map_err(CliError::Input)?;
    let raw = expand(&e, args.prime)?;
    ExactPoly::parse_and_normalize(args.prime, &raw)?;
    Ok(if args.expanded { format_raw(&raw) } else { e })
}

/// The metric tree of the roots of a polynomial, at the first precision that certifies it.
pub fn metric_tree(f: &ExactPoly, caps: &Caps) -> Result<MetricTree, CliError> {
    let tower = FieldTower::new(f.p() as u64, caps.max_extension as usize)?;
    let mut n = (f.discriminant_valuation_direct() as i64 / 2 + 3).min(caps.max_precision);
    loop {
        let attempt =
            puiseux_roots(f, Q::from_integer(n), &tower).and_then(|rs| RootTable::new(&rs));
        match attempt {
            Ok(t) => return Ok(t.tree()),
            Err(Error::PrecisionExhausted(_)) if n < caps.max_precision => {
                n = (2 * n).min(caps.max_precision)
            }
            Err(e) => return Err(e.into()),
        }
    }
}

pub fn cmd_tree(args: &TreeArgs) -> Result<String, CliError> {
    let raw = expand(&args.poly, args.prime)?;
    let f = ExactPoly::parse_and_normalize(args.prime, &raw)?;
    let tree = metric_tree(&f, &args.caps)?;
    Ok(match args.format {
        TreeFormat::Dot => tree.to_dot(&args.poly),
        TreeFormat::Ascii => tree.to_ascii(),
        TreeFormat::Json => {
            let mut s = serde_json::to_string_pretty(&tree.to_json()).expect("tree serializes");
            s.push('\n');
            s
        }
    })
}

/// Runs one parsed command.
pub fn run(cli: &Cli) -> Outcome {
    let r = match &cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Example(a) => cmd_example(a).map(|s| Outcome::ok(s + "\n")),
        Command::Tree(a) => cmd_tree(a).map(Outcome::ok),
    };
    r.unwrap_or_else(Outcome::fail)
}

/// Parses arguments (clap usage errors exit with status 2) and runs the command.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                Outcome::ok(text)
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            }
        }
    }
}
