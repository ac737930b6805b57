//! `luka`: batch front end for the exact Łukasiewicz engine.
//!
//! Exit status: 0 success, 1 parse or validation error, 2 cell cap
//! exceeded, 3 internal invariant violation (including failed self-tests).

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Degree, Input, LimitArgs};
use luka::Error;
use output::{Format, Report};

#[derive(Parser, Debug)]
#[command(name = "luka", version, about = "Exact semantics for Łukasiewicz logic with scalars")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,

    #[command(flatten)]
    opts: Options,
}

#[derive(Args, Debug)]
struct Options {
    /// Precision index k for real scalars (enclosure width 2^-k).
    #[arg(long, global = true, default_value_t = 20)]
    precision: u32,

    /// Maximum number of cells a compiled function may have.
    #[arg(long, global = true)]
    cap: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 20240607)]
    seed: u64,

    /// Write the compiled piecewise-linear function to this path.
    #[arg(long, global = true, value_name = "PATH")]
    dump_pwl: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct Source {
    /// Inline input (formula text, or JSON for file-shaped inputs).
    #[arg(short = 'e', value_name = "TEXT")]
    expr: Option<String>,

    /// Input file.
    #[arg(short = 'f', value_name = "FILE")]
    file: Option<PathBuf>,
}

impl From<&Source> for Input {
    fn from(s: &Source) -> Self {
        Input { expr: s.expr.clone(), file: s.file.clone() }
    }
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Evaluate a formula at a point.
    Eval {
        #[command(flatten)]
        src: Source,
        /// Comma-separated rational coordinates, e.g. 1/2,1/3.
        #[arg(long)]
        point: Option<String>,
    },
    /// Minimum of the truth function.
    TruthDegree {
        #[command(flatten)]
        src: Source,
    },
    /// Largest r with eta_r -> phi provable.
    ProvabilityDegree {
        #[command(flatten)]
        src: Source,
    },
    /// Maximum of the truth function.
    UnitNorm {
        #[command(flatten)]
        src: Source,
    },
    /// Lebesgue integral of the truth function over the unit cube.
    Integral {
        #[command(flatten)]
        src: Source,
    },
    /// Whether the premises entail the formula.
    Consequence {
        #[command(flatten)]
        src: Source,
        #[arg(long = "premise", value_name = "FORMULA")]
        premises: Vec<String>,
    },
    /// Whether the premises have a common model.
    Consistent {
        #[command(flatten)]
        src: Source,
        #[arg(long = "premise", value_name = "FORMULA")]
        premises: Vec<String>,
    },
    /// Check a formula sequence against a limit.
    LimitCheck {
        /// Sequence description file (JSON).
        #[arg(long, value_name = "FILE")]
        sequence: PathBuf,
        /// Target formula (-e or -f).
        #[command(flatten)]
        src: Source,
        /// Check against the sequence's declared rate.
        #[arg(long)]
        rate: bool,
        /// Report the least index from which the distance stays below 1 - r.
        #[arg(long, value_name = "R")]
        threshold: Option<String>,
        #[arg(long, default_value_t = 30)]
        upto: usize,
    },
    /// Rational lower and upper envelopes of a formula with real scalars.
    Sandwich {
        #[command(flatten)]
        src: Source,
    },
    /// Piecewise-linear interpolant of grid samples.
    Approx {
        #[command(flatten)]
        src: Source,
    },
    /// Zero set of a presentation's generator.
    Zeroset {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        class: Option<String>,
    },
    /// Presentation whose zero set is a given polyhedron.
    Present {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        class: Option<String>,
    },
    /// Integer-coefficient generator of the same principal ideal.
    Mvgen {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        class: Option<String>,
    },
    /// Read a presentation in a class with more scalars.
    Extend {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        class: Option<String>,
        #[arg(long)]
        to: String,
    },
    /// Whether a substitution sends variables to integer-coefficient terms.
    SubstCheck {
        #[command(flatten)]
        src: Source,
    },
    /// Run the built-in acceptance suites.
    Selftest {
        /// One suite name, or `all`.
        #[arg(long)]
        suite: Option<String>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CellCap { .. } => 2,
        Error::Internal(_) => 3,
        _ => 1,
    }
}

fn run(cli: &Cli) -> Result<(Report, bool), Error> {
    let o = &cli.opts;
    if let Some(cap) = o.cap {
        if cap == 0 {
            return Err(Error::Invalid("--cap must be at least 1".into()));
        }
        luka::pwl::set_cell_cap(cap);
    }
    let k = o.precision;
    let dump = o.dump_pwl.as_deref();
    let ok = |r: Report| Ok((r, true));
    match &cli.verb {
        Verb::Eval { src, point } => ok(commands::eval(&src.into(), point.as_deref(), k)?),
        Verb::TruthDegree { src } => ok(commands::degree(Degree::Truth, &src.into(), k, dump)?),
        Verb::ProvabilityDegree { src } => ok(commands::degree(Degree::Provability, &src.into(), k, dump)?),
        Verb::UnitNorm { src } => ok(commands::degree(Degree::UnitNorm, &src.into(), k, dump)?),
        Verb::Integral { src } => ok(commands::degree(Degree::Integral, &src.into(), k, dump)?),
        Verb::Consequence { src, premises } => ok(commands::consequence(premises, &src.into(), k)?),
        Verb::Consistent { src, premises } => ok(commands::consistent(premises, &src.into())?),
        Verb::LimitCheck { sequence, src, rate, threshold, upto } => ok(commands::limit_check(LimitArgs {
            sequence,
            target: &src.into(),
            rate: *rate,
            threshold: threshold.as_deref(),
            upto: *upto,
        })?),
        Verb::Sandwich { src } => ok(commands::sandwich(&src.into(), k, dump)?),
        Verb::Approx { src } => ok(commands::approx(&src.into(), dump)?),
        Verb::Zeroset { src, class } => ok(commands::zeroset(&src.into(), class.as_deref(), k)?),
        Verb::Present { src, class } => ok(commands::present(&src.into(), class.as_deref(), dump)?),
        Verb::Mvgen { src, class } => ok(commands::mvgen(&src.into(), class.as_deref(), k, dump)?),
        Verb::Extend { src, class, to } => ok(commands::extend(&src.into(), class.as_deref(), to, k)?),
        Verb::SubstCheck { src } => ok(commands::subst_check(&src.into())?),
        Verb::Selftest { suite } => commands::selftest(suite.as_deref(), o.seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok((report, passed)) => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            if let Err(e) = report.write(cli.opts.format, &mut out).and_then(|_| out.flush()) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(if passed { 0 } else { 3 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
