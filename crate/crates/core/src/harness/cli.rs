//! Command-line front end. Exit codes: 0 success, 1 usage or input error,
//! 2 a violation was found.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::artinian::{monomial_criterion, reg_artinian_quotient};
use crate::constructions::{
    build_certificate, distribute_flats, distribution_threshold, recursion_check, theorem_check,
    verify_certificate,
};
use crate::error::Error;
use crate::harness::batch::{batch_check, report_json};
use crate::harness::generate::{generate, MultSpec, Pattern, PatternSpec, DEFAULT_HEIGHT};
use crate::harness::schemefile::{read_scheme, scheme_to_json, write_scheme};
use crate::linalg;
use crate::scheme::{hilbert, hilbert_table, multiplicity, reg_index, FatPointScheme};
use crate::segre::segre_bound;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "fatpoints", version, about = "Hilbert functions, regularity and Segre bounds of fat points")]
struct Cli {
    /// Confirm ranks with a large-prime filter before exact elimination.
    #[arg(long, global = true)]
    modular: bool,

    /// More log output on stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    /// Seed for randomized steps.
    #[arg(long, global = true, env = "FATPOINTS_SEED", default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct SchemeArg {
    /// Scheme file (JSON).
    #[arg(long)]
    scheme: PathBuf,
}

#[derive(Args, Debug)]
struct PointArgs {
    #[command(flatten)]
    scheme: SchemeArg,
    /// Index of the distinguished point P; the rest of the scheme is J.
    /// Defaults to the last point.
    #[arg(long)]
    point: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct PatternArgs {
    #[arg(long)]
    pattern: Pattern,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    s: usize,
    /// Common multiplicity.
    #[arg(long, conflicts_with_all = ["mults", "max_mult"])]
    m: Option<u32>,
    /// Comma-separated multiplicities, one per point.
    #[arg(long, value_delimiter = ',', conflicts_with = "max_mult")]
    mults: Option<Vec<u32>>,
    /// Draw multiplicities uniformly from 1..=MAX.
    #[arg(long)]
    max_mult: Option<u32>,
    /// Coordinate height bound.
    #[arg(long, default_value_t = DEFAULT_HEIGHT)]
    height: i64,
    /// Flat dimension for on_flat.
    #[arg(long)]
    flat_dim: Option<usize>,
    /// Degeneracy index for prop43.
    #[arg(long)]
    k: Option<usize>,
}

impl PatternArgs {
    fn spec(&self, seed: u64) -> PatternSpec {
        let mults = match (&self.m, &self.mults, &self.max_mult) {
            (Some(m), _, _) => MultSpec::Equal(*m),
            (_, Some(v), _) => MultSpec::Explicit(v.clone()),
            (_, _, Some(max)) => MultSpec::Random { max: *max },
            _ => MultSpec::Equal(1),
        };
        PatternSpec {
            pattern: self.pattern,
            n: self.n,
            s: self.s,
            mults,
            seed,
            height: self.height,
            flat_dim: self.flat_dim,
            k: self.k,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// H_Z(t) for one degree, or the table up to stabilization.
    Hilbert {
        #[command(flatten)]
        scheme: SchemeArg,
        #[arg(long)]
        degree: Option<usize>,
        /// Print the table as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// The regularity index.
    Reg {
        #[command(flatten)]
        scheme: SchemeArg,
    },
    /// The table T_1..T_n with witnesses and the bound.
    Segre {
        #[command(flatten)]
        scheme: SchemeArg,
    },
    /// Classify the scheme and compare reg with the bound.
    Check {
        #[command(flatten)]
        scheme: SchemeArg,
        /// Also check the regularity recursion for every removed point.
        #[arg(long)]
        lemma21: bool,
        /// Also check the monomial criterion at the quotient regularity.
        #[arg(long)]
        lemma22: bool,
    },
    /// Build and verify a hyperplane certificate for reg(R/(J + p^a)).
    Certify {
        #[command(flatten)]
        target: PointArgs,
        /// The order a (defaults to the multiplicity of P).
        #[arg(long)]
        order: Option<u32>,
    },
    /// Distribute (r-1)-flats avoiding P over the other points.
    Distribute {
        #[command(flatten)]
        target: PointArgs,
        #[arg(long)]
        r: usize,
        /// Number of flats (defaults to the threshold).
        #[arg(long)]
        t: Option<usize>,
    },
    /// Generate a scheme from a pattern.
    Gen {
        #[command(flatten)]
        pattern: PatternArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run seeded trials of a pattern and write a report.
    Batch {
        #[command(flatten)]
        pattern: PatternArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_ERROR,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_ERROR,
            message: e.to_string(),
        }
    }
}

fn json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("serializable output")
}

fn split(z: &FatPointScheme, point: Option<usize>) -> Result<(FatPointScheme, usize), Failure> {
    let i = point.unwrap_or(z.len() - 1);
    if i >= z.len() {
        return Err(Error::Precondition(format!("--point {i} out of range for {} points", z.len())).into());
    }
    let j = z
        .without(i)
        .ok_or_else(|| Error::Precondition("the scheme needs at least two points".into()))?;
    Ok((j, i))
}

#[derive(Serialize)]
struct CriterionCheck {
    removed: usize,
    a: u32,
    b: usize,
    at_b: bool,
    below_b: Option<bool>,
    holds: bool,
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    verdict: &'a crate::constructions::Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    recursion: Option<Vec<crate::constructions::RecursionCheck>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    criterion: Option<Vec<CriterionCheck>>,
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let seed = cli.seed;
    match cli.command {
        Command::Hilbert { scheme, degree, csv } => {
            let z = read_scheme(&scheme.scheme)?;
            match degree {
                Some(t) => writeln!(out, "{}", hilbert(&z, t))?,
                None => {
                    let table = hilbert_table(&z)?;
                    if csv {
                        writeln!(out, "t,h")?;
                    }
                    for (t, h) in table.iter().enumerate() {
                        if csv {
                            writeln!(out, "{t},{h}")?;
                        } else {
                            writeln!(out, "{t}\t{h}")?;
                        }
                    }
                    if !csv {
                        writeln!(out, "e = {}", multiplicity(&z))?;
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Reg { scheme } => {
            let z = read_scheme(&scheme.scheme)?;
            writeln!(out, "{}", reg_index(&z)?)?;
            Ok(EXIT_OK)
        }
        Command::Segre { scheme } => {
            let z = read_scheme(&scheme.scheme)?;
            writeln!(out, "{}", json(&segre_bound(&z)))?;
            Ok(EXIT_OK)
        }
        Command::Check { scheme, lemma21, lemma22 } => {
            let z = read_scheme(&scheme.scheme)?;
            let verdict = theorem_check(&z)?;
            let mut bad = verdict.violation;
            let recursion = if lemma21 && z.len() >= 2 {
                let rows = (0..z.len()).map(|i| recursion_check(&z, i)).collect::<Result<Vec<_>, _>>()?;
                bad |= rows.iter().any(|r| !r.holds);
                Some(rows)
            } else {
                None
            };
            let criterion = if lemma22 && z.len() >= 2 {
                let mut rows = Vec::new();
                for i in 0..z.len() {
                    let (j, _) = split(&z, Some(i))?;
                    let p = &z.points()[i];
                    let a = z.mults()[i];
                    let b = reg_artinian_quotient(&j, p, a)?;
                    let at_b = monomial_criterion(&j, p, a, b)?;
                    let below_b = if b >= a as usize { Some(monomial_criterion(&j, p, a, b - 1)?) } else { None };
                    let holds = at_b && below_b != Some(true);
                    bad |= !holds;
                    rows.push(CriterionCheck { removed: i, a, b, at_b, below_b, holds });
                }
                Some(rows)
            } else {
                None
            };
            writeln!(out, "{}", json(&CheckOutput { verdict: &verdict, recursion, criterion }))?;
            Ok(if bad { EXIT_VIOLATION } else { EXIT_OK })
        }
        Command::Certify { target, order } => {
            let z = read_scheme(&target.scheme.scheme)?;
            let (j, i) = split(&z, target.point)?;
            let p = &z.points()[i];
            let a = order.unwrap_or(z.mults()[i]);
            let cert = build_certificate(&j, p, a, seed)?;
            let verdict = verify_certificate(&cert, &j, p, a)?;
            let quotient = reg_artinian_quotient(&j, p, a)?;
            #[derive(Serialize)]
            struct CertifyOutput<'a> {
                point: usize,
                a: u32,
                delta: usize,
                valid: bool,
                reg_quotient: usize,
                failures: &'a [String],
                certificate: &'a crate::constructions::Certificate,
            }
            writeln!(
                out,
                "{}",
                json(&CertifyOutput {
                    point: i,
                    a,
                    delta: verdict.delta,
                    valid: verdict.valid,
                    reg_quotient: quotient,
                    failures: &verdict.failures,
                    certificate: &cert,
                })
            )?;
            Ok(if verdict.valid && quotient <= verdict.delta { EXIT_OK } else { EXIT_VIOLATION })
        }
        Command::Distribute { target, r, t } => {
            let z = read_scheme(&target.scheme.scheme)?;
            let (j, i) = split(&z, target.point)?;
            let t = t.unwrap_or_else(|| distribution_threshold(j.mults(), r.max(1)));
            let d = distribute_flats(j.points(), &z.points()[i], j.mults(), r, t, seed)?;
            #[derive(Serialize)]
            struct DistributeOutput {
                avoid: usize,
                r: usize,
                t: usize,
                flats: Vec<String>,
                coverage: Vec<Vec<usize>>,
            }
            writeln!(
                out,
                "{}",
                json(&DistributeOutput {
                    avoid: i,
                    r,
                    t,
                    flats: d.flats.iter().map(|f| f.to_string()).collect(),
                    coverage: d.coverage,
                })
            )?;
            Ok(EXIT_OK)
        }
        Command::Gen { pattern, out: path } => {
            let z = generate(&pattern.spec(seed))?;
            match path {
                Some(path) => write_scheme(&path, &z)?,
                None => writeln!(out, "{}", scheme_to_json(&z))?,
            }
            Ok(EXIT_OK)
        }
        Command::Batch { pattern, trials, workers, out: path } => {
            let report = batch_check(&pattern.spec(seed), trials, seed, workers)?;
            let text = report_json(&report);
            match path {
                Some(path) => std::fs::write(&path, text + "\n").map_err(|e| Failure {
                    code: EXIT_ERROR,
                    message: format!("{}: {e}", path.display()),
                })?,
                None => writeln!(out, "{text}")?,
            }
            log::info!(
                "{} trials, {} violations, {} errors",
                report.trials,
                report.violation_count,
                report.error_count
            );
            Ok(if report.violation_count > 0 { EXIT_VIOLATION } else { EXIT_OK })
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    // a second call (tests running several commands) keeps the first logger
    let _ = env_logger::Builder::new().filter_level(level).try_init();
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{rendered}") } else { write!(err, "{rendered}") };
            return code;
        }
    };
    init_logging(cli.verbose);
    linalg::set_modular_filter(cli.modular);
    let modular = cli.modular;
    let code = match dispatch(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    };
    if modular {
        let stats = linalg::filter_stats();
        log::info!(
            "modular filter: {} confirmed, {} exact fallbacks, {} disagreements",
            stats.confirmed,
            stats.fallbacks,
            stats.disagreements
        );
    }
    code
}
