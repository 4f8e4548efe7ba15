//! The `qchain` command line.
//!
//! Exit codes: 0 success, 1 verification failed (the report is still printed
//! on stdout), 2 unparseable input, 3 domain or numerical error, 4 negative
//! mass in strict mode.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::exactnum::{parse_rational, QuadraticNumber};
use crate::format::{distribution_to_string, parse_f64, trajectory_csv, write_trajectory, JsonScalar};
use crate::markov::{
    build_distribution, exact_setup, simulate, verify_chapman_kolmogorov, ChainConfig, MassPolicy,
    DEFAULT_SEED, DEFAULT_STATE_BOUND,
};
use crate::qcore::{al_salam_chihara, connection_b, continuous_q_hermite, q_hermite, QParams};
use crate::report::Report;
use crate::scalar::{RealScalar, Scalar};
use crate::spectra::{
    hermite_limit_identity, rational_grid, verify_addition_formula, verify_b_h_relation,
    verify_chi_properties, verify_factorization, verify_h_h_relation,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NEGATIVE_MASS: i32 = 4;

/// Float tolerance used by `verify` when `--tol` is not given.
const DEFAULT_FLOAT_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "qchain", version, about = "q-Hermite identities and the q > 1 Bryc Markov chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate H_n(x|q), h_n(x|q), B_n(y|q) or p_n(x|y,rho,q).
    Eval(EvalArgs),
    /// Check an identity and print a JSON report.
    #[command(subcommand)]
    Verify(Identity),
    /// Print the conditional distribution Lambda(m, y, q) as JSON.
    Dist(DistArgs),
    /// Simulate one trajectory and print it as CSV.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// H, h, B or p.
    family: String,
    n: usize,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    q: String,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
}

#[derive(Subcommand, Debug)]
enum Identity {
    /// Sum form, product form and p_m at rho = q^(-(m-1)/2) on a grid.
    Factorization {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        q: String,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        /// Grid side; raised to m + 1 when smaller.
        #[arg(long, default_value_t = 10)]
        grid: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Hermite sum, Pochhammer product and t-product at x = cos(theta), y = cos(phi).
    Addition {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 1e-10)]
        imag_tol: f64,
    },
    /// h_m(x|q) against H_m, both directions.
    #[command(name = "h-H")]
    HH {
        #[arg(long)]
        m: usize,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = DEFAULT_FLOAT_TOL)]
        tol: f64,
    },
    /// B_n(y|q) against H_n(y|1/q).
    #[command(name = "B-H")]
    BH {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = DEFAULT_FLOAT_TOL)]
        tol: f64,
    },
    /// The square identity for chi_m, chi_n and chi_m(chi_n(y)) = chi_{m+n}(y).
    Chi {
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long)]
        q: String,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[arg(long, default_value_t = DEFAULT_FLOAT_TOL)]
        tol: f64,
    },
    /// sum_k C(m,k) B_{m-k}(y|1) H_k(x|1) = (x - y)^m, exactly.
    HermiteLimit {
        #[arg(long)]
        m: usize,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Lambda(m) composed with Lambda(n) against Lambda(m + n - 1).
    Ck {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long)]
        q: String,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
    },
}

#[derive(Args, Debug)]
struct DistArgs {
    #[arg(long)]
    m: usize,
    #[arg(long, allow_hyphen_values = true)]
    y: String,
    #[arg(long)]
    q: String,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    /// Report negative masses instead of failing.
    #[arg(long)]
    audit: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    m: usize,
    #[arg(long, allow_hyphen_values = true)]
    y: String,
    #[arg(long)]
    q: String,
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "float")]
    mode: Mode,
    /// Write the CSV here and metadata to FILE.meta.json instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_STATE_BOUND)]
    bound: f64,
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Error::VerificationFailed(report)) => {
            let _ = writeln!(out, "{}", report.to_json());
            let _ = writeln!(err, "verification failed: {}", report.identity);
            EXIT_VERIFICATION
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::VerificationFailed(_) => EXIT_VERIFICATION,
        Error::Parse(_) => EXIT_PARSE,
        Error::NegativeMass { .. } => EXIT_NEGATIVE_MASS,
        _ => EXIT_DOMAIN,
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn io(e: std::io::Error) -> Error {
    Error::Domain(format!("write failed: {e}"))
}

fn required<'a>(value: &'a Option<String>, flag: &str, family: &str) -> Result<&'a str> {
    value
        .as_deref()
        .ok_or_else(|| Error::Parse(format!("family {family} needs --{flag}")))
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Eval(args) => {
            let text = match args.mode {
                Mode::Exact => eval_with(&args, parse_rational)?.to_string(),
                Mode::Float => eval_with(&args, parse_f64)?.to_string(),
            };
            writeln!(out, "{text}").map_err(io)?;
        }
        Command::Verify(identity) => {
            let report = verify(identity)?;
            writeln!(out, "{}", report.to_json()).map_err(io)?;
        }
        Command::Dist(args) => {
            let policy = if args.audit { MassPolicy::Audit } else { MassPolicy::Strict };
            let text = match args.mode {
                Mode::Exact => {
                    let (params, y) = exact_inputs(&args.q, &args.y)?;
                    distribution_to_string(&build_distribution(args.m, &y, &params, policy)?)
                }
                Mode::Float => {
                    let params = QParams::new(parse_f64(&args.q)?)?;
                    distribution_to_string(&build_distribution(args.m, &parse_f64(&args.y)?, &params, policy)?)
                }
            };
            writeln!(out, "{text}").map_err(io)?;
        }
        Command::Simulate(args) => match args.mode {
            Mode::Exact => {
                let (params, y) = exact_inputs(&args.q, &args.y)?;
                simulate_to(&args, params.q().clone(), y, out)?;
            }
            Mode::Float => {
                let (q, y) = (parse_f64(&args.q)?, parse_f64(&args.y)?);
                simulate_to(&args, q, y, out)?;
            }
        },
    }
    Ok(EXIT_OK)
}

fn eval_with<T: Scalar>(args: &EvalArgs, parse: impl Fn(&str) -> Result<T>) -> Result<T> {
    let family = args.family.as_str();
    let q = parse(&args.q)?;
    let arg = |value: &Option<String>, flag: &str| parse(required(value, flag, family)?);
    match family {
        "H" => q_hermite(args.n, &arg(&args.x, "x")?, &q),
        "h" => continuous_q_hermite(args.n, &arg(&args.x, "x")?, &q),
        "B" => connection_b(args.n, &arg(&args.y, "y")?, &q),
        "p" => al_salam_chihara(
            args.n,
            &arg(&args.x, "x")?,
            &arg(&args.y, "y")?,
            &arg(&args.rho, "rho")?,
            &q,
        ),
        other => Err(Error::Parse(format!("unknown family {other:?}; expected H, h, B or p"))),
    }
}

fn exact_inputs(q: &str, y: &str) -> Result<(QParams<QuadraticNumber>, QuadraticNumber)> {
    exact_setup(&parse_rational(q)?, &parse_rational(y)?)
}

fn simulate_to<T: JsonScalar>(args: &SimulateArgs, q: T, y: T, out: &mut dyn Write) -> Result<()> {
    let config = ChainConfig::new(q, args.m, y, args.steps)
        .with_seed(args.seed)
        .with_bound(args.bound);
    let traj = simulate(&config)?;
    match &args.out {
        Some(path) => write_trajectory(path, &traj),
        None => out.write_all(trajectory_csv(&traj).as_bytes()).map_err(io),
    }
}

fn verify(identity: Identity) -> Result<Report> {
    match identity {
        Identity::Factorization { m, q, mode, grid, tol } => {
            let points = rational_grid(grid.max(m + 1));
            match mode {
                Mode::Exact => {
                    let params = QParams::new(parse_rational(&q)?)?;
                    verify_factorization(m, &params, &points, 0.0)
                }
                Mode::Float => {
                    let params = QParams::new(parse_f64(&q)?)?;
                    let points: Vec<(f64, f64)> =
                        points.iter().map(|(x, y)| (x.to_f64(), y.to_f64())).collect();
                    verify_factorization(m, &params, &points, tol.unwrap_or(DEFAULT_FLOAT_TOL))
                }
            }
        }
        Identity::Addition { n, theta, phi, q, tol, imag_tol } => {
            verify_addition_formula(n, parse_f64(&theta)?, parse_f64(&phi)?, parse_f64(&q)?, tol, imag_tol)
        }
        Identity::HH { m, x, q, tol } => verify_h_h_relation(m, parse_f64(&x)?, parse_f64(&q)?, tol),
        Identity::BH { n, y, q, tol } => verify_b_h_relation(n, parse_f64(&y)?, parse_f64(&q)?, tol),
        Identity::Chi { m, n, y, q, mode, tol } => match mode {
            Mode::Exact => {
                let (params, y) = exact_inputs(&q, &y)?;
                verify_chi_properties(m, n, &y, &params, 0.0)
            }
            Mode::Float => {
                let params = QParams::new(parse_f64(&q)?)?;
                verify_chi_properties(m, n, &parse_f64(&y)?, &params, tol)
            }
        },
        Identity::HermiteLimit { m, x, y } => {
            hermite_limit_identity(m, &parse_rational(&x)?, &parse_rational(&y)?)
        }
        Identity::Ck { m, n, y, q, mode } => match mode {
            Mode::Exact => {
                let (params, y) = exact_inputs(&q, &y)?;
                verify_chapman_kolmogorov(m, n, &y, &params)
            }
            Mode::Float => {
                let params = QParams::new(parse_f64(&q)?)?;
                verify_chapman_kolmogorov(m, n, &parse_f64(&y)?, &params)
            }
        },
    }
}
