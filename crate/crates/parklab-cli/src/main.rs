//! `parklab` — simulate, enumerate, and analyze the probabilistic parking
//! model from the command line. All outputs are machine-readable CSV or JSON;
//! see docs/output-schema.md for column contracts and exit codes.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::ToPrimitive;

use parklab_core::numeric::parse_rational;
use parklab_core::{cars_for_ratio, Error, ModelParams, RngSpec};

use commands::{ExpansionKind, SweepGrid};
use output::Format;

/// Exit codes: 0 success, 2 usage (clap), 3 domain error, 4 enumeration
/// budget exceeded, 5 self-check failure, 6 I/O error.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn self_check(message: String) -> Self {
        Self { code: 5, message }
    }

    fn io(err: std::io::Error) -> Self {
        Self {
            code: 6,
            message: format!("i/o error: {err}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::BudgetExceeded(_) => 4,
            Error::Numerical(_) => 5,
            _ => 3,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "parklab",
    about = "Probabilistic parking: m cars, n spots, forward probability p",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutputOpts {
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write to this path instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo histogram of the last car's preference plus the parking
    /// probability estimate, against the closed-form distribution.
    Simulate {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
        /// Forward probability; accepts a decimal or "num/den".
        #[arg(long)]
        p: String,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Exact enumeration at small sizes: rational parking probability,
    /// conditional distribution, and mean.
    Exact {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
        /// Forward probability as an exact rational ("1/3", "0.25", "1").
        #[arg(long)]
        p: String,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Closed-form conditional distribution of the last car's preference.
    Dist {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: String,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Closed-form conditional mean of the last car's preference.
    Mean {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: String,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Total-variation distance to uniform with all applicable bounds.
    Tv {
        /// Number of cars; exactly one of --m or --c.
        #[arg(long, conflicts_with = "c", required_unless_present = "c")]
        m: Option<u32>,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: String,
        /// Car/spot ratio; sets m = floor(c*n) and fills the cap column.
        #[arg(long)]
        c: Option<f64>,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Approximation-vs-exact error tables over a list of street sizes.
    Asymptotics {
        #[arg(long)]
        c: f64,
        #[arg(long, default_value = "1")]
        p: String,
        /// Comma-separated street sizes.
        #[arg(long, value_delimiter = ',', default_value = "100,200,400,800")]
        ns: Vec<u32>,
        /// Which expansion to tabulate: the conditional mean, the Poisson
        /// left tail, or the Poisson-factor ratio.
        #[arg(long, value_enum, default_value_t = KindArg::Mean)]
        kind: KindArg,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// TV distance as a function of the car/spot ratio c at fixed n and p.
    SweepC {
        #[arg(long, default_value_t = 100)]
        n: u32,
        #[arg(long, default_value = "1")]
        p: String,
        #[arg(long, default_value_t = 0.1)]
        c_min: f64,
        #[arg(long, default_value_t = 0.99)]
        c_max: f64,
        #[arg(long, default_value_t = 0.01)]
        c_step: f64,
        #[command(flatten)]
        out: OutputOpts,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Mean,
    Ld,
    Cf,
}

impl From<KindArg> for ExpansionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Mean => ExpansionKind::Mean,
            KindArg::Ld => ExpansionKind::Ld,
            KindArg::Cf => ExpansionKind::Cf,
        }
    }
}

/// Parse a probability given as a decimal, a fraction, or an integer.
fn parse_prob_f64(s: &str) -> Result<f64, CliError> {
    if let Ok(v) = s.parse::<f64>() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("probability {v} outside [0, 1]")).into());
        }
        return Ok(v);
    }
    let r = parse_rational(s)?;
    parklab_core::numeric::check_unit_interval(&r)?;
    r.to_f64()
        .ok_or_else(|| Error::Domain(format!("cannot represent {s} as a float")).into())
}

fn parse_prob_exact(s: &str) -> Result<BigRational, CliError> {
    let r = parse_rational(s)?;
    parklab_core::numeric::check_unit_interval(&r)?;
    Ok(r)
}

/// Honor PARKLAB_THREADS as a cap on sweep workers.
fn install_thread_pool() -> Option<rayon::ThreadPool> {
    let threads: usize = std::env::var("PARKLAB_THREADS").ok()?.parse().ok()?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .ok()
}

fn in_pool<T: Send>(
    pool: &Option<rayon::ThreadPool>,
    f: impl FnOnce() -> T + Send,
) -> T {
    match pool {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    let pool = install_thread_pool();

    let (table, out) = match &cli.command {
        Command::Simulate {
            m,
            n,
            p,
            samples,
            seed,
            stream,
            out,
        } => {
            let params = ModelParams::new(*m, *n, parse_prob_f64(p)?)?;
            (
                commands::simulate(&params, *samples, RngSpec::new(*seed, *stream))?,
                out,
            )
        }
        Command::Exact { m, n, p, out } => {
            (commands::exact(*m, *n, &parse_prob_exact(p)?)?, out)
        }
        Command::Dist { m, n, p, out } => {
            let params = ModelParams::new(*m, *n, parse_prob_f64(p)?)?;
            (commands::dist(&params)?, out)
        }
        Command::Mean { m, n, p, out } => {
            let params = ModelParams::new(*m, *n, parse_prob_f64(p)?)?;
            (commands::mean(&params)?, out)
        }
        Command::Tv { m, n, p, c, out } => {
            let m = match (m, c) {
                (Some(m), None) => *m,
                (None, Some(c)) => cars_for_ratio(*c, *n)?,
                _ => unreachable!("clap enforces exactly one of --m/--c"),
            };
            let params = ModelParams::new(m, *n, parse_prob_f64(p)?)?;
            (commands::tv_cmd(&params, *c)?, out)
        }
        Command::Asymptotics {
            c,
            p,
            ns,
            kind,
            out,
        } => {
            let p = parse_prob_f64(p)?;
            let (c, ns, kind) = (*c, ns.clone(), ExpansionKind::from(*kind));
            (
                in_pool(&pool, || commands::asymptotics_cmd(c, p, &ns, kind))?,
                out,
            )
        }
        Command::SweepC {
            n,
            p,
            c_min,
            c_max,
            c_step,
            out,
        } => {
            let p = parse_prob_f64(p)?;
            let grid = SweepGrid {
                c_min: *c_min,
                c_max: *c_max,
                c_step: *c_step,
            };
            let n = *n;
            (in_pool(&pool, || commands::sweep_c(n, p, &grid))?, out)
        }
    };

    table
        .write(out.format.into(), out.output.as_ref())
        .map_err(CliError::io)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
