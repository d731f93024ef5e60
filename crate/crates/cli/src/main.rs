//! `anderson`: scattering data, critical energies, Lyapunov exponents and
//! random-walk experiments for continuum Bernoulli-Anderson models.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure (a diagnostic
//! JSON object is written to stderr).

mod commands;
mod config;
mod manifest;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::config::Config;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        source: anderson_core::Error,
    },
}

impl CliError {
    /// Bad user input reported by the library counts as a usage error.
    pub fn from_core(context: impl Into<String>, source: anderson_core::Error) -> Self {
        use anderson_core::Error as E;
        match source {
            E::InvalidArgument(_)
            | E::NonMonotoneBreakpoints { .. }
            | E::SupportOutOfRange { .. }
            | E::NonFiniteValue { .. }
            | E::PieceCountMismatch { .. } => {
                CliError::Usage(format!("{}: {source}", context.into()))
            }
            source => CliError::Numerical {
                context: context.into(),
                source,
            },
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "anderson",
    version,
    about = "Continuum Bernoulli-Anderson models: scattering, critical energies, Lyapunov exponents"
)]
struct Cli {
    /// Worker threads (outputs do not depend on this)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file with default values, keyed by long flag names
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed [env: ANDERSON_SEED]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout if absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script for the CSV output
    #[arg(long, global = true)]
    gnuplot: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PotentialArgs {
    /// Single-site potential JSON ({"breakpoints": [...], "values": [...]})
    #[arg(long, conflicts_with_all = ["ex1", "ex2"])]
    pub potential: Option<PathBuf>,
    /// Constant step λ on [-1/2, 1/2]
    #[arg(long, allow_negative_numbers = true, conflicts_with = "ex2")]
    pub ex1: Option<f64>,
    /// Antisymmetric step: λ on [-1/2, 0), -λ on [0, 1/2]
    #[arg(long, allow_negative_numbers = true)]
    pub ex2: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorArg {
    Vector,
    Matrix,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// a(k), b(k) and the Wronskian residual over a k-grid (CSV)
    Scatter {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        k_range: Option<Vec<f64>>,
        #[arg(long)]
        k_points: Option<usize>,
    },
    /// Critical energies: reflection zeros, negative-axis zeros, lattice points (JSON)
    Critical {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        k_range: Option<Vec<f64>>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        alpha_range: Option<Vec<f64>>,
        /// Zero tolerance
        #[arg(long)]
        tol: Option<f64>,
        /// Additional energies to classify
        #[arg(long = "E", value_delimiter = ',', allow_negative_numbers = true)]
        energies: Option<Vec<f64>>,
    },
    /// Monte Carlo Lyapunov exponents (CSV)
    Gamma {
        #[command(flatten)]
        pot: PotentialArgs,
        /// Energies, comma separated
        #[arg(long = "E", value_delimiter = ',', allow_negative_numbers = true)]
        energies: Option<Vec<f64>>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        e_range: Option<Vec<f64>>,
        #[arg(long)]
        e_points: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        realizations: Option<usize>,
        /// Probability of q_n = 1
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_enum)]
        estimator: Option<EstimatorArg>,
    },
    /// Noncompactness witnesses and strong irreducibility (JSON)
    Furstenberg {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long = "E", value_delimiter = ',', allow_negative_numbers = true)]
        energies: Option<Vec<f64>>,
        #[arg(long)]
        max_word_len: Option<usize>,
        #[arg(long)]
        directions: Option<usize>,
        #[arg(long)]
        orbit_depth: Option<usize>,
    },
    /// √N growth of the Type 2 random walk (CSV)
    Walk {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        realizations: Option<usize>,
    },
    /// Tables of the worked examples (JSON)
    Examples {
        /// Only the N_j construction for this j
        #[arg(long)]
        lambda_j: Option<u32>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = Config::load(cli.config.as_deref())?;
    if let Some(n) = cfg.pick::<usize>(cli.threads, "threads")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    let seed = match cfg.pick::<u64>(cli.seed, "seed")? {
        Some(s) => s,
        None => match std::env::var("ANDERSON_SEED") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("ANDERSON_SEED is not a u64: {v:?}")))?,
            Err(_) => 0,
        },
    };
    let output = match cli.command {
        Command::Scatter {
            pot,
            k_range,
            k_points,
        } => commands::scatter(&cfg, &pot, k_range, k_points)?,
        Command::Critical {
            pot,
            k_range,
            alpha_range,
            tol,
            energies,
        } => commands::critical(&cfg, &pot, k_range, alpha_range, tol, energies)?,
        Command::Gamma {
            pot,
            energies,
            e_range,
            e_points,
            steps,
            realizations,
            p,
            estimator,
        } => commands::gamma(
            &cfg,
            &pot,
            commands::GammaFlags {
                energies,
                e_range,
                e_points,
                steps,
                realizations,
                p,
                estimator,
            },
            seed,
        )?,
        Command::Furstenberg {
            pot,
            energies,
            max_word_len,
            directions,
            orbit_depth,
        } => commands::furstenberg(&cfg, &pot, energies, max_word_len, directions, orbit_depth)?,
        Command::Walk {
            n,
            m,
            p,
            pairs,
            realizations,
        } => commands::walk(&cfg, n, m, p, pairs, realizations, seed)?,
        Command::Examples { lambda_j } => commands::examples(&cfg, lambda_j)?,
    };
    let out = cfg.pick::<PathBuf>(cli.out, "out")?;
    let gnuplot = cfg.pick::<PathBuf>(cli.gnuplot, "gnuplot")?;
    output.emit(out.as_deref(), gnuplot.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical { context, source }) => {
            let kind = format!("{source:?}");
            let kind = kind
                .split(|c: char| !c.is_alphanumeric())
                .next()
                .unwrap_or("")
                .to_string();
            let diag = json!({ "error": kind, "context": context, "message": source.to_string() });
            let _ = writeln!(std::io::stderr(), "{diag}");
            ExitCode::from(2)
        }
    }
}
