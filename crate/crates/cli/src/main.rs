use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ucp_lab::constants::{CarlemanConfig, ConstantsInput};
use ucp_lab::geometry::{BoundaryCondition, DeloneParams};

mod config;
mod experiments;
mod output;
mod plot;
mod selftest;

/// Errors surfaced to the shell. Configuration problems exit with 2,
/// failures during computation with 1.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Compute(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Compute(_) => 1,
        }
    }

    /// Sorts a library error into the input or compute bucket, prefixed with
    /// the unit that failed.
    pub fn from_core(unit: &str, e: ucp_lab::Error) -> Self {
        use ucp_lab::Error::*;
        let msg = format!("{unit}: {e}");
        match e {
            InvalidInput(_) | Domain(_) | IncommensurateBox { .. } | GridTooLarge { .. } | GridAlignment(_)
            | DeltaTooLarge(_) | UnderResolvedBall { .. } | DeloneInfeasible(_) => Failure::Config(msg),
            _ => Failure::Compute(msg),
        }
    }

    pub fn io(what: &std::path::Path, e: std::io::Error) -> Self {
        Failure::Compute(format!("{}: {e}", what.display()))
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Compute(m) => write!(f, "computation failed: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "ucp-lab", version, about = "Unique continuation and Delone-Anderson experiments")]
struct Cli {
    /// Worker threads. Falls back to UCPLAB_THREADS, then to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory, replacing `output.dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override a config field, e.g. `--set params.n_eigs=4`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Evaluate the explicit constants for one parameter set.
    Constants {
        #[arg(long)]
        d: usize,
        #[arg(long = "kv")]
        k_v: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_parser = parse_bc)]
        bc: BoundaryCondition,
        #[arg(long, default_value_t = 1.0)]
        d0: f64,
        /// Delone denseness scale; enables the dilute variant.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        c_minus: f64,
        #[arg(long, default_value_t = 0.0)]
        e0: f64,
        #[arg(long, default_value_t = 1.0)]
        k1: f64,
        #[arg(long, default_value_t = 1.0)]
        k2: f64,
        #[arg(long, default_value = "ucp-lab-out")]
        out: PathBuf,
    },
    /// Generate a perturbed-lattice Delone set and write it as JSON.
    GenDelone {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        side: f64,
        #[arg(long, value_parser = parse_bc)]
        bc: BoundaryCondition,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        m_tilde: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        perturbation: f64,
        #[arg(long, default_value_t = 0)]
        n_extra: usize,
        #[arg(long)]
        seed: u64,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn report CSVs of a run directory into gnuplot data files.
    PlotData {
        run_dir: PathBuf,
        /// Destination directory, defaults to the run directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a fast battery of invariant checks.
    Selftest,
}

fn parse_bc(s: &str) -> Result<BoundaryCondition, String> {
    s.parse().map_err(|e: ucp_lab::Error| e.to_string())
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var("UCPLAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Failure::Config(format!("UCPLAB_THREADS=`{v}` is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = thread_count(cli.threads)? {
        if n == 0 {
            return Err(Failure::Config("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Compute(format!("thread pool: {e}")))?;
    }
    let args: Vec<String> = std::env::args().collect();
    match cli.command {
        Command::Run { config, out, overrides } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Failure::Config(format!("{}: {e}", config.display())))?;
            let mut cfg = config::ExperimentConfig::parse(&text, &overrides)?;
            if let Some(dir) = out {
                cfg.output.dir = dir;
            }
            experiments::run(&cfg, &args)
        }
        Command::Constants { d, k_v, delta, bc, d0, m, c_minus, e0, k1, k2, out } => {
            let input = ConstantsInput { d, k_v, delta, bc, d0, m, c_minus, e0, k1, k2 };
            experiments::constants_to_dir(&input, &CarlemanConfig::default(), &out, &args)
        }
        Command::GenDelone { d, side, bc, m, m_tilde, delta, perturbation, n_extra, seed, out } => {
            let params = DeloneParams { d, m_tilde, m, delta, perturbation, n_extra };
            let json = experiments::gen_delone(&params, side, bc, seed)?;
            match out {
                Some(path) => std::fs::write(&path, json + "\n").map_err(|e| Failure::io(&path, e)),
                None => {
                    println!("{json}");
                    Ok(())
                }
            }
        }
        Command::PlotData { run_dir, out } => {
            let out = out.unwrap_or_else(|| run_dir.clone());
            plot::emit(&run_dir, &out)
        }
        Command::Selftest => selftest::run(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ucp-lab: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
