//! `pseudoq`: every experiment as a seeded subcommand writing CSV or JSON plus a run manifest.

mod bounds;
mod expanders;
mod learn;
mod output;
mod scans;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use output::{Format, Sink};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] pseudoq::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_precondition() => 2,
            CliError::Usage(_) => 64,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "pseudoq", version, about = "Seeded numerical experiments on designs, random circuits, expanders and Clifford learning")]
#[command(after_help = "Every run writes <subcommand>.csv (or .json with --format json) and \
<subcommand>.manifest.json into --out. Floats carry 17 significant digits, so rerunning with the \
parameters and seed recorded in a manifest reproduces the CSV byte for byte. PSEUDOQ_THREADS caps \
the worker count.\n\nExit codes: 0 success, 1 internal error, 2 precondition or promise violated, \
64 usage error.")]
pub struct Cli {
    /// Master seed; every random stream is derived from it and a fixed label.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Spectral gaps of the Pauli-weight chains.
    #[command(after_help = scans::CHAIN_HELP)]
    GapScan(scans::ChainScanArgs),
    /// Mixing times of the Pauli-weight chains.
    #[command(after_help = scans::CHAIN_HELP)]
    MixingScan(scans::ChainScanArgs),
    /// Distance of random-circuit moments from the Haar moment versus circuit length.
    #[command(after_help = scans::CIRCUIT_HELP)]
    CircuitConverge(scans::CircuitArgs),
    /// Design distance of Clifford, Haar or circuit ensembles.
    #[command(after_help = scans::DESIGN_HELP)]
    DesignCheck(scans::DesignArgs),
    /// Second eigenvalue of the Fourier-mixed operator A, restricted and dense.
    #[command(after_help = expanders::TPE_HELP)]
    TpeLambda(expanders::LambdaArgs),
    /// Classical and quantum expander eigenvalues for random permutation sets.
    #[command(after_help = expanders::TPE_HELP)]
    TpeQuantum(expanders::QuantumArgs),
    /// Evaluate a concentration bound family, optionally against Monte-Carlo samples.
    #[command(after_help = bounds::BOUND_HELP)]
    BoundEval(bounds::BoundArgs),
    /// Subsystem purity of random states against its mean and tail bound.
    #[command(after_help = bounds::BOUND_HELP)]
    PurityExp(bounds::PurityArgs),
    /// Thermalization of random states in a restricted subspace.
    #[command(after_help = bounds::BOUND_HELP)]
    ThermalExp(bounds::ThermalArgs),
    /// Learn random Clifford unitaries from forward and adjoint queries.
    #[command(after_help = learn::LEARN_HELP)]
    LearnClifford(learn::CliffordArgs),
    /// Learn elements of the Clifford hierarchy level by level.
    #[command(after_help = learn::LEARN_HELP)]
    LearnCk(learn::CkArgs),
    /// Decide whether a unitary is close to or far from every Clifford.
    #[command(after_help = learn::TESTING_HELP)]
    TestClifford(learn::TestArgs),
    /// Run the invariant suite and report each check.
    #[command(after_help = selftest::SELFTEST_HELP)]
    Selftest(selftest::SelftestArgs),
}

/// Shared run context handed to each subcommand.
pub struct Run {
    pub seed: u64,
    pub sink: Sink,
}

impl Run {
    fn new<P: Serialize>(cli: &Cli, name: &'static str, params: &P) -> Result<Self, CliError> {
        let params = serde_json::to_value(params)?;
        Ok(Run {
            seed: cli.seed,
            sink: Sink::new(&cli.out, cli.format, name, params, cli.seed)?,
        })
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("PSEUDOQ_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("PSEUDOQ_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Failed(format!("thread pool: {e}")))
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let written = match &cli.command {
        Command::GapScan(a) => scans::chain_scan(Run::new(cli, "gap-scan", a)?, a, false)?,
        Command::MixingScan(a) => scans::chain_scan(Run::new(cli, "mixing-scan", a)?, a, true)?,
        Command::CircuitConverge(a) => scans::circuit(Run::new(cli, "circuit-converge", a)?, a)?,
        Command::DesignCheck(a) => scans::design(Run::new(cli, "design-check", a)?, a)?,
        Command::TpeLambda(a) => expanders::lambda(Run::new(cli, "tpe-lambda", a)?, a)?,
        Command::TpeQuantum(a) => expanders::quantum(Run::new(cli, "tpe-quantum", a)?, a)?,
        Command::BoundEval(a) => bounds::eval(Run::new(cli, "bound-eval", a)?, a)?,
        Command::PurityExp(a) => bounds::purity(Run::new(cli, "purity-exp", a)?, a)?,
        Command::ThermalExp(a) => bounds::thermal(Run::new(cli, "thermal-exp", a)?, a)?,
        Command::LearnClifford(a) => learn::clifford(Run::new(cli, "learn-clifford", a)?, a)?,
        Command::LearnCk(a) => learn::ck(Run::new(cli, "learn-ck", a)?, a)?,
        Command::TestClifford(a) => learn::testing(Run::new(cli, "test-clifford", a)?, a)?,
        Command::Selftest(a) => selftest::run(Run::new(cli, "selftest", a)?, a)?,
    };
    for path in written {
        println!("wrote {path}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| dispatch(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
