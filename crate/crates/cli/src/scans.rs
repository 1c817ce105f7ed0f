//! Chain gaps, mixing times, circuit convergence and design distances.

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use pseudoq::chains::{accelerated_chain, mixing_time, spectral_gap, stationary, zero_chain, zero_stationary, ChainMatrix};
use pseudoq::clifford::CliffordTableau;
use pseudoq::haar_moments::{clifford_group_ensemble, design_distance, DesignMetric, EnsembleSpec, UnitaryDescriptor};
use pseudoq::random_circuit::{convergence_scan, full_diagonal_chain, CircuitModel, GateSource, ScanMode};
use pseudoq::seed::stream;

use crate::output::{schema, Table};
use crate::{row, CliError, Run};

pub const CHAIN_HELP: &str = "CSV columns: n, chain, gap, n_times_gap, tau_eps, eps\n  \
gap         spectral gap 1 - |λ₂| of the chain\n  \
n_times_gap n · gap\n  \
tau_eps     smallest t with worst-case total variation ≤ eps (empty unless computed)\n  \
eps         total-variation target for tau_eps";

pub const CIRCUIT_HELP: &str = "CSV columns: n, k, gate_source, length, metric, value, stderr, seed\n  \
value   design distance of the length-t circuit moment from the Haar moment\n  \
stderr  Monte-Carlo standard error (0 for exact evolution)\n  \
seed    master seed of the run";

pub const DESIGN_HELP: &str = "CSV columns: n, k, length_or_size, metric, value, stderr\n  \
length_or_size  ensemble size, or circuit length for --ensemble circuit\n  \
value           design distance in the given metric, stderr its standard error";

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ChainKind {
    /// Weight chain of the zero sector, states 1..=n.
    Zero,
    /// Zero chain conditioned on moving.
    Accelerated,
    /// Diagonal chain over all non-identity Paulis (n ≤ 6).
    Full,
}

#[derive(Args, Debug, Serialize)]
pub struct ChainScanArgs {
    #[arg(long, default_value_t = 8)]
    pub n_min: usize,
    #[arg(long, default_value_t = 512)]
    pub n_max: usize,
    /// Linear step; sizes double from n-min when omitted.
    #[arg(long)]
    pub step: Option<usize>,
    #[arg(long, value_enum, default_value = "zero")]
    pub chain: ChainKind,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Also compute mixing times (always on for mixing-scan).
    #[arg(long)]
    pub tau: bool,
}

fn grid(a: &ChainScanArgs) -> Result<Vec<usize>, CliError> {
    if a.n_min < 2 || a.n_min > a.n_max {
        return Err(pseudoq::Error::Precondition(format!("need 2 ≤ n-min ≤ n-max, got {} and {}", a.n_min, a.n_max)).into());
    }
    Ok(match a.step {
        Some(0) => return Err(pseudoq::Error::Precondition("step must be positive".into()).into()),
        Some(s) => (a.n_min..=a.n_max).step_by(s).collect(),
        None => std::iter::successors(Some(a.n_min), |&n| Some(2 * n)).take_while(|&n| n <= a.n_max).collect(),
    })
}

fn build_chain(kind: ChainKind, n: usize) -> pseudoq::Result<(ChainMatrix, Vec<f64>)> {
    match kind {
        ChainKind::Zero => Ok((zero_chain(n)?, zero_stationary(n)?)),
        ChainKind::Accelerated => {
            let chain = accelerated_chain(n)?;
            let pi = stationary(&chain)?;
            Ok((chain, pi))
        }
        ChainKind::Full => {
            let chain = full_diagonal_chain(&CircuitModel::haar(n)?)?;
            let pi = stationary(&chain)?;
            Ok((chain, pi))
        }
    }
}

pub fn chain_scan(mut run: Run, a: &ChainScanArgs, mixing: bool) -> Result<Vec<String>, CliError> {
    let with_tau = mixing || a.tau;
    let results: Vec<(usize, f64, Option<u64>)> = grid(a)?
        .par_iter()
        .map(|&n| {
            let (chain, pi) = build_chain(a.chain, n)?;
            let gap = spectral_gap(&chain)?;
            let tau = if with_tau { Some(mixing_time(&chain, &pi, a.eps)?) } else { None };
            Ok((n, gap, tau))
        })
        .collect::<pseudoq::Result<_>>()?;
    let kind = serde_json::to_value(a.chain)?.as_str().unwrap_or_default().to_string();
    let mut table = Table::new(schema::CHAIN);
    for (n, gap, tau) in results {
        table.push(row![n, kind.as_str(), gap, n as f64 * gap, tau, a.eps]);
    }
    run.sink.table(&table)?;
    run.sink.finish()
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GateChoice {
    /// Haar-random two-qubit gates.
    HaarU4,
    /// Uniform two-qubit Cliffords.
    Clifford2,
}

impl GateChoice {
    fn source(self) -> GateSource {
        match self {
            GateChoice::HaarU4 => GateSource::HaarU4,
            GateChoice::Clifford2 => GateSource::Clifford2,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeChoice {
    /// Exact moment evolution.
    Exact,
    /// Monte-Carlo over sampled circuits.
    Sampled,
}

#[derive(Args, Debug, Serialize)]
pub struct CircuitArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "haar-u4")]
    pub gate_source: GateChoice,
    #[arg(long, default_value_t = 200)]
    pub max_length: usize,
    /// Spacing between scanned lengths.
    #[arg(long, default_value_t = 5)]
    pub every: usize,
    /// TRACE, OPNORM or MONOMIAL_MAX.
    #[arg(long, default_value = "OPNORM")]
    pub metric: DesignMetric,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeChoice,
    /// Circuits per length in sampled mode.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

pub fn circuit(mut run: Run, a: &CircuitArgs) -> Result<Vec<String>, CliError> {
    if a.every == 0 {
        return Err(pseudoq::Error::Precondition("--every must be positive".into()).into());
    }
    let model = CircuitModel::new(a.n, a.gate_source.source())?;
    let lengths: Vec<usize> = (0..=a.max_length).step_by(a.every).collect();
    let mode = match a.mode {
        ModeChoice::Exact => ScanMode::Exact,
        ModeChoice::Sampled => ScanMode::Sampled { samples: a.samples, seed: run.seed },
    };
    let rows = convergence_scan(&model, a.k, &lengths, a.metric, mode)?;
    let source = model.gate_source.to_string();
    let mut table = Table::new(schema::CIRCUIT);
    for r in rows {
        table.push(row![a.n, a.k, source.as_str(), r.length, r.metric.to_string(), r.value, r.stderr, run.seed]);
    }
    run.sink.table(&table)?;
    run.sink.finish()
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleChoice {
    /// The whole Clifford group, exact (n ≤ 2).
    CliffordGroup,
    /// Uniformly sampled Cliffords, one row per size.
    Clifford,
    /// Haar-random unitaries, one row per size.
    Haar,
    /// Random circuits, one row per length.
    Circuit,
}

#[derive(Args, Debug, Serialize)]
pub struct DesignArgs {
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "clifford-group")]
    pub ensemble: EnsembleChoice,
    /// Ensemble sizes for sampled Clifford and Haar ensembles.
    #[arg(long, value_delimiter = ',', default_value = "100,1000")]
    pub sizes: Vec<usize>,
    /// Circuit lengths for the circuit ensemble.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20,40")]
    pub lengths: Vec<usize>,
    /// Circuits per length for the circuit ensemble.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "haar-u4")]
    pub gate_source: GateChoice,
    #[arg(long, value_delimiter = ',', default_value = "OPNORM")]
    pub metrics: Vec<DesignMetric>,
}

pub fn design(mut run: Run, a: &DesignArgs) -> Result<Vec<String>, CliError> {
    let d = 1usize.checked_shl(a.n as u32).filter(|_| a.n < 16).ok_or_else(|| {
        pseudoq::Error::Precondition(format!("{} qubits is too many for a dense moment", a.n))
    })?;
    let ensembles: Vec<(usize, EnsembleSpec)> = match a.ensemble {
        EnsembleChoice::CliffordGroup => {
            let ens = clifford_group_ensemble(a.n)?;
            vec![(ens.items().len(), ens)]
        }
        EnsembleChoice::Clifford => a
            .sizes
            .iter()
            .map(|&size| {
                let mut rng = stream(run.seed, &format!("design-check/clifford/{size}"));
                let items = (0..size)
                    .map(|_| Ok(UnitaryDescriptor::Tableau { tableau: CliffordTableau::sample_uniform(a.n, &mut rng)? }))
                    .collect::<pseudoq::Result<Vec<_>>>()?;
                Ok((size, EnsembleSpec::uniform(items)?))
            })
            .collect::<pseudoq::Result<_>>()?,
        EnsembleChoice::Haar => a
            .sizes
            .iter()
            .map(|&size| (size, EnsembleSpec::single(UnitaryDescriptor::Haar { d, samples: size, seed: run.seed })))
            .collect(),
        EnsembleChoice::Circuit => {
            let model = CircuitModel::new(a.n, a.gate_source.source())?;
            a.lengths
                .iter()
                .map(|&length| {
                    let desc = UnitaryDescriptor::Circuit { model: model.clone(), length, samples: a.samples, seed: run.seed };
                    (length, EnsembleSpec::single(desc))
                })
                .collect()
        }
    };
    let mut table = Table::new(schema::DESIGN);
    for (label, ens) in &ensembles {
        for &metric in &a.metrics {
            let est = design_distance(ens, a.k, metric)?;
            table.push(row![a.n, a.k, *label, metric.to_string(), est.value, est.stderr]);
        }
    }
    run.sink.table(&table)?;
    run.sink.finish()
}
