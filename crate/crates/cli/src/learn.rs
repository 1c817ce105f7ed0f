//! Learning and testing trials with exact query accounting.

use clap::{Args, ValueEnum};
use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use pseudoq::clifford::CliffordTableau;
use pseudoq::learning::{
    clifford_group_dense, distance, far_instance, learn_ck, learn_clifford, learn_closest, test_clifford, CkDescription,
    DistanceKind, LearningConfig, UnitaryOracle, Verdict, DENSE_LEARNING_MAX_QUBITS,
};
use pseudoq::linalg::{c, kron, CMatrix};
use pseudoq::pauli::PauliString;
use pseudoq::seed::stream;

use crate::output::{schema, Format, Table};
use crate::{row, CliError, Run};

pub const LEARN_HELP: &str = "Writes <subcommand>.json with one result per trial:\n  \
{recovered, queries_forward, queries_adjoint, success, distances}\n\
and, with --format csv, a per-trial table\n  \
CSV columns: trial, success, queries_forward, queries_adjoint, distance_d, distance_dplus\n  \
distance_d, distance_dplus  distances of the recovered unitary from the instance, or from the\n  \
                            unperturbed element in closest mode (empty above 6 qubits)";

pub const TESTING_HELP: &str = "Writes test_clifford.json with one report per trial and, with --format csv,\n  \
CSV columns: trial, instance, verdict, correct, distance_d, shots_per_generator, queries_forward, queries_adjoint\n  \
distance_d  distance of the instance from the nearest Clifford (0 for close instances)";

#[derive(Serialize)]
struct Distances {
    d: f64,
    d_plus: f64,
}

#[derive(Serialize)]
struct TrialResult<T: Serialize> {
    trial: usize,
    recovered: T,
    queries_forward: u64,
    queries_adjoint: u64,
    success: bool,
    distances: Option<Distances>,
}

#[derive(Serialize)]
struct Summary<T: Serialize> {
    n: usize,
    trials: usize,
    successes: usize,
    results: Vec<TrialResult<T>>,
}

fn distances(a: &CMatrix, b: &CMatrix) -> pseudoq::Result<Distances> {
    Ok(Distances {
        d: distance(a, b, DistanceKind::D)?.value,
        d_plus: distance(a, b, DistanceKind::DPlus)?.value,
    })
}

fn finish_learning<T: Serialize>(mut run: Run, n: usize, results: Vec<TrialResult<T>>) -> Result<Vec<String>, CliError> {
    let successes = results.iter().filter(|r| r.success).count();
    let mut counts: Vec<(u64, u64)> = results.iter().map(|r| (r.queries_forward, r.queries_adjoint)).collect();
    counts.sort_unstable();
    counts.dedup();
    let shown: Vec<String> = counts.iter().map(|(f, a)| format!("({f},{a})")).collect();
    println!("success={successes}/{} queries={}", results.len(), shown.join(" "));
    if run.sink.format() == Format::Csv {
        let mut table = Table::new(schema::TRIALS);
        for r in &results {
            let (d, dp) = r.distances.as_ref().map_or((None, None), |x| (Some(x.d), Some(x.d_plus)));
            table.push(row![r.trial, r.success, r.queries_forward, r.queries_adjoint, d, dp]);
        }
        run.sink.table(&table)?;
    }
    let trials = results.len();
    run.sink.result(&Summary { n, trials, successes, results })?;
    run.sink.finish()
}

#[derive(Args, Debug, Serialize)]
pub struct CliffordArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}

pub fn clifford(run: Run, a: &CliffordArgs) -> Result<Vec<String>, CliError> {
    let seed = run.seed;
    let results = (0..a.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(seed, &format!("learn-clifford/{trial}"));
            let truth = CliffordTableau::sample_uniform(a.n, &mut rng)?;
            let oracle = UnitaryOracle::from_tableau(truth.clone());
            let learned = learn_clifford(&oracle)?;
            let q = oracle.queries();
            let dists = if a.n <= DENSE_LEARNING_MAX_QUBITS {
                Some(distances(&learned.to_unitary()?.into_matrix(), &truth.to_unitary()?.into_matrix())?)
            } else {
                None
            };
            Ok(TrialResult {
                trial,
                success: learned == truth,
                recovered: learned,
                queries_forward: q.forward,
                queries_adjoint: q.adjoint,
                distances: dists,
            })
        })
        .collect::<pseudoq::Result<Vec<_>>>()?;
    finish_learning(run, a.n, results)
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CkMode {
    /// Noise-free instances, one query per leaf.
    Exact,
    /// Majority-vote leaves, success when the unperturbed element is returned.
    Closest,
}

#[derive(Args, Debug, Serialize)]
pub struct CkArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Hierarchy level: 1 Pauli, 2 Clifford, 3 Clifford times a T gate (n ≤ 2).
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: CkMode,
    /// Largest random diagonal phase applied to each instance.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Distance promise ε and failure probability δ for closest mode.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Multiplier on the per-leaf repetition count in closest mode.
    #[arg(long, default_value_t = 1.0)]
    pub repetition_scale: f64,
}

fn hierarchy_instance<R: Rng>(n: usize, k: usize, rng: &mut R) -> pseudoq::Result<CMatrix> {
    let clifford = CliffordTableau::sample_uniform(n, rng)?;
    match k {
        1 => {
            let idx: u128 = rng.random_range(0..1u128 << (2 * n));
            Ok(CliffordTableau::from_pauli(&PauliString::from_index(n, idx)?).to_unitary()?.into_matrix())
        }
        2 => Ok(clifford.to_unitary()?.into_matrix()),
        _ => {
            let t = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(0.0, std::f64::consts::FRAC_PI_4).exp()]));
            let t_first = kron(&CMatrix::identity(1 << (n - 1), 1 << (n - 1)), &t);
            Ok(clifford.to_unitary()?.into_matrix() * t_first)
        }
    }
}

pub fn ck(run: Run, a: &CkArgs) -> Result<Vec<String>, CliError> {
    if a.n == 0 || a.n > DENSE_LEARNING_MAX_QUBITS {
        return Err(pseudoq::Error::Precondition(format!("learn-ck needs 1 ≤ n ≤ {DENSE_LEARNING_MAX_QUBITS}")).into());
    }
    if !(a.noise >= 0.0) {
        return Err(pseudoq::Error::Precondition(format!("noise must be non-negative, got {}", a.noise)).into());
    }
    let config = LearningConfig { repetition_scale: a.repetition_scale, ..LearningConfig::new(a.eps, a.delta) };
    let seed = run.seed;
    let results = (0..a.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(seed, &format!("learn-ck/{trial}"));
            let base = hierarchy_instance(a.n, a.k, &mut rng)?;
            let phases: Vec<_> = (0..base.nrows()).map(|_| c(0.0, rng.random_range(-1.0..=1.0) * a.noise).exp()).collect();
            let u = &base * CMatrix::from_diagonal(&DVector::from_vec(phases));
            let oracle = UnitaryOracle::from_dense(u.clone())?;
            let learned: CkDescription = match a.mode {
                CkMode::Exact => learn_ck(&oracle, a.k)?,
                CkMode::Closest => learn_closest(&oracle, a.k, &config, &mut rng)?,
            };
            let q = oracle.queries();
            let dense = learned.to_dense()?;
            let target = match a.mode {
                CkMode::Exact => &u,
                CkMode::Closest => &base,
            };
            let dists = distances(&dense, target)?;
            Ok(TrialResult {
                trial,
                success: dists.d < 1e-9,
                recovered: learned,
                queries_forward: q.forward,
                queries_adjoint: q.adjoint,
                distances: Some(dists),
            })
        })
        .collect::<pseudoq::Result<Vec<_>>>()?;
    finish_learning(run, a.n, results)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Instance {
    /// A uniformly random Clifford.
    Close,
    /// A rotated Clifford whose distance from the group lies in (ε, 1/3) (n ≤ 2).
    Far,
}

#[derive(Args, Debug, Serialize)]
pub struct TestArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 0.3)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, value_enum, default_value = "close")]
    pub instance: Instance,
}

#[derive(Serialize)]
struct TestTrial {
    trial: usize,
    verdict: Verdict,
    correct: bool,
    distance_d: f64,
    queries_forward: u64,
    queries_adjoint: u64,
    report: pseudoq::learning::TestReport,
}

#[derive(Serialize)]
struct TestSummary {
    n: usize,
    instance: Instance,
    trials: usize,
    correct: usize,
    results: Vec<TestTrial>,
}

const FAR_ATTEMPTS: usize = 64;

pub fn testing(mut run: Run, a: &TestArgs) -> Result<Vec<String>, CliError> {
    if a.n == 0 || a.n > DENSE_LEARNING_MAX_QUBITS {
        return Err(pseudoq::Error::Precondition(format!("test-clifford needs 1 ≤ n ≤ {DENSE_LEARNING_MAX_QUBITS}")).into());
    }
    let group = match a.instance {
        Instance::Far => clifford_group_dense(a.n)?,
        Instance::Close => Vec::new(),
    };
    let window = (a.eps, 1.0 / 3.0);
    let seed = run.seed;
    let results = (0..a.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(seed, &format!("test-clifford/{trial}"));
            let (u, dist) = match a.instance {
                Instance::Close => (CliffordTableau::sample_uniform(a.n, &mut rng)?.to_unitary()?.into_matrix(), 0.0),
                Instance::Far => {
                    let mut found = None;
                    for _ in 0..FAR_ATTEMPTS {
                        let start = CliffordTableau::sample_uniform(a.n, &mut rng)?;
                        let inst = far_instance(&start, &group, 0.5 * (window.0 + window.1))?;
                        if inst.distance > window.0 && inst.distance < window.1 {
                            found = Some((inst.unitary, inst.distance));
                            break;
                        }
                    }
                    found.ok_or_else(|| pseudoq::Error::Promise(format!("no instance with distance in ({}, 1/3)", a.eps)))?
                }
            };
            let oracle = UnitaryOracle::from_dense(u)?;
            let report = test_clifford(&oracle, a.eps, a.delta, &mut rng)?;
            let q = oracle.queries();
            let expected = if a.instance == Instance::Close { Verdict::Close } else { Verdict::Far };
            Ok(TestTrial {
                trial,
                verdict: report.verdict,
                correct: report.verdict == expected,
                distance_d: dist,
                queries_forward: q.forward,
                queries_adjoint: q.adjoint,
                report,
            })
        })
        .collect::<pseudoq::Result<Vec<_>>>()?;
    let correct = results.iter().filter(|r| r.correct).count();
    println!("correct={correct}/{}", results.len());
    if run.sink.format() == Format::Csv {
        let label = serde_json::to_value(a.instance)?.as_str().unwrap_or_default().to_string();
        let mut table = Table::new(schema::TESTING);
        for r in &results {
            table.push(row![
                r.trial,
                label.as_str(),
                r.verdict.to_string(),
                r.correct,
                r.distance_d,
                r.report.shots_per_generator,
                r.queries_forward,
                r.queries_adjoint
            ]);
        }
        run.sink.table(&table)?;
    }
    let trials = results.len();
    run.sink.result(&TestSummary { n: a.n, instance: a.instance, trials, correct, results })?;
    run.sink.finish()
}
