//! Concentration bounds, alone or paired with Monte-Carlo frequencies.

use clap::{Args, ValueEnum};
use serde::Serialize;

use pseudoq::concentration::{
    design_tail_bound, entropy_samples, entropy_tail_bound, expected_purity, falsify, geometric_bound,
    haar_thermalization_bound, overlap_samples, overlap_tail_bound, purity_markov_bound, purity_samples,
    thermal_experiment, thermalization_bound, SampleMean, StateEnsemble, SubsystemSplit, TailBoundParams,
};

use crate::output::{schema, Cell, Table};
use crate::{row, CliError, Run};

pub const BOUND_HELP: &str = "CSV columns: experiment, params, bound, empirical_freq, samples, seed\n  \
experiment      bound family, e.g. overlap, entropy, purity_tail, thermal_haar, thermal_design\n  \
params          the family's parameters as key=value pairs joined by ';'\n  \
bound           evaluated upper bound on the event probability\n  \
empirical_freq  observed frequency of the event (empty when no samples were drawn)\n  \
samples         Monte-Carlo sample count (0 for bound-only rows)\n  \
seed            master seed of the run";

fn params(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

fn frequency(hits: usize, samples: usize) -> f64 {
    hits as f64 / samples as f64
}

fn report(label: &str, f: &pseudoq::concentration::Falsification) {
    if !f.consistent {
        eprintln!(
            "warning: {label}: bound {:.6e} below the 99% lower limit {:.6e} of the observed frequency",
            f.bound, f.wilson_lower
        );
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// P(|⟨0|ψ⟩|² ≥ δ) for states from a k-design in dimension d.
    Overlap,
    /// P(S(ψ_S) ≤ -log₂ μ - α) for n-qubit states split as d_S × 2ⁿ/d_S.
    Entropy,
    /// Geometric-measure bound for n-qubit states (no sampling).
    Geometric,
    /// Generic polynomial tail bound under a design (no sampling).
    DesignTail,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Hilbert-space dimension (overlap, design-tail).
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    /// Qubit count (entropy, geometric).
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    /// Subsystem dimension (entropy).
    #[arg(long = "d-s", default_value_t = 2)]
    pub d_s: usize,
    /// Design order; defaults to the smallest order each m needs.
    #[arg(long)]
    pub k: Option<usize>,
    /// Moment orders.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub m: Vec<usize>,
    /// Design error ε.
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.5")]
    pub deltas: Vec<f64>,
    /// Entropy deficits α (entropy).
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.5")]
    pub alphas: Vec<f64>,
    /// Tail prefactor C, rate a, mean μ, Lipschitz-type constant α_f and degree (design-tail).
    #[arg(long, default_value_t = 2.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha_f: f64,
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    /// Haar samples for the paired experiment; 0 evaluates bounds only.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

pub fn eval(mut run: Run, a: &BoundArgs) -> Result<Vec<String>, CliError> {
    let mut table = Table::new(schema::BOUND);
    let seed = run.seed;
    match a.family {
        Family::Overlap => {
            let overlaps = if a.samples > 0 { overlap_samples(a.d, a.samples, seed)? } else { Vec::new() };
            for &m in &a.m {
                let k = a.k.unwrap_or(m);
                for &delta in &a.deltas {
                    let b = overlap_tail_bound(a.d, k, m, a.eps, delta)?;
                    let p = params(&[("d", a.d.to_string()), ("k", k.to_string()), ("m", m.to_string()), ("eps", a.eps.to_string()), ("delta", delta.to_string())]);
                    let freq = (!overlaps.is_empty()).then(|| {
                        let hits = overlaps.iter().filter(|&&x| x >= delta).count();
                        report(&p, &falsify(b.factorial_form, hits, overlaps.len()));
                        frequency(hits, overlaps.len())
                    });
                    table.push(row!["overlap", p.clone(), b.factorial_form, freq, a.samples, seed]);
                    table.push(row!["overlap_power", p, b.power_form, freq, a.samples, seed]);
                }
            }
        }
        Family::Entropy => {
            let entropies = if a.samples > 0 { entropy_samples(a.n, a.d_s, a.samples, StateEnsemble::Haar, seed)? } else { Vec::new() };
            for &m in &a.m {
                let k = a.k.unwrap_or(4 * m);
                for &alpha in &a.alphas {
                    let b = entropy_tail_bound(a.n, a.d_s, alpha, k, a.eps, m)?;
                    let p = params(&[("n", a.n.to_string()), ("d_s", a.d_s.to_string()), ("k", k.to_string()), ("m", m.to_string()), ("eps", a.eps.to_string()), ("alpha", alpha.to_string())]);
                    let freq = (!entropies.is_empty()).then(|| {
                        let hits = entropies.iter().filter(|&&s| s <= b.entropy_threshold).count();
                        report(&p, &falsify(b.value, hits, entropies.len()));
                        frequency(hits, entropies.len())
                    });
                    table.push(row!["entropy", p, b.value, freq, a.samples, seed]);
                }
            }
        }
        Family::Geometric => {
            let k = a.k.unwrap_or(a.n);
            for &delta in &a.deltas {
                let b = geometric_bound(a.n, k, a.eps, delta)?;
                let p = params(&[("n", a.n.to_string()), ("k", k.to_string()), ("eps", a.eps.to_string()), ("delta", delta.to_string()), ("log2_bound", b.log2_value.to_string())]);
                table.push(row!["geometric", p, b.value, Cell::Empty, 0usize, seed]);
            }
        }
        Family::DesignTail => {
            for &m in &a.m {
                let k = a.k.unwrap_or(2 * m * a.degree);
                for &delta in &a.deltas {
                    let tp = TailBoundParams { c: a.c, a: a.a, mu: a.mu, alpha_f: a.alpha_f, degree: a.degree, d: a.d as f64, k, eps: a.eps, delta, m };
                    let b = design_tail_bound(&tp)?;
                    let p = params(&[("d", a.d.to_string()), ("k", k.to_string()), ("m", m.to_string()), ("eps", a.eps.to_string()), ("delta", delta.to_string())]);
                    table.push(row!["design_tail", p, b.value, Cell::Empty, 0usize, seed]);
                }
            }
        }
    }
    run.sink.table(&table)?;
    run.sink.finish()
}

#[derive(Args, Debug, Serialize)]
pub struct PurityArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long = "d-s", default_value_t = 4)]
    pub d_s: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// clifford or haar.
    #[arg(long, default_value = "clifford")]
    pub ensemble: StateEnsemble,
    /// Multiples γ of the mean purity at which the tail is measured.
    #[arg(long, value_delimiter = ',', default_value = "1.1,1.25,1.5,2")]
    pub gammas: Vec<f64>,
}

pub fn purity(mut run: Run, a: &PurityArgs) -> Result<Vec<String>, CliError> {
    let split = SubsystemSplit::qubits(a.n, a.d_s)?;
    let mu = expected_purity(split);
    let samples = purity_samples(a.n, a.d_s, a.samples, a.ensemble, run.seed)?;
    let mean = SampleMean::of(&samples);
    println!(
        "mean purity {:.6} ± {:.6} over {} samples, expected {mu:.6}",
        mean.mean, mean.stderr, mean.samples
    );
    let mut table = Table::new(schema::BOUND);
    for &gamma in &a.gammas {
        let bound = purity_markov_bound(gamma)?;
        let hits = samples.iter().filter(|&&p| p >= gamma * mu).count();
        let p = params(&[("n", a.n.to_string()), ("d_s", a.d_s.to_string()), ("ensemble", a.ensemble.to_string()), ("gamma", gamma.to_string())]);
        report(&p, &falsify(bound, hits, samples.len()));
        table.push(row!["purity_tail", p, bound, frequency(hits, samples.len()), samples.len(), run.seed]);
    }
    run.sink.table(&table)?;
    run.sink.finish()
}

#[derive(Args, Debug, Serialize)]
pub struct ThermalArgs {
    #[arg(long = "d-s", default_value_t = 2)]
    pub d_s: usize,
    #[arg(long = "d-e", default_value_t = 256)]
    pub d_e: usize,
    /// Dimension of the restricted subspace.
    #[arg(long = "d-r", default_value_t = 256)]
    pub d_r: usize,
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
    /// Offsets ε for the Haar bound.
    #[arg(long, value_delimiter = ',', default_value = "0.02,0.05,0.1")]
    pub eps: Vec<f64>,
    /// Trace-distance levels δ for the design bound.
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2")]
    pub deltas: Vec<f64>,
    /// Design orders for the design bound.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
    pub ks: Vec<usize>,
}

pub fn thermal(mut run: Run, a: &ThermalArgs) -> Result<Vec<String>, CliError> {
    let exp = thermal_experiment(a.d_s, a.d_e, a.d_r, a.samples, run.seed)?;
    let total = exp.distances.len();
    let dims = [("d_s", a.d_s.to_string()), ("d_e", a.d_e.to_string()), ("d_r", a.d_r.to_string())];
    let mut table = Table::new(schema::BOUND);
    for &eps in &a.eps {
        let b = haar_thermalization_bound(a.d_s, a.d_r, exp.d_e_eff, eps)?;
        let hits = exp.distances.iter().filter(|&&x| x >= b.threshold).count();
        let mut kv = dims.to_vec();
        kv.extend([("eps", eps.to_string()), ("threshold", b.threshold.to_string())]);
        let p = params(&kv);
        report(&p, &falsify(b.probability, hits, total));
        table.push(row!["thermal_haar", p, b.probability, frequency(hits, total), total, run.seed]);
    }
    for &k in &a.ks {
        for &delta in &a.deltas {
            let b = thermalization_bound(a.d_s, a.d_r, k, 0.0, delta)?;
            let hits = exp.distances.iter().filter(|&&x| x >= delta).count();
            let mut kv = dims.to_vec();
            kv.extend([("k", k.to_string()), ("delta", delta.to_string()), ("k_condition", b.k_condition.to_string())]);
            let p = params(&kv);
            report(&p, &falsify(b.full, hits, total));
            table.push(row!["thermal_design", p, b.full, frequency(hits, total), total, run.seed]);
        }
    }
    run.sink.table(&table)?;
    run.sink.finish()
}
