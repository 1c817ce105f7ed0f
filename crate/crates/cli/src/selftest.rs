//! Fast invariant suite covering every library module.

use clap::Args;
use serde::Serialize;

use pseudoq::chains::{lumpability_check, stationary_residual, zero_chain, zero_stationary};
use pseudoq::clifford::CliffordTableau;
use pseudoq::concentration::{purity_experiment, StateEnsemble};
use pseudoq::haar_moments::{clifford_group_ensemble, design_distance, ghat_gram_cross_check, DesignMetric};
use pseudoq::learning::{learn_clifford, learn_pauli, QueryCount, UnitaryOracle};
use pseudoq::pauli::PauliString;
use pseudoq::random_circuit::{convergence_scan, CircuitModel, ScanMode};
use pseudoq::seed::stream;
use pseudoq::tpe::{lambda_a, lambda_a_dense, mobius_inverse_check, rising_factorial_identity_check, stirling_identity_check};

use crate::output::{schema, Table};
use crate::{row, CliError, Run};

pub const SELFTEST_HELP: &str = "CSV columns: check, passed, value, tolerance\n  \
value      the measured quantity (an error, distance, failure count or z-score)\n  \
tolerance  the largest value that passes\n\
Exits 1 when any check fails.";

#[derive(Args, Debug, Serialize)]
pub struct SelftestArgs {}

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn checks(seed: u64) -> pseudoq::Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut push = |name, value, tolerance| out.push(Check { name, value, tolerance });

    push("ghat_matches_gram_route", worst([2, 4].map(|d| ghat_gram_cross_check(d).unwrap_or(f64::INFINITY))), 1e-10);
    let ens = clifford_group_ensemble(1)?;
    push("single_qubit_clifford_two_design", design_distance(&ens, 2, DesignMetric::Opnorm)?.value, 1e-9);

    let mut residual = 0.0f64;
    for n in [2, 3, 16, 128, 512] {
        residual = residual.max(stationary_residual(&zero_chain(n)?, &zero_stationary(n)?)?);
    }
    push("zero_chain_stationary", residual, 1e-12);
    push("full_chain_lumps", worst([lumpability_check(2)?, lumpability_check(3)?]), 1e-12);

    let rows = convergence_scan(&CircuitModel::haar(3)?, 2, &[5, 50, 200], DesignMetric::Opnorm, ScanMode::Exact)?;
    let monotone = rows.windows(2).all(|w| w[1].value <= w[0].value);
    push("circuit_converges", if monotone { rows[2].value } else { f64::INFINITY }, 0.01);

    let mobius = (1..=5).map(mobius_inverse_check).collect::<pseudoq::Result<Vec<_>>>()?;
    push("mobius_inverts_zeta", mobius.into_iter().max().unwrap_or(0) as f64, 0.0);
    let identities = (1..=6).all(|m| rising_factorial_identity_check(m, 1).unwrap_or(false))
        && (1..=5).all(|m| stirling_identity_check(m, 16).unwrap_or(false));
    push("partition_identities", if identities { 0.0 } else { 1.0 }, 0.0);
    push("tpe_paths_agree", (lambda_a(16, 1)?.lambda - lambda_a_dense(16, 1)?.lambda).abs(), 1e-9);

    let purity = purity_experiment(4, 4, 2000, StateEnsemble::Clifford, seed)?;
    push("clifford_purity_mean", ((purity.mean - 8.0 / 17.0) / purity.stderr).abs(), 4.0);

    let mut rng = stream(seed, "selftest/pauli");
    let mut pauli_failures = 0;
    for trial in 0..200 {
        let n = 1 + trial % 10;
        let idx: u128 = rand::Rng::random_range(&mut rng, 0..1u128 << (2 * n));
        let p = PauliString::from_index(n, idx)?;
        let oracle = UnitaryOracle::from_tableau(CliffordTableau::from_pauli(&p));
        if learn_pauli(&oracle)? != p || oracle.queries() != (QueryCount { forward: 1, adjoint: 0 }) {
            pauli_failures += 1;
        }
    }
    push("pauli_learning", pauli_failures as f64, 0.0);

    let mut rng = stream(seed, "selftest/clifford");
    let mut clifford_failures = 0;
    for n in 1..=8usize {
        for _ in 0..50 {
            let t = CliffordTableau::sample_uniform(n, &mut rng)?;
            let oracle = UnitaryOracle::from_tableau(t.clone());
            let expected = QueryCount { forward: 2 * n as u64 + 1, adjoint: 2 * n as u64 };
            if learn_clifford(&oracle)? != t || oracle.queries() != expected {
                clifford_failures += 1;
            }
        }
    }
    push("clifford_learning", clifford_failures as f64, 0.0);
    Ok(out)
}

pub fn run(mut run: Run, _: &SelftestArgs) -> Result<Vec<String>, CliError> {
    let checks = checks(run.seed)?;
    let mut table = Table::new(schema::SELFTEST);
    let mut failed = Vec::new();
    for c in &checks {
        let passed = c.value <= c.tolerance;
        println!("{} {:<34} {:.3e} (tolerance {:.1e})", if passed { "PASS" } else { "FAIL" }, c.name, c.value, c.tolerance);
        if !passed {
            failed.push(c.name);
        }
        table.push(row![c.name, passed, c.value, c.tolerance]);
    }
    run.sink.table(&table)?;
    let written = run.sink.finish()?;
    if failed.is_empty() {
        Ok(written)
    } else {
        Err(CliError::Failed(format!("selftest failed: {}", failed.join(", "))))
    }
}
