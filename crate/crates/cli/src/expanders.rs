//! Eigenvalues of the Fourier-mixed expander and of permutation walks.

use clap::{Args, ValueEnum};
use serde::Serialize;

use pseudoq::seed::stream;
use pseudoq::tpe::{lambda_a, lambda_a_bound, lambda_a_dense, quantum_tpe_lambda, random_permutation_set};

use crate::output::{schema, Cell, Table};
use crate::{row, CliError, Run};

pub const TPE_HELP: &str = "CSV columns: N, k, method, lambda_A, lambda_C, p, lambda_Q, bound_rhs, bound_satisfied\n  \
method           restricted | dense (tpe-lambda) or quantum (tpe-quantum)\n  \
lambda_A         second eigenvalue of the Fourier-mixed operator\n  \
lambda_C         second eigenvalue of the classical permutation walk\n  \
p, lambda_Q      mixing weight and second eigenvalue of the quantum expander\n  \
bound_rhs        2(2k)^{4k}/√N for tpe-lambda, the gap-amplification bound for tpe-quantum\n  \
bound_satisfied  whether the computed eigenvalue lies at or below bound_rhs\n\
Columns that do not apply to a row are left empty.";

#[derive(Clone, Copy, Debug, Serialize, ValueEnum, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Partition-basis computation, any N.
    Restricted,
    /// Dense N^{2k}-dimensional computation, small N only.
    Dense,
    /// Both, for cross-checking.
    Both,
}

#[derive(Args, Debug, Serialize)]
pub struct LambdaArgs {
    #[arg(long = "n-dim", value_delimiter = ',', default_value = "4,8,16")]
    pub n_dim: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "restricted")]
    pub method: Method,
}

pub fn lambda(mut run: Run, a: &LambdaArgs) -> Result<Vec<String>, CliError> {
    let mut table = Table::new(schema::TPE);
    for &n_dim in &a.n_dim {
        let rhs = lambda_a_bound(n_dim, a.k);
        let mut reports = Vec::new();
        if a.method != Method::Dense {
            reports.push(("restricted", lambda_a(n_dim, a.k)?.lambda));
        }
        if a.method != Method::Restricted {
            reports.push(("dense", lambda_a_dense(n_dim as usize, a.k)?.lambda));
        }
        for (method, value) in reports {
            table.push(row![n_dim, a.k, method, value, Cell::Empty, Cell::Empty, Cell::Empty, rhs, value <= rhs]);
        }
    }
    run.sink.table(&table)?;
    run.sink.finish()
}

#[derive(Args, Debug, Serialize)]
pub struct QuantumArgs {
    #[arg(long = "n-dim", default_value_t = 16)]
    pub n_dim: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Number of random permutations in the classical generating set.
    #[arg(long, default_value_t = 4)]
    pub perms: usize,
    /// Close the set under inverses.
    #[arg(long)]
    pub symmetric: bool,
    /// Mixing weights to evaluate; the optimal weight when omitted.
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
}

pub fn quantum(mut run: Run, a: &QuantumArgs) -> Result<Vec<String>, CliError> {
    if a.perms == 0 {
        return Err(pseudoq::Error::Precondition("need at least one permutation".into()).into());
    }
    let mut rng = stream(run.seed, "tpe-quantum/perms");
    let set = random_permutation_set(a.n_dim, a.perms, a.symmetric, &mut rng);
    let weights = if a.p.is_empty() {
        vec![quantum_tpe_lambda(&set, 0.5, a.k)?.optimal_p]
    } else {
        a.p.clone()
    };
    let mut table = Table::new(schema::TPE);
    for p in weights {
        let r = quantum_tpe_lambda(&set, p, a.k)?;
        table.push(row![r.n_dim, r.k, "quantum", r.lambda_a, r.lambda_c, r.p, r.lambda_q, r.bound_rhs, r.bound_satisfied]);
    }
    run.sink.table(&table)?;
    run.sink.finish()
}
