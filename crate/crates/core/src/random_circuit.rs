//! Random two-qubit-gate circuits and the exact evolution of their second moments.
//!
//! Second-moment coefficients `γ(p1, p2)` are stored per qubit as a site label
//! `4 r + s` (`r`, `s` the local Pauli indices of `p1`, `p2`), packed in base 16 with
//! qubit `q` at digit `q`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul};

use nalgebra::DMatrix;
use num_traits::{FromPrimitive, Zero};
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chains::ChainMatrix;
use crate::clifford::{enumerate_group, CliffordTableau};
use crate::error::{Error, Result};
use crate::haar_moments::{ghat_closed_form, DesignMetric, DistanceEstimate, EnsembleSpec, UnitaryDescriptor};
use crate::linalg::{c, haar_unitary, CMatrix, DenseOperator};
use crate::pauli::{all_paulis, PauliString};

pub const DENSE_MAX_QUBITS: usize = 8;
/// Largest `n` with an explicit `16^n`-label step matrix.
pub const EXPLICIT_MAX_QUBITS: usize = 4;
/// Largest `n` for the exact diagonal-sector eigensolve.
pub const EXACT_MAX_QUBITS: usize = 5;
pub const LABEL_MAX_QUBITS: usize = 32;

const LOCAL: usize = 256;

/// A `4 × 4` gate serialized as nested `[re, im]` rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Gate(#[serde(with = "crate::linalg::dense_json")] pub CMatrix);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateSource {
    HaarU4,
    Clifford2,
    Named { name: String, gates: Vec<Gate> },
}

impl fmt::Display for GateSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateSource::HaarU4 => f.write_str("haar_u4"),
            GateSource::Clifford2 => f.write_str("clifford2"),
            GateSource::Named { name, .. } => f.write_str(name),
        }
    }
}

/// `n` qubits, gates drawn from `gate_source` on a uniformly random ordered pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitModel {
    pub n: usize,
    pub gate_source: GateSource,
}

impl CircuitModel {
    pub fn new(n: usize, gate_source: GateSource) -> Result<Self> {
        if n < 2 {
            return Err(Error::Precondition(format!("need at least 2 qubits, got {n}")));
        }
        if n > LABEL_MAX_QUBITS {
            return Err(Error::guard(format!("circuit model on {n} qubits"), LABEL_MAX_QUBITS));
        }
        if let GateSource::Named { gates, .. } = &gate_source {
            if gates.is_empty() {
                return Err(Error::Precondition("named gate set is empty".into()));
            }
            for g in gates {
                if g.0.nrows() != 4 || g.0.ncols() != 4 || crate::linalg::unitarity_error(&g.0) > 1e-10 {
                    return Err(Error::Precondition("named gates must be 4x4 unitaries".into()));
                }
            }
        }
        Ok(CircuitModel { n, gate_source })
    }

    pub fn haar(n: usize) -> Result<Self> {
        CircuitModel::new(n, GateSource::HaarU4)
    }

    pub fn sample_gate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CMatrix> {
        Ok(match &self.gate_source {
            GateSource::HaarU4 => haar_unitary(4, rng),
            GateSource::Clifford2 => CliffordTableau::sample_uniform(2, rng)?.to_matrix()?,
            GateSource::Named { gates, .. } => gates.choose(rng).expect("nonempty").0.clone(),
        })
    }

    /// Checks that the gate distribution has exactly `2!` unit eigenvalues at `k = 2`.
    pub fn check_two_copy_gapped(&self) -> Result<f64> {
        let ens = match &self.gate_source {
            GateSource::HaarU4 | GateSource::Clifford2 => crate::haar_moments::clifford_group_ensemble(2)?,
            GateSource::Named { gates, .. } => EnsembleSpec::uniform(
                gates
                    .iter()
                    .map(|g| UnitaryDescriptor::Dense { matrix: g.0.clone() })
                    .collect(),
            )?,
        };
        let gap = crate::haar_moments::copy_gap(&ens, 2)?;
        if gap.unit_eigen_count != 2 {
            return Err(Error::Unsupported(format!(
                "gate source {} has {} unit eigenvalues at k=2, expected 2",
                self.gate_source, gap.unit_eigen_count
            )));
        }
        Ok(gap.gap)
    }
}

fn random_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// Left-multiplies `u` by `gate` acting on qubits `(i, j)`, local index `bit_i + 2 bit_j`.
pub fn apply_two_qubit(u: &mut CMatrix, gate: &CMatrix, i: usize, j: usize) {
    let dim = u.nrows();
    let (bi, bj) = (1usize << i, 1usize << j);
    for col in 0..u.ncols() {
        for base in 0..dim {
            if base & (bi | bj) != 0 {
                continue;
            }
            let idx = [base, base | bi, base | bj, base | bi | bj];
            let old = idx.map(|r| u[(r, col)]);
            for (a, &r) in idx.iter().enumerate() {
                u[(r, col)] = (0..4).map(|b| gate[(a, b)] * old[b]).sum();
            }
        }
    }
}

pub fn sample_circuit<R: Rng + ?Sized>(model: &CircuitModel, length: usize, rng: &mut R) -> Result<DenseOperator> {
    if model.n > DENSE_MAX_QUBITS {
        return Err(Error::guard(format!("dense circuit on {} qubits", model.n), DENSE_MAX_QUBITS));
    }
    let dim = 1usize << model.n;
    let mut u = CMatrix::identity(dim, dim);
    for _ in 0..length {
        let (i, j) = random_pair(model.n, rng);
        let g = model.sample_gate(rng)?;
        apply_two_qubit(&mut u, &g, i, j);
    }
    DenseOperator::new(u)
}

/// Pauli transfer matrix `R(q, p) = tr(σ_q U σ_p U†) / 4` of a two-qubit gate.
fn transfer_matrix(u: &CMatrix) -> Result<DMatrix<f64>> {
    let paulis: Vec<CMatrix> = all_paulis(2).map(|p| p.to_dense()).collect::<Result<_>>()?;
    let ud = u.adjoint();
    let mut r = DMatrix::zeros(16, 16);
    for p in 0..16 {
        let img = u * &paulis[p] * &ud;
        for q in 0..16 {
            r[(q, p)] = crate::linalg::trace(&(&paulis[q] * &img)).re / 4.0;
        }
    }
    Ok(r)
}

/// Local second-moment map on `16 × 16` pair labels `p1 * 16 + p2`.
#[derive(Clone, Debug)]
pub struct LocalGhat {
    matrix: DMatrix<f64>,
}

impl LocalGhat {
    pub fn for_source(source: &GateSource) -> Result<Self> {
        let matrix = match source {
            GateSource::HaarU4 => ghat_closed_form(4, 2)?.to_dense()?,
            GateSource::Clifford2 => {
                let group = enumerate_group(2)?;
                let mut acc = DMatrix::<f64>::zeros(LOCAL, LOCAL);
                for t in &group {
                    let mut image = [(0usize, 0.0f64); 16];
                    for (p, sigma) in all_paulis(2).enumerate() {
                        let img = t.conjugate(&sigma)?;
                        let sign = if img.phase() == 0 { 1.0 } else { -1.0 };
                        image[p] = (img.unsigned().index() as usize, sign);
                    }
                    for p1 in 0..16 {
                        for p2 in 0..16 {
                            let (q1, s1) = image[p1];
                            let (q2, s2) = image[p2];
                            acc[(q1 * 16 + q2, p1 * 16 + p2)] += s1 * s2;
                        }
                    }
                }
                acc / group.len() as f64
            }
            GateSource::Named { gates, .. } => {
                let mut acc = DMatrix::<f64>::zeros(LOCAL, LOCAL);
                for g in gates {
                    let r = transfer_matrix(&g.0)?;
                    acc += r.kronecker(&r);
                }
                acc / gates.len() as f64
            }
        };
        Ok(LocalGhat { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (&self.matrix - self.matrix.transpose()).amax() < tol
    }

    pub fn equals_haar(&self, tol: f64) -> bool {
        let haar = ghat_closed_form(4, 2).and_then(|g| g.to_dense()).expect("fixed size");
        (&self.matrix - haar).amax() < tol
    }
}

/// Coefficient types supported by the moment evolution.
pub trait Coefficient:
    Clone + Zero + PartialEq + FromPrimitive + Add<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
}

impl<T> Coefficient for T where
    T: Clone + Zero + PartialEq + FromPrimitive + Add<Output = T> + Mul<Output = T> + Div<Output = T>
{
}

fn site(label: u128, q: usize) -> usize {
    ((label >> (4 * q)) & 15) as usize
}

fn with_sites(label: u128, i: usize, si: usize, j: usize, sj: usize) -> u128 {
    let cleared = label & !(15u128 << (4 * i)) & !(15u128 << (4 * j));
    cleared | ((si as u128) << (4 * i)) | ((sj as u128) << (4 * j))
}

/// Sparse second-moment coefficient vector `γ(p1, p2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector<T = f64> {
    n: usize,
    entries: BTreeMap<u128, T>,
}

impl<T: Coefficient> MomentVector<T> {
    pub fn zero(n: usize) -> Self {
        MomentVector {
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn label(p1: &PauliString, p2: &PauliString) -> Result<u128> {
        crate::error::ensure_same(p1.num_qubits(), p2.num_qubits())?;
        let n = p1.num_qubits();
        if n > LABEL_MAX_QUBITS {
            return Err(Error::guard(format!("moment labels on {n} qubits"), LABEL_MAX_QUBITS));
        }
        Ok((0..n).fold(0u128, |acc, q| {
            let s = 4 * p1.op(q).local_index() + p2.op(q).local_index();
            acc | ((s as u128) << (4 * q))
        }))
    }

    /// The pair of Pauli strings behind a label.
    pub fn split_label(n: usize, label: u128) -> (PauliString, PauliString) {
        let ops = |f: fn(usize) -> usize| {
            (0..n)
                .map(|q| crate::pauli::Pauli1::from_local_index(f(site(label, q))))
                .collect::<Vec<_>>()
        };
        (
            PauliString::from_ops(&ops(|s| s / 4)),
            PauliString::from_ops(&ops(|s| s % 4)),
        )
    }

    pub fn set(&mut self, label: u128, value: T) {
        if value.is_zero() {
            self.entries.remove(&label);
        } else {
            self.entries.insert(label, value);
        }
    }

    pub fn get(&self, label: u128) -> T {
        self.entries.get(&label).cloned().unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u128, &T)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_diagonal_label(&self, label: u128) -> bool {
        (0..self.n).all(|q| {
            let s = site(label, q);
            s / 4 == s % 4
        })
    }

    /// `Σ_p γ(p, p)`.
    pub fn diagonal_sum(&self) -> T {
        self.entries
            .iter()
            .filter(|(l, _)| self.is_diagonal_label(**l))
            .fold(T::zero(), |acc, (_, v)| acc + v.clone())
    }

    /// `|0><0|^{⊗n}` on both copies: `γ = 2^{-n}` on labels in `{I, Z}^n × {I, Z}^n`.
    pub fn product_zero_state(n: usize) -> Result<Self> {
        if n > 20 {
            return Err(Error::guard(format!("product state on {n} qubits"), 20));
        }
        let value = T::from_f64(1.0).expect("unit") / T::from_u64(1u64 << n).expect("power of two");
        let mut v = MomentVector::zero(n);
        for bits in 0..(1u64 << (2 * n)) {
            let label = (0..n).fold(0u128, |acc, q| {
                let r = 2 * ((bits >> q) & 1) as usize;
                let s = 2 * ((bits >> (n + q)) & 1) as usize;
                acc | (((4 * r + s) as u128) << (4 * q))
            });
            v.set(label, value.clone());
        }
        Ok(v)
    }
}

impl MomentVector<f64> {
    /// `Σ_{p1 ≠ p2} |γ(p1, p2)|`.
    pub fn offdiagonal_abs_sum(&self) -> f64 {
        self.entries
            .iter()
            .filter(|(l, _)| !self.is_diagonal_label(**l))
            .map(|(_, v)| v.abs())
            .sum()
    }

    pub fn squared_norm(&self) -> f64 {
        self.entries.values().map(|v| v * v).sum()
    }
}

/// `P = (1 / n(n-1)) Σ_{i ≠ j} Ĝ^{(ij)}` acting on moment vectors.
#[derive(Clone, Debug)]
pub struct StepOperator {
    n: usize,
    haar_rule: bool,
    /// Nonzero entries of each local column: `columns[P] = [(Q, Ĝ(Q; P))]`.
    columns: Vec<Vec<(usize, f64)>>,
}

pub fn step_operator(model: &CircuitModel) -> Result<StepOperator> {
    let local = LocalGhat::for_source(&model.gate_source)?;
    let haar_rule = local.equals_haar(1e-12);
    let columns = (0..LOCAL)
        .map(|p| {
            (0..LOCAL)
                .filter_map(|q| {
                    let v = local.matrix()[(q, p)];
                    (v.abs() > 1e-15).then_some((q, v))
                })
                .collect()
        })
        .collect();
    Ok(StepOperator {
        n: model.n,
        haar_rule,
        columns,
    })
}

impl StepOperator {
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// True when the local map is the Haar case table, applied with exact weights.
    pub fn uses_haar_rule(&self) -> bool {
        self.haar_rule
    }

    pub fn apply<T: Coefficient>(&self, v: &MomentVector<T>) -> Result<MomentVector<T>> {
        crate::error::ensure_same(v.n, self.n)?;
        let n = self.n;
        let pairs = T::from_usize(n * (n - 1)).expect("small integer");
        let fifteen = T::from_u32(15).expect("small integer");
        let mut out: BTreeMap<u128, T> = BTreeMap::new();
        let mut add = |label: u128, val: T| {
            let e = out.entry(label).or_insert_with(T::zero);
            *e = e.clone() + val;
        };
        for (&label, val) in &v.entries {
            let share = val.clone() / pairs.clone();
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let (si, sj) = (site(label, i), site(label, j));
                    let p1 = si / 4 + 4 * (sj / 4);
                    let p2 = si % 4 + 4 * (sj % 4);
                    if self.haar_rule {
                        if p1 != p2 {
                            continue;
                        }
                        if p1 == 0 {
                            add(label, share.clone());
                            continue;
                        }
                        let spread = share.clone() / fifteen.clone();
                        for p in 1..16 {
                            add(with_sites(label, i, 5 * (p % 4), j, 5 * (p / 4)), spread.clone());
                        }
                    } else {
                        for &(q, w) in &self.columns[p1 * 16 + p2] {
                            let (q1, q2) = (q / 16, q % 16);
                            let ni = 4 * (q1 % 4) + q2 % 4;
                            let nj = 4 * (q1 / 4) + q2 / 4;
                            let weight = T::from_f64(w).expect("finite weight");
                            add(with_sites(label, i, ni, j, nj), share.clone() * weight);
                        }
                    }
                }
            }
        }
        let mut result = MomentVector::zero(n);
        for (l, v) in out {
            result.set(l, v);
        }
        Ok(result)
    }

    /// Explicit sparse columns of `P` over all `16^n` labels.
    pub fn explicit_columns(&self) -> Result<Vec<Vec<(usize, f64)>>> {
        if self.n > EXPLICIT_MAX_QUBITS {
            return Err(Error::guard(format!("explicit step matrix on {} qubits", self.n), EXPLICIT_MAX_QUBITS));
        }
        let labels = 1usize << (4 * self.n);
        (0..labels)
            .map(|l| {
                let mut e = MomentVector::zero(self.n);
                e.set(l as u128, 1.0);
                Ok(self.apply(&e)?.iter().map(|(&q, &v)| (q as usize, v)).collect())
            })
            .collect()
    }
}

/// Expected coefficients after `t` random gates.
pub fn evolve_moments<T: Coefficient>(model: &CircuitModel, initial: &MomentVector<T>, t: usize) -> Result<MomentVector<T>> {
    let step = step_operator(model)?;
    let mut v = initial.clone();
    for _ in 0..t {
        v = step.apply(&v)?;
    }
    Ok(v)
}

/// Chain on the `4^n - 1` nonzero diagonal labels `(p, p)`, indexed by Pauli index minus one.
pub fn full_diagonal_chain(model: &CircuitModel) -> Result<ChainMatrix> {
    if model.n > EXACT_MAX_QUBITS {
        return Err(Error::guard(format!("full diagonal chain on {} qubits", model.n), EXACT_MAX_QUBITS));
    }
    let n = model.n;
    let step = step_operator(model)?;
    let states = (1usize << (2 * n)) - 1;
    let diag_label = |p: usize| -> u128 {
        (0..n).fold(0u128, |acc, q| {
            let s = (p >> (2 * q)) & 3;
            acc | (((5 * s) as u128) << (4 * q))
        })
    };
    let mut index = std::collections::HashMap::new();
    for p in 1..=states {
        index.insert(diag_label(p), p - 1);
    }
    let mut m = DMatrix::<f64>::zeros(states, states);
    for p in 1..=states {
        let mut e = MomentVector::zero(n);
        e.set(diag_label(p), 1.0);
        // P is applied to coefficient vectors; the chain moves mass from p to its images
        for (label, v) in step.apply(&e)?.iter() {
            let &target = index.get(label).ok_or_else(|| {
                Error::Unsupported(format!("gate source {} leaks diagonal mass", model.gate_source))
            })?;
            m[(p - 1, target)] += v;
        }
    }
    let labels = (1..=states)
        .map(|p| PauliString::from_index(n, p as u128).expect("in range").to_string())
        .collect();
    ChainMatrix::new(labels, m)
}

/// Closed-form decay of the OPNORM distance between the length-`t` circuit moment
/// operator and the Haar projector: `1` at `t = 0` and `rate^t` afterwards.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExactDecay {
    pub rate: f64,
    /// Second-largest eigenvalue modulus of the diagonal-sector chain.
    pub diagonal_rate: f64,
    /// Spectral radius of the off-diagonal sector, `(n - 2) / n`.
    pub offdiagonal_rate: f64,
}

impl ExactDecay {
    pub fn distance(&self, t: usize) -> f64 {
        if t == 0 {
            1.0
        } else {
            self.rate.powi(t as i32)
        }
    }
}

/// Exact decay rate for gate sources whose local map equals the Haar one.
///
/// `P` is symmetric and block diagonal in the diagonal and off-diagonal sectors. In the
/// off-diagonal sector every label has a mismatched site, killed with probability `2/n`
/// per step, and a single mismatched site next to identities attains that rate.
pub fn exact_decay(model: &CircuitModel) -> Result<ExactDecay> {
    let step = step_operator(model)?;
    if !step.uses_haar_rule() {
        return Err(Error::Unsupported(format!(
            "exact decay needs a local map equal to the Haar one; {} differs (use explicit_decay_rate)",
            model.gate_source
        )));
    }
    let chain = full_diagonal_chain(model)?;
    let mut ev: Vec<f64> = chain
        .matrix()
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .map(|l| l.abs())
        .collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let diagonal_rate = ev.get(1).copied().unwrap_or(0.0);
    let n = model.n as f64;
    let offdiagonal_rate = (n - 2.0) / n;
    Ok(ExactDecay {
        rate: diagonal_rate.max(offdiagonal_rate),
        diagonal_rate,
        offdiagonal_rate,
    })
}

/// Largest eigenvalue modulus of `P - Π` by power iteration on the explicit matrix,
/// where `Π` projects onto the identity label and the uniform nonzero diagonal.
///
/// Requires a symmetric local map so that `P` is normal.
pub fn explicit_decay_rate(model: &CircuitModel, iterations: usize) -> Result<f64> {
    let local = LocalGhat::for_source(&model.gate_source)?;
    if !local.is_symmetric(1e-12) {
        return Err(Error::Unsupported(format!(
            "local map of {} is not symmetric",
            model.gate_source
        )));
    }
    let step = step_operator(model)?;
    let cols = step.explicit_columns()?;
    let n = model.n;
    let labels = cols.len();
    let diag: Vec<usize> = (1..(1usize << (2 * n)))
        .map(|p| (0..n).fold(0usize, |acc, q| acc | ((5 * ((p >> (2 * q)) & 3)) << (4 * q))))
        .collect();
    let uniform = 1.0 / (diag.len() as f64).sqrt();
    let project_out = |x: &mut Vec<f64>| {
        x[0] = 0.0;
        let o: f64 = diag.iter().map(|&l| x[l]).sum::<f64>() * uniform;
        for &l in &diag {
            x[l] -= o * uniform;
        }
    };
    let apply = |x: &Vec<f64>| -> Vec<f64> {
        let mut y = vec![0.0; labels];
        for (p, col) in cols.iter().enumerate() {
            if x[p] != 0.0 {
                for &(q, w) in col {
                    y[q] += w * x[p];
                }
            }
        }
        y
    };
    let mut rng = crate::seed::stream(0, "explicit-decay");
    let mut x: Vec<f64> = (0..labels).map(|_| rng.random::<f64>() - 0.5).collect();
    project_out(&mut x);
    let mut rate = 0.0;
    for _ in 0..iterations {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        x.iter_mut().for_each(|v| *v /= norm);
        let mut y = apply(&apply(&x));
        project_out(&mut y);
        rate = y.iter().map(|v| v * v).sum::<f64>().sqrt().sqrt();
        x = y;
    }
    Ok(rate)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub length: usize,
    pub metric: DesignMetric,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanMode {
    /// Closed-form second-moment decay (`k = 2`, OPNORM).
    Exact,
    /// Monte-Carlo average over sampled circuits.
    Sampled { samples: usize, seed: u64 },
}

pub fn convergence_scan(
    model: &CircuitModel,
    k: usize,
    lengths: &[usize],
    metric: DesignMetric,
    mode: ScanMode,
) -> Result<Vec<ScanRow>> {
    match mode {
        ScanMode::Exact => {
            if k != 2 || metric != DesignMetric::Opnorm {
                return Err(Error::Unsupported("exact scans cover k=2 with OPNORM only".into()));
            }
            let decay = exact_decay(model)?;
            Ok(lengths
                .iter()
                .map(|&length| ScanRow {
                    length,
                    metric,
                    value: decay.distance(length),
                    stderr: 0.0,
                })
                .collect())
        }
        ScanMode::Sampled { samples, seed } => lengths
            .iter()
            .map(|&length| {
                let ens = if length == 0 {
                    let d = 1usize << model.n;
                    EnsembleSpec::single(UnitaryDescriptor::Dense {
                        matrix: CMatrix::identity(d, d),
                    })
                } else {
                    EnsembleSpec::single(UnitaryDescriptor::Circuit {
                        model: model.clone(),
                        length,
                        samples,
                        seed: seed ^ (length as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                    })
                };
                let DistanceEstimate { value, stderr } = crate::haar_moments::design_distance(&ens, k, metric)?;
                Ok(ScanRow {
                    length,
                    metric,
                    value,
                    stderr,
                })
            })
            .collect(),
    }
}

/// Gate given by a dense matrix of local index `bit_i + 2 bit_j`.
pub fn cnot_gate() -> Gate {
    let mut m = CMatrix::zeros(4, 4);
    for (col, row) in [(0, 0), (1, 3), (2, 2), (3, 1)] {
        m[(row, col)] = c(1.0, 0.0);
    }
    Gate(m)
}
