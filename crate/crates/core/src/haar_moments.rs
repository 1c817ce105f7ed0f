//! Moment operators `E[U^{⊗k} ⊗ Ū^{⊗k}]` of unitary ensembles and their Haar counterparts.
//!
//! Vectorization is row-major: `vec(A)[r * D + c] = A[r, c]`, so that
//! `vec(U A U†) = (U ⊗ Ū) vec(A)`. Tensor factors are numbered from the most
//! significant digit, matching `kron`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::CliffordTableau;
use crate::error::{Error, Result};
use crate::linalg::{c, general_eigenvalues, kron, max_abs, singular_values, CMatrix, ZERO};
use crate::pauli::PauliString;
use crate::perm::{factorial, Permutation};
use crate::random_circuit::{sample_circuit, CircuitModel};
use crate::seed;

/// Largest `d^{2k}` for which a moment operator is stored densely.
pub const DENSE_MOMENT_LIMIT: usize = 1024;
/// Largest `N^k` for which a subsystem permutation is materialized.
pub const PERMUTATION_DENSE_LIMIT: usize = 4096;
/// Moduli at or above `1 - UNIT_THRESHOLD` count as unit eigenvalues.
pub const UNIT_THRESHOLD: f64 = 1e-9;

const MC_CHUNK: usize = 64;

fn checked_pow(base: usize, exp: usize, limit: usize, what: &str) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc
            .checked_mul(base)
            .filter(|&v| v <= limit)
            .ok_or_else(|| Error::guard(format!("{what} with base {base} and power {exp}"), limit))?;
    }
    Ok(acc)
}

/// `S(π)` on `(C^N)^{⊗k}`, sending tensor factor `t` to slot `π(t)`.
#[derive(Clone, Debug)]
pub struct SubsystemPermutation {
    n_dim: usize,
    perm: Permutation,
}

impl SubsystemPermutation {
    /// Basis index of `S(π)|c⟩`.
    pub fn map_index(&self, c: usize) -> usize {
        let k = self.perm.len();
        let mut digits = vec![0usize; k];
        let mut rest = c;
        for t in (0..k).rev() {
            digits[t] = rest % self.n_dim;
            rest /= self.n_dim;
        }
        let mut out = vec![0usize; k];
        for t in 0..k {
            out[self.perm.apply(t)] = digits[t];
        }
        out.iter().fold(0, |acc, &x| acc * self.n_dim + x)
    }

    pub fn dim(&self) -> usize {
        self.n_dim.pow(self.perm.len() as u32)
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        let dim = checked_pow(self.n_dim, self.perm.len(), PERMUTATION_DENSE_LIMIT, "dense permutation")?;
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            m[(self.map_index(col), col)] = c(1.0, 0.0);
        }
        Ok(m)
    }
}

pub fn permutation_operator(pi: &Permutation, n_dim: usize) -> Result<SubsystemPermutation> {
    checked_pow(n_dim, pi.len(), 1 << 20, "subsystem permutation")?;
    Ok(SubsystemPermutation {
        n_dim,
        perm: pi.clone(),
    })
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `E[(|ψ⟩⟨ψ|)^{⊗k}]` over Haar states: the symmetric projector divided by its rank.
pub fn symmetric_state_average(d: usize, k: usize) -> Result<CMatrix> {
    let dim = checked_pow(d, k, PERMUTATION_DENSE_LIMIT, "symmetric average")?;
    let mut acc = CMatrix::zeros(dim, dim);
    let perms = Permutation::all(k);
    for p in &perms {
        acc += permutation_operator(p, d)?.to_dense()?;
    }
    let norm = perms.len() as f64 * binomial((k + d - 1) as u64, k as u64);
    Ok(acc / c(norm, 0.0))
}

/// Orthogonal projector onto `span{|E_π⟩ : π ∈ S_k}` inside `C^{N^{2k}}`,
/// with `|E_π⟩ = vec(S(π)) / N^{k/2}`.
///
/// Stored implicitly: a `k! × k!` weight matrix (the Gram pseudo-inverse) and the
/// support of each permutation state.
#[derive(Clone, Debug)]
pub struct HaarProjector {
    n_dim: usize,
    k: usize,
    half: usize,
    perms: Vec<Permutation>,
    /// `rows[π][c]`: row index `r` with `S(π)[r, c] = 1`.
    rows: Vec<Vec<usize>>,
    weights: DMatrix<f64>,
    conditioning: f64,
    rank: usize,
}

impl HaarProjector {
    pub fn new(n_dim: usize, k: usize) -> Result<Self> {
        if n_dim == 0 || k == 0 {
            return Err(Error::Precondition("dimension and power must be positive".into()));
        }
        let half = checked_pow(n_dim, k, 1 << 20, "Haar projector")?;
        let perms = Permutation::all(k);
        let rows = perms
            .iter()
            .map(|p| {
                let s = permutation_operator(p, n_dim).expect("size checked");
                (0..half).map(|col| s.map_index(col)).collect()
            })
            .collect();
        let m = perms.len();
        let gram = DMatrix::from_fn(m, m, |a, b| {
            let rel = perms[a].inverse().compose(&perms[b]).expect("same length");
            (n_dim as f64).powi(rel.cycle_count() as i32 - k as i32)
        });
        let eig = gram.symmetric_eigen();
        let max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let mut weights = DMatrix::zeros(m, m);
        let mut min_kept = f64::INFINITY;
        let mut rank = 0;
        for (i, &l) in eig.eigenvalues.iter().enumerate() {
            if l.abs() > 1e-10 * max {
                rank += 1;
                min_kept = min_kept.min(l.abs());
                let v = eig.eigenvectors.column(i);
                weights += (v * v.transpose()) / l;
            }
        }
        Ok(HaarProjector {
            n_dim,
            k,
            half,
            perms,
            rows,
            weights,
            conditioning: max / min_kept,
            rank,
        })
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.half * self.half
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// True when `N < k`, where the permutation states are linearly dependent.
    pub fn is_rank_deficient(&self) -> bool {
        (self.rank as u128) < factorial(self.k)
    }

    /// Condition number of the retained Gram spectrum.
    pub fn conditioning(&self) -> f64 {
        self.conditioning
    }

    pub fn permutations(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    fn state_norm(&self) -> f64 {
        1.0 / (self.half as f64).sqrt()
    }

    /// Entry of `|E_π⟩` at `index`.
    pub fn state_entry(&self, pi: usize, index: usize) -> f64 {
        let (r, col) = (index / self.half, index % self.half);
        if self.rows[pi][col] == r {
            self.state_norm()
        } else {
            0.0
        }
    }

    /// Indices where `|E_π⟩` is nonzero.
    pub fn state_support(&self, pi: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.half).map(move |col| self.rows[pi][col] * self.half + col)
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        let m = self.perms.len();
        let mut acc = 0.0;
        for a in 0..m {
            let ea = self.state_entry(a, row);
            if ea == 0.0 {
                continue;
            }
            for b in 0..m {
                acc += ea * self.weights[(a, b)] * self.state_entry(b, col);
            }
        }
        acc
    }

    /// Overlaps `⟨E_π|v⟩`.
    pub fn overlaps(&self, v: &[num_complex::Complex64]) -> Result<Vec<num_complex::Complex64>> {
        crate::error::ensure_same(v.len(), self.dim())?;
        Ok((0..self.perms.len())
            .map(|a| self.state_support(a).map(|i| v[i]).sum::<num_complex::Complex64>() * self.state_norm())
            .collect())
    }

    pub fn apply(&self, v: &[num_complex::Complex64]) -> Result<Vec<num_complex::Complex64>> {
        let o = self.overlaps(v)?;
        let m = self.perms.len();
        let mut out = vec![ZERO; self.dim()];
        for a in 0..m {
            let coef: num_complex::Complex64 = (0..m).map(|b| o[b] * self.weights[(a, b)]).sum();
            for i in self.state_support(a) {
                out[i] += coef * self.state_norm();
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        let dim = self.dim();
        if dim > DENSE_MOMENT_LIMIT {
            return Err(Error::guard(format!("dense Haar projector of dimension {dim}"), DENSE_MOMENT_LIMIT));
        }
        let mut m = CMatrix::zeros(dim, dim);
        let scale = 1.0 / self.half as f64;
        for a in 0..self.perms.len() {
            for b in 0..self.perms.len() {
                let w = self.weights[(a, b)] * scale;
                for i in self.state_support(a) {
                    for j in self.state_support(b) {
                        m[(i, j)] += c(w, 0.0);
                    }
                }
            }
        }
        Ok(m)
    }
}

pub fn haar_moment_projector(n_dim: usize, k: usize) -> Result<HaarProjector> {
    HaarProjector::new(n_dim, k)
}

/// Dense moment operator on `C^{d^{2k}}`.
#[derive(Clone, Debug)]
pub struct MomentOperator {
    d: usize,
    k: usize,
    matrix: CMatrix,
}

impl MomentOperator {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// `U^{⊗k} ⊗ Ū^{⊗k}`.
pub fn tensor_power_kk(u: &CMatrix, k: usize) -> Result<CMatrix> {
    checked_pow(u.nrows(), 2 * k, DENSE_MOMENT_LIMIT, "moment operator")?;
    let mut uk = CMatrix::identity(1, 1);
    for _ in 0..k {
        uk = kron(&uk, u);
    }
    let conj = uk.map(|z| z.conj());
    Ok(kron(&uk, &conj))
}

/// Pauli-label matrix `Ĝ(q; p)` of the Haar twirl, for `d = 2^n` and `k ∈ {1, 2}`.
///
/// Labels are flattened as `p_1 * d² + p_2` for `k = 2`, using Pauli indices on `n` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GhatMatrix {
    d: usize,
    k: usize,
}

pub const GHAT_DENSE_LIMIT: usize = 4096;

impl GhatMatrix {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> usize {
        (self.d * self.d).pow(self.k as u32)
    }

    fn split(&self, label: usize) -> (usize, usize) {
        let dd = self.d * self.d;
        if self.k == 1 {
            (label, label)
        } else {
            (label / dd, label % dd)
        }
    }

    pub fn entry(&self, q: usize, p: usize) -> f64 {
        if self.k == 1 {
            return if q == 0 && p == 0 { 1.0 } else { 0.0 };
        }
        let (q1, q2) = self.split(q);
        let (p1, p2) = self.split(p);
        if q1 != q2 || p1 != p2 {
            return 0.0;
        }
        match (q1 == 0, p1 == 0) {
            (true, true) => 1.0,
            (false, false) => 1.0 / ((self.d * self.d) as f64 - 1.0),
            _ => 0.0,
        }
    }

    pub fn apply(&self, gamma: &[f64]) -> Result<Vec<f64>> {
        crate::error::ensure_same(gamma.len(), self.labels())?;
        let mut out = vec![0.0; gamma.len()];
        out[0] = gamma[0];
        if self.k == 2 {
            let dd = self.d * self.d;
            let diag: f64 = (1..dd).map(|p| gamma[p * dd + p]).sum();
            for q in 1..dd {
                out[q * dd + q] = diag / (dd as f64 - 1.0);
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let l = self.labels();
        if l > GHAT_DENSE_LIMIT {
            return Err(Error::guard(format!("dense Ĝ with {l} labels"), GHAT_DENSE_LIMIT));
        }
        Ok(DMatrix::from_fn(l, l, |q, p| self.entry(q, p)))
    }
}

pub fn ghat_closed_form(d: usize, k: usize) -> Result<GhatMatrix> {
    if !(1..=2).contains(&k) {
        return Err(Error::Unsupported(format!(
            "closed-form Ĝ only for k ∈ {{1, 2}}, got k = {k}; use haar_moment_projector"
        )));
    }
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::Precondition(format!("Pauli labels need d = 2^n, got {d}")));
    }
    Ok(GhatMatrix { d, k })
}

/// Largest entrywise gap between the closed-form `Ĝ` for `k = 2` and the Haar
/// projector rewritten in the normalized Pauli-pair basis `vec(σ_{p1} ⊗ σ_{p2}) / d`.
pub fn ghat_gram_cross_check(d: usize) -> Result<f64> {
    let closed = ghat_closed_form(d, 2)?;
    if d > 16 {
        return Err(Error::guard(format!("Ĝ cross-check at d = {d}"), 16));
    }
    let n = d.trailing_zeros() as usize;
    let proj = HaarProjector::new(d, 2)?;
    let dd = d * d;
    let paulis: Vec<PauliString> = crate::pauli::all_paulis(n).collect();
    // dense single-copy matrices, sigma[p][(i, j)]
    let sigma: Vec<CMatrix> = paulis.iter().map(|p| p.to_dense()).collect::<Result<_>>()?;
    let labels = dd * dd;
    let m = proj.permutations().len();
    // overlaps ⟨E_π | B_label⟩
    let overlaps: Vec<Vec<num_complex::Complex64>> = (0..labels)
        .into_par_iter()
        .map(|label| {
            let (p1, p2) = (label / dd, label % dd);
            (0..m)
                .map(|a| {
                    proj.state_support(a)
                        .map(|idx| {
                            let (r, col) = (idx / dd, idx % dd);
                            let (r1, r2) = (r / d, r % d);
                            let (c1, c2) = (col / d, col % d);
                            sigma[p1][(r1, c1)] * sigma[p2][(r2, c2)]
                        })
                        .sum::<num_complex::Complex64>()
                        * (proj.state_norm() / d as f64)
                })
                .collect()
        })
        .collect();
    let w = proj.weights();
    let err = (0..labels)
        .into_par_iter()
        .map(|q| {
            let left: Vec<num_complex::Complex64> = (0..m)
                .map(|b| (0..m).map(|a| overlaps[q][a].conj() * w[(a, b)]).sum())
                .collect();
            let mut worst: f64 = 0.0;
            for p in 0..labels {
                let g: num_complex::Complex64 = (0..m).map(|b| left[b] * overlaps[p][b]).sum();
                worst = worst.max((g - c(closed.entry(q, p), 0.0)).norm());
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(err)
}

/// One member (or random family) of a unitary ensemble.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnitaryDescriptor {
    Tableau {
        tableau: CliffordTableau,
    },
    Dense {
        #[serde(with = "crate::linalg::dense_json")]
        matrix: CMatrix,
    },
    /// `B(π)|i⟩ = |π(i)⟩` on `C^N`.
    Permutation {
        perm: Permutation,
    },
    /// Discrete Fourier transform `ω^{jk} / √N`.
    Fourier {
        n_dim: usize,
    },
    /// Haar-random unitary on `C^d`, averaged over `samples` draws.
    Haar {
        d: usize,
        samples: usize,
        seed: u64,
    },
    /// Random circuit of fixed length, averaged over `samples` draws.
    Circuit {
        model: CircuitModel,
        length: usize,
        samples: usize,
        seed: u64,
    },
}

pub fn fourier_matrix(n_dim: usize) -> CMatrix {
    let norm = 1.0 / (n_dim as f64).sqrt();
    CMatrix::from_fn(n_dim, n_dim, |j, k| {
        let angle = 2.0 * PI * ((j * k) % n_dim) as f64 / n_dim as f64;
        c(angle.cos() * norm, angle.sin() * norm)
    })
}

pub fn permutation_matrix(perm: &Permutation) -> CMatrix {
    let n = perm.len();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        m[(perm.apply(i), i)] = c(1.0, 0.0);
    }
    m
}

impl UnitaryDescriptor {
    pub fn dim(&self) -> usize {
        match self {
            UnitaryDescriptor::Tableau { tableau } => 1 << tableau.num_qubits(),
            UnitaryDescriptor::Dense { matrix } => matrix.nrows(),
            UnitaryDescriptor::Permutation { perm } => perm.len(),
            UnitaryDescriptor::Fourier { n_dim } => *n_dim,
            UnitaryDescriptor::Haar { d, .. } => *d,
            UnitaryDescriptor::Circuit { model, .. } => 1 << model.n,
        }
    }

    fn is_sampled(&self) -> bool {
        matches!(self, UnitaryDescriptor::Haar { .. } | UnitaryDescriptor::Circuit { .. })
    }

    /// The fixed unitary of a deterministic descriptor.
    pub fn fixed_unitary(&self) -> Result<Option<CMatrix>> {
        Ok(match self {
            UnitaryDescriptor::Tableau { tableau } => Some(tableau.to_matrix()?),
            UnitaryDescriptor::Dense { matrix } => Some(matrix.clone()),
            UnitaryDescriptor::Permutation { perm } => Some(permutation_matrix(perm)),
            UnitaryDescriptor::Fourier { n_dim } => Some(fourier_matrix(*n_dim)),
            _ => None,
        })
    }
}

/// Weighted list of descriptors.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, UnitaryDescriptor)>", into = "Vec<(f64, UnitaryDescriptor)>")]
pub struct EnsembleSpec {
    items: Vec<(f64, UnitaryDescriptor)>,
}

impl TryFrom<Vec<(f64, UnitaryDescriptor)>> for EnsembleSpec {
    type Error = Error;

    fn try_from(items: Vec<(f64, UnitaryDescriptor)>) -> Result<Self> {
        EnsembleSpec::new(items)
    }
}

impl From<EnsembleSpec> for Vec<(f64, UnitaryDescriptor)> {
    fn from(e: EnsembleSpec) -> Self {
        e.items
    }
}

impl EnsembleSpec {
    pub fn new(items: Vec<(f64, UnitaryDescriptor)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::Precondition("ensemble is empty".into()));
        }
        if items.iter().any(|(w, _)| !(*w > 0.0)) {
            return Err(Error::Precondition("ensemble weights must be positive".into()));
        }
        let total: f64 = items.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!("ensemble weights sum to {total}, not 1")));
        }
        let d = items[0].1.dim();
        for (_, desc) in &items {
            crate::error::ensure_same(desc.dim(), d)?;
        }
        Ok(EnsembleSpec { items })
    }

    pub fn uniform(descriptors: Vec<UnitaryDescriptor>) -> Result<Self> {
        let w = 1.0 / descriptors.len().max(1) as f64;
        EnsembleSpec::new(descriptors.into_iter().map(|d| (w, d)).collect())
    }

    pub fn single(desc: UnitaryDescriptor) -> Self {
        EnsembleSpec { items: vec![(1.0, desc)] }
    }

    pub fn items(&self) -> &[(f64, UnitaryDescriptor)] {
        &self.items
    }

    pub fn dim(&self) -> usize {
        self.items[0].1.dim()
    }
}

/// Ensemble moment together with entrywise standard errors (zero for exact terms).
#[derive(Clone, Debug)]
pub struct MomentEstimate {
    pub moment: MomentOperator,
    pub stderr: DMatrix<f64>,
}

fn sampled_moment(desc: &UnitaryDescriptor, k: usize) -> Result<(CMatrix, DMatrix<f64>)> {
    let (samples, seed_value, label) = match desc {
        UnitaryDescriptor::Haar { samples, seed, .. } => (*samples, *seed, "haar-moment"),
        UnitaryDescriptor::Circuit { samples, seed, .. } => (*samples, *seed, "circuit-moment"),
        _ => unreachable!("fixed descriptors are not sampled"),
    };
    if samples < 2 {
        return Err(Error::Budget(format!("need at least 2 samples, got {samples}")));
    }
    let dim = checked_pow(desc.dim(), 2 * k, DENSE_MOMENT_LIMIT, "moment operator")?;
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<Result<(CMatrix, DMatrix<f64>)>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = seed::stream(seed_value, &format!("{label}/{chunk}"));
            let mut sum = CMatrix::zeros(dim, dim);
            let mut sq = DMatrix::<f64>::zeros(dim, dim);
            let count = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            for _ in 0..count {
                let u = match desc {
                    UnitaryDescriptor::Haar { d, .. } => crate::linalg::haar_unitary(*d, &mut rng),
                    UnitaryDescriptor::Circuit { model, length, .. } => {
                        sample_circuit(model, *length, &mut rng)?.into_matrix()
                    }
                    _ => unreachable!(),
                };
                let t = tensor_power_kk(&u, k)?;
                sq += t.map(|z| z.norm_sqr());
                sum += t;
            }
            Ok((sum, sq))
        })
        .collect();
    let mut sum = CMatrix::zeros(dim, dim);
    let mut sq = DMatrix::<f64>::zeros(dim, dim);
    for part in partial {
        let (s, q) = part?;
        sum += s;
        sq += q;
    }
    let n = samples as f64;
    let mean = sum / c(n, 0.0);
    let var = DMatrix::from_fn(dim, dim, |i, j| ((sq[(i, j)] / n - mean[(i, j)].norm_sqr()).max(0.0)) * n / (n - 1.0));
    Ok((mean, var.map(|v| (v / n).sqrt())))
}

/// `E_{U~ν}[U^{⊗k} ⊗ Ū^{⊗k}]`.
pub fn ensemble_moment(ens: &EnsembleSpec, k: usize) -> Result<MomentEstimate> {
    let d = ens.dim();
    let dim = checked_pow(d, 2 * k, DENSE_MOMENT_LIMIT, "moment operator")?;
    // fold the fixed members in parallel without materializing every tensor power
    let mut acc = ens
        .items
        .par_iter()
        .filter(|(_, desc)| !desc.is_sampled())
        .try_fold(
            || CMatrix::zeros(dim, dim),
            |mut acc, (w, desc)| -> Result<CMatrix> {
                let u = desc.fixed_unitary()?.expect("fixed descriptor");
                acc += tensor_power_kk(&u, k)? * c(*w, 0.0);
                Ok(acc)
            },
        )
        .try_reduce(|| CMatrix::zeros(dim, dim), |a, b| Ok(a + b))?;
    let mut var = DMatrix::<f64>::zeros(dim, dim);
    for (w, desc) in ens.items.iter().filter(|(_, desc)| desc.is_sampled()) {
        let (mean, err) = sampled_moment(desc, k)?;
        acc += mean * c(*w, 0.0);
        var += err.map(|e| (w * e).powi(2));
    }
    Ok(MomentEstimate {
        moment: MomentOperator { d, k, matrix: acc },
        stderr: var.map(f64::sqrt),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DesignMetric {
    /// Trace norm of the moment-operator difference.
    Trace,
    /// Operator norm of the moment-operator difference.
    Opnorm,
    /// `d^k` times the largest entrywise difference.
    MonomialMax,
}

impl fmt::Display for DesignMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DesignMetric::Trace => "TRACE",
            DesignMetric::Opnorm => "OPNORM",
            DesignMetric::MonomialMax => "MONOMIAL_MAX",
        })
    }
}

impl FromStr for DesignMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TRACE" => Ok(DesignMetric::Trace),
            "OPNORM" => Ok(DesignMetric::Opnorm),
            "MONOMIAL_MAX" | "MONOMIAL" => Ok(DesignMetric::MonomialMax),
            other => Err(Error::Parse(format!("unknown design metric {other:?}"))),
        }
    }
}

/// A distance with its Monte-Carlo standard error (zero for exact ensembles).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistanceEstimate {
    pub value: f64,
    pub stderr: f64,
}

pub fn metric_value(diff: &CMatrix, d: usize, k: usize, metric: DesignMetric) -> f64 {
    match metric {
        DesignMetric::Trace => singular_values(diff).iter().sum(),
        DesignMetric::Opnorm => singular_values(diff).first().copied().unwrap_or(0.0),
        DesignMetric::MonomialMax => (d as f64).powi(k as i32) * max_abs(diff),
    }
}

/// Distance of the ensemble's `k`-th moment operator from the Haar one.
///
/// For sampled ensembles the standard error is propagated from the entrywise errors
/// through the Frobenius norm, which bounds the fluctuation of each metric up to the
/// factor applied below.
pub fn design_distance(ens: &EnsembleSpec, k: usize, metric: DesignMetric) -> Result<DistanceEstimate> {
    let est = ensemble_moment(ens, k)?;
    let haar = HaarProjector::new(ens.dim(), k)?.to_dense()?;
    let diff = est.moment.matrix() - haar;
    let d = ens.dim();
    let frob = est.stderr.norm();
    let dim = diff.nrows() as f64;
    let stderr = match metric {
        DesignMetric::Opnorm => frob,
        DesignMetric::Trace => dim.sqrt() * frob,
        DesignMetric::MonomialMax => (d as f64).powi(k as i32) * est.stderr.max(),
    };
    Ok(DistanceEstimate {
        value: metric_value(&diff, d, k, metric),
        stderr,
    })
}

/// Approximate-design definitions related by dimension factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DesignDefinition {
    Diamond,
    Twirl,
    Trace,
    Monomial,
    Opnorm,
}

impl DesignDefinition {
    pub const ALL: [DesignDefinition; 5] = [
        DesignDefinition::Diamond,
        DesignDefinition::Twirl,
        DesignDefinition::Trace,
        DesignDefinition::Monomial,
        DesignDefinition::Opnorm,
    ];
}

impl fmt::Display for DesignDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DesignDefinition::Diamond => "DIAMOND",
            DesignDefinition::Twirl => "TWIRL",
            DesignDefinition::Trace => "TRACE",
            DesignDefinition::Monomial => "MONOMIAL",
            DesignDefinition::Opnorm => "OPNORM",
        })
    }
}

impl FromStr for DesignDefinition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DesignDefinition::ALL
            .into_iter()
            .find(|d| d.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown design definition {s:?}")))
    }
}

/// Direct conversion edges with their factor `ε' = factor · ε`.
fn conversion_edges(d: f64, k: usize) -> Vec<(DesignDefinition, DesignDefinition, f64)> {
    use DesignDefinition::*;
    let kf = k as f64;
    let mut edges = vec![
        (Opnorm, Trace, d.powf(2.0 * kf)),
        (Trace, Opnorm, 1.0),
        (Monomial, Opnorm, d.powf(kf)),
        (Opnorm, Diamond, d.powf(kf)),
        (Diamond, Opnorm, d.powf(kf / 2.0)),
        (Trace, Monomial, d.powf(kf)),
    ];
    if k == 2 {
        edges.push((Monomial, Twirl, d.powi(5)));
        edges.push((Twirl, Monomial, 1.0));
    }
    edges
}

/// Converts an approximation parameter along the cheapest chain of conversions.
pub fn epsilon_convert(
    from: DesignDefinition,
    to: DesignDefinition,
    d: usize,
    k: usize,
    eps: f64,
) -> Result<f64> {
    if (from == DesignDefinition::Twirl || to == DesignDefinition::Twirl) && k != 2 && from != to {
        return Err(Error::NoPath {
            from: from.to_string(),
            to: to.to_string(),
            reason: format!("TWIRL conversions hold for k=2 only, got k={k}"),
        });
    }
    let edges = conversion_edges(d as f64, k);
    let idx = |x: DesignDefinition| DesignDefinition::ALL.iter().position(|&y| y == x).expect("listed");
    let mut best = [f64::INFINITY; 5];
    best[idx(from)] = 1.0;
    // factors are ≥ 1, so |V| - 1 relaxation rounds suffice
    for _ in 0..DesignDefinition::ALL.len() {
        for &(a, b, f) in &edges {
            let cand = best[idx(a)] * f;
            if cand < best[idx(b)] {
                best[idx(b)] = cand;
            }
        }
    }
    let factor = best[idx(to)];
    if !factor.is_finite() {
        return Err(Error::NoPath {
            from: from.to_string(),
            to: to.to_string(),
            reason: "no conversion chain".into(),
        });
    }
    Ok(eps * factor)
}

/// Spectrum summary of a gate distribution's moment operator.
#[derive(Clone, Debug, Serialize)]
pub struct CopyGap {
    pub unit_eigen_count: usize,
    pub gap: f64,
    /// Eigenvalue moduli, descending.
    pub moduli: Vec<f64>,
}

pub fn copy_gap(gate_dist: &EnsembleSpec, k: usize) -> Result<CopyGap> {
    let est = ensemble_moment(gate_dist, k)?;
    let eig = general_eigenvalues(est.moment.matrix())?;
    let mut moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    let unit_eigen_count = moduli.iter().filter(|&&m| m >= 1.0 - UNIT_THRESHOLD).count();
    let below = moduli.get(unit_eigen_count).copied().unwrap_or(0.0);
    Ok(CopyGap {
        unit_eigen_count,
        gap: 1.0 - below,
        moduli,
    })
}

/// Every Clifford on `n ≤ 2` qubits as a uniform ensemble.
pub fn clifford_group_ensemble(n: usize) -> Result<EnsembleSpec> {
    let group = crate::clifford::enumerate_group(n)?;
    EnsembleSpec::uniform(
        group
            .into_iter()
            .map(|tableau| UnitaryDescriptor::Tableau { tableau })
            .collect(),
    )
}

/// The `4^n` Pauli operators as a uniform ensemble.
pub fn pauli_ensemble(n: usize) -> Result<EnsembleSpec> {
    EnsembleSpec::uniform(
        crate::pauli::all_paulis(n)
            .map(|p| p.to_dense().map(|matrix| UnitaryDescriptor::Dense { matrix }))
            .collect::<Result<_>>()?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_on_qubits() {
        let s = permutation_operator(&Permutation::new(vec![1, 0]).unwrap(), 2).unwrap();
        let m = s.to_dense().unwrap();
        let expect = [0, 2, 1, 3];
        for (col, &row) in expect.iter().enumerate() {
            assert_eq!(m[(row, col)], c(1.0, 0.0));
        }
    }

    #[test]
    fn three_cycle_matches_trace_formula() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let mats: Vec<CMatrix> = (0..3).map(|_| crate::linalg::haar_unitary(2, &mut rng) * c(0.7, 0.2)).collect();
        let pi = Permutation::new(vec![1, 2, 0]).unwrap();
        let s = permutation_operator(&pi, 2).unwrap().to_dense().unwrap();
        let prod = kron(&kron(&mats[0], &mats[1]), &mats[2]);
        let dense = crate::linalg::trace(&(s * prod));
        let formula = crate::pauli::trace_cycle(pi.images(), &mats).unwrap();
        assert!((dense - formula).norm() < 1e-12);
    }

    #[test]
    fn symmetric_average_has_unit_trace() {
        let m = symmetric_state_average(2, 2).unwrap();
        assert!((crate::linalg::trace(&m) - c(1.0, 0.0)).norm() < 1e-12);
        let ev = crate::linalg::hermitian_eigenvalues(&m);
        assert_eq!(ev.iter().filter(|&&l| (l - 1.0 / 3.0).abs() < 1e-12).count(), 3);
    }

    #[test]
    fn projector_is_idempotent_with_factorial_rank() {
        for (n_dim, k) in [(2, 1), (3, 2), (4, 2), (2, 3)] {
            let p = HaarProjector::new(n_dim, k).unwrap();
            let m = p.to_dense().unwrap();
            assert!(max_abs(&(&m * &m - &m)) < 1e-9);
            assert!(max_abs(&(&m - m.adjoint())) < 1e-9);
            let rank = crate::linalg::trace(&m).re.round() as usize;
            assert_eq!(rank, p.rank());
            if n_dim >= k {
                assert_eq!(rank as u128, factorial(k));
            } else {
                assert!(p.is_rank_deficient());
                assert_eq!(rank, 5);
            }
        }
    }

    #[test]
    fn ghat_table_values() {
        let g = ghat_closed_form(4, 2).unwrap();
        assert!((g.entry(5 * 16 + 5, 7 * 16 + 7) - 1.0 / 15.0).abs() < 1e-15);
        assert_eq!(g.entry(5 * 16 + 6, 5 * 16 + 6), 0.0);
        assert_eq!(ghat_closed_form(2, 1).unwrap().entry(0, 0), 1.0);
        assert!(ghat_closed_form(2, 3).is_err());
    }

    #[test]
    fn ghat_agrees_with_projector_small() {
        assert!(ghat_gram_cross_check(2).unwrap() < 1e-10);
        assert!(ghat_gram_cross_check(4).unwrap() < 1e-10);
    }

    #[test]
    fn identity_ensemble_opnorm_is_one() {
        let ens = EnsembleSpec::single(UnitaryDescriptor::Dense {
            matrix: CMatrix::identity(2, 2),
        });
        let dist = design_distance(&ens, 1, DesignMetric::Opnorm).unwrap();
        assert!((dist.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_ensemble_is_one_design() {
        let dist = design_distance(&pauli_ensemble(1).unwrap(), 1, DesignMetric::Opnorm).unwrap();
        assert!(dist.value < 1e-12);
    }

    #[test]
    fn conversion_examples() {
        use DesignDefinition::*;
        assert!((epsilon_convert(Monomial, Opnorm, 2, 1, 0.1).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(epsilon_convert(Trace, Opnorm, 7, 3, 0.25).unwrap(), 0.25);
        let err = epsilon_convert(Twirl, Trace, 4, 3, 0.1).unwrap_err();
        assert!(err.to_string().contains("k=2 only"));
    }

    #[test]
    fn cnot_is_not_universal() {
        let cnot = crate::clifford::CliffordTableau::cnot(2, 0, 1);
        let ens = EnsembleSpec::single(UnitaryDescriptor::Tableau { tableau: cnot });
        assert!(copy_gap(&ens, 1).unwrap().unit_eigen_count > 1);
    }
}
