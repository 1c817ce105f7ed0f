//! Tensor product expanders built from permutations mixed with the Fourier transform.
//!
//! Index tuples live in `[N]^{2k}`; the first `k` positions carry `F` and the last `k`
//! carry `F̄`. Partitions of the positions label the permutation-invariant states
//! `|E_Π⟩` (equalities only) and `|I_Π⟩` (equalities and inequalities).

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_same, Error, Result};
use crate::haar_moments::{fourier_matrix, tensor_power_kk, HaarProjector, DENSE_MOMENT_LIMIT, UNIT_THRESHOLD};
use crate::linalg::{c, general_eigenvalues, singular_values, spectral_norm, CMatrix, CVector};
use crate::perm::{factorial, Permutation};

pub const PARTITION_MAX: usize = 10;
/// Largest solution space enumerated directly when counting congruence solutions.
pub const BRUTE_FORCE_LIMIT: u64 = 100_000_000;
/// Largest `N^{2k}` for the dense cross-check of `λ_A`.
pub const DENSE_TPE_LIMIT: usize = 4096;

/// Set partition of `{0..m}` with blocks sorted internally and by minimum element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    m: usize,
    /// Restricted growth string: `labels[i]` is the block of element `i`.
    labels: Vec<usize>,
}

impl Partition {
    /// Canonical partition from arbitrary block labels.
    pub fn from_labels(raw: &[usize]) -> Self {
        let mut map = HashMap::new();
        let labels = raw
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Partition { m: raw.len(), labels }
    }

    pub fn from_blocks(m: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut raw = vec![usize::MAX; m];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Precondition("empty block".into()));
            }
            for &e in block {
                if e >= m || raw[e] != usize::MAX {
                    return Err(Error::Precondition(format!("element {e} repeated or out of range")));
                }
                raw[e] = b;
            }
        }
        if raw.contains(&usize::MAX) {
            return Err(Error::Precondition("blocks do not cover the ground set".into()));
        }
        Ok(Partition::from_labels(&raw))
    }

    pub fn singletons(m: usize) -> Self {
        Partition { m, labels: (0..m).collect() }
    }

    pub fn one_block(m: usize) -> Self {
        Partition { m, labels: vec![0; m] }
    }

    /// Pairing `{t, k + π(t)}` of `2k` positions.
    pub fn pairing(pi: &Permutation) -> Self {
        let k = pi.len();
        let mut raw = vec![0; 2 * k];
        for t in 0..k {
            raw[t] = t;
            raw[k + pi.apply(t)] = t;
        }
        Partition::from_labels(&raw)
    }

    pub fn ground_size(&self) -> usize {
        self.m
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_blocks(&self) -> usize {
        self.labels.iter().max().map_or(0, |&b| b + 1)
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_blocks()];
        for (i, &b) in self.labels.iter().enumerate() {
            out[b].push(i);
        }
        out
    }

    /// Every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Partition) -> Result<bool> {
        ensure_same(self.m, other.m)?;
        Ok(self.refines_unchecked(other))
    }

    fn refines_unchecked(&self, other: &Partition) -> bool {
        let mut image = vec![usize::MAX; self.num_blocks()];
        for (i, &b) in self.labels.iter().enumerate() {
            if image[b] == usize::MAX {
                image[b] = other.labels[i];
            } else if image[b] != other.labels[i] {
                return false;
            }
        }
        true
    }

    /// Coarsest common refinement.
    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        ensure_same(self.m, other.m)?;
        let raw: Vec<usize> = self
            .labels
            .iter()
            .zip(&other.labels)
            .map(|(&a, &b)| a * self.m + b)
            .collect();
        Ok(Partition::from_labels(&raw))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self
            .blocks()
            .iter()
            .map(|b| {
                let items: Vec<String> = b.iter().map(|e| (e + 1).to_string()).collect();
                format!("{{{}}}", items.join(","))
            })
            .collect();
        write!(f, "{{{}}}", blocks.join(","))
    }
}

/// All partitions of `{0..m}` in restricted-growth-string order.
pub fn partitions(m: usize) -> Result<Vec<Partition>> {
    if m > PARTITION_MAX {
        return Err(Error::guard(format!("partitions of {m} elements"), PARTITION_MAX));
    }
    let mut out = Vec::new();
    let mut labels = vec![0usize; m];
    fn rec(i: usize, max: usize, labels: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if i == labels.len() {
            out.push(Partition {
                m: labels.len(),
                labels: labels.clone(),
            });
            return;
        }
        for b in 0..=max {
            labels[i] = b;
            rec(i + 1, if b == max { max + 1 } else { max }, labels, out);
        }
    }
    if m == 0 {
        return Ok(vec![Partition { m: 0, labels: vec![] }]);
    }
    rec(1, 1, &mut labels, &mut out);
    Ok(out)
}

fn small_factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// Möbius function of the refinement order; zero unless `a ≤ b`.
pub fn mobius(a: &Partition, b: &Partition) -> Result<i64> {
    if !a.refines(b)? {
        return Ok(0);
    }
    let mut inside = vec![0usize; b.num_blocks()];
    let mut seen = vec![false; a.num_blocks()];
    for (i, &blk) in a.labels.iter().enumerate() {
        if !seen[blk] {
            seen[blk] = true;
            inside[b.labels[i]] += 1;
        }
    }
    let sign = if (a.num_blocks() - b.num_blocks()) % 2 == 0 { 1 } else { -1 };
    Ok(sign * inside.iter().map(|&c| small_factorial(c - 1)).product::<i64>())
}

/// Largest `|Σ_Π' ζ(a, Π') μ(Π', c) - δ_{ac}|` over all pairs of partitions of `m`.
pub fn mobius_inverse_check(m: usize) -> Result<i64> {
    let parts = partitions(m)?;
    let worst = parts
        .par_iter()
        .map(|a| {
            let above: Vec<&Partition> = parts.iter().filter(|p| a.refines_unchecked(p)).collect();
            parts
                .iter()
                .map(|cp| {
                    let s: i64 = above.iter().map(|p| mobius(p, cp).expect("same size")).sum();
                    (s - i64::from(a == cp)).abs()
                })
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    Ok(worst)
}

fn rising(x: f64, n: usize) -> f64 {
    (0..n).map(|i| x + i as f64).product()
}

fn falling(x: f64, n: usize) -> f64 {
    (0..n).map(|i| x - i as f64).product()
}

/// Checks `Σ_{Π' ≥ Π} |μ(Π, Π')| x^{|Π'|} = x (x+1) ... (x+|Π|-1)` for every `Π ⊢ m`.
pub fn rising_factorial_identity_check(m: usize, x: u64) -> Result<bool> {
    let parts = partitions(m)?;
    let xf = x as f64;
    Ok(parts.par_iter().all(|a| {
        let lhs: f64 = parts
            .iter()
            .filter(|p| a.refines_unchecked(p))
            .map(|p| mobius(a, p).expect("same size").abs() as f64 * xf.powi(p.num_blocks() as i32))
            .sum();
        let rhs = rising(xf, a.num_blocks());
        (lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0)
    }))
}

/// Checks `N^{|Π|} = Σ_{Π' ≥ Π} (N)_{|Π'|}` for every `Π ⊢ m`.
pub fn stirling_identity_check(m: usize, n_dim: u64) -> Result<bool> {
    let parts = partitions(m)?;
    let nf = n_dim as f64;
    Ok(parts.par_iter().all(|a| {
        let rhs: f64 = parts
            .iter()
            .filter(|p| a.refines_unchecked(p))
            .map(|p| falling(nf, p.num_blocks()))
            .sum();
        let lhs = nf.powi(a.num_blocks() as i32);
        (lhs - rhs).abs() <= 1e-9 * lhs
    }))
}

/// `Ã_{bc} = Σ_{t ∈ B1_b ∩ B2_c} s_t`, with `s_t = +1` on the first `k` positions.
fn congruence_matrix(p1: &Partition, p2: &Partition, k: usize) -> Vec<Vec<i64>> {
    let mut a = vec![vec![0i64; p2.num_blocks()]; p1.num_blocks()];
    for t in 0..2 * k {
        a[p1.labels[t]][p2.labels[t]] += if t < k { 1 } else { -1 };
    }
    a
}

fn brute_force_count(a: &[Vec<i64>], cols: usize, n_dim: u64) -> u64 {
    let total = (n_dim as u128).pow(cols as u32) as u64;
    let n = n_dim as i64;
    (0..total)
        .into_par_iter()
        .filter(|&code| {
            let mut y = vec![0i64; cols];
            let mut rest = code;
            for v in y.iter_mut() {
                *v = (rest % n_dim) as i64;
                rest /= n_dim;
            }
            a.iter()
                .all(|row| row.iter().zip(&y).map(|(x, v)| x * v).sum::<i64>().rem_euclid(n) == 0)
        })
        .count() as u64
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Diagonal entries of a unimodular diagonalization of an integer matrix.
fn integer_diagonal(mut a: Vec<Vec<i64>>, cols: usize) -> Vec<i64> {
    let rows = a.len();
    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        loop {
            let pivot = (t..rows)
                .flat_map(|i| (t..cols).map(move |j| (i, j)))
                .filter(|&(i, j)| a[i][j] != 0)
                .min_by_key(|&(i, j)| a[i][j].abs());
            let Some((pi, pj)) = pivot else {
                return diag;
            };
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..rows {
                let q = a[i][t] / p;
                if q != 0 {
                    for j in t..cols {
                        a[i][j] -= q * a[t][j];
                    }
                }
                clean &= a[i][t] == 0;
            }
            for j in t + 1..cols {
                let q = a[t][j] / p;
                if q != 0 {
                    for row in a.iter_mut().skip(t) {
                        row[j] -= q * row[t];
                    }
                }
                clean &= a[t][j] == 0;
            }
            if clean {
                diag.push(p);
                break;
            }
        }
    }
    diag
}

fn smith_count(a: &[Vec<i64>], cols: usize, n_dim: u64) -> u64 {
    let diag = integer_diagonal(a.to_vec(), cols);
    let n = n_dim as i64;
    let fixed: u64 = diag.iter().map(|&d| gcd(d, n) as u64).product();
    fixed * n_dim.pow((cols - diag.len()) as u32)
}

/// How congruence solutions are counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMethod {
    Auto,
    BruteForce,
    Smith,
}

/// `#{y ∈ Z_N^{|Π2|} : Ã y ≡ 0 mod N}`.
pub fn congruence_count(p1: &Partition, p2: &Partition, n_dim: u64, k: usize, method: CountMethod) -> Result<u64> {
    ensure_same(p1.m, 2 * k)?;
    ensure_same(p2.m, 2 * k)?;
    let a = congruence_matrix(p1, p2, k);
    let cols = p2.num_blocks();
    let space = (n_dim as f64).powi(cols as i32);
    let brute = match method {
        CountMethod::Auto => space <= BRUTE_FORCE_LIMIT as f64,
        CountMethod::BruteForce => {
            if space > BRUTE_FORCE_LIMIT as f64 {
                return Err(Error::Budget(format!(
                    "{n_dim}^{cols} candidate solutions exceed the brute-force limit"
                )));
            }
            true
        }
        CountMethod::Smith => false,
    };
    Ok(if brute {
        brute_force_count(&a, cols, n_dim)
    } else {
        smith_count(&a, cols, n_dim)
    })
}

/// `⟨E_{Π1}| F^{⊗k,k} |E_{Π2}⟩ = N^{-k + (|Π1| - |Π2|)/2} · count`.
pub fn fourier_e_element(p1: &Partition, p2: &Partition, n_dim: u64, k: usize) -> Result<f64> {
    let count = congruence_count(p1, p2, n_dim, k, CountMethod::Auto)? as f64;
    let nf = n_dim as f64;
    Ok(nf.powf(-(k as f64) + (p1.num_blocks() as f64 - p2.num_blocks() as f64) / 2.0) * count)
}

/// Result of a spectral-norm computation on the expander's restricted operator.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub lambda: f64,
    pub unit_count: usize,
    pub method: String,
    pub conditioning: f64,
}

/// Classical-TPE invariant partitions `Π ⊢ 2k` with at most `N` blocks.
fn basis_partitions(n_dim: u64, k: usize) -> Result<Vec<Partition>> {
    Ok(partitions(2 * k)?
        .into_iter()
        .filter(|p| p.num_blocks() as u64 <= n_dim)
        .collect())
}

fn orthonormal_real(columns: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut norms = Vec::new();
    for v in columns {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = b.iter().zip(&w).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        norms.push(n);
        if n > 1e-10 {
            basis.push(w.into_iter().map(|x| x / n).collect());
        }
    }
    let max = norms.iter().copied().fold(0.0, f64::max);
    let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
    (basis, max / min)
}

/// Restricted matrix `⟨I_a| F^{⊗k,k} |I_b⟩` over the invariant partitions, together
/// with the orthonormalized coordinates of the `|E_{P(π)}⟩` states.
pub struct RestrictedOperator {
    pub partitions: Vec<Partition>,
    pub matrix: DMatrix<f64>,
    pub haar_basis: Vec<Vec<f64>>,
    pub conditioning: f64,
}

pub fn restricted_operator(n_dim: u64, k: usize) -> Result<RestrictedOperator> {
    if k == 0 || k > 3 {
        return Err(Error::Precondition(format!("restricted path needs 1 ≤ k ≤ 3, got {k}")));
    }
    let parts = basis_partitions(n_dim, k)?;
    let all = partitions(2 * k)?;
    let nf = n_dim as f64;
    let index: HashMap<&Partition, usize> = all.iter().enumerate().map(|(i, p)| (p, i)).collect();
    // counts for every pair of partitions, needed by the Möbius expansion
    let pairs: Vec<(usize, usize)> = (0..all.len()).flat_map(|a| (0..all.len()).map(move |b| (a, b))).collect();
    let counts: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let count = congruence_count(&all[a], &all[b], n_dim, k, CountMethod::Auto)? as f64;
            // √(|E_a||E_b|) e(a, b) = N^{|a| - k} count
            Ok(nf.powi(all[a].num_blocks() as i32 - k as i32) * count)
        })
        .collect();
    let counts: Vec<f64> = counts.into_iter().collect::<Result<_>>()?;
    let weighted = |a: usize, b: usize| counts[a * all.len() + b];
    let above: Vec<Vec<(usize, f64)>> = parts
        .iter()
        .map(|p| {
            all.iter()
                .filter(|q| p.refines_unchecked(q))
                .map(|q| (index[q], mobius(p, q).expect("same size") as f64))
                .collect()
        })
        .collect();
    let size = |p: &Partition| falling(nf, p.num_blocks());
    let m = parts.len();
    let mut matrix = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            let mut acc = 0.0;
            for &(qa, ma) in &above[a] {
                for &(qb, mb) in &above[b] {
                    acc += ma * mb * weighted(qa, qb);
                }
            }
            matrix[(a, b)] = acc / (size(&parts[a]) * size(&parts[b])).sqrt();
        }
    }
    let haar_coords: Vec<Vec<f64>> = Permutation::all(k)
        .iter()
        .map(|pi| {
            let pairing = Partition::pairing(pi);
            let e_size = nf.powi(pairing.num_blocks() as i32);
            parts
                .iter()
                .map(|q| {
                    if pairing.refines_unchecked(q) {
                        (size(q) / e_size).sqrt()
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let (haar_basis, conditioning) = orthonormal_real(&haar_coords);
    Ok(RestrictedOperator {
        partitions: parts,
        matrix,
        haar_basis,
        conditioning,
    })
}

fn complement_projector(dim: usize, basis: &[Vec<f64>]) -> DMatrix<f64> {
    let mut q = DMatrix::identity(dim, dim);
    for b in basis {
        let v = nalgebra::DVector::from_column_slice(b);
        q -= &v * v.transpose();
    }
    q
}

/// `λ_A` from the restricted operator, with the trace check
/// `tr(M²) ≥ k! + λ_A²` reported as `Err` when it fails.
pub fn lambda_a(n_dim: u64, k: usize) -> Result<SpectralReport> {
    let op = restricted_operator(n_dim, k)?;
    let m = op.partitions.len();
    let q = complement_projector(m, &op.haar_basis);
    let reduced = &q * &op.matrix * &q;
    let lambda = reduced.clone().singular_values().max();
    let trace_sq = (&op.matrix * &op.matrix).trace();
    let kf = factorial(k) as f64;
    if trace_sq < kf + lambda * lambda - 1e-8 * trace_sq.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "trace check failed: tr(M²) = {trace_sq} < k! + λ² = {}",
            kf + lambda * lambda
        )));
    }
    let unit_count = op
        .matrix
        .clone()
        .singular_values()
        .iter()
        .filter(|&&s| s >= 1.0 - UNIT_THRESHOLD)
        .count();
    Ok(SpectralReport {
        lambda,
        unit_count,
        method: "restricted".into(),
        conditioning: op.conditioning,
    })
}

/// `2 (2k)^{4k} / √N`.
pub fn lambda_a_bound(n_dim: u64, k: usize) -> f64 {
    2.0 * ((2 * k) as f64).powi(4 * k as i32) / (n_dim as f64).sqrt()
}

fn tuple_pattern(mut index: usize, n_dim: usize, len: usize) -> Partition {
    let mut digits = vec![0usize; len];
    for t in (0..len).rev() {
        digits[t] = index % n_dim;
        index /= n_dim;
    }
    Partition::from_labels(&digits)
}

/// Explicit `|I_Π⟩` vectors over `[N]^{len}`, one per realizable pattern.
fn dense_i_states(n_dim: usize, len: usize) -> Result<(Vec<Partition>, Vec<CVector>)> {
    let dim = n_dim.checked_pow(len as u32).filter(|&d| d <= DENSE_TPE_LIMIT).ok_or_else(|| {
        Error::guard(format!("dense states on {n_dim}^{len}"), DENSE_TPE_LIMIT)
    })?;
    let mut order: Vec<Partition> = Vec::new();
    let mut lookup: HashMap<Partition, usize> = HashMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for idx in 0..dim {
        let p = tuple_pattern(idx, n_dim, len);
        let slot = *lookup.entry(p.clone()).or_insert_with(|| {
            order.push(p);
            members.push(Vec::new());
            members.len() - 1
        });
        members[slot].push(idx);
    }
    let states = members
        .iter()
        .map(|ms| {
            let amp = 1.0 / (ms.len() as f64).sqrt();
            let mut v = CVector::zeros(dim);
            for &i in ms {
                v[i] = c(amp, 0.0);
            }
            v
        })
        .collect();
    Ok((order, states))
}

/// Applies `F^{⊗k} ⊗ F̄^{⊗k}` factor by factor.
fn apply_fourier_kk(v: &CVector, n_dim: usize, k: usize) -> CVector {
    let f = fourier_matrix(n_dim);
    let fbar = f.map(|z| z.conj());
    let len = 2 * k;
    let mut cur = v.clone();
    for t in 0..len {
        let mat = if t < k { &f } else { &fbar };
        let stride = n_dim.pow((len - 1 - t) as u32);
        let mut next = CVector::zeros(cur.len());
        for base in 0..cur.len() {
            if (base / stride) % n_dim != 0 {
                continue;
            }
            for a in 0..n_dim {
                let mut acc = c(0.0, 0.0);
                for b in 0..n_dim {
                    acc += mat[(a, b)] * cur[base + b * stride];
                }
                next[base + a * stride] = acc;
            }
        }
        cur = next;
    }
    cur
}

/// `λ_A` from explicit vectors on `C^{N^{2k}}`: the invariant subspace is spanned by
/// enumerated `|I_Π⟩` tuples, `F^{⊗k,k}` is applied factor by factor, and the Haar
/// states come from the moment projector.
pub fn lambda_a_dense(n_dim: usize, k: usize) -> Result<SpectralReport> {
    let (_, states) = dense_i_states(n_dim, 2 * k)?;
    let dim = states[0].len();
    let haar = HaarProjector::new(n_dim, k)?;
    let haar_states: Vec<CVector> = (0..haar.permutations().len())
        .map(|a| {
            let mut v = CVector::zeros(dim);
            for i in haar.state_support(a) {
                v[i] = c(haar.state_entry(a, i), 0.0);
            }
            v
        })
        .collect();
    let q = crate::linalg::orthonormal_columns(&haar_states, 1e-10);
    let m = states.len();
    let v = CMatrix::from_columns(&states);
    let images: Vec<CVector> = states.par_iter().map(|s| apply_fourier_kk(s, n_dim, k)).collect();
    let fv = CMatrix::from_columns(&images);
    let qm = CMatrix::from_columns(&q);
    if dim <= 256 {
        // full operator (P_V - Q) F (P_V - Q)
        let pv = &v * v.adjoint();
        let proj = pv - &qm * qm.adjoint();
        let full = fourier_kk_dense(n_dim, k)?;
        let op = &proj * full * &proj;
        return Ok(SpectralReport {
            lambda: spectral_norm(&op),
            unit_count: 0,
            method: format!("dense {dim}x{dim}"),
            conditioning: 1.0,
        });
    }
    let a = v.adjoint() * fv;
    let coords = v.adjoint() * qm;
    let proj = CMatrix::identity(m, m) - &coords * coords.adjoint();
    let op = &proj * a * &proj;
    Ok(SpectralReport {
        lambda: spectral_norm(&op),
        unit_count: 0,
        method: format!("dense vectors on {dim} dimensions"),
        conditioning: 1.0,
    })
}

fn fourier_kk_dense(n_dim: usize, k: usize) -> Result<CMatrix> {
    tensor_power_kk(&fourier_matrix(n_dim), k)
}

/// Projector onto `span{|I_Π⟩ : Π ⊢ k}` on `C^{N^k}`.
pub fn symmetric_group_projector(n_dim: usize, k: usize) -> Result<CMatrix> {
    let (_, states) = dense_i_states(n_dim, k)?;
    let dim = states[0].len();
    if dim > DENSE_MOMENT_LIMIT {
        return Err(Error::guard(format!("dense projector of dimension {dim}"), DENSE_MOMENT_LIMIT));
    }
    let mut p = CMatrix::zeros(dim, dim);
    for s in &states {
        p += s * s.adjoint();
    }
    Ok(p)
}

fn permutation_power(perms: &[Permutation], power: usize) -> Result<CMatrix> {
    let n_dim = perms
        .first()
        .ok_or_else(|| Error::Precondition("empty permutation set".into()))?
        .len();
    let dim = n_dim
        .checked_pow(power as u32)
        .filter(|&d| d <= DENSE_MOMENT_LIMIT)
        .ok_or_else(|| Error::guard(format!("dense {n_dim}^{power} permutation moment"), DENSE_MOMENT_LIMIT))?;
    let mut acc = CMatrix::zeros(dim, dim);
    let w = 1.0 / perms.len() as f64;
    for pi in perms {
        ensure_same(pi.len(), n_dim)?;
        // B^{⊗power} maps tuple (i_1..i_p) to (π(i_1)..π(i_p))
        for col in 0..dim {
            let mut rest = col;
            let mut row = 0;
            let mut scale = 1;
            for _ in 0..power {
                row += pi.apply(rest % n_dim) * scale;
                rest /= n_dim;
                scale *= n_dim;
            }
            acc[(row, col)] += c(w, 0.0);
        }
    }
    Ok(acc)
}

/// `‖E_ν[B(π)^{⊗k}] - E_{S_N}[B(π)^{⊗k}]‖_∞` for a uniform permutation set.
pub fn classical_tpe_lambda(perms: &[Permutation], k: usize) -> Result<f64> {
    let moment = permutation_power(perms, k)?;
    let n_dim = perms[0].len();
    let proj = symmetric_group_projector(n_dim, k)?;
    Ok(spectral_norm(&(moment - proj)))
}

/// Uniform random permutations of `[N]`, with their inverses when `symmetric`.
pub fn random_permutation_set<R: Rng + ?Sized>(n_dim: usize, count: usize, symmetric: bool, rng: &mut R) -> Vec<Permutation> {
    let mut out = Vec::new();
    for _ in 0..count {
        let mut images: Vec<usize> = (0..n_dim).collect();
        images.shuffle(rng);
        let p = Permutation::new(images).expect("shuffled identity");
        if symmetric {
            out.push(p.inverse());
        }
        out.push(p);
    }
    out
}

/// Measured quantities for the mixture `p ν_C + (1 - p) δ_F`.
#[derive(Clone, Debug, Serialize)]
pub struct QuantumTpeReport {
    pub n_dim: usize,
    pub k: usize,
    pub p: f64,
    pub lambda_q: f64,
    pub lambda_c: f64,
    pub lambda_a: f64,
    pub unit_count: usize,
    /// `1 - (ε_A / 12) min(p ε_C, 1 - p)`, when both gaps are positive.
    pub bound_rhs: Option<f64>,
    pub bound_satisfied: Option<bool>,
    /// `1 / (1 + ε_C)`.
    pub optimal_p: f64,
}

pub fn quantum_tpe_lambda(perms: &[Permutation], p: f64, k: usize) -> Result<QuantumTpeReport> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Precondition(format!("mixing weight must lie in [0, 1], got {p}")));
    }
    let n_dim = perms
        .first()
        .ok_or_else(|| Error::Precondition("empty permutation set".into()))?
        .len();
    let classical = permutation_power(perms, 2 * k)?;
    let fourier = fourier_kk_dense(n_dim, k)?;
    let mixture = &classical * c(p, 0.0) + &fourier * c(1.0 - p, 0.0);
    let haar = HaarProjector::new(n_dim, k)?.to_dense()?;
    let lambda_q = spectral_norm(&(&mixture - &haar));
    let unit_count = general_eigenvalues(&mixture)?
        .iter()
        .filter(|z| z.norm() >= 1.0 - UNIT_THRESHOLD)
        .count();
    let lambda_c = spectral_norm(&(classical - symmetric_group_projector(n_dim, 2 * k)?));
    let lambda_a = lambda_a(n_dim as u64, k)?.lambda;
    let (eps_c, eps_a) = (1.0 - lambda_c, 1.0 - lambda_a);
    let valid = eps_c > 0.0 && eps_a > 0.0;
    let bound_rhs = valid.then(|| 1.0 - eps_a / 12.0 * (p * eps_c).min(1.0 - p));
    Ok(QuantumTpeReport {
        n_dim,
        k,
        p,
        lambda_q,
        lambda_c,
        lambda_a,
        unit_count,
        bound_rhs,
        bound_satisfied: bound_rhs.map(|b| lambda_q <= b + 1e-12),
        optimal_p: 1.0 / (1.0 + eps_c),
    })
}

/// Iterations `m = ceil(log(N^{2k} / eps) / log(1 / λ))` giving a TRACE design.
pub fn design_iterations(n_dim: u64, k: usize, lambda: f64, eps: f64) -> Result<u64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Precondition(format!("λ must lie in (0, 1), got {lambda}")));
    }
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("eps must be positive, got {eps}")));
    }
    let ratio = (2.0 * k as f64) * (n_dim as f64).ln() - eps.ln();
    let m = (ratio / -lambda.ln()).ceil();
    Ok(if m <= 0.0 { 0 } else { m as u64 })
}

/// Singular values of the restricted operator, descending.
pub fn restricted_spectrum(n_dim: u64, k: usize) -> Result<Vec<f64>> {
    let op = restricted_operator(n_dim, k)?;
    Ok(singular_values(&crate::linalg::real_to_complex(&op.matrix)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(m: usize, blocks: &[&[usize]]) -> Partition {
        Partition::from_blocks(m, &blocks.iter().map(|b| b.iter().map(|x| x - 1).collect()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975];
        for (m, &b) in bell.iter().enumerate() {
            assert_eq!(partitions(m).unwrap().len(), b);
            assert!((b as u128) <= factorial(m.max(1)));
        }
    }

    #[test]
    fn refinement_and_meet() {
        let a = part(3, &[&[1, 2], &[3]]);
        assert!(a.refines(&Partition::one_block(3)).unwrap());
        assert!(Partition::singletons(3).refines(&a).unwrap());
        let x = part(4, &[&[1, 2], &[3, 4]]);
        let y = part(4, &[&[1, 3], &[2, 4]]);
        assert_eq!(x.meet(&y).unwrap(), Partition::singletons(4));
        assert_eq!(a.to_string(), "{{1,2},{3}}");
    }

    #[test]
    fn mobius_values() {
        let s = Partition::singletons(3);
        assert_eq!(mobius(&s, &s).unwrap(), 1);
        assert_eq!(mobius(&s, &Partition::one_block(3)).unwrap(), 2);
        assert_eq!(mobius_inverse_check(4).unwrap(), 0);
    }

    #[test]
    fn identities_small() {
        for x in [1, 2, 3, 7] {
            assert!(rising_factorial_identity_check(5, x).unwrap());
        }
        assert!(stirling_identity_check(5, 16).unwrap());
    }

    #[test]
    fn counting_methods_agree() {
        let parts = partitions(4).unwrap();
        for n_dim in [2u64, 3, 6, 8, 12] {
            for a in &parts {
                for b in &parts {
                    let bf = congruence_count(a, b, n_dim, 2, CountMethod::BruteForce).unwrap();
                    let sm = congruence_count(a, b, n_dim, 2, CountMethod::Smith).unwrap();
                    assert_eq!(bf, sm, "{a} {b} N={n_dim}");
                }
            }
        }
    }

    #[test]
    fn pairing_elements_are_one() {
        for pi in Permutation::all(2) {
            let p = Partition::pairing(&pi);
            assert!((fourier_e_element(&p, &p, 7, 2).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn design_iteration_examples() {
        assert_eq!(design_iterations(2, 1, 0.5, 1.0 / 16.0).unwrap(), 6);
        assert_eq!(design_iterations(3, 2, 0.3, 81.0).unwrap(), 0);
        assert!(design_iterations(2, 1, 1.0, 0.1).is_err());
    }

    #[test]
    fn small_two_paths_agree() {
        let r = lambda_a(6, 1).unwrap().lambda;
        let d = lambda_a_dense(6, 1).unwrap().lambda;
        assert!((r - d).abs() < 1e-9, "{r} vs {d}");
    }
}
