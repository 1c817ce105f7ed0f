//! Learning and testing unitaries in the Gottesman-Chuang hierarchy through oracle
//! queries.
//!
//! Learners see an unknown unitary only through [`Oracle`] calls on a [`Register`]
//! holding half of a maximally entangled pair. The register tracks the operator `W`
//! applied so far, and a Bell measurement then returns outcome `p` with probability
//! `|tr(W σ_p)|² / 4ⁿ`. A register carries a number of identical copies so repeated
//! measurements cost one oracle call per copy.

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Binomial;
use serde::Serialize;

use crate::clifford::{enumerate_group, CliffordTableau};
use crate::error::{ensure_same, Error, Result};
use crate::linalg::{c, unitarity_error, CMatrix};
use crate::pauli::{all_paulis, PauliString};

/// Largest register for dense Bell-measurement statistics.
pub const DENSE_LEARNING_MAX_QUBITS: usize = 6;
/// Tolerance for treating a Bell outcome distribution as a point mass.
pub const POINT_MASS_TOL: f64 = 1e-9;
const UNITARY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DistanceKind {
    /// Phase-invariant distance `sqrt(1 - |tr(U₁U₂†)/d|²)`.
    D,
    /// Normalized 2-norm distance `sqrt(1 - Re tr(U₁U₂†)/d)`.
    DPlus,
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceKind::D => "D",
            DistanceKind::DPlus => "D+",
        })
    }
}

impl FromStr for DistanceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D" | "d" => Ok(DistanceKind::D),
            "D+" | "d+" | "Dplus" | "dplus" => Ok(DistanceKind::DPlus),
            other => Err(Error::Parse(format!("unknown distance kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistanceValue {
    pub value: f64,
    pub kind: DistanceKind,
}

pub fn distance(u1: &CMatrix, u2: &CMatrix, kind: DistanceKind) -> Result<DistanceValue> {
    ensure_same(u1.nrows(), u2.nrows())?;
    for (name, u) in [("first", u1), ("second", u2)] {
        if !u.is_square() || unitarity_error(u) > UNITARY_TOL {
            return Err(Error::Precondition(format!("{name} operand is not unitary")));
        }
    }
    Ok(DistanceValue {
        value: distance_unchecked(u1, u2, kind),
        kind,
    })
}

/// [`distance`] without the O(d³) unitarity check, for operands unitary by construction.
pub fn distance_unchecked(u1: &CMatrix, u2: &CMatrix, kind: DistanceKind) -> f64 {
    let d = u1.nrows() as f64;
    // squared Frobenius gaps avoid the cancellation in 1 - |tr/d|² near zero distance
    let gap = |phase: num_complex::Complex64| {
        u1.iter().zip(u2.iter()).map(|(a, b)| (a - phase * b).norm_sqr()).sum::<f64>() / (2.0 * d)
    };
    match kind {
        DistanceKind::DPlus => gap(c(1.0, 0.0)).sqrt(),
        DistanceKind::D => {
            let overlap: num_complex::Complex64 = u1.iter().zip(u2.iter()).map(|(a, b)| a * b.conj()).sum();
            let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
            let s = gap(phase).min(1.0);
            (s * (2.0 - s)).max(0.0).sqrt()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QueryCount {
    pub forward: u64,
    pub adjoint: u64,
}

#[derive(Clone, Debug)]
enum Op {
    Clifford(CliffordTableau),
    Dense(CMatrix),
}

/// Operator applied to half of a maximally entangled pair, with a copy count.
#[derive(Clone, Debug)]
pub struct Register {
    n: usize,
    op: Op,
    copies: u64,
}

fn tableau_dense(t: &CliffordTableau) -> Result<CMatrix> {
    Ok(t.to_unitary()?.into_matrix())
}

impl Register {
    pub fn bell(n: usize, copies: u64) -> Result<Self> {
        if copies == 0 {
            return Err(Error::Precondition("a register needs at least one copy".into()));
        }
        Ok(Register {
            n,
            op: Op::Clifford(CliffordTableau::identity(n)),
            copies,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn copies(&self) -> u64 {
        self.copies
    }

    fn dense(&self) -> Result<CMatrix> {
        if self.n > DENSE_LEARNING_MAX_QUBITS {
            return Err(Error::guard(format!("dense register on {} qubits", self.n), DENSE_LEARNING_MAX_QUBITS));
        }
        match &self.op {
            Op::Clifford(t) => tableau_dense(t),
            Op::Dense(m) => Ok(m.clone()),
        }
    }

    /// `W ← C W`.
    pub fn apply_clifford(&mut self, t: &CliffordTableau) -> Result<()> {
        ensure_same(t.num_qubits(), self.n)?;
        self.op = match &self.op {
            Op::Clifford(w) => Op::Clifford(t.compose(w)?),
            Op::Dense(w) => Op::Dense(tableau_dense(t)? * w),
        };
        Ok(())
    }

    /// `W ← σ_p W`.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        ensure_same(p.num_qubits(), self.n)?;
        self.op = match &self.op {
            Op::Clifford(w) => Op::Clifford(CliffordTableau::from_pauli(p).compose(w)?),
            Op::Dense(w) => Op::Dense(p.left_multiply(w)?),
        };
        Ok(())
    }

    /// `W ← U W`.
    pub fn apply_dense(&mut self, u: &CMatrix) -> Result<()> {
        ensure_same(u.nrows(), 1 << self.n)?;
        let w = self.dense()?;
        self.op = Op::Dense(u * w);
        Ok(())
    }

    /// Bell outcome probabilities `|tr(W σ_p)|² / 4ⁿ` indexed by `p.index()`.
    pub fn outcome_distribution(&self) -> Result<Vec<f64>> {
        let w = self.dense()?;
        let d = 1usize << self.n;
        let norm = (d * d) as f64;
        Ok(all_paulis(self.n)
            .map(|p| {
                let tr: num_complex::Complex64 = (0..d)
                    .map(|j| {
                        let (i, amp) = p.apply_basis(j as u64);
                        amp * w[(j, i as usize)]
                    })
                    .sum();
                tr.norm_sqr() / norm
            })
            .collect())
    }

    /// Outcome of a measurement whose distribution must be a point mass.
    pub fn measure_exact(&self) -> Result<PauliString> {
        if let Op::Clifford(t) = &self.op {
            if let Some(p) = t.as_pauli() {
                return Ok(p);
            }
        }
        let probs = self.outcome_distribution()?;
        let (best, &mass) = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty distribution");
        if mass < 1.0 - POINT_MASS_TOL {
            return Err(Error::NotConcentrated { max_probability: mass });
        }
        PauliString::from_index(self.n, best as u128)
    }

    /// Outcome counts over all copies, most frequent first.
    pub fn sample_counts<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<(PauliString, u64)>> {
        if let Op::Clifford(t) = &self.op {
            if let Some(p) = t.as_pauli() {
                return Ok(vec![(p, self.copies)]);
            }
        }
        let probs = self.outcome_distribution()?;
        let dist = WeightedIndex::new(&probs).map_err(|e| Error::Numerical(e.to_string()))?;
        let mut counts = vec![0u64; probs.len()];
        for _ in 0..self.copies {
            counts[dist.sample(rng)] += 1;
        }
        let mut out: Vec<(PauliString, u64)> = counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(i, c)| (PauliString::from_index(self.n, i as u128).expect("index below 4^n"), c))
            .collect();
        out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.index().cmp(&b.0.index())));
        Ok(out)
    }

    /// Number of copies yielding outcome `p`.
    pub fn sample_hits<R: Rng + ?Sized>(&self, p: &PauliString, rng: &mut R) -> Result<u64> {
        ensure_same(p.num_qubits(), self.n)?;
        let prob = match &self.op {
            Op::Clifford(t) => match t.as_pauli() {
                Some(q) => f64::from(q == p.unsigned()),
                None => self.outcome_distribution()?[p.index() as usize],
            },
            Op::Dense(_) => self.outcome_distribution()?[p.index() as usize],
        };
        let b = Binomial::new(self.copies, prob.clamp(0.0, 1.0)).map_err(|e| Error::Numerical(e.to_string()))?;
        Ok(b.sample(rng))
    }
}

/// Query access to a unitary and its adjoint.
pub trait Oracle {
    fn num_qubits(&self) -> usize;
    /// `W ← U W`, once per copy in the register.
    fn apply(&self, reg: &mut Register) -> Result<()>;
    /// `W ← U† W`, once per copy in the register.
    fn apply_adjoint(&self, reg: &mut Register) -> Result<()>;
}

#[derive(Clone, Debug)]
enum Backing {
    Tableau { forward: CliffordTableau, inverse: CliffordTableau },
    Dense { forward: CMatrix, adjoint: CMatrix },
}

/// Black-box unitary with exact query counters.
#[derive(Debug)]
pub struct UnitaryOracle {
    n: usize,
    backing: Backing,
    counts: Cell<QueryCount>,
}

impl UnitaryOracle {
    pub fn from_tableau(t: CliffordTableau) -> Self {
        UnitaryOracle {
            n: t.num_qubits(),
            backing: Backing::Tableau {
                inverse: t.inverse(),
                forward: t,
            },
            counts: Cell::new(QueryCount::default()),
        }
    }

    pub fn from_dense(u: CMatrix) -> Result<Self> {
        let d = u.nrows();
        if !u.is_square() || !d.is_power_of_two() {
            return Err(Error::Precondition(format!("{}x{} is not a qubit operator", u.nrows(), u.ncols())));
        }
        if unitarity_error(&u) > UNITARY_TOL {
            return Err(Error::Precondition("oracle operator is not unitary".into()));
        }
        let n = d.trailing_zeros() as usize;
        if n > DENSE_LEARNING_MAX_QUBITS {
            return Err(Error::guard(format!("dense oracle on {n} qubits"), DENSE_LEARNING_MAX_QUBITS));
        }
        Ok(UnitaryOracle {
            n,
            backing: Backing::Dense {
                adjoint: u.adjoint(),
                forward: u,
            },
            counts: Cell::new(QueryCount::default()),
        })
    }

    pub fn queries(&self) -> QueryCount {
        self.counts.get()
    }

    fn bump(&self, reg: &Register, adjoint: bool) {
        let mut q = self.counts.get();
        if adjoint {
            q.adjoint += reg.copies;
        } else {
            q.forward += reg.copies;
        }
        self.counts.set(q);
    }
}

impl Oracle for UnitaryOracle {
    fn num_qubits(&self) -> usize {
        self.n
    }

    fn apply(&self, reg: &mut Register) -> Result<()> {
        ensure_same(reg.n, self.n)?;
        self.bump(reg, false);
        match &self.backing {
            Backing::Tableau { forward, .. } => reg.apply_clifford(forward),
            Backing::Dense { forward, .. } => reg.apply_dense(forward),
        }
    }

    fn apply_adjoint(&self, reg: &mut Register) -> Result<()> {
        ensure_same(reg.n, self.n)?;
        self.bump(reg, true);
        match &self.backing {
            Backing::Tableau { inverse, .. } => reg.apply_clifford(inverse),
            Backing::Dense { adjoint, .. } => reg.apply_dense(adjoint),
        }
    }
}

/// `U σ_g U†`, which is its own adjoint.
struct Conjugated<'a> {
    parent: &'a dyn Oracle,
    pauli: PauliString,
}

impl Oracle for Conjugated<'_> {
    fn num_qubits(&self) -> usize {
        self.parent.num_qubits()
    }

    fn apply(&self, reg: &mut Register) -> Result<()> {
        self.parent.apply_adjoint(reg)?;
        reg.apply_pauli(&self.pauli)?;
        self.parent.apply(reg)
    }

    fn apply_adjoint(&self, reg: &mut Register) -> Result<()> {
        self.apply(reg)
    }
}

/// Known operator in a learned description.
#[derive(Clone, Debug)]
enum Known {
    Clifford(CliffordTableau),
    Dense(CMatrix),
}

impl Known {
    fn apply(&self, reg: &mut Register) -> Result<()> {
        match self {
            Known::Clifford(t) => reg.apply_clifford(t),
            Known::Dense(m) => reg.apply_dense(m),
        }
    }

    fn adjoint(&self) -> Known {
        match self {
            Known::Clifford(t) => Known::Clifford(t.inverse()),
            Known::Dense(m) => Known::Dense(m.adjoint()),
        }
    }
}

/// `K U` for a known `K`.
struct LeftCorrected<'a> {
    parent: &'a dyn Oracle,
    left: Known,
    left_adjoint: Known,
}

impl Oracle for LeftCorrected<'_> {
    fn num_qubits(&self) -> usize {
        self.parent.num_qubits()
    }

    fn apply(&self, reg: &mut Register) -> Result<()> {
        self.parent.apply(reg)?;
        self.left.apply(reg)
    }

    fn apply_adjoint(&self, reg: &mut Register) -> Result<()> {
        self.left_adjoint.apply(reg)?;
        self.parent.apply_adjoint(reg)
    }
}

/// Learned element of level `k`, each level known up to phase.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CkDescription {
    Pauli { pauli: PauliString },
    Clifford { tableau: CliffordTableau },
    /// Generator images at level `k - 1` in the order `X0, Z0, X1, …`, then the
    /// Pauli correction applied on the right.
    Level {
        k: usize,
        images: Vec<CkDescription>,
        correction: PauliString,
    },
}

impl CkDescription {
    pub fn level(&self) -> usize {
        match self {
            CkDescription::Pauli { .. } => 1,
            CkDescription::Clifford { .. } => 2,
            CkDescription::Level { k, .. } => *k,
        }
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        match self {
            CkDescription::Pauli { pauli } => pauli.to_dense(),
            CkDescription::Clifford { tableau } => tableau_dense(tableau),
            CkDescription::Level { images, correction, .. } => {
                let dense: Vec<CMatrix> = images.iter().map(|d| d.to_dense()).collect::<Result<_>>()?;
                let base = unitary_from_images(&dense)?;
                Ok(base * correction.to_dense()?)
            }
        }
    }
}

/// Phase-fixes `M = e^{iφ} H` to a Hermitian involution `H` (sign arbitrary).
fn hermitian_representative(m: &CMatrix) -> Result<CMatrix> {
    let (mut best, mut at) = (0.0, (0, 0));
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)].norm();
            if v > best {
                best = v;
                at = (i, j);
            }
        }
    }
    let twice = m[at] * m[(at.1, at.0)];
    let phase = c(0.0, -twice.arg() / 2.0).exp();
    let h = m * phase;
    let d = m.nrows();
    if (&h - h.adjoint()).norm() > 1e-7 * d as f64 || (&h * &h - CMatrix::identity(d, d)).norm() > 1e-7 * d as f64 {
        return Err(Error::Promise("generator image is not a Hermitian involution up to phase".into()));
    }
    Ok(h)
}

/// Unitary `C'` with `C' σ_g C'† = ±V_g` for generator images `V_g` in the order
/// `X0, Z0, X1, …`, each given up to phase.
fn unitary_from_images(images: &[CMatrix]) -> Result<CMatrix> {
    let n = images.len() / 2;
    let d = 1usize << n;
    let fixed: Vec<CMatrix> = images.iter().map(hermitian_representative).collect::<Result<_>>()?;
    let mut proj = CMatrix::identity(d, d);
    for q in 0..n {
        proj = (&fixed[2 * q + 1] + CMatrix::identity(d, d)) * c(0.5, 0.0) * proj;
    }
    let col = (0..d)
        .max_by(|&a, &b| proj.column(a).norm().total_cmp(&proj.column(b).norm()))
        .expect("d ≥ 1");
    let norm = proj.column(col).norm();
    if norm < 1e-6 {
        return Err(Error::Promise("Z images share no common eigenvector".into()));
    }
    let psi0 = proj.column(col) / c(norm, 0.0);
    let mut out = CMatrix::zeros(d, d);
    for x in 0..d {
        let mut v = psi0.clone();
        for q in 0..n {
            if (x >> q) & 1 == 1 {
                v = &fixed[2 * q] * v;
            }
        }
        out.set_column(x, &v);
    }
    if unitarity_error(&out) > 1e-7 {
        return Err(Error::Promise("generator images do not satisfy the Pauli relations".into()));
    }
    Ok(out)
}

/// How leaf-level Pauli identifications are read out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeafMode {
    /// Single query; the outcome distribution must be a point mass.
    Exact,
    /// `repetitions` queries followed by a strict-majority vote.
    Majority { repetitions: u64 },
}

fn learn_leaf<R: Rng + ?Sized>(oracle: &dyn Oracle, mode: LeafMode, rng: &mut R) -> Result<PauliString> {
    let n = oracle.num_qubits();
    match mode {
        LeafMode::Exact => {
            let mut reg = Register::bell(n, 1)?;
            oracle.apply(&mut reg)?;
            reg.measure_exact()
        }
        LeafMode::Majority { repetitions } => {
            let mut reg = Register::bell(n, repetitions)?;
            oracle.apply(&mut reg)?;
            let counts = reg.sample_counts(rng)?;
            let (p, top) = counts[0];
            if 2 * top <= repetitions {
                return Err(Error::Promise(format!(
                    "no strict majority: top outcome {p} seen {top} of {repetitions} times"
                )));
            }
            Ok(p)
        }
    }
}

/// Identifies a Pauli oracle with one query.
pub fn learn_pauli(oracle: &dyn Oracle) -> Result<PauliString> {
    let mut reg = Register::bell(oracle.num_qubits(), 1)?;
    oracle.apply(&mut reg)?;
    reg.measure_exact()
}

fn learn_level<R: Rng + ?Sized>(oracle: &dyn Oracle, k: usize, mode: LeafMode, rng: &mut R) -> Result<CkDescription> {
    let n = oracle.num_qubits();
    if k == 1 {
        return Ok(CkDescription::Pauli {
            pauli: learn_leaf(oracle, mode, rng)?,
        });
    }
    let mut images = Vec::with_capacity(2 * n);
    for g in PauliString::generators(n) {
        let sub = Conjugated { parent: oracle, pauli: g };
        images.push(learn_level(&sub, k - 1, mode, rng)?);
    }
    let base = if k == 2 {
        let paulis: Vec<PauliString> = images
            .iter()
            .map(|d| match d {
                CkDescription::Pauli { pauli } => *pauli,
                _ => unreachable!("level-1 images are Paulis"),
            })
            .collect();
        Known::Clifford(CliffordTableau::synthesize(&paulis)?)
    } else {
        let dense: Vec<CMatrix> = images.iter().map(|d| d.to_dense()).collect::<Result<_>>()?;
        Known::Dense(unitary_from_images(&dense)?)
    };
    let corrected = LeftCorrected {
        parent: oracle,
        left: base.adjoint(),
        left_adjoint: base.clone(),
    };
    let correction = learn_leaf(&corrected, mode, rng)?;
    Ok(match base {
        Known::Clifford(t) => CkDescription::Clifford {
            tableau: t.compose(&CliffordTableau::from_pauli(&correction))?,
        },
        Known::Dense(_) => CkDescription::Level { k, images, correction },
    })
}

/// Exact learning of a level-`k` element.
pub fn learn_ck(oracle: &dyn Oracle, k: usize) -> Result<CkDescription> {
    check_level(oracle.num_qubits(), k)?;
    learn_level(oracle, k, LeafMode::Exact, &mut rand::rng())
}

fn check_level(n: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Precondition("hierarchy levels start at 1".into()));
    }
    if k >= 3 && (k > 3 || n > 2) {
        return Err(Error::guard(format!("level {k} learning on {n} qubits"), 2));
    }
    Ok(())
}

/// Exact Clifford learning from a Clifford oracle and its adjoint.
pub fn learn_clifford(oracle: &dyn Oracle) -> Result<CliffordTableau> {
    match learn_level(oracle, 2, LeafMode::Exact, &mut rand::rng())? {
        CkDescription::Clifford { tableau } => Ok(tableau),
        _ => unreachable!("level 2 yields a tableau"),
    }
}

/// Query counts `T(k) = ((2n)^k - 1)/(2n - 1)` and `T'(k) = (2n)^{k-1}` stated for
/// level-`k` learning.
pub fn stated_ck_queries(n: usize, k: usize) -> QueryCount {
    let m = 2 * n as u64;
    QueryCount {
        forward: (m.pow(k as u32) - 1) / (m - 1),
        adjoint: if k == 1 { 0 } else { m.pow(k as u32 - 1) },
    }
}

/// Queries actually spent by [`learn_ck`]: each lower-level call on `U σ_g U†`
/// costs one forward and one adjoint query.
pub fn required_ck_queries(n: usize, k: usize) -> QueryCount {
    let m = 2 * n as u64;
    let mut q = QueryCount { forward: 1, adjoint: 0 };
    for _ in 1..k {
        let sub = q.forward + q.adjoint;
        q = QueryCount {
            forward: m * sub + 1,
            adjoint: m * sub,
        };
    }
    q
}

/// Settings for approximate learning.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LearningConfig {
    pub eps: f64,
    pub delta: f64,
    /// Multiplies the Hoeffding repetition count at each leaf.
    pub repetition_scale: f64,
}

impl LearningConfig {
    pub fn new(eps: f64, delta: f64) -> Self {
        LearningConfig {
            eps,
            delta,
            repetition_scale: 1.0,
        }
    }

    /// `ε' = sqrt(2(1 - (2^{k-1} ε)²)) - 1`.
    pub fn eps_prime(&self, k: usize) -> f64 {
        let s = 2f64.powi(k as i32 - 1) * self.eps;
        (2.0 * (1.0 - s * s)).max(0.0).sqrt() - 1.0
    }

    /// `ceil(scale · ln((2n+1)^{k-1} / δ) / (2 ε'²))` repetitions per leaf.
    pub fn repetitions(&self, n: usize, k: usize) -> Result<u64> {
        let ep = self.eps_prime(k);
        if !(ep > 0.0) {
            return Err(Error::Precondition(format!(
                "ε = {} leaves no unique closest level-{k} element (ε' = {ep})",
                self.eps
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Precondition(format!("δ must lie in (0, 1), got {}", self.delta)));
        }
        let leaves = (k as f64 - 1.0) * ((2 * n + 1) as f64).ln();
        let r = self.repetition_scale * (leaves - self.delta.ln()) / (2.0 * ep * ep);
        Ok(r.ceil().max(1.0) as u64)
    }
}

/// Finds the unique level-`k` element within `D ≤ ε` of the oracle by majority votes.
pub fn learn_closest<R: Rng + ?Sized>(oracle: &dyn Oracle, k: usize, config: &LearningConfig, rng: &mut R) -> Result<CkDescription> {
    let n = oracle.num_qubits();
    check_level(n, k)?;
    let repetitions = config.repetitions(n, k)?;
    learn_level(oracle, k, LeafMode::Majority { repetitions }, rng)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CoefficientEstimate {
    pub estimate: f64,
    pub shots: u64,
}

/// Shots giving `|γ̂ - γ| ≤ η` with probability `1 - δ` from the frequency of outcome `p`.
pub fn coefficient_shots(eta: f64, delta: f64) -> Result<u64> {
    if !(eta > 0.0 && eta < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("need η, δ in (0, 1), got {eta}, {delta}")));
    }
    // Bernstein on the frequency with deviation 2η√p ± η² for the square root
    Ok((8.0 * (2.0 / delta).ln() / (3.0 * eta * eta)).ceil() as u64)
}

/// Estimates `|tr(U σ_p)| / 2ⁿ` as the square root of the frequency of outcome `p`.
pub fn estimate_pauli_coefficient<R: Rng + ?Sized>(
    oracle: &dyn Oracle,
    p: &PauliString,
    eta: f64,
    delta: f64,
    rng: &mut R,
) -> Result<CoefficientEstimate> {
    let n = oracle.num_qubits();
    if n > DENSE_LEARNING_MAX_QUBITS {
        return Err(Error::guard(format!("{n}-qubit coefficient estimate"), DENSE_LEARNING_MAX_QUBITS));
    }
    let shots = coefficient_shots(eta, delta)?;
    let mut reg = Register::bell(n, shots)?;
    oracle.apply(&mut reg)?;
    let hits = reg.sample_hits(p, rng)?;
    Ok(CoefficientEstimate {
        estimate: (hits as f64 / shots as f64).sqrt(),
        shots,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Close,
    Far,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Close => "CLOSE",
            Verdict::Far => "FAR",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TestReport {
    pub verdict: Verdict,
    pub learned: Option<CliffordTableau>,
    /// Set when the learning stage failed, which only happens outside the promise.
    pub learning_failure: Option<String>,
    /// Estimated `|tr(U σ_g U† C σ_g C†)| / 2ⁿ` per generator.
    pub coefficients: Vec<f64>,
    pub threshold: f64,
    pub shots_per_generator: u64,
}

/// Shots per generator for the coefficient stage of [`test_clifford`].
///
/// With `u = ε²/16n²`, a CLOSE generator misses the identity outcome with rate at most
/// `a = 1 - (1 - 2u)²`, a FAR generator with rate above `b = 1 - (1 - 4u)²`, and the
/// verdict threshold sits at `τ = 1 - (1 - 3u)²`. Multiplicative Chernoff bounds on both
/// sides, with `δ/2` split over `2n` generators for CLOSE and `δ/2` for FAR.
pub fn testing_shots(n: usize, eps: f64, delta: f64) -> Result<u64> {
    if n == 0 || !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("need n ≥ 1 and ε, δ in (0, 1), got {n}, {eps}, {delta}")));
    }
    let u = eps * eps / (16.0 * (n * n) as f64);
    let miss = |s: f64| 1.0 - (1.0 - s * u).powi(2);
    let (a, tau, b) = (miss(2.0), miss(3.0), miss(4.0));
    let up = tau / a - 1.0;
    let down = 1.0 - tau / b;
    let close = (4.0 * n as f64 / delta).ln() * (2.0 + up) / (up * up * a);
    let far = (2.0 / delta).ln() * 2.0 / (down * down * b);
    Ok(close.max(far).ceil() as u64)
}

/// `n³/ε² · ln(n/δ)`, the growth rate of the testing query count.
pub fn testing_envelope(n: usize, eps: f64, delta: f64) -> f64 {
    let nf = n as f64;
    nf.powi(3) / (eps * eps) * (nf / delta).ln().max(1.0)
}

/// Decides whether the oracle is within `ε/(√32 n)` of a Clifford or farther than `ε`
/// from all of them while within `1/3` of one.
pub fn test_clifford<R: Rng + ?Sized>(oracle: &dyn Oracle, eps: f64, delta: f64, rng: &mut R) -> Result<TestReport> {
    let n = oracle.num_qubits();
    let shots = testing_shots(n, eps, delta)?;
    let threshold = 1.0 - 3.0 * eps * eps / (16.0 * (n * n) as f64);
    let learn_cfg = LearningConfig::new(1.0 / 3.0, delta / 2.0);
    let learned = match learn_closest(oracle, 2, &learn_cfg, rng) {
        Ok(CkDescription::Clifford { tableau }) => tableau,
        Ok(_) => unreachable!("level 2 yields a tableau"),
        Err(e) if e.is_precondition() => {
            return Ok(TestReport {
                verdict: Verdict::Far,
                learned: None,
                learning_failure: Some(e.to_string()),
                coefficients: Vec::new(),
                threshold,
                shots_per_generator: shots,
            })
        }
        Err(e) => return Err(e),
    };
    let mut coefficients = Vec::with_capacity(2 * n);
    for g in PauliString::generators(n) {
        let target = learned.conjugate(&g)?;
        let mut reg = Register::bell(n, shots)?;
        Conjugated { parent: oracle, pauli: g }.apply(&mut reg)?;
        reg.apply_pauli(&target)?;
        let hits = reg.sample_hits(&PauliString::identity(n), rng)?;
        coefficients.push((hits as f64 / shots as f64).sqrt());
    }
    let verdict = if coefficients.iter().all(|&x| x >= threshold) {
        Verdict::Close
    } else {
        Verdict::Far
    };
    Ok(TestReport {
        verdict,
        learned: Some(learned),
        learning_failure: None,
        coefficients,
        threshold,
        shots_per_generator: shots,
    })
}

/// Dense unitaries of the full Clifford group, one per phase class.
pub fn clifford_group_dense(n: usize) -> Result<Vec<CMatrix>> {
    enumerate_group(n)?.iter().map(tableau_dense).collect()
}

/// Smallest `D` from `u` to the listed unitaries, with the index attaining it.
pub fn nearest(u: &CMatrix, group: &[CMatrix]) -> (f64, usize) {
    group
        .iter()
        .enumerate()
        .map(|(i, g)| (distance_unchecked(u, g, DistanceKind::D), i))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("nonempty group")
}

/// `diag(1, …, 1, e^{iθ}) · C`.
pub fn corner_phase(c_dense: &CMatrix, theta: f64) -> CMatrix {
    let mut u = c_dense.clone();
    let last = u.nrows() - 1;
    let phase = c(0.0, theta).exp();
    for j in 0..u.ncols() {
        u[(last, j)] *= phase;
    }
    u
}

#[derive(Clone, Debug)]
pub struct FarInstance {
    pub unitary: CMatrix,
    pub theta: f64,
    /// `D` to the nearest group element.
    pub distance: f64,
    /// Whether the nearest group element is the seed Clifford.
    pub nearest_is_seed: bool,
}

/// Bisects `θ` so that the exhaustive nearest-Clifford distance of
/// `diag(1, …, e^{iθ}) · C` lands at `target`.
pub fn far_instance(seed: &CliffordTableau, group: &[CMatrix], target: f64) -> Result<FarInstance> {
    let base = tableau_dense(seed)?;
    let measure = |theta: f64| nearest(&corner_phase(&base, theta), group).0;
    let (mut lo, mut hi) = (0.0, std::f64::consts::FRAC_PI_2);
    if measure(hi) < target {
        return Err(Error::Precondition(format!("target distance {target} is out of reach")));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if measure(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let unitary = corner_phase(&base, hi);
    let (d, idx) = nearest(&unitary, group);
    Ok(FarInstance {
        nearest_is_seed: distance_unchecked(&group[idx], &base, DistanceKind::D) < 1e-9,
        unitary,
        theta: hi,
        distance: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream;

    #[test]
    fn distance_examples() {
        let i = CMatrix::identity(2, 2);
        let x = PauliString::x_on(1, 0).to_dense().unwrap();
        let phased = &i * c(0.5, 3f64.sqrt() / 2.0);
        assert!(distance(&i, &i, DistanceKind::D).unwrap().value < 1e-12);
        assert!(distance(&i, &phased, DistanceKind::D).unwrap().value < 1e-7);
        assert!((distance(&i, &x, DistanceKind::D).unwrap().value - 1.0).abs() < 1e-12);
        assert!(distance(&i, &(&i * c(2.0, 0.0)), DistanceKind::D).is_err());
    }

    #[test]
    fn pauli_one_query() {
        let p: PauliString = "+X".parse().unwrap();
        let oracle = UnitaryOracle::from_tableau(CliffordTableau::from_pauli(&p));
        assert_eq!(learn_pauli(&oracle).unwrap(), p);
        assert_eq!(oracle.queries(), QueryCount { forward: 1, adjoint: 0 });
    }

    #[test]
    fn identity_clifford_counts() {
        let oracle = UnitaryOracle::from_tableau(CliffordTableau::identity(3));
        assert!(learn_clifford(&oracle).unwrap().is_identity());
        assert_eq!(oracle.queries(), QueryCount { forward: 7, adjoint: 6 });
    }

    #[test]
    fn random_cliffords_recovered() {
        let mut rng = stream(1, "learning-test");
        for n in 1..=4 {
            for _ in 0..20 {
                let t = CliffordTableau::sample_uniform(n, &mut rng).unwrap();
                let oracle = UnitaryOracle::from_tableau(t.clone());
                let got = learn_clifford(&oracle).unwrap();
                assert_eq!(got, t);
                assert_eq!(oracle.queries(), required_ck_queries(n, 2));
            }
        }
    }

    #[test]
    fn dense_hadamard_learned() {
        let h = CliffordTableau::hadamard(2, 1);
        let oracle = UnitaryOracle::from_dense(tableau_dense(&h).unwrap()).unwrap();
        let got = learn_clifford(&oracle).unwrap();
        assert_eq!(got, h);
    }

    #[test]
    fn t_gate_level_three() {
        let t = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, std::f64::consts::FRAC_PI_4).exp()]));
        let oracle = UnitaryOracle::from_dense(t.clone()).unwrap();
        let got = learn_ck(&oracle, 3).unwrap();
        assert!(distance(&got.to_dense().unwrap(), &t, DistanceKind::D).unwrap().value < 1e-9);
        assert_eq!(oracle.queries(), required_ck_queries(1, 3));
        assert_eq!(required_ck_queries(1, 3), QueryCount { forward: 11, adjoint: 10 });
        assert_eq!(stated_ck_queries(2, 3), QueryCount { forward: 21, adjoint: 16 });
    }

    #[test]
    fn t_gate_is_not_clifford() {
        let t = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, std::f64::consts::FRAC_PI_4).exp()]));
        let oracle = UnitaryOracle::from_dense(t).unwrap();
        assert!(matches!(learn_clifford(&oracle), Err(Error::NotConcentrated { .. })));
    }

    #[test]
    fn boundary_rejected() {
        let cfg = LearningConfig::new(2f64.powf(-1.5), 0.1);
        assert!(cfg.repetitions(2, 2).is_err());
        assert!(LearningConfig::new(0.3, 0.1).repetitions(2, 2).is_ok());
    }

    #[test]
    fn coefficient_of_rotation() {
        let theta: f64 = 0.4;
        let u = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0, theta).exp(), c(0.0, -theta).exp()]));
        let oracle = UnitaryOracle::from_dense(u).unwrap();
        let mut rng = stream(3, "coef");
        let z: PauliString = "+Z".parse().unwrap();
        let est = estimate_pauli_coefficient(&oracle, &z, 0.02, 0.01, &mut rng).unwrap();
        assert!((est.estimate - theta.sin().abs()).abs() < 0.02);
        assert_eq!(oracle.queries().forward, est.shots);
    }
}
