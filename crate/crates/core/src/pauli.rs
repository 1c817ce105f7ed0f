//! Pauli group on up to 64 qubits.
//!
//! A string is `i^phase * P_0 ⊗ P_1 ⊗ ... ⊗ P_{n-1}` with `P_q` chosen by the bit pair
//! `(x_q, z_q)`: `(0,0) = I`, `(1,0) = X`, `(0,1) = Z`, `(1,1) = Y`. In dense form qubit
//! `q` is bit `q` of the computational basis index.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_same, Error, Result};
use crate::linalg::{c, CMatrix, CVector, ZERO};

pub const MAX_QUBITS: usize = 64;
pub const DENSE_MAX_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli1 {
    I,
    X,
    Y,
    Z,
}

impl Pauli1 {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli1::I => (false, false),
            Pauli1::X => (true, false),
            Pauli1::Y => (true, true),
            Pauli1::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli1::I,
            (true, false) => Pauli1::X,
            (true, true) => Pauli1::Y,
            (false, true) => Pauli1::Z,
        }
    }

    /// Local index used by the interleaved encoding: `x + 2 z`.
    pub fn local_index(self) -> usize {
        let (x, z) = self.bits();
        x as usize + 2 * z as usize
    }

    pub fn from_local_index(i: usize) -> Self {
        Pauli1::from_bits(i & 1 == 1, i & 2 == 2)
    }

    fn symbol(self) -> char {
        match self {
            Pauli1::I => 'I',
            Pauli1::X => 'X',
            Pauli1::Y => 'Y',
            Pauli1::Z => 'Z',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn new(n: usize, x: u64, z: u64, phase: u8) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::guard(format!("{n} qubits"), MAX_QUBITS));
        }
        if x & !mask(n) != 0 || z & !mask(n) != 0 {
            return Err(Error::Precondition(format!(
                "masks {x:#x}/{z:#x} exceed {n} qubits"
            )));
        }
        Ok(PauliString {
            n,
            x,
            z,
            phase: phase % 4,
        })
    }

    pub fn identity(n: usize) -> Self {
        PauliString::new(n, 0, 0, 0).expect("qubit count within limit")
    }

    pub fn single(n: usize, qubit: usize, p: Pauli1) -> Self {
        assert!(qubit < n, "qubit {qubit} out of range for {n} qubits");
        let (x, z) = p.bits();
        PauliString::new(n, (x as u64) << qubit, (z as u64) << qubit, 0)
            .expect("qubit count within limit")
    }

    pub fn x_on(n: usize, qubit: usize) -> Self {
        PauliString::single(n, qubit, Pauli1::X)
    }

    pub fn z_on(n: usize, qubit: usize) -> Self {
        PauliString::single(n, qubit, Pauli1::Z)
    }

    /// The generator list `X_0, Z_0, X_1, Z_1, ...`.
    pub fn generators(n: usize) -> Vec<PauliString> {
        (0..n)
            .flat_map(|q| [PauliString::x_on(n, q), PauliString::z_on(n, q)])
            .collect()
    }

    pub fn from_ops(ops: &[Pauli1]) -> Self {
        let n = ops.len();
        let (mut x, mut z) = (0u64, 0u64);
        for (q, p) in ops.iter().enumerate() {
            let (xb, zb) = p.bits();
            x |= (xb as u64) << q;
            z |= (zb as u64) << q;
        }
        PauliString::new(n, x, z, 0).expect("qubit count within limit")
    }

    /// Phase-free string from its interleaved index: bit `2q` is `x_q`, bit `2q+1` is `z_q`.
    pub fn from_index(n: usize, index: u128) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::guard(format!("{n} qubits"), MAX_QUBITS));
        }
        if n < 64 && index >> (2 * n) != 0 {
            return Err(Error::Precondition(format!(
                "index {index} out of range for {n} qubits"
            )));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for q in 0..n {
            x |= (((index >> (2 * q)) & 1) as u64) << q;
            z |= (((index >> (2 * q + 1)) & 1) as u64) << q;
        }
        PauliString::new(n, x, z, 0)
    }

    pub fn index(&self) -> u128 {
        (0..self.n).fold(0u128, |acc, q| {
            acc | ((((self.x >> q) & 1) as u128) << (2 * q))
                | ((((self.z >> q) & 1) as u128) << (2 * q + 1))
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Exponent `e` of the prefactor `i^e`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn phase_factor(&self) -> Complex64 {
        match self.phase {
            0 => c(1.0, 0.0),
            1 => c(0.0, 1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, -1.0),
        }
    }

    pub fn with_phase(&self, phase: u8) -> Self {
        PauliString {
            phase: phase % 4,
            ..*self
        }
    }

    pub fn unsigned(&self) -> Self {
        self.with_phase(0)
    }

    pub fn negate(&self) -> Self {
        self.with_phase(self.phase + 2)
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn op(&self, qubit: usize) -> Pauli1 {
        Pauli1::from_bits((self.x >> qubit) & 1 == 1, (self.z >> qubit) & 1 == 1)
    }

    /// Symplectic inner product of the masks; 1 iff the strings anticommute.
    pub fn symplectic(&self, other: &PauliString) -> u32 {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        self.symplectic(other) == 0
    }

    /// Product `self * other` with the exact phase.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        ensure_same(self.n, other.n)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &PauliString) -> PauliString {
        // P(x,z) = i^{x.z} X^x Z^z and Z^z1 X^x2 = (-1)^{z1.x2} X^x2 Z^z1.
        let x3 = self.x ^ other.x;
        let z3 = self.z ^ other.z;
        let e = self.phase as u32
            + other.phase as u32
            + (self.x & self.z).count_ones()
            + (other.x & other.z).count_ones()
            + 2 * (self.z & other.x).count_ones()
            + 4 * 64
            - (x3 & z3).count_ones();
        PauliString {
            n: self.n,
            x: x3,
            z: z3,
            phase: (e % 4) as u8,
        }
    }

    /// Tensor product `self ⊗ other`, with `other` occupying the higher qubits.
    pub fn tensor(&self, other: &PauliString) -> Result<PauliString> {
        let n = self.n + other.n;
        if n > MAX_QUBITS {
            return Err(Error::guard(format!("{n} qubits"), MAX_QUBITS));
        }
        PauliString::new(
            n,
            self.x | (other.x << self.n),
            self.z | (other.z << self.n),
            self.phase + other.phase,
        )
    }

    /// Image of basis vector `j`: `σ|j⟩ = amplitude * |j ⊕ x⟩`.
    pub fn apply_basis(&self, j: u64) -> (u64, Complex64) {
        let e = (self.phase as u32 + (self.x & self.z).count_ones()) % 4;
        let sign = if (self.z & j).count_ones() % 2 == 1 { 2 } else { 0 };
        let amp = match (e + sign) % 4 {
            0 => c(1.0, 0.0),
            1 => c(0.0, 1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, -1.0),
        };
        (j ^ self.x, amp)
    }

    pub fn apply_to_vector(&self, v: &CVector) -> Result<CVector> {
        let d = 1usize << self.n.min(63);
        ensure_same(v.len(), d)?;
        let mut out = CVector::from_element(d, ZERO);
        for j in 0..d {
            let (i, amp) = self.apply_basis(j as u64);
            out[i as usize] = amp * v[j];
        }
        Ok(out)
    }

    /// `σ · M` computed row-permutation style.
    pub fn left_multiply(&self, m: &CMatrix) -> Result<CMatrix> {
        let d = 1usize << self.n.min(63);
        ensure_same(m.nrows(), d)?;
        let mut out = CMatrix::zeros(d, m.ncols());
        for j in 0..d {
            let (i, amp) = self.apply_basis(j as u64);
            for col in 0..m.ncols() {
                out[(i as usize, col)] = amp * m[(j, col)];
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        if self.n > DENSE_MAX_QUBITS {
            return Err(Error::guard(
                format!("dense Pauli on {} qubits", self.n),
                DENSE_MAX_QUBITS,
            ));
        }
        let d = 1usize << self.n;
        let mut m = CMatrix::zeros(d, d);
        for j in 0..d {
            let (i, amp) = self.apply_basis(j as u64);
            m[(i as usize, j)] = amp;
        }
        Ok(m)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        for q in 0..self.n {
            write!(f, "{}", self.op(q).symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else {
            (0, s)
        };
        let ops = body
            .chars()
            .map(|ch| match ch {
                'I' => Ok(Pauli1::I),
                'X' => Ok(Pauli1::X),
                'Y' => Ok(Pauli1::Y),
                'Z' => Ok(Pauli1::Z),
                other => Err(Error::Parse(format!("unexpected symbol {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if ops.is_empty() {
            return Err(Error::Parse(format!("empty Pauli string {s:?}")));
        }
        if ops.len() > MAX_QUBITS {
            return Err(Error::guard(format!("{} qubits", ops.len()), MAX_QUBITS));
        }
        Ok(PauliString::from_ops(&ops).with_phase(phase))
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All phase-free strings on `n` qubits in index order.
pub fn all_paulis(n: usize) -> impl Iterator<Item = PauliString> {
    assert!(n <= 31, "enumeration limited to 31 qubits");
    (0..(1u128 << (2 * n))).map(move |i| PauliString::from_index(n, i).expect("index in range"))
}

/// Largest entry of `F - (1/d) Σ_p σ_p ⊗ σ_p` for `d = 2^n`.
pub fn swap_decomposition_check(n: usize) -> Result<f64> {
    if n > 5 {
        return Err(Error::guard(format!("swap check on {n} qubits"), 5));
    }
    let d = 1usize << n;
    let dd = d * d;
    let mut acc = CMatrix::zeros(dd, dd);
    for p in all_paulis(n) {
        for j1 in 0..d {
            let (i1, a1) = p.apply_basis(j1 as u64);
            for j2 in 0..d {
                let (i2, a2) = p.apply_basis(j2 as u64);
                // first factor is the low index
                acc[(i1 as usize + d * i2 as usize, j1 + d * j2)] += a1 * a2;
            }
        }
    }
    acc /= c(d as f64, 0.0);
    let mut err: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            for row in 0..dd {
                let target = if row == b + d * a { 1.0 } else { 0.0 };
                err = err.max((acc[(row, a + d * b)] - c(target, 0.0)).norm());
            }
        }
    }
    Ok(err)
}

/// `tr(S(π) (A_1 ⊗ ... ⊗ A_c))` where `S(π)` sends factor `i` to slot `π(i)`.
///
/// Evaluated as a product of traces of ordered matrix products, one per cycle of `π`.
pub fn trace_cycle(perm: &[usize], factors: &[CMatrix]) -> Result<Complex64> {
    ensure_same(perm.len(), factors.len())?;
    validate_permutation(perm)?;
    let dim = factors.first().map(|f| f.nrows()).unwrap_or(1);
    for f in factors {
        if !f.is_square() {
            return Err(Error::Precondition("factors must be square".into()));
        }
        ensure_same(f.nrows(), dim)?;
    }
    let mut seen = vec![false; perm.len()];
    let mut total = c(1.0, 0.0);
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        // product A_{π^{m-1}(s)} ... A_{π(s)} A_s
        let mut prod = CMatrix::identity(dim, dim);
        let mut j = start;
        loop {
            seen[j] = true;
            prod = &factors[j] * prod;
            j = perm[j];
            if j == start {
                break;
            }
        }
        total *= crate::linalg::trace(&prod);
    }
    Ok(total)
}

pub(crate) fn validate_permutation(perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(Error::Precondition(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}
