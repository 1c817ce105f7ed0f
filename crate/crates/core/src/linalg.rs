//! Dense complex linear algebra shared by the moment, expander and learning code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Square complex matrix acting on a `dim`-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator(CMatrix);

impl DenseOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Precondition(format!(
                "operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(DenseOperator(m))
    }

    pub fn identity(dim: usize) -> Self {
        DenseOperator(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        DenseOperator(self.0.adjoint())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        unitarity_error(&self.0) < tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        max_abs(&(&self.0 - self.0.adjoint())) < tol
    }
}

impl From<DenseOperator> for CMatrix {
    fn from(op: DenseOperator) -> Self {
        op.0
    }
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn unitarity_error(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    singular_values(m).iter().sum()
}

pub fn real_spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().copied().sum()
}

/// Complex Gaussian with E|z|^2 = 1.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random pure state, as a normalized complex Gaussian vector.
pub fn haar_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(d, |_, _| complex_gaussian(rng));
    let norm = v.norm();
    v / c(norm, 0.0)
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of R's diagonal divided out.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Reduced state on the first factor of a bipartite pure state.
///
/// Basis index convention: `i = s + d_s * e`.
pub fn reduced_state(psi: &CVector, d_s: usize) -> Result<CMatrix> {
    let d = psi.len();
    if d_s == 0 || d % d_s != 0 {
        return Err(Error::Precondition(format!(
            "subsystem dimension {d_s} does not divide {d}"
        )));
    }
    let d_e = d / d_s;
    let mut rho = CMatrix::zeros(d_s, d_s);
    for e in 0..d_e {
        for a in 0..d_s {
            let pa = psi[a + d_s * e];
            if pa == ZERO {
                continue;
            }
            for b in 0..d_s {
                rho[(a, b)] += pa * psi[b + d_s * e].conj();
            }
        }
    }
    Ok(rho)
}

/// Partial trace over the second factor of an operator on `d_s * d_e`.
pub fn partial_trace_second(m: &CMatrix, d_s: usize) -> Result<CMatrix> {
    let d = m.nrows();
    if d_s == 0 || d % d_s != 0 {
        return Err(Error::Precondition(format!(
            "subsystem dimension {d_s} does not divide {d}"
        )));
    }
    let d_e = d / d_s;
    Ok(CMatrix::from_fn(d_s, d_s, |a, b| {
        (0..d_e).map(|e| m[(a + d_s * e, b + d_s * e)]).sum()
    }))
}

pub fn purity(rho: &CMatrix) -> f64 {
    rho.iter().map(|z| z.norm_sqr()).sum()
}

/// Von Neumann entropy in bits.
pub fn entropy_bits(rho: &CMatrix) -> f64 {
    hermitian_eigenvalues(rho)
        .into_iter()
        .filter(|&l| l > 1e-15)
        .map(|l| -l * l.log2())
        .sum()
}

/// Orthonormalizes the columns by modified Gram-Schmidt, dropping columns whose
/// residual norm falls below `tol`.
pub fn orthonormal_columns(vectors: &[CVector], tol: f64) -> Vec<CVector> {
    let mut basis: Vec<CVector> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&w);
                w -= b * proj;
            }
        }
        let norm = w.norm();
        if norm > tol {
            basis.push(w / c(norm, 0.0));
        }
    }
    basis
}

/// Moore-Penrose pseudo-inverse of a Hermitian positive semidefinite matrix,
/// returned with the condition number of its retained spectrum.
pub fn psd_pseudo_inverse(g: &CMatrix, rel_tol: f64) -> (CMatrix, f64) {
    let eig = g.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut inv = CMatrix::zeros(g.nrows(), g.ncols());
    let mut min_kept = f64::INFINITY;
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l.abs() > rel_tol * max {
            min_kept = min_kept.min(l.abs());
            let v = eig.eigenvectors.column(i);
            inv += (v * v.adjoint()) * c(1.0 / l, 0.0);
        }
    }
    let cond = if min_kept.is_finite() { max / min_kept } else { f64::INFINITY };
    (inv, cond)
}

pub fn real_to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| c(x, 0.0))
}

/// Eigenvalues of a general complex square matrix via the complex Schur form.
pub fn general_eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::Schur::try_new(m.clone(), 1e-14, 100_000)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// Square complex matrices as nested `[re, im]` rows.
pub mod dense_json {
    use super::{c, CMatrix};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("dense matrix must be square"));
        }
        Ok(CMatrix::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1])))
    }
}
