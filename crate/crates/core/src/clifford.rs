//! Clifford unitaries as stabilizer tableaux.
//!
//! A tableau stores the signed images `C X_i C†` and `C Z_i C†` of the `2n` single-qubit
//! generators. Dense matrices are derived from it and fix the global phase so that the
//! first nonzero entry of the first column is real and positive.

use std::collections::{HashMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_same, Error, Result};
use crate::linalg::{c, CMatrix, CVector, DenseOperator, ZERO};
use crate::pauli::{Pauli1, PauliString};

pub const DENSE_MAX_QUBITS: usize = 10;
pub const SAMPLE_MAX_QUBITS: usize = 63;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CliffordTableau {
    n: usize,
    x_images: Vec<PauliString>,
    z_images: Vec<PauliString>,
}

#[derive(Serialize, Deserialize)]
struct TableauJson {
    n: usize,
    x_images: Vec<PauliString>,
    z_images: Vec<PauliString>,
}

impl Serialize for CliffordTableau {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TableauJson {
            n: self.n,
            x_images: self.x_images.clone(),
            z_images: self.z_images.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CliffordTableau {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = TableauJson::deserialize(d)?;
        if raw.x_images.len() != raw.n || raw.z_images.len() != raw.n {
            return Err(serde::de::Error::custom("image count does not match n"));
        }
        CliffordTableau::from_images(raw.x_images, raw.z_images).map_err(serde::de::Error::custom)
    }
}

/// Symplectic vector packed as `x | z << 64`.
type Sym = u128;

fn pack(p: &PauliString) -> Sym {
    p.x_mask() as u128 | ((p.z_mask() as u128) << 64)
}

fn unpack(n: usize, v: Sym) -> PauliString {
    PauliString::new(n, v as u64, (v >> 64) as u64, 0).expect("mask within n qubits")
}

fn sym_product(a: Sym, b: Sym) -> u32 {
    let (ax, az) = (a as u64, (a >> 64) as u64);
    let (bx, bz) = (b as u64, (b >> 64) as u64);
    ((ax & bz).count_ones() + (az & bx).count_ones()) % 2
}

/// Independent subset spanning the same GF(2) space.
fn reduce_basis(vectors: impl IntoIterator<Item = Sym>) -> Vec<Sym> {
    let mut pivots: Vec<(u32, Sym)> = Vec::new();
    let mut out = Vec::new();
    for v in vectors {
        let mut w = v;
        for &(bit, p) in &pivots {
            if (w >> bit) & 1 == 1 {
                w ^= p;
            }
        }
        if w != 0 {
            let bit = 127 - w.leading_zeros();
            pivots.push((bit, w));
            out.push(v);
        }
    }
    out
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        CliffordTableau {
            n,
            x_images: (0..n).map(|q| PauliString::x_on(n, q)).collect(),
            z_images: (0..n).map(|q| PauliString::z_on(n, q)).collect(),
        }
    }

    /// Validates Hermitian images and the commutation pattern of the generators.
    pub fn from_images(x_images: Vec<PauliString>, z_images: Vec<PauliString>) -> Result<Self> {
        ensure_same(x_images.len(), z_images.len())?;
        let n = x_images.len();
        for p in x_images.iter().chain(&z_images) {
            ensure_same(p.num_qubits(), n)?;
            if !p.is_hermitian() {
                return Err(Error::Symplectic(format!("image {p} is not Hermitian")));
            }
            if p.is_identity() {
                return Err(Error::Symplectic(format!("image {p} is proportional to identity")));
            }
        }
        let t = CliffordTableau {
            n,
            x_images,
            z_images,
        };
        t.check_symplectic()?;
        Ok(t)
    }

    /// Tableau with the given phase-free images, all signs `+1`.
    ///
    /// `images` lists `X_0, Z_0, X_1, Z_1, ...`.
    pub fn synthesize(images: &[PauliString]) -> Result<Self> {
        if images.len() % 2 != 0 {
            return Err(Error::Precondition(format!(
                "expected an even number of images, got {}",
                images.len()
            )));
        }
        for p in images {
            if p.phase() != 0 {
                return Err(Error::Precondition(format!("image {p} must carry phase +1")));
            }
        }
        let x = images.iter().step_by(2).copied().collect();
        let z = images.iter().skip(1).step_by(2).copied().collect();
        CliffordTableau::from_images(x, z)
    }

    fn check_symplectic(&self) -> Result<()> {
        let gens = self.images_in_generator_order();
        let names: Vec<String> = (0..self.n)
            .flat_map(|q| [format!("X{q}"), format!("Z{q}")])
            .collect();
        for a in 0..gens.len() {
            for b in (a + 1)..gens.len() {
                let partners = a / 2 == b / 2;
                let anti = !gens[a].commutes(&gens[b]);
                if partners != anti {
                    let want = if partners { "anticommute" } else { "commute" };
                    return Err(Error::Symplectic(format!(
                        "images of {} ({}) and {} ({}) must {want}",
                        names[a], gens[a], names[b], gens[b]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_image(&self, q: usize) -> &PauliString {
        &self.x_images[q]
    }

    pub fn z_image(&self, q: usize) -> &PauliString {
        &self.z_images[q]
    }

    /// Images in the order `X_0, Z_0, X_1, Z_1, ...`.
    pub fn images_in_generator_order(&self) -> Vec<PauliString> {
        self.x_images
            .iter()
            .zip(&self.z_images)
            .flat_map(|(x, z)| [*x, *z])
            .collect()
    }

    /// The same images with every sign set to `+1`.
    pub fn unsigned(&self) -> Self {
        CliffordTableau {
            n: self.n,
            x_images: self.x_images.iter().map(|p| p.unsigned()).collect(),
            z_images: self.z_images.iter().map(|p| p.unsigned()).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == CliffordTableau::identity(self.n)
    }

    /// `C σ_p C†` with exact phase.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        ensure_same(p.num_qubits(), self.n)?;
        // σ_p = i^{e + |x∧z|} Π X_q^{x_q} Π Z_q^{z_q}
        let e = p.phase() as u32 + (p.x_mask() & p.z_mask()).count_ones();
        let mut acc = PauliString::identity(self.n).with_phase((e % 4) as u8);
        for q in 0..self.n {
            if (p.x_mask() >> q) & 1 == 1 {
                acc = acc.mul_unchecked(&self.x_images[q]);
            }
        }
        for q in 0..self.n {
            if (p.z_mask() >> q) & 1 == 1 {
                acc = acc.mul_unchecked(&self.z_images[q]);
            }
        }
        Ok(acc)
    }

    /// Tableau of the product `self · other`.
    pub fn compose(&self, other: &CliffordTableau) -> Result<CliffordTableau> {
        ensure_same(self.n, other.n)?;
        let map = |v: &Vec<PauliString>| -> Vec<PauliString> {
            v.iter()
                .map(|p| self.conjugate(p).expect("sizes checked"))
                .collect()
        };
        Ok(CliffordTableau {
            n: self.n,
            x_images: map(&other.x_images),
            z_images: map(&other.z_images),
        })
    }

    pub fn inverse(&self) -> CliffordTableau {
        let n = self.n;
        let xs: Vec<Sym> = self.x_images.iter().map(pack).collect();
        let zs: Vec<Sym> = self.z_images.iter().map(pack).collect();
        // preimage of g has X_q coefficient <g, img Z_q> and Z_q coefficient <g, img X_q>
        let preimage = |g: &PauliString| -> PauliString {
            let gv = pack(g);
            let (mut x, mut z) = (0u64, 0u64);
            for q in 0..n {
                x |= (sym_product(gv, zs[q]) as u64) << q;
                z |= (sym_product(gv, xs[q]) as u64) << q;
            }
            let h = PauliString::new(n, x, z, 0).expect("mask within n qubits");
            let image = self.conjugate(&h).expect("sizes checked");
            debug_assert_eq!(image.unsigned(), *g);
            // C h C† = s g  implies  C† g C = s h
            h.with_phase(image.phase())
        };
        CliffordTableau {
            n,
            x_images: (0..n).map(|q| preimage(&PauliString::x_on(n, q))).collect(),
            z_images: (0..n).map(|q| preimage(&PauliString::z_on(n, q))).collect(),
        }
    }

    /// Conjugation by the Pauli `p`, as a tableau.
    pub fn from_pauli(p: &PauliString) -> CliffordTableau {
        let n = p.num_qubits();
        let sign = |g: PauliString| if p.commutes(&g) { g } else { g.negate() };
        CliffordTableau {
            n,
            x_images: (0..n).map(|q| sign(PauliString::x_on(n, q))).collect(),
            z_images: (0..n).map(|q| sign(PauliString::z_on(n, q))).collect(),
        }
    }

    /// The Pauli `p` with `self = conjugation by p`, if the tableau is a Pauli.
    pub fn as_pauli(&self) -> Option<PauliString> {
        let n = self.n;
        let (mut x, mut z) = (0u64, 0u64);
        for q in 0..n {
            if self.x_images[q].unsigned() != PauliString::x_on(n, q)
                || self.z_images[q].unsigned() != PauliString::z_on(n, q)
            {
                return None;
            }
            z |= ((self.x_images[q].phase() == 2) as u64) << q;
            x |= ((self.z_images[q].phase() == 2) as u64) << q;
        }
        Some(PauliString::new(n, x, z, 0).expect("mask within n qubits"))
    }

    pub fn hadamard(n: usize, q: usize) -> Self {
        let mut t = CliffordTableau::identity(n);
        t.x_images[q] = PauliString::z_on(n, q);
        t.z_images[q] = PauliString::x_on(n, q);
        t
    }

    pub fn phase_gate(n: usize, q: usize) -> Self {
        let mut t = CliffordTableau::identity(n);
        t.x_images[q] = PauliString::single(n, q, Pauli1::Y);
        t
    }

    pub fn cnot(n: usize, control: usize, target: usize) -> Self {
        assert_ne!(control, target);
        let mut t = CliffordTableau::identity(n);
        t.x_images[control] = PauliString::x_on(n, control).mul_unchecked(&PauliString::x_on(n, target));
        t.z_images[target] = PauliString::z_on(n, control).mul_unchecked(&PauliString::z_on(n, target));
        t
    }

    pub fn cz(n: usize, a: usize, b: usize) -> Self {
        assert_ne!(a, b);
        let mut t = CliffordTableau::identity(n);
        t.x_images[a] = PauliString::x_on(n, a).mul_unchecked(&PauliString::z_on(n, b));
        t.x_images[b] = PauliString::z_on(n, a).mul_unchecked(&PauliString::x_on(n, b));
        t
    }

    /// Uniformly random Clifford (modulo global phase).
    ///
    /// Generator images are drawn qubit by qubit inside the symplectic complement of the
    /// pairs already chosen, followed by independent uniform signs.
    pub fn sample_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("need at least one qubit".into()));
        }
        if n > SAMPLE_MAX_QUBITS {
            return Err(Error::guard(format!("sampling on {n} qubits"), SAMPLE_MAX_QUBITS));
        }
        let mut basis: Vec<Sym> = PauliString::generators(n).iter().map(pack).collect();
        let mut x_images = Vec::with_capacity(n);
        let mut z_images = Vec::with_capacity(n);
        for _ in 0..n {
            let dim = basis.len() as u32;
            let combo = |bits: u128| -> Sym {
                basis
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (bits >> i) & 1 == 1)
                    .fold(0, |acc, (_, b)| acc ^ b)
            };
            let top: u128 = 1u128 << dim;
            let v = combo(rng.random_range(1..top));
            let mut w = combo(rng.random_range(0..top));
            if sym_product(v, w) == 0 {
                let u = *basis
                    .iter()
                    .find(|&&b| sym_product(v, b) == 1)
                    .expect("nonzero vector in a symplectic space has a partner");
                w ^= u;
            }
            x_images.push(v);
            z_images.push(w);
            let projected = basis
                .iter()
                .map(|&b| {
                    let mut out = b;
                    if sym_product(b, w) == 1 {
                        out ^= v;
                    }
                    if sym_product(b, v) == 1 {
                        out ^= w;
                    }
                    out
                })
                .collect::<Vec<_>>();
            basis = reduce_basis(projected);
            debug_assert_eq!(basis.len() as u32, dim - 2);
        }
        let signs: u128 = rng.random::<u128>();
        let with_sign = |v: Sym, bit: usize| {
            let p = unpack(n, v);
            if (signs >> bit) & 1 == 1 {
                p.negate()
            } else {
                p
            }
        };
        Ok(CliffordTableau {
            n,
            x_images: x_images.iter().enumerate().map(|(i, &v)| with_sign(v, 2 * i)).collect(),
            z_images: z_images
                .iter()
                .enumerate()
                .map(|(i, &v)| with_sign(v, 2 * i + 1))
                .collect(),
        })
    }

    pub fn to_unitary(&self) -> Result<DenseOperator> {
        Ok(DenseOperator::new(self.to_matrix()?).expect("square"))
    }

    pub(crate) fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.n;
        if n > DENSE_MAX_QUBITS {
            return Err(Error::guard(format!("dense Clifford on {n} qubits"), DENSE_MAX_QUBITS));
        }
        let d = 1usize << n;
        // joint +1 eigenvector of the Z images is the image of |0...0>
        let mut psi0 = None;
        for j in 0..d {
            let mut v = CVector::from_element(d, ZERO);
            v[j] = c(1.0, 0.0);
            for g in &self.z_images {
                let gv = g.apply_to_vector(&v)?;
                v = (v + gv) * c(0.5, 0.0);
            }
            let norm = v.norm();
            if norm > 1e-6 {
                psi0 = Some(v / c(norm, 0.0));
                break;
            }
        }
        let psi0 = psi0.ok_or_else(|| Error::Numerical("stabilizer state not found".into()))?;
        let mut u = CMatrix::zeros(d, d);
        for j in 0..d {
            let mut col = psi0.clone();
            for q in 0..n {
                if (j >> q) & 1 == 1 {
                    col = self.x_images[q].apply_to_vector(&col)?;
                }
            }
            u.set_column(j, &col);
        }
        let first = u
            .column(0)
            .iter()
            .copied()
            .find(|z| z.norm() > 1e-12)
            .expect("unitary column is nonzero");
        let phase = first.conj() / first.norm();
        Ok(u * phase)
    }
}

/// Every Clifford modulo phase on `n ≤ 2` qubits, by breadth-first search over generators.
pub fn enumerate_group(n: usize) -> Result<Vec<CliffordTableau>> {
    if n == 0 || n > 2 {
        return Err(Error::guard(format!("group enumeration on {n} qubits"), 2));
    }
    let mut gens = Vec::new();
    for q in 0..n {
        gens.push(CliffordTableau::hadamard(n, q));
        gens.push(CliffordTableau::phase_gate(n, q));
    }
    if n == 2 {
        gens.push(CliffordTableau::cnot(2, 0, 1));
        gens.push(CliffordTableau::cnot(2, 1, 0));
    }
    let start = CliffordTableau::identity(n);
    let mut seen: HashMap<CliffordTableau, ()> = HashMap::new();
    let mut order = vec![start.clone()];
    seen.insert(start.clone(), ());
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        for g in &gens {
            let next = g.compose(&t)?;
            if seen.insert(next.clone(), ()).is_none() {
                order.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dense_conj(u: &CMatrix, p: &PauliString) -> CMatrix {
        u * p.to_dense().unwrap() * u.adjoint()
    }

    #[test]
    fn hadamard_maps_x_to_z() {
        let h = CliffordTableau::hadamard(1, 0);
        assert_eq!(h.conjugate(&"X".parse().unwrap()).unwrap().to_string(), "+Z");
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let dense_h = CMatrix::from_row_slice(2, 2, &[c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)]);
        let z = dense_conj(&dense_h, &"X".parse().unwrap());
        assert!(crate::linalg::max_abs(&(z - "Z".parse::<PauliString>().unwrap().to_dense().unwrap())) < 1e-12);
    }

    #[test]
    fn cnot_spreads_x() {
        let t = CliffordTableau::cnot(2, 0, 1);
        let img = t.conjugate(&"XI".parse().unwrap()).unwrap();
        assert_eq!(img.to_string(), "+XX");
    }

    #[test]
    fn symplectic_violation_names_pair() {
        let err = CliffordTableau::synthesize(&["X".parse().unwrap(), "X".parse().unwrap()]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("X0") && msg.contains("Z0"), "{msg}");
        let err = CliffordTableau::synthesize(&[
            "XI".parse().unwrap(),
            "ZI".parse().unwrap(),
            "ZX".parse().unwrap(),
            "IZ".parse().unwrap(),
        ])
        .unwrap_err();
        assert!(err.to_string().contains("X0") && err.to_string().contains("X1"));
    }

    #[test]
    fn one_qubit_group_has_24_elements() {
        assert_eq!(enumerate_group(1).unwrap().len(), 24);
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = CliffordTableau::sample_uniform(5, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = CliffordTableau::sample_uniform(5, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn json_round_trip() {
        let t = CliffordTableau::sample_uniform(3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        let back: CliffordTableau = serde_json::from_str(&s).unwrap();
        assert_eq!(t, back);
        assert!(serde_json::from_str::<CliffordTableau>(r#"{"n":1,"x_images":["X"],"z_images":["X"]}"#).is_err());
    }

    #[test]
    fn dense_matrix_realizes_tableau() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 1..=4 {
            for _ in 0..5 {
                let t = CliffordTableau::sample_uniform(n, &mut rng).unwrap();
                let u = t.to_matrix().unwrap();
                assert!(crate::linalg::unitarity_error(&u) < 1e-10);
                for p in crate::pauli::all_paulis(n) {
                    let want = t.conjugate(&p).unwrap().to_dense().unwrap();
                    assert!(crate::linalg::max_abs(&(dense_conj(&u, &p) - want)) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn inverse_composes_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 3, 8, 40] {
            let t = CliffordTableau::sample_uniform(n, &mut rng).unwrap();
            assert!(t.compose(&t.inverse()).unwrap().is_identity());
            assert!(t.inverse().compose(&t).unwrap().is_identity());
        }
    }

    #[test]
    fn pauli_tableau_round_trips() {
        let p: PauliString = "XYZI".parse().unwrap();
        assert_eq!(CliffordTableau::from_pauli(&p).as_pauli(), Some(p));
    }

    #[test]
    fn two_qubit_group_has_11520_elements() {
        let g = enumerate_group(2).unwrap();
        assert_eq!(g.len(), 11520);
    }
}
