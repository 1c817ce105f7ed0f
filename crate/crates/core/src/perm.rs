//! Permutations of `{0..k}` in one-line notation.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_same, Result};
use crate::pauli::validate_permutation;

/// `perm[i]` is the image of `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl TryFrom<Vec<usize>> for Permutation {
    type Error = crate::error::Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        validate_permutation(&v)?;
        Ok(Permutation(v))
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        Permutation::try_from(images)
    }

    pub fn identity(k: usize) -> Self {
        Permutation((0..k).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p] = i;
        }
        Permutation(inv)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        ensure_same(self.len(), other.len())?;
        Ok(Permutation(other.0.iter().map(|&i| self.0[i]).collect()))
    }

    pub fn cycle_count(&self) -> usize {
        let mut seen = vec![false; self.0.len()];
        let mut cycles = 0;
        for s in 0..self.0.len() {
            if seen[s] {
                continue;
            }
            cycles += 1;
            let mut j = s;
            while !seen[j] {
                seen[j] = true;
                j = self.0[j];
            }
        }
        cycles
    }

    /// All permutations of `{0..k}` in lexicographic order.
    pub fn all(k: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(k);
        let mut used = vec![false; k];
        fn rec(k: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
            if current.len() == k {
                out.push(Permutation(current.clone()));
                return;
            }
            for v in 0..k {
                if !used[v] {
                    used[v] = true;
                    current.push(v);
                    rec(k, current, used, out);
                    current.pop();
                    used[v] = false;
                }
            }
        }
        rec(k, &mut current, &mut used, &mut out);
        out
    }
}

pub fn factorial(k: usize) -> u128 {
    (1..=k as u128).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_cycles() {
        assert_eq!(Permutation::all(4).len(), 24);
        assert_eq!(Permutation::identity(3).cycle_count(), 3);
        assert_eq!(Permutation::new(vec![1, 2, 0]).unwrap().cycle_count(), 1);
        assert!(Permutation::new(vec![0, 0]).is_err());
    }

    #[test]
    fn inverse_composes_to_identity() {
        for p in Permutation::all(4) {
            assert!(p.compose(&p.inverse()).unwrap().is_identity());
        }
    }
}
