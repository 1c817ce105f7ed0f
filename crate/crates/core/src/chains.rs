//! Markov chains on the number of non-identity positions of a Pauli label.

use nalgebra::DMatrix;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::random_circuit::{full_diagonal_chain, CircuitModel};

pub const DENSE_MAX_STATES: usize = 4096;
const ROW_TOL: f64 = 1e-12;
/// Largest power of two tried by the mixing-time search.
const MIXING_DOUBLINGS: u32 = 40;

/// Row-stochastic transition matrix with state labels.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainMatrix {
    labels: Vec<String>,
    p: DMatrix<f64>,
}

impl ChainMatrix {
    pub fn new(labels: Vec<String>, p: DMatrix<f64>) -> Result<Self> {
        if !p.is_square() || p.nrows() != labels.len() {
            return Err(Error::Precondition(format!(
                "transition matrix {}x{} does not match {} labels",
                p.nrows(),
                p.ncols(),
                labels.len()
            )));
        }
        if p.nrows() > DENSE_MAX_STATES {
            return Err(Error::guard(format!("chain with {} states", p.nrows()), DENSE_MAX_STATES));
        }
        for (i, row) in p.row_iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOL || row.iter().any(|&x| x < -ROW_TOL) {
                return Err(Error::Precondition(format!(
                    "row {} ({}) is not a probability vector (sum {sum})",
                    i, labels[i]
                )));
            }
        }
        Ok(ChainMatrix { labels, p })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn is_tridiagonal(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| i.abs_diff(j) <= 1 || self.p[(i, j)] == 0.0))
    }

    fn check_irreducible(&self) -> Result<()> {
        let n = self.len();
        for transpose in [false, true] {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    let w = if transpose { self.p[(j, i)] } else { self.p[(i, j)] };
                    if w > 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            if let Some(j) = seen.iter().position(|s| !s) {
                return Err(Error::Reducible(format!(
                    "state {} is not mutually reachable from state {}",
                    self.labels[j], self.labels[0]
                )));
            }
        }
        Ok(())
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n ≥ 2, got {n}")));
    }
    if n > DENSE_MAX_STATES {
        return Err(Error::guard(format!("chain on {n} states"), DENSE_MAX_STATES));
    }
    Ok(())
}

fn count_labels(n: usize) -> Vec<String> {
    (1..=n).map(|x| x.to_string()).collect()
}

/// Number of non-identity positions after one random gate, states `1..=n`.
pub fn zero_chain(n: usize) -> Result<ChainMatrix> {
    check_n(n)?;
    let nf = n as f64;
    let denom = 5.0 * nf * (nf - 1.0);
    let mut p = DMatrix::zeros(n, n);
    for x in 1..=n {
        let xf = x as f64;
        let down = 2.0 * xf * (xf - 1.0) / denom;
        let up = 6.0 * xf * (nf - xf) / denom;
        if x > 1 {
            p[(x - 1, x - 2)] = down;
        }
        if x < n {
            p[(x - 1, x)] = up;
        }
        p[(x - 1, x - 1)] = 1.0 - down - up;
    }
    ChainMatrix::new(count_labels(n), p)
}

/// `π(x) = 3^x C(n, x) / (4^n - 1)`, evaluated in log space.
pub fn zero_stationary(n: usize) -> Result<Vec<f64>> {
    check_n(n)?;
    let nf = n as f64;
    let ln_norm = nf * 4f64.ln() + (-(-nf * 4f64.ln()).exp()).ln_1p();
    Ok((1..=n)
        .map(|x| {
            let xf = x as f64;
            let ln_binom = ln_gamma(nf + 1.0) - ln_gamma(xf + 1.0) - ln_gamma(nf - xf + 1.0);
            (xf * 3f64.ln() + ln_binom - ln_norm).exp()
        })
        .collect())
}

/// Zero chain conditioned on moving.
pub fn accelerated_chain(n: usize) -> Result<ChainMatrix> {
    check_n(n)?;
    let nf = n as f64;
    let mut p = DMatrix::zeros(n, n);
    for x in 1..=n {
        let xf = x as f64;
        let denom = 3.0 * nf - 2.0 * xf - 1.0;
        if x > 1 {
            p[(x - 1, x - 2)] = (xf - 1.0) / denom;
        }
        if x < n {
            p[(x - 1, x)] = 3.0 * (nf - xf) / denom;
        }
    }
    ChainMatrix::new(count_labels(n), p)
}

/// Stationary distribution of an irreducible chain by a direct solve.
pub fn stationary(chain: &ChainMatrix) -> Result<Vec<f64>> {
    chain.check_irreducible()?;
    let n = chain.len();
    let mut a = chain.p.transpose() - DMatrix::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = nalgebra::DVector::zeros(n);
    b[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numerical("singular stationary system".into()))?;
    Ok(pi.iter().copied().collect())
}

/// Largest `|π P - π|` entry.
pub fn stationary_residual(chain: &ChainMatrix, pi: &[f64]) -> Result<f64> {
    crate::error::ensure_same(pi.len(), chain.len())?;
    let v = nalgebra::DVector::from_column_slice(pi);
    let moved = chain.p.transpose() * &v;
    Ok((moved - v).amax())
}

/// `1 - (second-largest singular value of the symmetrized chain)`.
///
/// Birth-death chains are symmetrized entrywise, other reversible chains through `π`,
/// and irreversible chains through the spectrum of `P P*`.
pub fn spectral_gap(chain: &ChainMatrix) -> Result<f64> {
    chain.check_irreducible()?;
    let n = chain.len();
    if n == 1 {
        return Ok(1.0);
    }
    let p = &chain.p;
    let (sym, squared) = if chain.is_tridiagonal() {
        let s = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                p[(i, i)]
            } else if i.abs_diff(j) == 1 {
                (p[(i, j)] * p[(j, i)]).sqrt()
            } else {
                0.0
            }
        });
        (s, false)
    } else {
        let pi = stationary(chain)?;
        let reversible = (0..n).all(|i| {
            (0..n).all(|j| (pi[i] * p[(i, j)] - pi[j] * p[(j, i)]).abs() <= 1e-12 * (pi[i] + pi[j]))
        });
        let s = DMatrix::from_fn(n, n, |i, j| (pi[i] / pi[j]).sqrt() * p[(i, j)]);
        if reversible {
            ((&s + s.transpose()) / 2.0, false)
        } else {
            // similar to P P*
            (&s * s.transpose(), true)
        }
    };
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().map(|l| l.abs()).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let second = if squared { ev[1].sqrt() } else { ev[1] };
    Ok(1.0 - second)
}

fn worst_tv(m: &DMatrix<f64>, pi: &[f64]) -> f64 {
    m.row_iter()
        .map(|row| 0.5 * row.iter().zip(pi).map(|(a, b)| (a - b).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Smallest `t` with `max_x ½‖P^t(x, ·) - π‖₁ ≤ eps`, by doubling and bisection.
pub fn mixing_time(chain: &ChainMatrix, pi: &[f64], eps: f64) -> Result<u64> {
    crate::error::ensure_same(pi.len(), chain.len())?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Precondition(format!("eps must lie in (0, 1], got {eps}")));
    }
    let n = chain.len();
    let identity = DMatrix::<f64>::identity(n, n);
    if worst_tv(&identity, pi) <= eps {
        return Ok(0);
    }
    // powers[j] = P^{2^j}
    let mut powers = vec![chain.p.clone()];
    while worst_tv(powers.last().expect("nonempty"), pi) > eps {
        if powers.len() as u32 > MIXING_DOUBLINGS {
            return Err(Error::Budget(format!(
                "distance still above {eps} after 2^{MIXING_DOUBLINGS} steps"
            )));
        }
        let last = powers.last().expect("nonempty");
        powers.push(last * last);
    }
    // largest t with distance > eps, built bit by bit
    let mut t: u64 = 0;
    let mut current = identity;
    for j in (0..powers.len() - 1).rev() {
        let candidate = &current * &powers[j];
        if worst_tv(&candidate, pi) > eps {
            t += 1 << j;
            current = candidate;
        }
    }
    Ok(t + 1)
}

/// Largest gap between the full diagonal chain lumped by non-identity count and the
/// zero chain.
pub fn lumpability_check(n: usize) -> Result<f64> {
    let model = CircuitModel::haar(n)?;
    let full = full_diagonal_chain(&model)?;
    let zero = zero_chain(n)?;
    let weight = |p: usize| (0..n).filter(|q| (p >> (2 * q)) & 3 != 0).count();
    let mut err: f64 = 0.0;
    for x in 0..full.len() {
        let wx = weight(x + 1);
        let mut lumped = vec![0.0; n];
        for y in 0..full.len() {
            lumped[weight(y + 1) - 1] += full.p[(x, y)];
        }
        for (wy, &v) in lumped.iter().enumerate() {
            err = err.max((v - zero.p[(wx - 1, wy)]).abs());
        }
    }
    Ok(err)
}

/// Relative spread `(max - min) / (max + min)`, half the width of the band around its
/// midpoint.
pub fn band_spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    (max - min) / (max + min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_qubit_zero_chain() {
        let c = zero_chain(2).unwrap();
        let expect = [[0.4, 0.6], [0.4, 0.6]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((c.matrix()[(i, j)] - expect[i][j]).abs() < 1e-15);
            }
        }
        assert!((spectral_gap(&c).unwrap() - 1.0).abs() < 1e-12);
        let pi = zero_stationary(2).unwrap();
        assert!((pi[0] - 0.4).abs() < 1e-13 && (pi[1] - 0.6).abs() < 1e-13);
    }

    #[test]
    fn four_qubit_entry() {
        assert!((zero_chain(4).unwrap().matrix()[(0, 1)] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn accelerated_is_conditioned_zero_chain() {
        for n in [2, 5, 17] {
            let z = zero_chain(n).unwrap();
            let a = accelerated_chain(n).unwrap();
            for x in 0..n {
                let stay = z.matrix()[(x, x)];
                for y in 0..n {
                    if y != x {
                        let want = z.matrix()[(x, y)] / (1.0 - stay);
                        assert!((a.matrix()[(x, y)] - want).abs() < 1e-12);
                    }
                }
            }
        }
        assert_eq!(accelerated_chain(2).unwrap().matrix()[(0, 1)], 1.0);
    }

    #[test]
    fn solve_matches_closed_form() {
        let c = zero_chain(9).unwrap();
        let solved = stationary(&c).unwrap();
        let closed = zero_stationary(9).unwrap();
        for (a, b) in solved.iter().zip(&closed) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mixing_time_edges() {
        let c = zero_chain(6).unwrap();
        let pi = zero_stationary(6).unwrap();
        assert_eq!(mixing_time(&c, &pi, 1.0).unwrap(), 0);
        let t1 = mixing_time(&c, &pi, 0.1).unwrap();
        let t2 = mixing_time(&c, &pi, 0.01).unwrap();
        assert!(t1 <= t2);
        let mut m = DMatrix::identity(6, 6);
        for _ in 0..t2 {
            m *= c.matrix();
        }
        assert!(worst_tv(&m, &pi) <= 0.01);
        assert!(worst_tv(&(&m * c.matrix().clone().try_inverse().unwrap()), &pi) > 0.01);
    }

    #[test]
    fn reducible_chain_is_reported() {
        let c = ChainMatrix::new(vec!["a".into(), "b".into()], DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(spectral_gap(&c), Err(Error::Reducible(_))));
    }

    #[test]
    fn small_lumpability() {
        assert!(lumpability_check(2).unwrap() < 1e-12);
    }
}
