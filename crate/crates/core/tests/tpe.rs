use num_complex::Complex64;
use proptest::prelude::*;
use pseudoq::haar_moments::HaarProjector;
use pseudoq::perm::Permutation;
use pseudoq::seed::stream;
use pseudoq::tpe::*;

fn digits(mut index: usize, n_dim: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for t in (0..len).rev() {
        out[t] = index % n_dim;
        index /= n_dim;
    }
    out
}

fn le(a: &Partition, b: &Partition) -> bool {
    a.refines(b).unwrap()
}

fn falling(n: usize, r: usize) -> usize {
    (0..r).map(|i| n - i).product()
}

/// Indicator vectors of `E_Π` (pattern coarser than Π) and `I_Π` (pattern equal to Π).
fn indicators(p: &Partition, n_dim: usize) -> (Vec<f64>, Vec<f64>) {
    let len = p.ground_size();
    let total = n_dim.pow(len as u32);
    let mut e = vec![0.0; total];
    let mut i = vec![0.0; total];
    for idx in 0..total {
        let pattern = Partition::from_labels(&digits(idx, n_dim, len));
        if le(&p, &pattern) {
            e[idx] = 1.0;
        }
        if pattern == *p {
            i[idx] = 1.0;
        }
    }
    (e, i)
}

#[test]
fn state_sizes() {
    for m in [2, 4] {
        for n_dim in m..=6 {
            for p in partitions(m).unwrap() {
                let (e, i) = indicators(&p, n_dim);
                let e_size = e.iter().sum::<f64>() as usize;
                let i_size = i.iter().sum::<f64>() as usize;
                assert_eq!(e_size, n_dim.pow(p.num_blocks() as u32));
                assert_eq!(i_size, falling(n_dim, p.num_blocks()));
            }
        }
    }
}

#[test]
fn mobius_round_trip() {
    for (m, n_dim) in [(2, 6), (4, 4), (4, 6)] {
        let parts = partitions(m).unwrap();
        let vectors: Vec<(Vec<f64>, Vec<f64>)> = parts.iter().map(|p| indicators(p, n_dim)).collect();
        for (a, pa) in parts.iter().enumerate() {
            // I_Π = Σ_{Π' ≥ Π} μ(Π, Π') E_Π'
            let mut expanded = vec![0.0; vectors[a].0.len()];
            for (b, pb) in parts.iter().enumerate() {
                if le(&pa, pb) {
                    let mu = mobius(pa, pb).unwrap() as f64;
                    expanded.iter_mut().zip(&vectors[b].0).for_each(|(x, y)| *x += mu * y);
                }
            }
            let err = expanded.iter().zip(&vectors[a].1).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(err < 1e-10);
            // E_Π = Σ_{Π' ≥ Π} I_Π'
            let mut back = vec![0.0; expanded.len()];
            for (b, pb) in parts.iter().enumerate() {
                if le(&pa, pb) {
                    back.iter_mut().zip(&vectors[b].1).for_each(|(x, y)| *x += y);
                }
            }
            let err = back.iter().zip(&vectors[a].0).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(err < 1e-10);
        }
    }
}

fn a_tilde_is_zero(p1: &Partition, p2: &Partition, k: usize) -> bool {
    p1.blocks().iter().all(|b1| {
        p2.blocks().iter().all(|b2| {
            let shared: Vec<usize> = b1.iter().filter(|x| b2.contains(x)).copied().collect();
            let first = shared.iter().filter(|&&x| x < k).count();
            first == shared.len() - first
        })
    })
}

#[test]
fn a_tilde_vanishes_exactly_above_pairings() {
    for k in 1..=2 {
        let parts = partitions(2 * k).unwrap();
        let pairings: Vec<Partition> = Permutation::all(k).iter().map(Partition::pairing).collect();
        for p1 in &parts {
            for p2 in &parts {
                let above = pairings
                    .iter()
                    .any(|q| le(&q, p1) && le(&q, p2));
                assert_eq!(a_tilde_is_zero(p1, p2, k), above, "{p1} {p2}");
            }
        }
    }
}

#[test]
fn haar_projector_spans_pairing_states() {
    for (n_dim, k) in [(2usize, 1usize), (5, 1), (8, 1), (3, 2), (5, 2), (8, 2)] {
        let dim = n_dim.pow(2 * k as u32);
        let columns: Vec<Vec<f64>> = Permutation::all(k)
            .iter()
            .map(|pi| {
                let (e, _) = indicators(&Partition::pairing(pi), n_dim);
                let norm = e.iter().sum::<f64>().sqrt();
                e.into_iter().map(|x| x / norm).collect()
            })
            .collect();
        // Gram-Schmidt, then the projector onto the span
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for v in &columns {
            let mut w = v.clone();
            for b in &basis {
                let d: f64 = b.iter().zip(&w).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-10 {
                basis.push(w.into_iter().map(|x| x / norm).collect());
            }
        }
        let projector = HaarProjector::new(n_dim, k).unwrap();
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for col in 0..dim {
                let expected: f64 = basis.iter().map(|b| b[r] * b[col]).sum();
                worst = worst.max((projector.entry(r, col) - expected).abs());
            }
        }
        assert!(worst < 1e-9, "N={n_dim} k={k}");
    }
}

/// `⟨E_a| F^{⊗k} ⊗ F̄^{⊗k} |E_b⟩` by explicit summation.
fn dense_element(p1: &Partition, p2: &Partition, n_dim: usize, k: usize) -> f64 {
    let (e1, _) = indicators(p1, n_dim);
    let (e2, _) = indicators(p2, n_dim);
    let rows: Vec<Vec<usize>> = (0..e1.len()).filter(|&i| e1[i] > 0.0).map(|i| digits(i, n_dim, 2 * k)).collect();
    let cols: Vec<Vec<usize>> = (0..e2.len()).filter(|&i| e2[i] > 0.0).map(|i| digits(i, n_dim, 2 * k)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for m in &rows {
        for n in &cols {
            let phase: i64 = (0..k).map(|t| (m[t] * n[t]) as i64 - (m[t + k] * n[t + k]) as i64).sum();
            let angle = 2.0 * std::f64::consts::PI * phase.rem_euclid(n_dim as i64) as f64 / n_dim as f64;
            acc += Complex64::from_polar(1.0, angle);
        }
    }
    let norm = (rows.len() * cols.len()) as f64;
    (acc / norm.sqrt() / (n_dim as f64).powi(k as i32)).re
}

#[test]
fn fourier_elements_match_dense_summation() {
    for (n_dim, k) in [(4, 1), (5, 1), (3, 2), (4, 2)] {
        let parts = partitions(2 * k).unwrap();
        for p1 in &parts {
            for p2 in &parts {
                let fast = fourier_e_element(p1, p2, n_dim as u64, k).unwrap();
                let slow = dense_element(p1, p2, n_dim, k);
                assert!((fast - slow).abs() < 1e-10, "N={n_dim} k={k} {p1} {p2}: {fast} vs {slow}");
                assert!((fast - fourier_e_element(p2, p1, n_dim as u64, k).unwrap()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn fourier_of_singletons_is_zero_state() {
    let n_dim = 4u64;
    for p1 in partitions(2).unwrap() {
        let value = fourier_e_element(&p1, &Partition::singletons(2), n_dim, 1).unwrap();
        assert!((value - (n_dim as f64).powf(-(p1.num_blocks() as f64) / 2.0)).abs() < 1e-12);
    }
}

#[test]
fn two_paths_agree_small() {
    for (n_dim, k) in [(5, 1), (16, 1)] {
        let restricted = lambda_a(n_dim as u64, k).unwrap().lambda;
        let dense = lambda_a_dense(n_dim, k).unwrap().lambda;
        assert!((restricted - dense).abs() < 1e-9);
    }
}

#[test]
fn classical_examples() {
    let all = Permutation::all(4);
    assert!(classical_tpe_lambda(&all, 2).unwrap() < 1e-10);
    assert!((classical_tpe_lambda(&[Permutation::identity(4)], 2).unwrap() - 1.0).abs() < 1e-10);
    let mut rng = stream(5, "classical");
    let set = random_permutation_set(16, 8, false, &mut rng);
    assert_eq!(set.len(), 8);
    assert!(classical_tpe_lambda(&set, 2).unwrap() < 1.0);
}

#[test]
fn quantum_examples() {
    let mut rng = stream(6, "quantum");
    let set = random_permutation_set(16, 4, true, &mut rng);
    let mixed = quantum_tpe_lambda(&set, 0.5, 1).unwrap();
    assert!(mixed.lambda_q < 1.0);
    assert_eq!(mixed.bound_satisfied, Some(true));
    let pure = quantum_tpe_lambda(&set, 1.0, 1).unwrap();
    // permutations alone fix every |I_Π⟩, Π ⊢ 2, not only the k! Haar states
    assert_eq!(pure.unit_count, 2);
    assert!((pure.lambda_q - 1.0).abs() < 1e-9);
    assert!((pure.optimal_p - 1.0 / (2.0 - pure.lambda_c)).abs() < 1e-12);
}

#[test]
fn bell_numbers_below_factorial() {
    for m in 1..=10 {
        assert!(partitions(m).unwrap().len() as u128 <= pseudoq::perm::factorial(m));
    }
}

proptest! {
    #[test]
    fn meet_is_greatest_lower_bound(a in prop::collection::vec(0usize..5, 5), b in prop::collection::vec(0usize..5, 5)) {
        let (pa, pb) = (Partition::from_labels(&a), Partition::from_labels(&b));
        let m = pa.meet(&pb).unwrap();
        prop_assert!(m.refines(&pa).unwrap() && m.refines(&pb).unwrap());
        for q in partitions(5).unwrap() {
            if le(&q, &pa) && le(&q, &pb) {
                prop_assert!(le(&q, &m));
            }
        }
    }

    #[test]
    fn smaller_lambda_never_needs_more_iterations(n_dim in 2u64..64, k in 1usize..4, lambda in 0.01f64..0.99, eps in 1e-6f64..1.0) {
        let m1 = design_iterations(n_dim, k, lambda, eps).unwrap();
        let m2 = design_iterations(n_dim, k, lambda / 2.0, eps).unwrap();
        prop_assert!(m2 <= m1);
    }
}
