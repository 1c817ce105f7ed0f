use nalgebra::DVector;
use proptest::prelude::*;
use pseudoq::clifford::{enumerate_group, CliffordTableau};
use pseudoq::learning::*;
use pseudoq::linalg::{c, haar_unitary, CMatrix};
use pseudoq::pauli::{all_paulis, PauliString};
use pseudoq::seed::stream;
use pseudoq::Error;

fn dense(t: &CliffordTableau) -> CMatrix {
    t.to_unitary().unwrap().into_matrix()
}

fn d(a: &CMatrix, b: &CMatrix) -> f64 {
    distance(a, b, DistanceKind::D).unwrap().value
}

fn conj(u: &CMatrix, p: &CMatrix) -> CMatrix {
    u * p * u.adjoint()
}

#[test]
fn distance_kinds_ordered_and_triangular() {
    let mut rng = stream(11, "triangle");
    for trial in 0..10_000 {
        let dim = [2, 4, 8, 16][trial % 4];
        let (a, b, m) = (haar_unitary(dim, &mut rng), haar_unitary(dim, &mut rng), haar_unitary(dim, &mut rng));
        for kind in [DistanceKind::D, DistanceKind::DPlus] {
            let ab = distance(&a, &b, kind).unwrap().value;
            let am = distance(&a, &m, kind).unwrap().value;
            let mb = distance(&m, &b, kind).unwrap().value;
            assert!(ab <= am + mb + 1e-9, "{kind} triangle violated");
        }
        // D ≤ √2 D⁺ since 1 - |w|² ≤ 2(1 - Re w); D ≤ D⁺ fails for real overlaps in (0, 1)
        assert!(d(&a, &b) <= 2f64.sqrt() * distance(&a, &b, DistanceKind::DPlus).unwrap().value + 1e-12);
    }
}

#[test]
fn close_unitaries_have_close_pauli_conjugates() {
    let mut rng = stream(12, "conjugates");
    let mut trials = 0;
    while trials < 10_000 {
        let n = 1 + trials % 3;
        let dim = 1 << n;
        let u1 = haar_unitary(dim, &mut rng);
        // small perturbations keep the pair in the regime of interest
        let kick = haar_unitary(dim, &mut rng);
        let gen = (&kick + kick.adjoint()) * c(0.0, 0.05 * (trials % 7) as f64);
        let u2 = &u1 * exp_skew(&gen);
        let base = d(&u1, &u2);
        for p in all_paulis(n) {
            let pm = p.to_dense().unwrap();
            assert!(d(&conj(&u1, &pm), &conj(&u2, &pm)) <= 2.0 * base + 1e-9);
            trials += 1;
        }
    }
}

/// `exp(A)` for anti-Hermitian `A` by scaling and squaring a Taylor series.
fn exp_skew(a: &CMatrix) -> CMatrix {
    let dim = a.nrows();
    let scaled = a / c(1024.0, 0.0);
    let mut term = CMatrix::identity(dim, dim);
    let mut sum = term.clone();
    for j in 1..20 {
        term = &term * &scaled / c(j as f64, 0.0);
        sum += &term;
    }
    for _ in 0..10 {
        sum = &sum * &sum;
    }
    sum
}

#[test]
fn close_conjugates_give_close_unitaries() {
    // if every generator conjugate is within η then the unitaries are within 2nη
    let mut rng = stream(13, "converse");
    for n in 1..=2 {
        let dim = 1 << n;
        for _ in 0..500 {
            let u1 = haar_unitary(dim, &mut rng);
            let kick = haar_unitary(dim, &mut rng);
            let u2 = &u1 * exp_skew(&((&kick + kick.adjoint()) * c(0.0, 0.02)));
            let worst = PauliString::generators(n)
                .iter()
                .map(|g| {
                    let gm = g.to_dense().unwrap();
                    d(&conj(&u1, &gm), &conj(&u2, &gm))
                })
                .fold(0.0, f64::max);
            assert!(d(&u1, &u2) <= 2.0 * n as f64 * worst + 1e-9);
        }
    }
}

#[test]
fn pauli_identification_up_to_ten_qubits() {
    let mut rng = stream(14, "paulis");
    for trial in 0..1000 {
        let n = 1 + trial % 10;
        let idx: u128 = rand::Rng::random_range(&mut rng, 0..1u128 << (2 * n));
        let p = PauliString::from_index(n, idx).unwrap();
        let oracle = UnitaryOracle::from_tableau(CliffordTableau::from_pauli(&p));
        assert_eq!(learn_pauli(&oracle).unwrap(), p);
        assert_eq!(oracle.queries(), QueryCount { forward: 1, adjoint: 0 });
    }
    let id = UnitaryOracle::from_tableau(CliffordTableau::identity(3));
    assert!(learn_pauli(&id).unwrap().is_identity());
}

#[test]
fn exhaustive_single_qubit_cliffords() {
    let group = enumerate_group(1).unwrap();
    assert_eq!(group.len(), 24);
    for t in &group {
        let oracle = UnitaryOracle::from_tableau(t.clone());
        let got = learn_clifford(&oracle).unwrap();
        assert!(d(&dense(&got), &dense(t)) < 1e-9);
        assert_eq!(oracle.queries(), QueryCount { forward: 3, adjoint: 2 });
    }
}

#[test]
fn non_pauli_flagged() {
    let h = UnitaryOracle::from_tableau(CliffordTableau::hadamard(1, 0));
    assert!(matches!(learn_pauli(&h), Err(Error::NotConcentrated { .. })));
}

#[test]
fn level_two_matches_clifford_counts() {
    let mut rng = stream(15, "level-two");
    let t = CliffordTableau::sample_uniform(2, &mut rng).unwrap();
    let oracle = UnitaryOracle::from_dense(dense(&t)).unwrap();
    let got = learn_ck(&oracle, 2).unwrap();
    assert!(d(&got.to_dense().unwrap(), &dense(&t)) < 1e-9);
    assert_eq!(oracle.queries(), QueryCount { forward: 5, adjoint: 4 });
    assert_eq!(stated_ck_queries(2, 2), oracle.queries());
}

#[test]
fn level_three_two_qubits() {
    let t = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(0.0, std::f64::consts::FRAC_PI_4).exp()]));
    let t_on_first = pseudoq::linalg::kron(&CMatrix::identity(2, 2), &t);
    let mut rng = stream(16, "level-three");
    let cliff = dense(&CliffordTableau::sample_uniform(2, &mut rng).unwrap());
    let u = &cliff * &t_on_first;
    let oracle = UnitaryOracle::from_dense(u.clone()).unwrap();
    let got = learn_ck(&oracle, 3).unwrap();
    assert_eq!(got.level(), 3);
    assert!(d(&got.to_dense().unwrap(), &u) < 1e-9);
    assert_eq!(oracle.queries(), QueryCount { forward: 37, adjoint: 36 });
}

#[test]
fn level_guard() {
    let oracle = UnitaryOracle::from_tableau(CliffordTableau::identity(3));
    assert!(matches!(learn_ck(&oracle, 3), Err(Error::DimensionGuard { .. })));
}

#[test]
fn coefficient_examples() {
    let mut rng = stream(17, "coefficients");
    let x: PauliString = "+XI".parse().unwrap();
    let pauli_oracle = UnitaryOracle::from_dense(x.to_dense().unwrap()).unwrap();
    let est = estimate_pauli_coefficient(&pauli_oracle, &x, 0.05, 0.01, &mut rng).unwrap();
    assert!((est.estimate - 1.0).abs() < 1e-12);
    let id = UnitaryOracle::from_dense(CMatrix::identity(4, 4)).unwrap();
    let est = estimate_pauli_coefficient(&id, &x, 0.05, 0.01, &mut rng).unwrap();
    assert_eq!(est.estimate, 0.0);
}

#[test]
fn closest_clifford_under_perturbation() {
    let mut rng = stream(18, "closest");
    let cfg = LearningConfig::new(0.3, 0.05);
    let mut failures = 0;
    for _ in 0..500 {
        let t = CliffordTableau::sample_uniform(2, &mut rng).unwrap();
        let base = dense(&t);
        let kick = haar_unitary(4, &mut rng);
        let gen = (&kick + kick.adjoint()) * c(0.0, 1.0);
        // rescale the rotation so that the measured distance is 0.05
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if d(&(&base * exp_skew(&(&gen * c(mid, 0.0)))), &base) < 0.05 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let u = &base * exp_skew(&(&gen * c(lo, 0.0)));
        assert!((d(&u, &base) - 0.05).abs() < 1e-6);
        let oracle = UnitaryOracle::from_dense(u).unwrap();
        match learn_closest(&oracle, 2, &cfg, &mut rng) {
            Ok(CkDescription::Clifford { tableau }) if d(&dense(&tableau), &base) < 1e-9 => {}
            _ => failures += 1,
        }
    }
    assert!(failures as f64 <= 0.05 * 500.0, "{failures} failures");
}

#[test]
fn exact_clifford_always_learned_closest() {
    let mut rng = stream(19, "exact-closest");
    for eps in [0.01, 0.2, 0.35] {
        let t = CliffordTableau::sample_uniform(3, &mut rng).unwrap();
        let oracle = UnitaryOracle::from_tableau(t.clone());
        match learn_closest(&oracle, 2, &LearningConfig::new(eps, 0.1), &mut rng).unwrap() {
            CkDescription::Clifford { tableau } => assert_eq!(tableau, t),
            other => panic!("unexpected {other:?}"),
        }
    }
}

#[test]
fn far_instance_lands_in_window() {
    let group = clifford_group_dense(2).unwrap();
    assert_eq!(group.len(), 11520);
    let mut rng = stream(20, "far");
    let seed = CliffordTableau::sample_uniform(2, &mut rng).unwrap();
    let far = far_instance(&seed, &group, (0.3 + 1.0 / 3.0) / 2.0).unwrap();
    assert!(far.distance > 0.3 && far.distance < 1.0 / 3.0);
}

#[test]
fn testing_answers_close_for_cliffords() {
    let mut rng = stream(21, "test-close");
    let t = CliffordTableau::sample_uniform(2, &mut rng).unwrap();
    let oracle = UnitaryOracle::from_dense(dense(&t)).unwrap();
    let report = test_clifford(&oracle, 0.3, 0.05, &mut rng).unwrap();
    assert_eq!(report.verdict, Verdict::Close);
    let q = oracle.queries();
    assert!(((q.forward + q.adjoint) as f64) < 1000.0 * testing_envelope(2, 0.3, 0.05));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clifford_counts_exact(n in 1usize..=6, seed in any::<u64>()) {
        let mut rng = stream(seed, "prop-learn");
        let t = CliffordTableau::sample_uniform(n, &mut rng).unwrap();
        let oracle = UnitaryOracle::from_tableau(t.clone());
        prop_assert_eq!(learn_clifford(&oracle).unwrap(), t);
        prop_assert_eq!(oracle.queries(), QueryCount { forward: 2 * n as u64 + 1, adjoint: 2 * n as u64 });
    }

    #[test]
    fn distance_phase_invariant(theta in 0.0f64..std::f64::consts::TAU, seed in any::<u64>()) {
        let mut rng = stream(seed, "prop-phase");
        let u = haar_unitary(4, &mut rng);
        let v = &u * c(0.0, theta).exp();
        prop_assert!(d(&u, &v) < 1e-6);
    }
}
