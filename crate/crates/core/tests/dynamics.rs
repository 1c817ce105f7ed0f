use pseudoq::chains::*;
use pseudoq::linalg::{general_eigenvalues, real_to_complex};
use pseudoq::pauli::{all_paulis, PauliString};
use pseudoq::random_circuit::*;
use pseudoq::seed::stream;

#[test]
fn diagonal_restriction_is_stochastic() {
    for n in 2..=4 {
        let chain = full_diagonal_chain(&CircuitModel::haar(n).unwrap()).unwrap();
        let p = chain.matrix();
        for r in 0..p.nrows() {
            assert!((p.row(r).sum() - 1.0).abs() < 1e-12);
            assert!(p.row(r).iter().all(|&v| v >= 0.0));
        }
    }
}

#[test]
fn offdiagonal_mass_decays() {
    let mut rng = stream(41, "offdiag");
    for n in 2..=4 {
        let model = CircuitModel::haar(n).unwrap();
        let step = step_operator(&model).unwrap();
        let mut v = MomentVector::zero(n);
        let paulis: Vec<PauliString> = all_paulis(n).collect();
        for _ in 0..40 {
            let a = &paulis[rand::Rng::random_range(&mut rng, 0..paulis.len())];
            let b = &paulis[rand::Rng::random_range(&mut rng, 0..paulis.len())];
            v.set(MomentVector::<f64>::label(a, b).unwrap(), rand::Rng::random_range(&mut rng, -1.0..1.0));
        }
        let mut last = v.offdiagonal_abs_sum();
        for _ in 0..30 {
            v = step.apply(&v).unwrap();
            let now = v.offdiagonal_abs_sum();
            assert!(now <= last + 1e-12);
            last = now;
        }
    }
}

#[test]
fn fixed_vectors_have_eigenvalue_one() {
    for n in 2..=4 {
        let step = step_operator(&CircuitModel::haar(n).unwrap()).unwrap();
        let mut identity = MomentVector::<f64>::zero(n);
        identity.set(0, 1.0);
        let after = step.apply(&identity).unwrap();
        assert!((after.get(0) - 1.0).abs() < 1e-12 && after.len() == 1);
        let mut uniform = MomentVector::<f64>::zero(n);
        for p in all_paulis(n).skip(1) {
            uniform.set(MomentVector::<f64>::label(&p, &p).unwrap(), 1.0);
        }
        let after = step.apply(&uniform).unwrap();
        let err: f64 = uniform.iter().map(|(l, v)| (after.get(*l) - v).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12 && after.len() == uniform.len());
    }
}

#[test]
fn explicit_matrix_fixes_both_vectors() {
    let n = 3;
    let step = step_operator(&CircuitModel::haar(n).unwrap()).unwrap();
    let cols = step.explicit_columns().unwrap();
    let labels = cols.len();
    let mut x = vec![0.0; labels];
    for p in all_paulis(n).skip(1) {
        x[MomentVector::<f64>::label(&p, &p).unwrap() as usize] = 1.0;
    }
    let mut y = vec![0.0; labels];
    for (col, entries) in cols.iter().enumerate() {
        for &(row, w) in entries {
            y[row] += w * x[col];
        }
    }
    assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn zero_chain_detailed_balance() {
    for n in [2, 3, 5, 16, 64, 200, 512] {
        let chain = zero_chain(n).unwrap();
        let pi = zero_stationary(n).unwrap();
        let p = chain.matrix();
        for x in 0..n - 1 {
            let lhs = pi[x] * p[(x, x + 1)];
            let rhs = pi[x + 1] * p[(x + 1, x)];
            assert!((lhs - rhs).abs() < 1e-12, "n={n} x={x}");
        }
    }
}

#[test]
fn lumped_spectrum_inside_full_spectrum() {
    for n in 2..=4 {
        let full = full_diagonal_chain(&CircuitModel::haar(n).unwrap()).unwrap();
        let zero = zero_chain(n).unwrap();
        let full_ev = general_eigenvalues(&real_to_complex(full.matrix())).unwrap();
        for z in general_eigenvalues(&real_to_complex(zero.matrix())).unwrap() {
            let closest = full_ev.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            assert!(closest < 1e-8, "n={n}: {z} missing");
        }
    }
}

#[test]
fn clifford_and_haar_gaps_comparable() {
    for n in 2..=4 {
        let haar = spectral_gap(&full_diagonal_chain(&CircuitModel::haar(n).unwrap()).unwrap()).unwrap();
        let cliff = spectral_gap(&full_diagonal_chain(&CircuitModel::new(n, GateSource::Clifford2).unwrap()).unwrap()).unwrap();
        let ratio = cliff / haar;
        assert!(ratio > 0.5 && ratio < 2.0, "n={n} ratio {ratio}");
    }
}

#[test]
fn clifford_and_haar_share_stationary_limit() {
    let n = 2;
    let start = MomentVector::<f64>::product_zero_state(n).unwrap();
    let haar = evolve_moments(&CircuitModel::haar(n).unwrap(), &start, 200).unwrap();
    let cliff = evolve_moments(&CircuitModel::new(n, GateSource::Clifford2).unwrap(), &start, 200).unwrap();
    for (l, v) in haar.iter() {
        assert!((cliff.get(*l) - v).abs() < 1e-10);
    }
}

#[test]
fn stationary_matches_zero_chain_formula() {
    for n in [2, 3, 8, 64, 512] {
        let chain = zero_chain(n).unwrap();
        let pi = zero_stationary(n).unwrap();
        assert!(stationary_residual(&chain, &pi).unwrap() < 1e-12);
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn exact_scan_monotone() {
    let model = CircuitModel::haar(3).unwrap();
    let lengths: Vec<usize> = (0..=200).step_by(5).collect();
    let rows = convergence_scan(
        &model,
        2,
        &lengths,
        pseudoq::haar_moments::DesignMetric::Opnorm,
        ScanMode::Exact,
    )
    .unwrap();
    assert!(rows.windows(2).all(|w| w[1].value <= w[0].value + 1e-15));
    assert!(rows.last().unwrap().value < 0.01);
}
