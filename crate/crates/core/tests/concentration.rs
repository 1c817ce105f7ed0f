use proptest::prelude::*;
use pseudoq::concentration::*;
use pseudoq::linalg::{haar_state, purity, reduced_state};
use pseudoq::seed::stream;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn gaussian_moments_below_tail_bound() {
    // P(|X| ≥ t) ≤ 2 exp(-t²/2) for a standard normal
    let mut rng = stream(51, "gauss");
    let samples: Vec<f64> = (0..1_000_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    for m in [2.0, 4.0, 6.0] {
        let empirical = samples.iter().map(|x: &f64| x.abs().powf(m)).sum::<f64>() / samples.len() as f64;
        let bounds = moment_from_tail(2.0, 0.5, m).unwrap();
        assert!(bounds.gamma_form >= empirical);
        assert!(bounds.gamma_form <= bounds.loose_form);
    }
}

#[test]
fn shifted_moment_monotone_and_valid() {
    let mut last = 0.0;
    for i in 0..20 {
        let v = moment_from_tail_shifted(2.0, 0.5, 0.1 * i as f64, 3.0).unwrap();
        assert!(v >= last);
        last = v;
    }
    // |X + 1| for standard normal X has tail 2 exp(-(t-1)²/2)
    let mut rng = stream(52, "shifted");
    let n = 200_000;
    let mean = (0..n)
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            (x + 1.0).abs()
        })
        .sum::<f64>()
        / n as f64;
    assert!(moment_from_tail_shifted(2.0, 0.5, 1.0, 1.0).unwrap() >= mean);
}

#[test]
fn purity_is_two_lipschitz() {
    let mut rng = stream(53, "lipschitz");
    for trial in 0..10_000 {
        let (d, d_s) = [(4, 2), (8, 2), (16, 4), (32, 4)][trial % 4];
        let psi = haar_state(d, &mut rng);
        let phi = if trial % 2 == 0 {
            haar_state(d, &mut rng)
        } else {
            let kick = haar_state(d, &mut rng);
            let mixed = &psi + kick * num_complex::Complex64::new(0.05, 0.0);
            let norm = mixed.norm();
            mixed / num_complex::Complex64::new(norm, 0.0)
        };
        let gap = (purity(&reduced_state(&psi, d_s).unwrap()) - purity(&reduced_state(&phi, d_s).unwrap())).abs();
        assert!(gap <= 2.0 * (&psi - &phi).norm() + 1e-12);
    }
}

#[test]
fn trivial_subsystem_purity() {
    let samples = purity_samples(4, 1, 100, StateEnsemble::Clifford, 3).unwrap();
    assert!(samples.iter().all(|&p| (p - 1.0).abs() < 1e-12));
}

#[test]
fn ensembles_agree_on_mean_purity() {
    let cliff = purity_experiment(4, 4, 10_000, StateEnsemble::Clifford, 7).unwrap();
    let haar = purity_experiment(4, 4, 10_000, StateEnsemble::Haar, 7).unwrap();
    let combined = (cliff.stderr.powi(2) + haar.stderr.powi(2)).sqrt();
    assert!((cliff.mean - haar.mean).abs() < 4.0 * combined);
}

#[test]
fn canonical_state_matches_sampled_average() {
    let basis = random_subspace(16, 8, 9).unwrap();
    let omega = canonical_state(&basis, 4).unwrap();
    let mut rng = stream(54, "canonical");
    let samples = 4000;
    let mut sum = pseudoq::linalg::CMatrix::zeros(4, 4);
    let mut sq = nalgebra::DMatrix::<f64>::zeros(4, 4);
    for _ in 0..samples {
        let rho = reduced_state(&restricted_state(&basis, &mut rng), 4).unwrap();
        sq += rho.map(|z| z.norm_sqr());
        sum += rho;
    }
    let n = samples as f64;
    let mean = sum / num_complex::Complex64::new(n, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            let var = (sq[(i, j)] / n - mean[(i, j)].norm_sqr()).max(0.0);
            let err = (var / n).sqrt().max(1e-6);
            assert!((mean[(i, j)] - omega[(i, j)]).norm() <= 3.0 * err + 1e-3, "({i},{j})");
        }
    }
}

#[test]
fn overlap_bound_holds_for_small_dimension() {
    let overlaps = overlap_samples(16, 1_000_000, 11).unwrap();
    for m in 1..=3 {
        for delta in [0.1, 0.2, 0.4] {
            let hits = overlaps.iter().filter(|&&x| x >= delta).count();
            let bound = overlap_tail_bound(16, 3, m, 0.0, delta).unwrap().factorial_form;
            assert!(falsify(bound, hits, overlaps.len()).consistent, "m={m} δ={delta}");
        }
    }
}

proptest! {
    #[test]
    fn design_bound_nonincreasing_in_k(a in 0.5f64..4.0, delta in 0.5f64..3.0) {
        let mut last = f64::INFINITY;
        for k in [2usize, 4, 8, 16, 32, 64] {
            let mut params = TailBoundParams { c: 2.0, a, mu: 0.0, alpha_f: 1.0, degree: 1, d: 16.0, k, eps: 0.01, delta, m: 1 };
            params.m = design_tail_bound(&params).unwrap().feasible_optimal_m.unwrap();
            let value = design_tail_bound(&params).unwrap().value;
            prop_assert!(value <= last * (1.0 + 1e-12));
            last = value;
        }
    }
}
