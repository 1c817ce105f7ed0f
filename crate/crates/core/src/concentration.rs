//! Large-deviation bounds for designs and the Monte-Carlo experiments that try to
//! falsify them.
//!
//! Subsystem indices follow `i = s + d_S · e`: the system is the low digit.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::clifford::{CliffordTableau, SAMPLE_MAX_QUBITS};
use crate::error::{Error, Result};
use crate::linalg::{c, entropy_bits, haar_state, haar_unitary, purity, reduced_state, trace_norm, CMatrix, CVector};
use crate::seed::stream;

/// Levy constant for unitary-orbit functions.
pub const C1: f64 = 2.0 / (9.0 * PI * PI * PI);
/// Levy constant for random states in a subspace.
pub const C2: f64 = 1.0 / (18.0 * PI * PI * PI);
/// Largest total dimension for dense reduced-state experiments.
pub const EXPERIMENT_MAX_QUBITS: usize = 10;
/// One-sided 99% confidence.
pub const CONFIDENCE: f64 = 0.99;
const CHUNK: usize = 256;

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} must be positive, got {v}")))
    }
}

/// `E|X - μ|^m` bounds from a Gaussian tail `C e^{-a δ²}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MomentBounds {
    /// `C Γ(m/2 + 1) a^{-m/2}`.
    pub gamma_form: f64,
    /// `C (m / 2a)^{m/2}`.
    pub loose_form: f64,
}

pub fn moment_from_tail(c_pre: f64, a: f64, m: f64) -> Result<MomentBounds> {
    positive("C", c_pre)?;
    positive("a", a)?;
    positive("m", m)?;
    Ok(MomentBounds {
        gamma_form: c_pre * gamma(m / 2.0 + 1.0) * a.powf(-m / 2.0),
        loose_form: c_pre * (m / (2.0 * a)).powf(m / 2.0),
    })
}

/// `E X^m ≤ C (2m/a)^{m/2} + (2η)^m` for `X ≥ 0` with tail `C e^{-a δ²}` beyond `η`.
pub fn moment_from_tail_shifted(c_pre: f64, a: f64, eta: f64, m: f64) -> Result<f64> {
    positive("C", c_pre)?;
    positive("a", a)?;
    positive("m", m)?;
    if !(eta >= 0.0) {
        return Err(Error::Precondition(format!("η must be non-negative, got {eta}")));
    }
    Ok(c_pre * (2.0 * m / a).powf(m / 2.0) + (2.0 * eta).powf(m))
}

/// Inputs of the polynomial deviation bound for an `ε`-approximate `k`-design.
#[derive(Clone, Debug, Serialize)]
pub struct TailBoundParams {
    pub c: f64,
    pub a: f64,
    pub mu: f64,
    /// Sum of absolute monomial coefficients of the polynomial.
    pub alpha_f: f64,
    /// Polynomial degree `K`.
    pub degree: usize,
    pub d: f64,
    pub k: usize,
    pub eps: f64,
    pub delta: f64,
    pub m: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DesignTailBound {
    pub value: f64,
    pub m: usize,
    /// `a δ² / e`, before clipping.
    pub unconstrained_optimal_m: f64,
    /// `m*` rounded down and clipped to `1 ≤ m ≤ k / 2K`, if any integer is feasible.
    pub feasible_optimal_m: Option<usize>,
}

/// `δ^{-2m} (C (m/a)^m + (ε / d^k)(α + |μ|)^{2m})`.
pub fn design_tail_bound(p: &TailBoundParams) -> Result<DesignTailBound> {
    positive("C", p.c)?;
    positive("a", p.a)?;
    positive("δ", p.delta)?;
    positive("d", p.d)?;
    if p.m == 0 || 2 * p.m * p.degree > p.k {
        return Err(Error::Precondition(format!(
            "need 1 ≤ m and 2mK ≤ k, got m={}, K={}, k={}",
            p.m, p.degree, p.k
        )));
    }
    if p.eps < 0.0 {
        return Err(Error::Precondition(format!("ε must be non-negative, got {}", p.eps)));
    }
    let m = p.m as f64;
    let log_design = p.eps.ln() - p.k as f64 * p.d.ln() + 2.0 * m * (p.alpha_f + p.mu.abs()).ln();
    let haar_term = p.c * (m / p.a).powf(m);
    let value = (haar_term + log_design.exp()) / p.delta.powf(2.0 * m);
    let star = p.a * p.delta * p.delta / E;
    let cap = if p.degree == 0 { usize::MAX } else { p.k / (2 * p.degree) };
    let feasible = (cap >= 1).then(|| (star.floor() as usize).clamp(1, cap));
    Ok(DesignTailBound {
        value,
        m: p.m,
        unconstrained_optimal_m: star,
        feasible_optimal_m: feasible,
    })
}

/// Bipartition `S ⊗ E` with `d = d_S d_E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SubsystemSplit {
    pub d_s: usize,
    pub d_e: usize,
}

impl SubsystemSplit {
    pub fn new(d_s: usize, d_e: usize) -> Result<Self> {
        if d_s == 0 || d_e == 0 {
            return Err(Error::Precondition("subsystem dimensions must be positive".into()));
        }
        Ok(SubsystemSplit { d_s, d_e })
    }

    /// Split of `n` qubits with the low `log₂ d_S` qubits as the system.
    pub fn qubits(n: usize, d_s: usize) -> Result<Self> {
        if n > EXPERIMENT_MAX_QUBITS {
            return Err(Error::guard(format!("{n}-qubit states"), EXPERIMENT_MAX_QUBITS));
        }
        let d = 1usize << n;
        if !d_s.is_power_of_two() || d_s > d {
            return Err(Error::Precondition(format!("d_S={d_s} must be a power of two dividing 2^{n}")));
        }
        SubsystemSplit::new(d_s, d / d_s)
    }

    pub fn d(&self) -> usize {
        self.d_s * self.d_e
    }
}

/// `(d_S + d_E) / (d + 1)`.
pub fn expected_purity(split: SubsystemSplit) -> f64 {
    (split.d_s + split.d_e) as f64 / (split.d() + 1) as f64
}

/// Source of the random unitary applied to `|0…0⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StateEnsemble {
    Clifford,
    Haar,
}

impl FromStr for StateEnsemble {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "clifford" => Ok(StateEnsemble::Clifford),
            "haar" => Ok(StateEnsemble::Haar),
            other => Err(Error::Parse(format!("unknown ensemble {other:?}"))),
        }
    }
}

impl fmt::Display for StateEnsemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StateEnsemble::Clifford => "clifford",
            StateEnsemble::Haar => "haar",
        })
    }
}

/// Runs `f` once per sample on deterministic per-chunk streams.
fn sample_parallel<T, F>(samples: usize, seed: u64, label: &str, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<T> + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<T>>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = stream(seed, &format!("{label}/{chunk}"));
            let count = CHUNK.min(samples - chunk * CHUNK);
            (0..count).map(|_| f(&mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(samples);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Random pure states `U|0…0⟩` on `n` qubits.
pub fn sample_states(n: usize, samples: usize, ensemble: StateEnsemble, seed: u64) -> Result<Vec<CVector>> {
    if n > EXPERIMENT_MAX_QUBITS {
        return Err(Error::guard(format!("{n}-qubit dense states"), EXPERIMENT_MAX_QUBITS));
    }
    let d = 1usize << n;
    sample_parallel(samples, seed, &format!("states/{ensemble}"), |rng| match ensemble {
        StateEnsemble::Haar => Ok(haar_state(d, rng)),
        StateEnsemble::Clifford => {
            debug_assert!(n <= SAMPLE_MAX_QUBITS);
            let u = CliffordTableau::sample_uniform(n, rng)?.to_unitary()?;
            Ok(u.matrix().column(0).into_owned())
        }
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleMean {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl SampleMean {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        SampleMean {
            mean,
            stderr: (var / n).sqrt(),
            samples: values.len(),
        }
    }
}

/// Reduced-state purities `tr ψ_S²` of sampled states.
pub fn purity_samples(n: usize, d_s: usize, samples: usize, ensemble: StateEnsemble, seed: u64) -> Result<Vec<f64>> {
    SubsystemSplit::qubits(n, d_s)?;
    sample_states(n, samples, ensemble, seed)?
        .par_iter()
        .map(|psi| Ok(purity(&reduced_state(psi, d_s)?)))
        .collect()
}

pub fn purity_experiment(n: usize, d_s: usize, samples: usize, ensemble: StateEnsemble, seed: u64) -> Result<SampleMean> {
    if samples == 0 {
        return Err(Error::Precondition("at least one sample is required".into()));
    }
    Ok(SampleMean::of(&purity_samples(n, d_s, samples, ensemble, seed)?))
}

/// Markov bound `P(tr ψ_S² ≥ γ μ) ≤ 1/γ` valid for any 2-design.
pub fn purity_markov_bound(gamma_factor: f64) -> Result<f64> {
    positive("γ", gamma_factor)?;
    Ok((1.0 / gamma_factor).min(1.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyTailBound {
    pub mu: f64,
    /// `d_S / (d_E ln 2)`.
    pub beta: f64,
    /// Entropy level `-log₂ μ - α` of the bounded event.
    pub entropy_threshold: f64,
    pub value: f64,
    /// Closed form for the large-`n` regime, when its preconditions hold.
    pub simplified: Option<f64>,
}

/// `P(S(ψ_S) ≤ -log₂ μ - α) ≤ (μ (2^α - 1))^{-2m} (4 (4m / C₁ d)^m + (ε / d^k)(d⁴ + μ)^{2m})`.
pub fn entropy_tail_bound(n: usize, d_s: usize, alpha: f64, k: usize, eps: f64, m: usize) -> Result<EntropyTailBound> {
    if m == 0 || 4 * m > k {
        return Err(Error::Precondition(format!("need 1 ≤ m ≤ k/4, got m={m}, k={k}")));
    }
    positive("α", alpha)?;
    if eps < 0.0 {
        return Err(Error::Precondition(format!("ε must be non-negative, got {eps}")));
    }
    if n >= 64 || d_s == 0 || !d_s.is_power_of_two() || d_s > 1usize << n {
        return Err(Error::Precondition(format!("d_S={d_s} must be a power of two dividing 2^{n}")));
    }
    let d = 2f64.powi(n as i32);
    let d_e = d / d_s as f64;
    let mu = (d_s as f64 + d_e) / (d + 1.0);
    let mf = m as f64;
    let scale = mu * (2f64.powf(alpha) - 1.0);
    let haar = 4.0 * (4.0 * mf / (C1 * d)).powf(mf);
    let design = (eps.ln() - k as f64 * d.ln() + 2.0 * mf * (d.powi(4) + mu).ln()).exp();
    let value = (haar + design) / scale.powf(2.0 * mf);
    let nf = n as f64;
    let log_n = nf.log2();
    let regime = n >= 19
        && d_s >= 2
        && (d_s as f64) <= 2f64.powf(nf / 10.0)
        && alpha >= 2.0
        && k as f64 >= nf / (10.0 * log_n)
        && eps.log2() <= -2.0 * nf * nf;
    let simplified = regime.then(|| 8.0 * 2f64.powf(-(nf / (80.0 * log_n)) * (nf / 5.0 + alpha)));
    Ok(EntropyTailBound {
        mu,
        beta: d_s as f64 / (d_e * std::f64::consts::LN_2),
        entropy_threshold: -mu.log2() - alpha,
        value,
        simplified,
    })
}

/// Reduced-state entropies in bits.
pub fn entropy_samples(n: usize, d_s: usize, samples: usize, ensemble: StateEnsemble, seed: u64) -> Result<Vec<f64>> {
    SubsystemSplit::qubits(n, d_s)?;
    sample_states(n, samples, ensemble, seed)?
        .par_iter()
        .map(|psi| Ok(entropy_bits(&reduced_state(psi, d_s)?)))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ThermalizationBound {
    pub full: f64,
    pub simplified: f64,
    /// `ε ≤ (3/2)(4 d_S³ / d_R)^{k/8}`.
    pub eps_condition: bool,
    /// `k ≤ 4 d_S² / (9π³)`.
    pub k_condition: bool,
}

/// Design bound on `P(‖ρ_S - Ω_S‖₁ ≥ δ)`.
pub fn thermalization_bound(d_s: usize, d_r: usize, k: usize, eps: f64, delta: f64) -> Result<ThermalizationBound> {
    positive("δ", delta)?;
    if d_s == 0 || d_r == 0 || k == 0 {
        return Err(Error::Precondition("dimensions and k must be positive".into()));
    }
    if eps < 0.0 {
        return Err(Error::Precondition(format!("ε must be non-negative, got {eps}")));
    }
    let (ds, dr, kf) = (d_s as f64, d_r as f64, k as f64);
    let e8 = kf / 8.0;
    let design = (eps.ln() - kf * dr.ln() + (kf / 2.0) * (dr * dr + 1.0).ln()).exp();
    let full = (ds / (delta * delta)).powf(e8)
        * (2.0 * (kf / (2.0 * C2 * dr)).powf(e8) + (4.0 * ds * ds / dr).powf(e8) + design);
    let simplified = 6.0 * (4.0 * ds.powi(3) / (dr * delta * delta)).powf(e8);
    Ok(ThermalizationBound {
        full,
        simplified,
        eps_condition: eps <= 1.5 * (4.0 * ds.powi(3) / dr).powf(e8),
        k_condition: kf <= 4.0 * ds * ds / (9.0 * PI.powi(3)),
    })
}

/// Haar bound `P(‖ρ_S - Ω_S‖₁ ≥ ε + √(d_S / d_E^eff)) ≤ 2 e^{-C₂ d_R ε²}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HaarThermalizationBound {
    pub threshold: f64,
    pub probability: f64,
}

pub fn haar_thermalization_bound(d_s: usize, d_r: usize, d_e_eff: f64, eps: f64) -> Result<HaarThermalizationBound> {
    positive("ε", eps)?;
    positive("d_E^eff", d_e_eff)?;
    Ok(HaarThermalizationBound {
        threshold: eps + (d_s as f64 / d_e_eff).sqrt(),
        probability: (2.0 * (-C2 * d_r as f64 * eps * eps).exp()).min(1.0),
    })
}

fn check_orthonormal(basis: &[CVector]) -> Result<()> {
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate().skip(i) {
            let ip = a.dotc(b);
            let target = if i == j { 1.0 } else { 0.0 };
            if (ip - c(target, 0.0)).norm() > 1e-9 {
                return Err(Error::Precondition(format!("restriction basis is not orthonormal at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// `Ω_S = tr_E(I_R / d_R)` for an orthonormal basis of `H_R ⊆ H_S ⊗ H_E`.
pub fn canonical_state(basis: &[CVector], d_s: usize) -> Result<CMatrix> {
    if basis.is_empty() {
        return Err(Error::Precondition("restriction subspace is empty".into()));
    }
    check_orthonormal(basis)?;
    let mut omega = CMatrix::zeros(d_s, d_s);
    for b in basis {
        omega += reduced_state(b, d_s)?;
    }
    Ok(omega / c(basis.len() as f64, 0.0))
}

/// `tr_S` of `|ψ⟩⟨ψ|`.
fn environment_state(psi: &CVector, d_s: usize) -> CMatrix {
    let d_e = psi.len() / d_s;
    CMatrix::from_fn(d_e, d_e, |e, f| (0..d_s).map(|s| psi[s + d_s * e] * psi[s + d_s * f].conj()).sum())
}

/// `1 / tr Ω_E²`.
pub fn effective_environment_dimension(basis: &[CVector], d_s: usize) -> Result<f64> {
    check_orthonormal(basis)?;
    let d_e = basis[0].len() / d_s;
    let mut omega = CMatrix::zeros(d_e, d_e);
    for b in basis {
        omega += environment_state(b, d_s);
    }
    omega /= c(basis.len() as f64, 0.0);
    Ok(1.0 / purity(&omega))
}

/// Orthonormal basis of a random `d_R`-dimensional subspace of `C^d`.
pub fn random_subspace(d: usize, d_r: usize, seed: u64) -> Result<Vec<CVector>> {
    if d_r == 0 || d_r > d {
        return Err(Error::Precondition(format!("need 1 ≤ d_R ≤ {d}, got {d_r}")));
    }
    if d > 1 << EXPERIMENT_MAX_QUBITS {
        return Err(Error::guard(format!("dense subspace in dimension {d}"), 1 << EXPERIMENT_MAX_QUBITS));
    }
    let mut rng = stream(seed, "subspace");
    let u = haar_unitary(d, &mut rng);
    Ok((0..d_r).map(|j| u.column(j).into_owned()).collect())
}

/// Random state of the subspace spanned by `basis`.
pub fn restricted_state<R: rand::Rng + ?Sized>(basis: &[CVector], rng: &mut R) -> CVector {
    let coeffs = haar_state(basis.len(), rng);
    let mut psi = CVector::zeros(basis[0].len());
    for (b, a) in basis.iter().zip(coeffs.iter()) {
        psi += b * *a;
    }
    psi
}

#[derive(Clone, Debug, Serialize)]
pub struct ThermalExperiment {
    pub d_s: usize,
    pub d_e: usize,
    pub d_r: usize,
    pub d_e_eff: f64,
    /// `‖ρ_S - Ω_S‖₁` per sample.
    pub distances: Vec<f64>,
}

/// Samples `‖ρ_S - Ω_S‖₁` for Haar states of a random restriction subspace.
pub fn thermal_experiment(d_s: usize, d_e: usize, d_r: usize, samples: usize, seed: u64) -> Result<ThermalExperiment> {
    let basis = random_subspace(d_s * d_e, d_r, seed)?;
    let omega = canonical_state(&basis, d_s)?;
    let d_e_eff = effective_environment_dimension(&basis, d_s)?;
    let distances = sample_parallel(samples, seed, "thermal", |rng| {
        let psi = restricted_state(&basis, rng);
        Ok(trace_norm(&(reduced_state(&psi, d_s)? - &omega)))
    })?;
    Ok(ThermalExperiment {
        d_s,
        d_e,
        d_r,
        d_e_eff,
        distances,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OverlapBound {
    /// `(1 + ε) m! / (d δ)^m`.
    pub factorial_form: f64,
    /// `(1 + ε)(m / d δ)^m`.
    pub power_form: f64,
}

pub fn overlap_tail_bound(d: usize, k: usize, m: usize, eps: f64, delta: f64) -> Result<OverlapBound> {
    if m == 0 || m > k {
        return Err(Error::Precondition(format!("need 1 ≤ m ≤ k, got m={m}, k={k}")));
    }
    positive("δ", delta)?;
    let dd = d as f64 * delta;
    let mf = m as f64;
    Ok(OverlapBound {
        factorial_form: (1.0 + eps) * (ln_gamma(mf + 1.0) - mf * dd.ln()).exp(),
        power_form: (1.0 + eps) * (mf / dd).powf(mf),
    })
}

/// `|⟨0|Ψ⟩|²` for Haar states in dimension `d`.
pub fn overlap_samples(d: usize, samples: usize, seed: u64) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::Precondition("dimension must be positive".into()));
    }
    sample_parallel(samples, seed, "overlap", |rng| Ok(haar_state(d, rng)[0].norm_sqr()))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GeometricBound {
    pub log2_value: f64,
    pub value: f64,
}

/// `(1 + ε) 2^{k log₂ 2k + 4n log₂ 10n - kδ + 4n(n - δ)}` bounding `P(E_g ≤ n - δ)`.
pub fn geometric_bound(n: usize, k: usize, eps: f64, delta: f64) -> Result<GeometricBound> {
    if n == 0 || k == 0 {
        return Err(Error::Precondition("n and k must be positive".into()));
    }
    let (nf, kf) = (n as f64, k as f64);
    let log2_value = (1.0 + eps).log2() + kf * (2.0 * kf).log2() + 4.0 * nf * (10.0 * nf).log2() - kf * delta
        + 4.0 * nf * (nf - delta);
    Ok(GeometricBound {
        log2_value,
        value: 2f64.powf(log2_value),
    })
}

/// `Γ(s+1)Γ(1/2)/Γ(s+1/2) ≤ 2√s` for `s = 1..=s_max`; returns the first failure.
pub fn gamma_ratio_check(s_max: u64) -> Option<u64> {
    let half = ln_gamma(0.5);
    (1..=s_max).find(|&s| {
        let sf = s as f64;
        let lhs = ln_gamma(sf + 1.0) + half - ln_gamma(sf + 0.5);
        lhs > (2.0 * sf.sqrt()).ln() + 1e-12
    })
}

/// Outcome of checking a bound against an empirical event frequency.
#[derive(Clone, Debug, Serialize)]
pub struct Falsification {
    pub bound: f64,
    pub hits: usize,
    pub samples: usize,
    pub frequency: f64,
    /// One-sided Wilson lower confidence limit at [`CONFIDENCE`].
    pub wilson_lower: f64,
    pub consistent: bool,
}

pub fn wilson_lower(hits: usize, samples: usize, confidence: f64) -> f64 {
    if samples == 0 {
        return 0.0;
    }
    let z = Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(confidence);
    let n = samples as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let centre = p + z2 / (2.0 * n);
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - spread) / (1.0 + z2 / n)).max(0.0)
}

/// A bound is falsified only when it lies below the lower confidence limit of the frequency.
pub fn falsify(bound: f64, hits: usize, samples: usize) -> Falsification {
    let lower = wilson_lower(hits, samples, CONFIDENCE);
    Falsification {
        bound,
        hits,
        samples,
        frequency: if samples == 0 { 0.0 } else { hits as f64 / samples as f64 },
        wilson_lower: lower,
        consistent: bound >= lower,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_examples() {
        let b = moment_from_tail(3.0, 2.0, 2.0).unwrap();
        assert!((b.gamma_form - 1.5).abs() < 1e-12);
        for m in [2.0, 4.0, 6.0, 8.0] {
            let b = moment_from_tail(1.0, 0.7, m).unwrap();
            assert!(b.gamma_form <= b.loose_form * (1.0 + 1e-12));
        }
        let shifted = moment_from_tail_shifted(2.0, 3.0, 0.0, 4.0).unwrap();
        let loose = moment_from_tail(2.0, 3.0 / 4.0, 4.0).unwrap().loose_form;
        assert!((shifted - loose).abs() < 1e-9 * loose);
    }

    #[test]
    fn design_bound_single_term() {
        let p = TailBoundParams {
            c: 2.0,
            a: 5.0,
            mu: 0.3,
            alpha_f: 4.0,
            degree: 2,
            d: 16.0,
            k: 4,
            eps: 0.0,
            delta: 0.5,
            m: 1,
        };
        let b = design_tail_bound(&p).unwrap();
        assert!((b.value - 2.0 / (5.0 * 0.25)).abs() < 1e-12);
        assert!(design_tail_bound(&TailBoundParams { m: 2, ..p }).is_err());
    }

    #[test]
    fn purity_formula() {
        assert!((expected_purity(SubsystemSplit::new(2, 2).unwrap()) - 0.8).abs() < 1e-15);
        assert_eq!(expected_purity(SubsystemSplit::new(1, 8).unwrap()), 1.0);
        assert!((expected_purity(SubsystemSplit::new(4, 4).unwrap()) - 8.0 / 17.0).abs() < 1e-15);
    }

    #[test]
    fn canonical_state_limits() {
        let full: Vec<CVector> = (0..4)
            .map(|i| {
                let mut v = CVector::zeros(4);
                v[i] = c(1.0, 0.0);
                v
            })
            .collect();
        let omega = canonical_state(&full, 2).unwrap();
        assert!((omega - CMatrix::identity(2, 2) * c(0.5, 0.0)).norm() < 1e-15);
        let pure = canonical_state(&full[..1], 2).unwrap();
        assert!((purity(&pure) - 1.0).abs() < 1e-15);
        let skewed = vec![full[0].clone(), full[0].clone()];
        assert!(canonical_state(&skewed, 2).is_err());
    }

    #[test]
    fn overlap_and_geometric() {
        let b = overlap_tail_bound(16, 3, 1, 0.0, 1.0).unwrap();
        assert!((b.factorial_form - 1.0 / 16.0).abs() < 1e-15);
        for n in 2..40 {
            let nf = n as f64;
            let g = geometric_bound(n, n * n, 1.0, 3.0 * nf.log2() + 5.0).unwrap();
            assert!(g.log2_value <= 1.0 - nf * nf * nf.log2() + 1e-9);
        }
    }

    #[test]
    fn thermalization_boundary() {
        let (d_s, delta) = (2usize, 0.5);
        let d_r = (4.0 * 8.0 / (delta * delta)) as usize;
        let b = thermalization_bound(d_s, d_r, 8, 0.0, delta).unwrap();
        assert!((b.simplified - 6.0).abs() < 1e-12);
        assert!(thermalization_bound(d_s, d_r, 8, 0.0, 1e6).unwrap().simplified < 1e-10);
    }

    #[test]
    fn gamma_ratio_holds() {
        assert_eq!(gamma_ratio_check(10_000), None);
    }

    #[test]
    fn wilson_behaviour() {
        assert_eq!(wilson_lower(0, 100, CONFIDENCE), 0.0);
        let w = wilson_lower(50, 100, CONFIDENCE);
        assert!(w < 0.5 && w > 0.35);
        assert!(falsify(0.4, 50, 100).consistent);
        assert!(!falsify(0.1, 50, 100).consistent);
    }
}
