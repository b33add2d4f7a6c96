//! Classical exclusion-process oracle.
//!
//! The population process induced by the quantum model is a continuous-time
//! Markov chain on particle configurations: a particle hops `k → j` at rate
//! `w(j,k)` when site `k` is occupied and site `j` is free. Diagonal kernel
//! entries are pure dephasing and contribute no classical transitions (their
//! population terms cancel in `LρL* − ½{L*L, ρ}`).
//!
//! The chain is solved two independent ways — uniformisation of the forward
//! equation and Gillespie sampling — and cross-checked against the diagonal
//! of the quantum evolution.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::fock::{unit_f64, ModeCount, SubsetIndex};
use crate::report::{IdentityReport, Tolerances};
use crate::semigroup::{evolve_schrodinger, DensityMatrix, EvolutionParams, SemigroupModel};
use crate::weighted::TransitionKernel;

/// Generator of the configuration chain, column-stochastic convention:
/// `q[σ', σ]` is the rate of `σ → σ'` and each column sums to zero.
#[derive(Clone, Debug)]
pub struct RateMatrix {
    n: ModeCount,
    cols: Vec<Vec<(u32, f64)>>,
    exit: Vec<f64>,
}

impl RateMatrix {
    pub fn mode_count(&self) -> ModeCount {
        self.n
    }

    pub fn entry(&self, row: SubsetIndex, col: SubsetIndex) -> f64 {
        if row == col {
            return -self.exit[col.index()];
        }
        self.cols[col.index()]
            .iter()
            .find(|&&(r, _)| r as usize == row.index())
            .map_or(0.0, |&(_, v)| v)
    }

    /// Total outflow rate of a configuration.
    pub fn exit_rate(&self, sigma: SubsetIndex) -> f64 {
        self.exit[sigma.index()]
    }

    /// Off-diagonal transitions out of `sigma` as `(target, rate)`.
    pub fn transitions_from(&self, sigma: SubsetIndex) -> &[(u32, f64)] {
        &self.cols[sigma.index()]
    }

    /// Max-abs column-sum defect (should be zero up to rounding).
    pub fn column_sum_residual(&self) -> f64 {
        self.cols
            .iter()
            .zip(&self.exit)
            .map(|(col, &exit)| (col.iter().map(|&(_, v)| v).sum::<f64>() - exit).abs())
            .fold(0.0, f64::max)
    }
}

/// Builds the configuration-chain generator from a kernel. Only hops between
/// distinct sites enter; every allowed move conserves the particle number.
pub fn classical_generator(kernel: &TransitionKernel) -> RateMatrix {
    let n = kernel.mode_count();
    let modes = n.get();
    let dim = n.dim();
    let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); dim];
    let mut exit = vec![0.0f64; dim];
    for sigma in n.subsets() {
        let col = &mut cols[sigma.index()];
        for k in 0..modes {
            if !sigma.contains(k) {
                continue;
            }
            for j in 0..modes {
                if j == k || sigma.contains(j) {
                    continue;
                }
                let rate = kernel.rate(j, k);
                if rate == 0.0 {
                    continue;
                }
                let target = sigma.without(k).with(j);
                col.push((target.index() as u32, rate));
                exit[sigma.index()] += rate;
            }
        }
        col.sort_unstable_by_key(|&(r, _)| r);
    }
    RateMatrix { n, cols, exit }
}

/// A probability distribution over configurations, in bitmask order.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    p: Vec<f64>,
}

impl Distribution {
    /// Validates and clamps: entries must be `≥ −1e-12` (tiny negatives are
    /// clamped to zero) and sum to one within `1e-10`.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = p.iter().find(|&&v| v < -1e-12 || !v.is_finite()) {
            return Err(Error::Domain(format!("probability {bad} out of range")));
        }
        let p: Vec<f64> = p.into_iter().map(|v| v.max(0.0)).collect();
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("probabilities sum to {sum}, expected 1")));
        }
        Ok(Distribution { p })
    }

    pub fn point_mass(n: ModeCount, sigma: SubsetIndex) -> Result<Self> {
        if !sigma.is_valid_for(n) {
            return Err(Error::Shape(format!("subset {sigma} invalid for {} modes", n.get())));
        }
        let mut p = vec![0.0; n.dim()];
        p[sigma.index()] = 1.0;
        Ok(Distribution { p })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn probability(&self, sigma: SubsetIndex) -> f64 {
        self.p[sigma.index()]
    }

    /// Total-variation distance `½ Σ |p − q|`.
    pub fn tv_distance(&self, other: &Distribution) -> Result<f64> {
        if self.p.len() != other.p.len() {
            return Err(Error::Shape("distributions of different dimension".into()));
        }
        Ok(0.5 * self.p.iter().zip(&other.p).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }

    /// TV distance against a raw probability vector (e.g. quantum
    /// populations).
    pub fn tv_distance_to_slice(&self, q: &[f64]) -> Result<f64> {
        if self.p.len() != q.len() {
            return Err(Error::Shape("distributions of different dimension".into()));
        }
        Ok(0.5 * self.p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }
}

/// Kolmogorov forward evolution `p_t = e^{tQ} p₀` by uniformisation:
/// with `Λ = max exit rate` and `P = I + Q/Λ` (a stochastic matrix),
/// `p_t = e^{−Λt} Σ_m (Λt)^m/m! · P^m p₀`. Positivity-preserving and
/// independent of the dense matrix-exponential code path used on the
/// quantum side. Long horizons are split so `Λ·Δt` stays moderate.
pub fn evolve_classical(q: &RateMatrix, p0: &Distribution, t: f64) -> Result<Distribution> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    let dim = q.n.dim();
    if p0.p.len() != dim {
        return Err(Error::Shape("distribution dimension does not match generator".into()));
    }
    let lambda = q.exit.iter().copied().fold(0.0, f64::max);
    if lambda == 0.0 || t == 0.0 {
        return Ok(p0.clone());
    }
    // Split so each segment has Λ·Δt ≤ 64 (the Poisson series then needs a
    // few hundred terms at most and e^{−ΛΔt} does not underflow).
    let segments = ((lambda * t) / 64.0).ceil().max(1.0) as usize;
    let dt = t / segments as f64;
    let mut p = p0.p.clone();
    for _ in 0..segments {
        p = uniformization_step(q, &p, lambda, dt);
    }
    // Renormalise the tiny truncation defect before validating.
    let sum: f64 = p.iter().sum();
    if sum > 0.0 {
        for v in &mut p {
            *v /= sum;
        }
    }
    Distribution::new(p)
}

fn uniformization_step(q: &RateMatrix, p0: &[f64], lambda: f64, dt: f64) -> Vec<f64> {
    let a = lambda * dt;
    let mut weight = (-a).exp(); // Poisson(m = 0)
    let mut term = p0.to_vec();
    let mut acc: Vec<f64> = term.iter().map(|v| v * weight).collect();
    let mut m = 0usize;
    let mut tail = 1.0 - weight;
    while tail > 1e-15 && m < 100_000 {
        m += 1;
        // term <- P · term with P = I + Q/Λ
        let mut next = vec![0.0f64; term.len()];
        for (c, &v) in term.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            next[c] += v * (1.0 - q.exit[c] / lambda);
            for &(r, rate) in &q.cols[c] {
                next[r as usize] += v * (rate / lambda);
            }
        }
        term = next;
        weight *= a / m as f64;
        for (acc_v, &t_v) in acc.iter_mut().zip(&term) {
            *acc_v += weight * t_v;
        }
        tail -= weight;
    }
    acc
}

/// Exact stochastic simulation of the chain: exponential waiting times at
/// the total enabled rate, jump chosen proportionally to its rate. Returns
/// the empirical distribution of the configuration at time `t` over
/// independent trajectories. Trajectory `i` uses stream `i` of the seeded
/// generator, so results are reproducible and independent of evaluation
/// order.
pub fn gillespie_sample(
    kernel: &TransitionKernel,
    sigma0: SubsetIndex,
    t: f64,
    trials: usize,
    seed: u64,
) -> Result<Distribution> {
    let n = kernel.mode_count();
    if !sigma0.is_valid_for(n) {
        return Err(Error::Shape(format!("subset {sigma0} invalid for {} modes", n.get())));
    }
    gillespie_run(kernel, |_| sigma0, t, trials, seed)
}

/// Gillespie sampling from a random initial configuration `σ₀ ~ p₀`, drawn
/// per trajectory from that trajectory's own stream.
pub fn gillespie_sample_mixture(
    kernel: &TransitionKernel,
    p0: &Distribution,
    t: f64,
    trials: usize,
    seed: u64,
) -> Result<Distribution> {
    let n = kernel.mode_count();
    if p0.p.len() != n.dim() {
        return Err(Error::Shape("distribution dimension does not match kernel".into()));
    }
    gillespie_run(
        kernel,
        |rng| {
            let mut pick = unit_f64(rng);
            let mut chosen = p0.p.len() - 1;
            for (idx, &w) in p0.p.iter().enumerate() {
                if pick < w {
                    chosen = idx;
                    break;
                }
                pick -= w;
            }
            SubsetIndex::from_bits(chosen as u32)
        },
        t,
        trials,
        seed,
    )
}

fn gillespie_run(
    kernel: &TransitionKernel,
    start: impl Fn(&mut ChaCha8Rng) -> SubsetIndex,
    t: f64,
    trials: usize,
    seed: u64,
) -> Result<Distribution> {
    if trials == 0 {
        return Err(Error::Domain("trial count must be at least 1".into()));
    }
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    let n = kernel.mode_count();
    let q = classical_generator(kernel);
    let mut counts = vec![0u64; n.dim()];
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64 + 1);
        let mut sigma = start(&mut rng);
        let mut clock = 0.0f64;
        loop {
            let total = q.exit_rate(sigma);
            if total == 0.0 {
                break;
            }
            // exponential waiting time by inversion
            let u = unit_f64(&mut rng);
            clock += -(1.0 - u).ln() / total;
            if clock > t {
                break;
            }
            let mut pick = unit_f64(&mut rng) * total;
            let moves = q.transitions_from(sigma);
            let mut chosen = moves[moves.len() - 1].0;
            for &(target, rate) in moves {
                if pick < rate {
                    chosen = target;
                    break;
                }
                pick -= rate;
            }
            sigma = SubsetIndex::from_bits(chosen);
        }
        counts[sigma.index()] += 1;
    }
    Distribution::new(counts.iter().map(|&c| c as f64 / trials as f64).collect())
}

/// Cross-validates the quantum evolution against the classical chain: for a
/// diagonal initial state, the density matrix stays diagonal and its
/// populations follow the forward equation.
pub fn verify_diagonal_correspondence(
    model: &SemigroupModel,
    p0: &Distribution,
    t: f64,
    params: &EvolutionParams,
    tol: &Tolerances,
) -> Result<Vec<IdentityReport>> {
    let n = model.mode_count();
    let modes = n.get();
    let rho0 = DensityMatrix::from_diagonal(n, p0.probabilities())?;
    let rho_t = evolve_schrodinger(model, &rho0, t, params)?;
    let q = classical_generator(model.kernel());
    let p_t = evolve_classical(&q, p0, t)?;
    let digest = model.kernel().digest();
    let p = json!({ "t": t, "kernel": digest });
    Ok(vec![
        IdentityReport::new(
            "classical.diagonal_tv",
            modes,
            p.clone(),
            p_t.tv_distance_to_slice(&rho_t.populations())?,
            tol.classical_tv,
        ),
        IdentityReport::new(
            "classical.offdiagonal_free",
            modes,
            p,
            rho_t.max_offdiagonal_abs(),
            tol.diagonal_leakage,
        ),
    ])
}
