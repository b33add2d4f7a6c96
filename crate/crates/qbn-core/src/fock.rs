//! Finite truncation of the Bernoulli-functional space.
//!
//! States live on the `2^n`-dimensional span of the canonical basis
//! `{Z_σ}`, where `σ` runs over the subsets of `{0, …, n−1}`. A subset is
//! encoded as a bitmask and the basis is ordered by bitmask value, so the
//! position of `Z_σ` in any amplitude vector equals the integer value of its
//! mask.

use std::fmt;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::IdentityReport;

/// Hard cap on the number of modes for operator construction.
pub const MAX_MODES: usize = 20;

/// Cap on the number of modes for dense spectral-norm computations.
pub const MAX_SPECTRAL_MODES: usize = 12;

/// Number of retained modes (sites `0..n−1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct ModeCount(usize);

impl ModeCount {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_MODES {
            return Err(Error::ModeCount { got: n, max: MAX_MODES });
        }
        Ok(ModeCount(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Dimension of the truncated space, `2^n`.
    pub fn dim(self) -> usize {
        1usize << self.0
    }

    /// Validates a mode index against this count.
    pub fn check_mode(self, k: usize) -> Result<()> {
        if k >= self.0 {
            return Err(Error::ModeOutOfRange { mode: k, modes: self.0 });
        }
        Ok(())
    }

    /// Iterator over all subsets in bitmask order.
    pub fn subsets(self) -> impl Iterator<Item = SubsetIndex> {
        (0..self.dim() as u32).map(SubsetIndex::from_bits)
    }
}

impl TryFrom<usize> for ModeCount {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        ModeCount::new(n)
    }
}

impl From<ModeCount> for usize {
    fn from(n: ModeCount) -> usize {
        n.0
    }
}

/// A finite subset `σ ⊆ {0..n−1}` encoded as a bitmask; bit `k` is set iff
/// `k ∈ σ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetIndex(u32);

impl SubsetIndex {
    pub const EMPTY: SubsetIndex = SubsetIndex(0);

    pub fn from_bits(bits: u32) -> Self {
        SubsetIndex(bits)
    }

    /// Builds a subset from a list of mode indices.
    pub fn from_modes(modes: &[usize]) -> Result<Self> {
        let mut bits = 0u32;
        for &k in modes {
            if k >= MAX_MODES {
                return Err(Error::ModeOutOfRange { mode: k, modes: MAX_MODES });
            }
            bits |= 1 << k;
        }
        Ok(SubsetIndex(bits))
    }

    /// Full subset `{0, …, n−1}`.
    pub fn full(n: ModeCount) -> Self {
        SubsetIndex((n.dim() - 1) as u32)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Position of `Z_σ` in bitmask basis order.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// `#(σ)`, the number of occupied modes.
    pub fn cardinality(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, k: usize) -> bool {
        k < 32 && self.0 & (1 << k) != 0
    }

    /// `σ ∪ {k}`.
    pub fn with(self, k: usize) -> Self {
        SubsetIndex(self.0 | (1 << k))
    }

    /// `σ ∖ {k}`.
    pub fn without(self, k: usize) -> Self {
        SubsetIndex(self.0 & !(1 << k))
    }

    pub fn is_valid_for(self, n: ModeCount) -> bool {
        (self.0 as usize) < n.dim()
    }

    /// Occupied modes in increasing order.
    pub fn modes(self) -> Vec<usize> {
        (0..32).filter(|&k| self.contains(k)).collect()
    }
}

impl fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, k) in self.modes().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, "}}")
    }
}

// Reports serialize subsets as sorted arrays of mode integers, e.g. [0,2].
impl Serialize for SubsetIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.modes().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SubsetIndex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let modes = Vec::<usize>::deserialize(d)?;
        SubsetIndex::from_modes(&modes).map_err(serde::de::Error::custom)
    }
}

/// All `2^n` subsets in increasing bitmask order; the position of `σ` in the
/// list equals its bitmask value.
pub fn enumerate_basis(n: ModeCount) -> Vec<SubsetIndex> {
    n.subsets().collect()
}

/// A vector `ξ` in the truncated space, stored as amplitudes
/// `amp[σ] = ⟨Z_σ, ξ⟩` in bitmask basis order.
#[derive(Clone, Debug, PartialEq)]
pub struct KetVector {
    n: ModeCount,
    amp: Vec<Complex64>,
}

impl KetVector {
    pub fn zero(n: ModeCount) -> Self {
        KetVector { n, amp: vec![Complex64::ZERO; n.dim()] }
    }

    /// The basis vector `Z_σ`.
    pub fn basis_vector(n: ModeCount, sigma: SubsetIndex) -> Result<Self> {
        if !sigma.is_valid_for(n) {
            return Err(Error::Shape(format!("subset {sigma} invalid for {} modes", n.get())));
        }
        let mut v = Self::zero(n);
        v.amp[sigma.index()] = Complex64::ONE;
        Ok(v)
    }

    /// The vacuum `Z_∅`.
    pub fn vacuum(n: ModeCount) -> Self {
        Self::basis_vector(n, SubsetIndex::EMPTY).expect("empty subset is always valid")
    }

    pub fn from_amplitudes(n: ModeCount, amp: Vec<Complex64>) -> Result<Self> {
        if amp.len() != n.dim() {
            return Err(Error::Shape(format!(
                "amplitude vector has length {}, expected {}",
                amp.len(),
                n.dim()
            )));
        }
        Ok(KetVector { n, amp })
    }

    /// The normalised uniform superposition of all basis vectors.
    pub fn uniform_superposition(n: ModeCount) -> Self {
        let amp = Complex64::new(1.0 / (n.dim() as f64).sqrt(), 0.0);
        KetVector { n, amp: vec![amp; n.dim()] }
    }

    /// Uniformly random amplitudes with real/imaginary parts in `[−1, 1)`.
    pub fn random<R: RngCore>(n: ModeCount, rng: &mut R) -> Self {
        let amp = (0..n.dim())
            .map(|_| Complex64::new(symmetric_unit(rng), symmetric_unit(rng)))
            .collect();
        KetVector { n, amp }
    }

    pub fn mode_count(&self) -> ModeCount {
        self.n
    }

    pub fn amplitude(&self, sigma: SubsetIndex) -> Complex64 {
        self.amp[sigma.index()]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amp
    }

    pub fn norm_sq(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Inner product, conjugate-linear in `self`.
    pub fn inner(&self, other: &KetVector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::Shape("inner product of kets with different mode counts".into()));
        }
        Ok(self
            .amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scale(&self, z: Complex64) -> KetVector {
        KetVector { n: self.n, amp: self.amp.iter().map(|a| a * z).collect() }
    }

    pub fn sub(&self, other: &KetVector) -> Result<KetVector> {
        if self.n != other.n {
            return Err(Error::Shape("difference of kets with different mode counts".into()));
        }
        Ok(KetVector {
            n: self.n,
            amp: self.amp.iter().zip(&other.amp).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &KetVector) -> Result<f64> {
        Ok(self
            .sub(other)?
            .amp
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    pub fn normalized(&self) -> KetVector {
        let nrm = self.norm();
        if nrm == 0.0 {
            self.clone()
        } else {
            self.scale(Complex64::new(1.0 / nrm, 0.0))
        }
    }
}

/// Uniform in `[−1, 1)`, derived from the top 53 bits of a `u64`.
pub(crate) fn symmetric_unit<R: RngCore>(rng: &mut R) -> f64 {
    2.0 * unit_f64(rng) - 1.0
}

/// Uniform in `[0, 1)`.
pub(crate) fn unit_f64<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// The underlying Bernoulli process: independent `Z_k` taking the value
/// `θ_k = √(q_k/p_k)` with probability `p_k` and `−1/θ_k` with probability
/// `q_k = 1 − p_k`. With this normalisation `E[Z_k] = 0` and `E[Z_k²] = 1`,
/// so the products `Z_σ = ∏_{i∈σ} Z_i` form an orthonormal family.
#[derive(Clone, Debug)]
pub struct BernoulliProcessSpec {
    n: ModeCount,
    p: Vec<f64>,
    theta: Vec<f64>,
}

impl BernoulliProcessSpec {
    pub fn new(n: ModeCount, p: Vec<f64>) -> Result<Self> {
        if p.len() != n.get() {
            return Err(Error::Shape(format!(
                "expected {} success probabilities, got {}",
                n.get(),
                p.len()
            )));
        }
        for (k, &pk) in p.iter().enumerate() {
            if !(pk > 0.0 && pk < 1.0) {
                return Err(Error::Domain(format!(
                    "success probability p[{k}] = {pk} outside (0,1)"
                )));
            }
        }
        let theta = p.iter().map(|&pk| ((1.0 - pk) / pk).sqrt()).collect();
        Ok(BernoulliProcessSpec { n, p, theta })
    }

    /// All modes share the same success probability.
    pub fn uniform(n: ModeCount, p: f64) -> Result<Self> {
        Self::new(n, vec![p; n.get()])
    }

    pub fn mode_count(&self) -> ModeCount {
        self.n
    }

    pub fn success_probabilities(&self) -> &[f64] {
        &self.p
    }
}

/// Draws `samples` i.i.d. realisations of `(Z_0, …, Z_{n−1})` and returns the
/// empirical Gram matrix `G[σ,τ] = mean(Z_σ Z_τ)` over all subset pairs, in
/// bitmask order. Deterministic for a fixed seed.
///
/// By orthonormality of the canonical basis, `G` converges to the identity.
pub fn sample_bernoulli_gram(
    spec: &BernoulliProcessSpec,
    samples: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if samples == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    let n = spec.n.get();
    let dim = spec.n.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gram = vec![vec![0.0f64; dim]; dim];
    let mut z = vec![0.0f64; n];
    let mut vals = vec![0.0f64; dim];
    for _ in 0..samples {
        for k in 0..n {
            z[k] = if unit_f64(&mut rng) < spec.p[k] {
                spec.theta[k]
            } else {
                -1.0 / spec.theta[k]
            };
        }
        // Z_σ by dynamic programming over the lowest set bit.
        vals[0] = 1.0;
        for mask in 1..dim {
            let low = mask & mask.wrapping_neg();
            vals[mask] = vals[mask ^ low] * z[low.trailing_zeros() as usize];
        }
        for (row, &vr) in vals.iter().enumerate() {
            let g = &mut gram[row];
            for (col, &vc) in vals.iter().enumerate() {
                g[col] += vr * vc;
            }
        }
    }
    let inv = 1.0 / samples as f64;
    for row in &mut gram {
        for v in row.iter_mut() {
            *v *= inv;
        }
    }
    Ok(gram)
}

/// Statistical check that the sampled Gram matrix is close to the identity:
/// off-diagonal entries within `5/√samples`, diagonal entries within `0.1`
/// of one. Deterministic for a fixed seed.
pub fn verify_gram_convergence(
    spec: &BernoulliProcessSpec,
    samples: usize,
    seed: u64,
) -> Result<Vec<IdentityReport>> {
    let gram = sample_bernoulli_gram(spec, samples, seed)?;
    let dim = spec.n.dim();
    let mut max_off: f64 = 0.0;
    let mut max_diag_dev: f64 = 0.0;
    for (r, row) in gram.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if r == c {
                max_diag_dev = max_diag_dev.max((v - 1.0).abs());
            } else {
                max_off = max_off.max(v.abs());
            }
        }
    }
    debug_assert_eq!(gram[0][0], 1.0, "Z_∅ Z_∅ = 1 exactly");
    let params = serde_json::json!({ "samples": samples, "seed": seed, "dim": dim });
    Ok(vec![
        IdentityReport::new(
            "gram.offdiagonal_bound",
            spec.n.get(),
            params.clone(),
            max_off,
            5.0 / (samples as f64).sqrt(),
        ),
        IdentityReport::new("gram.diagonal_bound", spec.n.get(), params, max_diag_dev, 0.1),
    ])
}
