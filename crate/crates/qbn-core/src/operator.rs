//! Sparse linear operators on the truncated space, including the
//! annihilation/creation pair and the occupancy projectors.
//!
//! The ladder operators act on the canonical basis without sign factors:
//!
//! ```text
//! ∂_k Z_σ  = 1_σ(k)       Z_{σ∖k}
//! ∂_k* Z_σ = [1 − 1_σ(k)] Z_{σ∪k}
//! ```
//!
//! so every column of an operator built from them has at most one nonzero,
//! and operators at distinct sites commute.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::rand_core::RngCore;

use crate::error::{Error, Result};
use crate::fock::{KetVector, ModeCount, SubsetIndex, MAX_SPECTRAL_MODES};
use crate::linalg;
use crate::sparse::SparseMatrix;

/// A complex `2^n × 2^n` operator with sparse column storage.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOperator {
    n: ModeCount,
    m: SparseMatrix,
}

impl LinearOperator {
    pub fn zeros(n: ModeCount) -> Self {
        LinearOperator { n, m: SparseMatrix::zeros(n.dim()) }
    }

    pub fn identity(n: ModeCount) -> Self {
        LinearOperator { n, m: SparseMatrix::identity(n.dim()) }
    }

    pub fn from_complex_diagonal(n: ModeCount, diag: &[Complex64]) -> Result<Self> {
        if diag.len() != n.dim() {
            return Err(Error::Shape(format!(
                "diagonal has length {}, expected {}",
                diag.len(),
                n.dim()
            )));
        }
        Ok(LinearOperator { n, m: SparseMatrix::from_diagonal(diag) })
    }

    pub fn from_real_diagonal(n: ModeCount, diag: &[f64]) -> Result<Self> {
        let diag: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_complex_diagonal(n, &diag)
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        n: ModeCount,
        triplets: impl IntoIterator<Item = (SubsetIndex, SubsetIndex, Complex64)>,
    ) -> Result<Self> {
        let dim = n.dim();
        let mut raw = Vec::new();
        for (r, c, z) in triplets {
            if !r.is_valid_for(n) || !c.is_valid_for(n) {
                return Err(Error::Shape(format!("entry ({r}, {c}) outside {} modes", n.get())));
            }
            raw.push((r.index(), c.index(), z));
        }
        Ok(LinearOperator { n, m: SparseMatrix::from_triplets(dim, raw) })
    }

    /// Rank-one projector `|Z_σ⟩⟨Z_σ|`.
    pub fn basis_projector(n: ModeCount, sigma: SubsetIndex) -> Result<Self> {
        Self::from_triplets(n, [(sigma, sigma, Complex64::ONE)])
    }

    /// Dense random operator with entries uniform in `[−1,1) × i[−1,1)`.
    pub fn random_dense<R: RngCore>(n: ModeCount, rng: &mut R) -> Self {
        let dim = n.dim();
        let dense = DMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(crate::fock::symmetric_unit(rng), crate::fock::symmetric_unit(rng))
        });
        LinearOperator { n, m: SparseMatrix::from_dense(&dense) }
    }

    pub fn mode_count(&self) -> ModeCount {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn nnz(&self) -> usize {
        self.m.nnz()
    }

    pub fn entry(&self, row: SubsetIndex, col: SubsetIndex) -> Complex64 {
        self.m.entry(row.index(), col.index())
    }

    pub fn adjoint(&self) -> Self {
        LinearOperator { n: self.n, m: self.m.adjoint() }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        LinearOperator { n: self.n, m: self.m.scale(z) }
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.scale(Complex64::new(x, 0.0))
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Shape(format!(
                "operators on {} and {} modes",
                self.n.get(),
                other.n.get()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(LinearOperator { n: self.n, m: self.m.add(&other.m) })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(LinearOperator { n: self.n, m: self.m.sub(&other.m) })
    }

    /// Operator composition `self · other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(LinearOperator { n: self.n, m: self.m.matmul(&other.m) })
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(self.compose(other)?.sub(&other.compose(self)?)?)
    }

    /// `{self, other} = self·other + other·self`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        Ok(self.compose(other)?.add(&other.compose(self)?)?)
    }

    pub fn apply(&self, xi: &KetVector) -> Result<KetVector> {
        if xi.mode_count() != self.n {
            return Err(Error::Shape("operator and ket live on different spaces".into()));
        }
        KetVector::from_amplitudes(self.n, self.m.apply(xi.amplitudes()))
    }

    /// Max-abs-entry norm; the residual norm used throughout verification.
    pub fn max_abs_entry(&self) -> f64 {
        self.m.max_abs()
    }

    /// Max-abs-entry of `self − other`.
    pub fn residual(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs_entry())
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        self.m.diagonal()
    }

    pub fn max_offdiagonal_abs(&self) -> f64 {
        self.m.max_offdiagonal_abs()
    }

    /// Largest singular value, via the Hermitian eigenproblem for `A†A`.
    /// Dense; capped at `n ≤ 12`.
    pub fn spectral_norm(&self) -> Result<f64> {
        if self.n.get() > MAX_SPECTRAL_MODES {
            return Err(Error::Capacity(format!(
                "spectral norm limited to n <= {MAX_SPECTRAL_MODES}, got n = {}",
                self.n.get()
            )));
        }
        let dense = self.m.to_dense();
        Ok(linalg::spectral_norm(&dense))
    }

    /// Smallest eigenvalue of a (numerically) Hermitian operator.
    pub fn min_hermitian_eigenvalue(&self) -> Result<f64> {
        if self.n.get() > MAX_SPECTRAL_MODES {
            return Err(Error::Capacity(format!(
                "eigenvalues limited to n <= {MAX_SPECTRAL_MODES}, got n = {}",
                self.n.get()
            )));
        }
        let eigs = linalg::hermitian_eigenvalues(&self.m.to_dense());
        Ok(eigs.into_iter().fold(f64::INFINITY, f64::min))
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        self.m.to_dense()
    }

    pub fn from_dense(n: ModeCount, dense: &DMatrix<Complex64>) -> Result<Self> {
        if dense.nrows() != n.dim() || dense.ncols() != n.dim() {
            return Err(Error::Shape(format!(
                "dense matrix is {}x{}, expected {}",
                dense.nrows(),
                dense.ncols(),
                n.dim()
            )));
        }
        Ok(LinearOperator { n, m: SparseMatrix::from_dense(dense) })
    }

    pub fn iter_entries(&self) -> impl Iterator<Item = (SubsetIndex, SubsetIndex, Complex64)> + '_ {
        self.m
            .iter_entries()
            .map(|(r, c, z)| (SubsetIndex::from_bits(r as u32), SubsetIndex::from_bits(c as u32), z))
    }
}

/// The annihilation operator `∂_k`: entry `(σ∖k, σ) = 1` for every `σ ∋ k`.
pub fn annihilator(n: ModeCount, k: usize) -> Result<LinearOperator> {
    n.check_mode(k)?;
    let triplets = n
        .subsets()
        .filter(|s| s.contains(k))
        .map(|s| (s.without(k), s, Complex64::ONE));
    LinearOperator::from_triplets(n, triplets)
}

/// The creation operator `∂_k*`: entry `(σ∪k, σ) = 1` for every `σ ∌ k`.
/// Entrywise equal to `annihilator(n, k).adjoint()`.
pub fn creator(n: ModeCount, k: usize) -> Result<LinearOperator> {
    n.check_mode(k)?;
    let triplets = n
        .subsets()
        .filter(|s| !s.contains(k))
        .map(|s| (s.with(k), s, Complex64::ONE));
    LinearOperator::from_triplets(n, triplets)
}

/// The occupancy projector `∂_k*∂_k`: diagonal, entry 1 exactly when `k ∈ σ`.
pub fn occupancy_projector(n: ModeCount, k: usize) -> Result<LinearOperator> {
    n.check_mode(k)?;
    let diag: Vec<f64> = n.subsets().map(|s| if s.contains(k) { 1.0 } else { 0.0 }).collect();
    LinearOperator::from_real_diagonal(n, &diag)
}

/// The hop operator `∂_j*∂_k`, moving a particle from site `k` to site `j`
/// (for `j = k` this is the occupancy projector).
pub fn hop_operator(n: ModeCount, j: usize, k: usize) -> Result<LinearOperator> {
    n.check_mode(j)?;
    n.check_mode(k)?;
    let triplets = n.subsets().filter_map(move |s| {
        if !s.contains(k) {
            return None;
        }
        let mid = s.without(k);
        if mid.contains(j) {
            return None;
        }
        Some((mid.with(j), s, Complex64::ONE))
    });
    LinearOperator::from_triplets(n, triplets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n(modes: usize) -> ModeCount {
        ModeCount::new(modes).unwrap()
    }

    fn subset(modes: &[usize]) -> SubsetIndex {
        SubsetIndex::from_modes(modes).unwrap()
    }

    #[test]
    fn annihilator_columns() {
        // n=4, k=1: column {1,3} maps to row {3} with value 1
        let a = annihilator(n(4), 1).unwrap();
        assert_eq!(a.entry(subset(&[3]), subset(&[1, 3])), Complex64::ONE);
        // n=4, k=2: column {1,3} is all zero
        let a2 = annihilator(n(4), 2).unwrap();
        for s in n(4).subsets() {
            assert_eq!(a2.entry(s, subset(&[1, 3])), Complex64::ZERO);
        }
        // vacuum column is always zero
        for k in 0..4 {
            let ak = annihilator(n(4), k).unwrap();
            for s in n(4).subsets() {
                assert_eq!(ak.entry(s, SubsetIndex::EMPTY), Complex64::ZERO);
            }
        }
    }

    #[test]
    fn annihilator_nonzero_count() {
        for modes in 1..=6 {
            for k in 0..modes {
                let a = annihilator(n(modes), k).unwrap();
                assert_eq!(a.nnz(), 1 << (modes - 1));
            }
        }
    }

    #[test]
    fn creator_columns() {
        // n=4, k=2: column {1} maps to row {1,2}
        let c = creator(n(4), 2).unwrap();
        assert_eq!(c.entry(subset(&[1, 2]), subset(&[1])), Complex64::ONE);
        // n=4, k=1: column {1} is zero (mode already occupied)
        let c1 = creator(n(4), 1).unwrap();
        for s in n(4).subsets() {
            assert_eq!(c1.entry(s, subset(&[1])), Complex64::ZERO);
        }
    }

    #[test]
    fn creator_is_adjoint_of_annihilator() {
        for modes in 1..=8 {
            for k in 0..modes {
                let a = annihilator(n(modes), k).unwrap();
                let c = creator(n(modes), k).unwrap();
                assert_eq!(a.adjoint().residual(&c).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn mode_out_of_range_errors() {
        assert!(matches!(annihilator(n(3), 3), Err(Error::ModeOutOfRange { .. })));
        assert!(matches!(creator(n(3), 7), Err(Error::ModeOutOfRange { .. })));
        assert!(matches!(occupancy_projector(n(2), 2), Err(Error::ModeOutOfRange { .. })));
    }

    #[test]
    fn occupancy_projector_diagonal() {
        // n=2, k=0 -> diag(0,1,0,1) in bitmask order
        let p = occupancy_projector(n(2), 0).unwrap();
        let diag: Vec<f64> = p.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![0.0, 1.0, 0.0, 1.0]);
        assert_eq!(p.max_offdiagonal_abs(), 0.0);
        // idempotent and self-adjoint with zero residual
        for modes in 1..=8 {
            for k in 0..modes {
                let p = occupancy_projector(n(modes), k).unwrap();
                assert_eq!(p.compose(&p).unwrap().residual(&p).unwrap(), 0.0);
                assert_eq!(p.adjoint().residual(&p).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn projector_annihilates_vacuum() {
        let p = occupancy_projector(n(3), 1).unwrap();
        let out = p.apply(&KetVector::vacuum(n(3))).unwrap();
        assert_eq!(out.norm(), 0.0);
    }

    #[test]
    fn anticommutator_is_identity() {
        for modes in 1..=6 {
            for k in 0..modes {
                let a = annihilator(n(modes), k).unwrap();
                let c = creator(n(modes), k).unwrap();
                let sum = a.compose(&c).unwrap().add(&c.compose(&a).unwrap()).unwrap();
                assert_eq!(sum.residual(&LinearOperator::identity(n(modes))).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn apply_moves_basis_vectors() {
        let nn = n(2);
        let a0 = annihilator(nn, 0).unwrap();
        let from = KetVector::basis_vector(nn, subset(&[0])).unwrap();
        let out = a0.apply(&from).unwrap();
        assert_eq!(out.amplitude(SubsetIndex::EMPTY), Complex64::ONE);
        assert_eq!(out.norm(), 1.0);

        let from1 = KetVector::basis_vector(nn, subset(&[1])).unwrap();
        assert_eq!(a0.apply(&from1).unwrap().norm(), 0.0);

        let id = LinearOperator::identity(nn);
        let any = KetVector::basis_vector(nn, subset(&[0, 1])).unwrap();
        assert_eq!(id.apply(&any).unwrap(), any);
    }

    #[test]
    fn scale_and_residual() {
        let id = LinearOperator::identity(n(3));
        assert_eq!(id.scale(Complex64::ZERO).max_abs_entry(), 0.0);
        assert_eq!(id.residual(&id).unwrap(), 0.0);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let a = LinearOperator::identity(n(2));
        let b = LinearOperator::identity(n(3));
        assert!(matches!(a.compose(&b), Err(Error::Shape(_))));
        assert!(matches!(a.add(&b), Err(Error::Shape(_))));
        let ket = KetVector::vacuum(n(3));
        assert!(matches!(a.apply(&ket), Err(Error::Shape(_))));
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let d = LinearOperator::from_real_diagonal(n(2), &[0.0, -3.0, 2.0, 1.0]).unwrap();
        assert!((d.spectral_norm().unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_capacity_cap() {
        let big = LinearOperator::identity(n(13));
        assert!(matches!(big.spectral_norm(), Err(Error::Capacity(_))));
        assert!(matches!(big.min_hermitian_eigenvalue(), Err(Error::Capacity(_))));
    }

    #[test]
    fn hop_operator_matches_composition() {
        let nn = n(4);
        for j in 0..4 {
            for k in 0..4 {
                let direct = hop_operator(nn, j, k).unwrap();
                let composed = creator(nn, j)
                    .unwrap()
                    .compose(&annihilator(nn, k).unwrap())
                    .unwrap();
                assert_eq!(direct.residual(&composed).unwrap(), 0.0);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ladder_columns_have_at_most_one_unit_entry(modes in 1usize..=6, k in 0usize..6) {
            prop_assume!(k < modes);
            let nn = n(modes);
            for op in [annihilator(nn, k).unwrap(), creator(nn, k).unwrap()] {
                for col in nn.subsets() {
                    let mut nonzeros = 0;
                    for row in nn.subsets() {
                        let z = op.entry(row, col);
                        if z != Complex64::ZERO {
                            nonzeros += 1;
                            prop_assert_eq!(z, Complex64::ONE);
                        }
                    }
                    prop_assert!(nonzeros <= 1);
                }
            }
        }

        #[test]
        fn ladder_nilpotency(modes in 1usize..=6, k in 0usize..6) {
            prop_assume!(k < modes);
            let nn = n(modes);
            let a = annihilator(nn, k).unwrap();
            let c = creator(nn, k).unwrap();
            prop_assert_eq!(a.compose(&a).unwrap().max_abs_entry(), 0.0);
            prop_assert_eq!(c.compose(&c).unwrap().max_abs_entry(), 0.0);
        }

        #[test]
        fn adjoint_is_an_involution(seed in 0u64..1000) {
            use rand_chacha::{ChaCha8Rng, rand_core::SeedableRng};
            let nn = n(3);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = LinearOperator::random_dense(nn, &mut rng);
            prop_assert_eq!(a.adjoint().adjoint().residual(&a).unwrap(), 0.0);
        }
    }
}
