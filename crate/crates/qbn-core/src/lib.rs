//! Quantum Bernoulli noises on a finite mode truncation.
//!
//! The Hilbert space is spanned by the canonical basis `Z_σ`, indexed by
//! subsets `σ` of the mode set `{0, …, n−1}` and encoded as bitmasks. On top
//! of that sit the annihilation/creation pair `∂_k`, `∂_k*` (which satisfy an
//! equal-time CAR without Jordan–Wigner signs), the weighted number operators
//! driven by a transition kernel `w(j, k)`, and the quantum exclusion Markov
//! semigroup generated by the jump operators `√w(j,k) ∂_j*∂_k`.
//!
//! Modules:
//!
//! - [`fock`]: basis enumeration, state vectors, Bernoulli process sampling
//! - [`operator`]: sparse operators and the ladder-operator constructors
//! - [`weighted`]: transition kernels and weighted number operators
//! - [`identities`]: residual-based verification of the operator identities
//! - [`semigroup`]: Lindblad generator, evolution, Markov-property checks
//! - [`classical`]: classical exclusion-process oracle (ODE + Gillespie)
//!
//! The weighted number operator is always available two ways — composed
//! from ladder operators and assembled from its eigenvalue table — and the
//! dynamics it generates can be cross-checked against the classical chain:
//!
//! ```
//! use qbn_core::{ModeCount, SubsetIndex, TransitionKernel};
//! use qbn_core::weighted::{weighted_number_direct, weighted_number_spectral};
//! use qbn_core::semigroup::{build_model, evolve_schrodinger,
//!     DensityMatrix, EvolutionParams, HamiltonianTable};
//! use qbn_core::classical::{classical_generator, evolve_classical, Distribution};
//!
//! let n = ModeCount::new(3)?;
//! let kernel = TransitionKernel::nearest_neighbor(n, 1.0, 0.5, 0.2)?;
//!
//! // the two constructions agree entrywise
//! let direct = weighted_number_direct(&kernel)?;
//! let spectral = weighted_number_spectral(&kernel);
//! assert!(direct.residual(&spectral)? <= 1e-12);
//!
//! // one particle at site 0, evolved for one time unit
//! let model = build_model(kernel.clone(), HamiltonianTable::zero(n))?;
//! let start = SubsetIndex::from_modes(&[0])?;
//! let rho0 = DensityMatrix::pure_basis(n, start)?;
//! let rho = evolve_schrodinger(&model, &rho0, 1.0, &EvolutionParams::default())?;
//!
//! // its populations follow the classical exclusion chain
//! let p0 = Distribution::point_mass(n, start)?;
//! let p = evolve_classical(&classical_generator(&kernel), &p0, 1.0)?;
//! assert!(p.tv_distance_to_slice(&rho.populations())? <= 1e-6);
//! # Ok::<(), qbn_core::Error>(())
//! ```

pub mod classical;
pub mod error;
pub mod fock;
pub mod identities;
pub mod linalg;
pub mod operator;
pub mod report;
pub mod semigroup;
pub mod weighted;

mod sparse;

pub use error::{Error, Result};
pub use fock::{
    enumerate_basis, sample_bernoulli_gram, BernoulliProcessSpec, KetVector, ModeCount,
    SubsetIndex,
};
pub use operator::LinearOperator;
pub use report::{IdentityReport, Tolerances};
pub use weighted::{TransitionKernel, WeightFunction};
