//! Machine-checkable verification reports and the central tolerance table.

use serde::{Deserialize, Serialize};

/// Outcome of a single identity or property check.
///
/// Reports are data, not assertions: callers (tests, the CLI) decide what a
/// failing report means.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityReport {
    /// Name of the identity, e.g. `car.anticommutator_identity`.
    pub identity: String,
    /// Mode count the check ran at.
    pub n: usize,
    /// Check-specific parameters (mode indices, times, kernel digest, ...).
    pub params: serde_json::Value,
    /// Max-abs-entry of `LHS − RHS` (or the magnitude of the violation).
    pub residual: f64,
    /// Tolerance the residual was compared against.
    pub tolerance: f64,
    /// `residual <= tolerance`.
    pub pass: bool,
}

impl IdentityReport {
    pub fn new(
        identity: impl Into<String>,
        n: usize,
        params: serde_json::Value,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        IdentityReport {
            identity: identity.into(),
            n,
            params,
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

/// Default tolerances, one per check class.
///
/// Identities whose operators have only 0/1 entries hold exactly in floating
/// point and are asserted with residual `0.0`; identities involving real
/// kernel weights accumulate rounding and get `1e-12`; evolution-level checks
/// inherit the solver accuracy.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Tolerances {
    /// 0/1-entry operator identities (CAR, projector algebra): exact zero.
    pub exact: f64,
    /// Identities involving real kernel weights.
    pub weighted: f64,
    /// Closed-form contraction semigroup vs. matrix exponential.
    pub explicit_form: f64,
    /// Evolution-level residuals: conservativity, decoherence-free form,
    /// duality, eigenvalue slack in positivity checks.
    pub evolution: f64,
    /// Semigroup-law residual `T_{s+t} − T_s ∘ T_t`.
    pub semigroup_law: f64,
    /// Total-variation distance between quantum diagonal and classical ODE.
    pub classical_tv: f64,
    /// Off-diagonal leakage when evolving a diagonal density matrix.
    pub diagonal_leakage: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exact: 0.0,
            weighted: 1e-12,
            explicit_form: 1e-10,
            evolution: 1e-8,
            semigroup_law: 1e-7,
            classical_tv: 1e-6,
            diagonal_leakage: 1e-10,
        }
    }
}

impl Tolerances {
    /// Multiplies every tolerance by `factor` (the exact-zero class stays
    /// zero). Used by the CLI's `--tolerance-scale`.
    pub fn scaled(self, factor: f64) -> Self {
        Tolerances {
            exact: self.exact * factor,
            weighted: self.weighted * factor,
            explicit_form: self.explicit_form * factor,
            evolution: self.evolution * factor,
            semigroup_law: self.semigroup_law * factor,
            classical_tv: self.classical_tv * factor,
            diagonal_leakage: self.diagonal_leakage * factor,
        }
    }
}
