//! Residual-based verification of the operator identities.
//!
//! Every check builds both sides of an identity as explicit matrices and
//! reports the max-abs-entry of their difference. Identities whose operators
//! have only 0/1 entries must come out exactly zero; identities involving
//! kernel weights are held to `1e-12`.

use serde_json::json;

use crate::error::Result;
use crate::fock::ModeCount;
use crate::operator::{annihilator, creator, hop_operator, LinearOperator};
use crate::report::{IdentityReport, Tolerances};
use crate::weighted::{
    number_operator, one_d_number_operator, weighted_number_spectral, TransitionKernel,
    WeightFunction,
};

/// Coefficient of the bare-annihilator correction term in the commutation
/// relation of the weighted number operator with `∂_m`.
///
/// `Standard` is `2·w(m,m) + Σ_j w(j,m)`, the form that holds identically.
/// `DoubledColumnSum` is `2·(w(m,m) + Σ_j w(j,m))`; it over-counts the column
/// sum and is kept only as a negative control, failing on any kernel whose
/// column sums are nonzero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorrectionCoefficient {
    Standard,
    DoubledColumnSum,
}

impl CorrectionCoefficient {
    fn value(self, diag: f64, column_sum: f64) -> f64 {
        match self {
            CorrectionCoefficient::Standard => 2.0 * diag + column_sum,
            CorrectionCoefficient::DoubledColumnSum => 2.0 * (diag + column_sum),
        }
    }
}

/// Equal-time CAR: commutation across distinct sites and
/// `∂_k² = (∂_k*)² = 0`, `∂_k∂_k* + ∂_k*∂_k = I` at each site.
/// All residuals are exact zeros.
pub fn verify_car(n: ModeCount, tol: &Tolerances) -> Result<Vec<IdentityReport>> {
    let modes = n.get();
    let anns: Vec<LinearOperator> = (0..modes).map(|k| annihilator(n, k)).collect::<Result<_>>()?;
    let cres: Vec<LinearOperator> = (0..modes).map(|k| creator(n, k)).collect::<Result<_>>()?;
    let identity = LinearOperator::identity(n);
    let mut reports = Vec::new();

    for k in 0..modes {
        for l in (k + 1)..modes {
            reports.push(IdentityReport::new(
                "car.annihilators_commute",
                modes,
                json!({ "k": k, "l": l }),
                anns[k].commutator(&anns[l])?.max_abs_entry(),
                tol.exact,
            ));
            reports.push(IdentityReport::new(
                "car.creators_commute",
                modes,
                json!({ "k": k, "l": l }),
                cres[k].commutator(&cres[l])?.max_abs_entry(),
                tol.exact,
            ));
        }
    }
    for k in 0..modes {
        for l in 0..modes {
            if k == l {
                continue;
            }
            // ∂_k* ∂_l = ∂_l ∂_k*  (distinct sites)
            let residual = cres[k]
                .compose(&anns[l])?
                .residual(&anns[l].compose(&cres[k])?)?;
            reports.push(IdentityReport::new(
                "car.mixed_commute",
                modes,
                json!({ "k": k, "l": l }),
                residual,
                tol.exact,
            ));
        }
    }
    for k in 0..modes {
        reports.push(IdentityReport::new(
            "car.annihilator_nilpotent",
            modes,
            json!({ "k": k }),
            anns[k].compose(&anns[k])?.max_abs_entry(),
            tol.exact,
        ));
        reports.push(IdentityReport::new(
            "car.creator_nilpotent",
            modes,
            json!({ "k": k }),
            cres[k].compose(&cres[k])?.max_abs_entry(),
            tol.exact,
        ));
        let anti = anns[k].compose(&cres[k])?.add(&cres[k].compose(&anns[k])?)?;
        reports.push(IdentityReport::new(
            "car.anticommutator_identity",
            modes,
            json!({ "k": k }),
            anti.residual(&identity)?,
            tol.exact,
        ));
    }
    Ok(reports)
}

/// Commutation of the weighted occupancy operator with the ladder pair:
/// `N_u ∂_m = ∂_m N_u − u(m) ∂_m` and `N_u ∂_m* = ∂_m* N_u + u(m) ∂_m*`.
pub fn verify_weighted_commutators_1d(
    u: &WeightFunction,
    tol: &Tolerances,
) -> Result<Vec<IdentityReport>> {
    let n = u.mode_count();
    let modes = n.get();
    let nu = one_d_number_operator(u);
    let mut reports = Vec::new();
    for m in 0..modes {
        let ann = annihilator(n, m)?;
        let cre = creator(n, m)?;

        let lhs = nu.compose(&ann)?;
        let rhs = ann.compose(&nu)?.sub(&ann.scale_re(u.value(m)))?;
        reports.push(IdentityReport::new(
            "weighted1d.annihilator_commutation",
            modes,
            json!({ "mode": m }),
            lhs.residual(&rhs)?,
            tol.weighted,
        ));

        let lhs = nu.compose(&cre)?;
        let rhs = cre.compose(&nu)?.add(&cre.scale_re(u.value(m)))?;
        reports.push(IdentityReport::new(
            "weighted1d.creator_commutation",
            modes,
            json!({ "mode": m }),
            lhs.residual(&rhs)?,
            tol.weighted,
        ));
    }
    Ok(reports)
}

/// Commutation of the weighted number operator with the ladder pair. With
/// `N_col` and `N_row` the occupancy operators of column `m` and row `m` of
/// the kernel, and `c_m` the correction coefficient:
///
/// ```text
/// S_w ∂_m  = ∂_m S_w + ∂_m N_col + ∂_m N_row − c_m ∂_m
/// S_w ∂_m* = ∂_m* S_w − ∂_m* N_col − ∂_m* N_row + (Σ_j w(j,m)) ∂_m*
/// ```
pub fn verify_weighted_commutators_2d(
    kernel: &TransitionKernel,
    correction: CorrectionCoefficient,
    tol: &Tolerances,
) -> Result<Vec<IdentityReport>> {
    let n = kernel.mode_count();
    let modes = n.get();
    let sw = weighted_number_spectral(kernel);
    let digest = kernel.digest();
    let mut reports = Vec::new();
    for m in 0..modes {
        let ann = annihilator(n, m)?;
        let cre = creator(n, m)?;
        let n_col = one_d_number_operator(&kernel.column_weights(m));
        let n_row = one_d_number_operator(&kernel.row_weights(m));
        let column_sum = kernel.column_sum(m);
        let c_m = correction.value(kernel.rate(m, m), column_sum);

        let lhs = sw.compose(&ann)?;
        let rhs = ann
            .compose(&sw)?
            .add(&ann.compose(&n_col)?)?
            .add(&ann.compose(&n_row)?)?
            .sub(&ann.scale_re(c_m))?;
        reports.push(IdentityReport::new(
            "weighted2d.annihilator_commutation",
            modes,
            json!({ "mode": m, "kernel": digest }),
            lhs.residual(&rhs)?,
            tol.weighted,
        ));

        let lhs = sw.compose(&cre)?;
        let rhs = cre
            .compose(&sw)?
            .sub(&cre.compose(&n_col)?)?
            .sub(&cre.compose(&n_row)?)?
            .add(&cre.scale_re(column_sum))?;
        reports.push(IdentityReport::new(
            "weighted2d.creator_commutation",
            modes,
            json!({ "mode": m, "kernel": digest }),
            lhs.residual(&rhs)?,
            tol.weighted,
        ));
    }
    Ok(reports)
}

/// The number operator commutes with every hop `∂_j*∂_k`, and the weighted
/// number operator commutes with every occupancy projector `∂_m*∂_m`. Both
/// are exact zeros (integer diagonals, or products of identical floats).
pub fn verify_exchange_commutation(
    kernel: &TransitionKernel,
    tol: &Tolerances,
) -> Result<Vec<IdentityReport>> {
    let n = kernel.mode_count();
    let modes = n.get();
    let nop = number_operator(n);
    let sw = weighted_number_spectral(kernel);
    let digest = kernel.digest();
    let mut reports = Vec::new();
    for j in 0..modes {
        for k in 0..modes {
            let hop = hop_operator(n, j, k)?;
            reports.push(IdentityReport::new(
                "exchange.number_hop_commutation",
                modes,
                json!({ "j": j, "k": k }),
                nop.commutator(&hop)?.max_abs_entry(),
                tol.exact,
            ));
        }
    }
    for m in 0..modes {
        let occ = hop_operator(n, m, m)?;
        reports.push(IdentityReport::new(
            "exchange.weighted_occupancy_commutation",
            modes,
            json!({ "mode": m, "kernel": digest }),
            sw.commutator(&occ)?.max_abs_entry(),
            tol.exact,
        ));
    }
    Ok(reports)
}
