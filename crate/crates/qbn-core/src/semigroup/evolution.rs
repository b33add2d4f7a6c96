//! Evolution of observables and states under the exclusion semigroup.
//!
//! Two routes are provided and kept independent so they can cross-check each
//! other:
//!
//! - **Exact exponential**: the generator acts sparsely on matrix units
//!   `|Z_σ⟩⟨Z_τ|` (every jump maps basis kets to basis kets or zero), so it
//!   assembles as a sparse `4^n × 4^n` matrix over pair indices `(σ, τ)`.
//!   For moderate dimensions this is densified and exponentiated by scaling
//!   and squaring.
//! - **Adaptive stepping**: a Dormand–Prince 5(4) integrator with step
//!   control drives the operator-form ODE `dX/dt = 𝓛(X)` directly, never
//!   building the superoperator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeCount, SubsetIndex};
use crate::linalg;
use crate::operator::LinearOperator;
use crate::sparse::SparseMatrix;

use super::{lindblad_apply, lindblad_predual_apply, DensityMatrix, SemigroupModel};

/// How to advance the evolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionMethod {
    /// Exact path when the superoperator fits, adaptive stepping otherwise.
    #[default]
    Auto,
    ExactExponential,
    AdaptiveStepping,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionParams {
    pub method: EvolutionMethod,
    /// Target accuracy per unit time for the adaptive path.
    pub tolerance: f64,
    /// Largest superoperator dimension (`4^n`) the exact path may densify.
    pub max_exact_dim: usize,
}

impl Default for EvolutionParams {
    fn default() -> Self {
        EvolutionParams { method: EvolutionMethod::Auto, tolerance: 1e-10, max_exact_dim: 4096 }
    }
}

impl EvolutionParams {
    pub fn exact() -> Self {
        EvolutionParams { method: EvolutionMethod::ExactExponential, ..Default::default() }
    }

    pub fn adaptive(tolerance: f64) -> Self {
        EvolutionParams {
            method: EvolutionMethod::AdaptiveStepping,
            tolerance,
            ..Default::default()
        }
    }

    fn resolve(&self, superop_dim: usize) -> Result<EvolutionMethod> {
        match self.method {
            EvolutionMethod::Auto => {
                if superop_dim <= self.max_exact_dim {
                    Ok(EvolutionMethod::ExactExponential)
                } else {
                    Ok(EvolutionMethod::AdaptiveStepping)
                }
            }
            EvolutionMethod::ExactExponential => {
                if superop_dim > self.max_exact_dim {
                    return Err(Error::Capacity(format!(
                        "superoperator dimension {superop_dim} exceeds exact-path cap {}",
                        self.max_exact_dim
                    )));
                }
                Ok(EvolutionMethod::ExactExponential)
            }
            EvolutionMethod::AdaptiveStepping => Ok(EvolutionMethod::AdaptiveStepping),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Picture {
    Heisenberg,
    Schrodinger,
}

/// Assembles the generator as a sparse matrix over pair indices
/// `(σ, τ) ↦ σ·2^n + τ`. Column `(σ, τ)` carries the diagonal damping
/// `±i(f(σ) − f(τ)) − ½(ϑ(σ) + ϑ(τ))` plus one entry per jump allowed in
/// both indices simultaneously.
pub(crate) fn superoperator(model: &SemigroupModel, picture: Picture) -> SparseMatrix {
    let d = model.mode_count().dim();
    let dim = d * d;
    let f = model.hamiltonian().values();
    let theta = model.weighted_counts().values();

    // (target, source, rate) per jump; direction depends on the picture:
    // Heisenberg conjugates by L* … L (moves target → source), the predual
    // by L … L* (moves source → target).
    let moves: Vec<(usize, usize, f64)> = model
        .jump_operators()
        .iter()
        .map(|j| match picture {
            Picture::Heisenberg => (j.target, j.source, j.rate),
            Picture::Schrodinger => (j.source, j.target, j.rate),
        })
        .collect();
    let ham_sign = match picture {
        Picture::Heisenberg => 1.0,
        Picture::Schrodinger => -1.0,
    };

    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::new();
    for sigma in 0..d {
        let s_set = SubsetIndex::from_bits(sigma as u32);
        for tau in 0..d {
            let t_set = SubsetIndex::from_bits(tau as u32);
            let col = sigma * d + tau;
            let diag = Complex64::new(
                -0.5 * (theta[sigma] + theta[tau]),
                ham_sign * (f[sigma] - f[tau]),
            );
            if diag != Complex64::ZERO {
                triplets.push((col, col, diag));
            }
            for &(from, to, rate) in &moves {
                let (Some(s_new), Some(t_new)) = (move_particle(s_set, from, to), move_particle(t_set, from, to))
                else {
                    continue;
                };
                let row = s_new.index() * d + t_new.index();
                triplets.push((row, col, Complex64::new(rate, 0.0)));
            }
        }
    }
    SparseMatrix::from_triplets(dim, triplets)
}

/// `(σ ∖ from) ∪ to` when `from ∈ σ` and `to` is free (or equals `from`);
/// `None` when the hop is blocked.
fn move_particle(sigma: SubsetIndex, from: usize, to: usize) -> Option<SubsetIndex> {
    if !sigma.contains(from) {
        return None;
    }
    let cleared = sigma.without(from);
    if cleared.contains(to) {
        return None;
    }
    Some(cleared.with(to))
}

fn propagator(
    model: &SemigroupModel,
    t: f64,
    picture: Picture,
    params: &EvolutionParams,
) -> Result<DMatrix<Complex64>> {
    let d = model.mode_count().dim();
    let dim = d * d;
    if dim > params.max_exact_dim {
        return Err(Error::Capacity(format!(
            "superoperator dimension {dim} exceeds exact-path cap {}",
            params.max_exact_dim
        )));
    }
    let generator = superoperator(model, picture).to_dense().map(|z| z * t);
    Ok(linalg::expm(&generator))
}

fn check_time(t: f64) -> Result<()> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    Ok(())
}

fn vec_index(d: usize, row: usize, col: usize) -> usize {
    row * d + col
}

fn operator_to_vec(op: &LinearOperator) -> Vec<Complex64> {
    let d = op.dim();
    let mut v = vec![Complex64::ZERO; d * d];
    for (r, c, z) in op.iter_entries() {
        v[vec_index(d, r.index(), c.index())] = z;
    }
    v
}

fn vec_to_operator(n: ModeCount, v: &[Complex64]) -> LinearOperator {
    let d = n.dim();
    let dense = DMatrix::from_fn(d, d, |r, c| v[vec_index(d, r, c)]);
    LinearOperator::from_dense(n, &dense).expect("dimensions match")
}

/// Heisenberg evolution `T_t(X) = e^{t𝓛}(X)`.
pub fn evolve_heisenberg(
    model: &SemigroupModel,
    x: &LinearOperator,
    t: f64,
    params: &EvolutionParams,
) -> Result<LinearOperator> {
    check_time(t)?;
    if x.mode_count() != model.mode_count() {
        return Err(Error::Shape("observable and model mode counts differ".into()));
    }
    let d = model.mode_count().dim();
    match params.resolve(d * d)? {
        EvolutionMethod::ExactExponential => {
            let m = propagator(model, t, Picture::Heisenberg, params)?;
            let v = DMatrix::from_column_slice(d * d, 1, &operator_to_vec(x));
            let out = m * v;
            Ok(vec_to_operator(model.mode_count(), out.as_slice()))
        }
        EvolutionMethod::AdaptiveStepping => {
            dopri5(x.clone(), t, params.tolerance, |y| lindblad_apply(model, y))
        }
        EvolutionMethod::Auto => unreachable!("resolve never returns Auto"),
    }
}

/// Schrödinger evolution of a density matrix under the predual semigroup.
pub fn evolve_schrodinger(
    model: &SemigroupModel,
    rho: &DensityMatrix,
    t: f64,
    params: &EvolutionParams,
) -> Result<DensityMatrix> {
    check_time(t)?;
    if rho.mode_count() != model.mode_count() {
        return Err(Error::Shape("state and model mode counts differ".into()));
    }
    let n = model.mode_count();
    let d = n.dim();
    match params.resolve(d * d)? {
        EvolutionMethod::ExactExponential => {
            let m = propagator(model, t, Picture::Schrodinger, params)?;
            let mut v = vec![Complex64::ZERO; d * d];
            for r in 0..d {
                for c in 0..d {
                    v[vec_index(d, r, c)] = rho.matrix()[(r, c)];
                }
            }
            let out = m * DMatrix::from_column_slice(d * d, 1, &v);
            let mat = DMatrix::from_fn(d, d, |r, c| out[vec_index(d, r, c)]);
            Ok(DensityMatrix::from_matrix_unchecked(n, mat))
        }
        EvolutionMethod::AdaptiveStepping => {
            let x0 = LinearOperator::from_dense(n, rho.matrix())?;
            let evolved =
                dopri5(x0, t, params.tolerance, |y| lindblad_predual_apply(model, y))?;
            Ok(DensityMatrix::from_matrix_unchecked(n, evolved.to_dense()))
        }
        EvolutionMethod::Auto => unreachable!("resolve never returns Auto"),
    }
}

/// Choi matrix of the Schrödinger-picture map at time `t`: block `(σ, τ)`
/// holds the image of the matrix unit `|Z_σ⟩⟨Z_τ|`. Hermitian by
/// construction (it is symmetrised after an internal consistency check);
/// positive semidefiniteness certifies complete positivity and
/// `tr_out = I` certifies conservativity. Capped at `n ≤ 5`.
pub fn choi_matrix(
    model: &SemigroupModel,
    t: f64,
    params: &EvolutionParams,
) -> Result<DMatrix<Complex64>> {
    check_time(t)?;
    let n = model.mode_count();
    if n.get() > 5 {
        return Err(Error::Capacity(format!(
            "Choi matrix has dimension 4^n; capped at n <= 5, got n = {}",
            n.get()
        )));
    }
    let d = n.dim();
    let m = propagator(model, t, Picture::Schrodinger, params)?;
    let dim = d * d;
    let mut choi = DMatrix::zeros(dim, dim);
    for sigma in 0..d {
        for tau in 0..d {
            let col = vec_index(d, sigma, tau);
            for a in 0..d {
                for b in 0..d {
                    choi[(sigma * d + a, tau * d + b)] = m[(vec_index(d, a, b), col)];
                }
            }
        }
    }
    let asym = linalg::max_abs_diff(&choi, &choi.adjoint());
    if asym > 1e-8 {
        return Err(Error::Internal(format!(
            "Choi matrix asymmetry {asym} exceeds 1e-8"
        )));
    }
    let adj = choi.adjoint();
    Ok((choi + adj).map(|z| z * 0.5))
}

/// Dormand–Prince 5(4) with PI-free step control on the max-abs-entry error
/// norm; the accept threshold is scaled by `h/t_total` so the accumulated
/// defect stays near `tol`.
fn dopri5<F>(y0: LinearOperator, t_total: f64, tol: f64, rhs: F) -> Result<LinearOperator>
where
    F: Fn(&LinearOperator) -> Result<LinearOperator>,
{
    if t_total == 0.0 {
        return Ok(y0);
    }
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    // b5 − b4: the embedded error weights
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];

    let combine = |base: &LinearOperator, terms: &[(f64, &LinearOperator)]| -> Result<LinearOperator> {
        let mut acc = base.clone();
        for &(c, k) in terms {
            if c != 0.0 {
                acc = acc.add(&k.scale_re(c))?;
            }
        }
        Ok(acc)
    };

    let mut y = y0;
    let mut s = 0.0f64;
    let mut h = (t_total / 16.0).min(0.1).max(t_total * 1e-3);
    let mut k1 = rhs(&y)?;
    let mut steps = 0usize;
    while s < t_total {
        steps += 1;
        if steps > 2_000_000 {
            return Err(Error::Internal("adaptive integrator exceeded step budget".into()));
        }
        h = h.min(t_total - s);
        let k2 = rhs(&combine(&y, &[(h * A[0][0], &k1)])?)?;
        let k3 = rhs(&combine(&y, &[(h * A[1][0], &k1), (h * A[1][1], &k2)])?)?;
        let k4 = rhs(&combine(
            &y,
            &[(h * A[2][0], &k1), (h * A[2][1], &k2), (h * A[2][2], &k3)],
        )?)?;
        let k5 = rhs(&combine(
            &y,
            &[
                (h * A[3][0], &k1),
                (h * A[3][1], &k2),
                (h * A[3][2], &k3),
                (h * A[3][3], &k4),
            ],
        )?)?;
        let k6 = rhs(&combine(
            &y,
            &[
                (h * A[4][0], &k1),
                (h * A[4][1], &k2),
                (h * A[4][2], &k3),
                (h * A[4][3], &k4),
                (h * A[4][4], &k5),
            ],
        )?)?;
        let y_next = combine(
            &y,
            &[
                (h * A[5][0], &k1),
                (h * A[5][2], &k3),
                (h * A[5][3], &k4),
                (h * A[5][4], &k5),
                (h * A[5][5], &k6),
            ],
        )?;
        let k7 = rhs(&y_next)?;
        let err_op = combine(
            &LinearOperator::zeros(y.mode_count()),
            &[
                (h * E[0], &k1),
                (h * E[2], &k3),
                (h * E[3], &k4),
                (h * E[4], &k5),
                (h * E[5], &k6),
                (h * E[6], &k7),
            ],
        )?;
        let err = err_op.max_abs_entry();
        let scale = tol * (h / t_total) * y.max_abs_entry().max(1.0);
        if err <= scale {
            y = y_next;
            s += h;
            k1 = k7; // first-same-as-last
        }
        let ratio = if err > 0.0 { scale / err } else { 10.0 };
        let factor = (0.9 * ratio.powf(0.2)).clamp(0.2, 5.0);
        h *= factor;
        if h < t_total * 1e-13 {
            return Err(Error::Internal("adaptive integrator step size underflow".into()));
        }
    }
    Ok(y)
}
