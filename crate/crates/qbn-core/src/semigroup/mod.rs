//! The quantum exclusion Markov semigroup.
//!
//! A model couples a transition kernel `w` with a basis-diagonal Hamiltonian
//! `H_f = Σ f(σ)|Z_σ⟩⟨Z_σ|`. The jump operators are `L_jk = √w(j,k) ∂_j*∂_k`
//! and the contraction-semigroup generator is `G = −iH_f − ½S_w`, which is
//! admissible: `G + G* = −S_w = −Σ L_jk* L_jk`. At finite mode count the
//! generator
//!
//! ```text
//! 𝓛(X) = i[H_f, X] + Σ_jk ( L* X L − ½{L*L, X} )
//! ```
//!
//! is bounded, so the minimal dynamics is the norm-continuous semigroup
//! `e^{t𝓛}`, evolved by [`evolve_heisenberg`] and [`evolve_schrodinger`].

mod evolution;

pub use evolution::{
    choi_matrix, evolve_heisenberg, evolve_schrodinger, EvolutionMethod, EvolutionParams,
};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::rand_core::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::fock::{symmetric_unit, KetVector, ModeCount, SubsetIndex};
use crate::linalg;
use crate::operator::{annihilator, creator, hop_operator, LinearOperator};
use crate::report::{IdentityReport, Tolerances};
use crate::weighted::{weighted_number_spectral, TransitionKernel, WeightedCountTable};

/// Residual cap for the internal consistency checks run at model build time.
const BUILD_RESIDUAL_CAP: f64 = 1e-12;

/// A basis-diagonal Hamiltonian, stored as its `2^n` real diagonal values.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianTable {
    n: ModeCount,
    f: Vec<f64>,
}

impl HamiltonianTable {
    pub fn zero(n: ModeCount) -> Self {
        HamiltonianTable { n, f: vec![0.0; n.dim()] }
    }

    /// Free one-body energies: `f(σ) = Σ_{k∈σ} ε_k`.
    pub fn one_body(n: ModeCount, epsilon: &[f64]) -> Result<Self> {
        if epsilon.len() != n.get() {
            return Err(Error::Shape(format!(
                "one_body expects {} energies, got {}",
                n.get(),
                epsilon.len()
            )));
        }
        let f = n
            .subsets()
            .map(|s| (0..n.get()).filter(|&k| s.contains(k)).map(|k| epsilon[k]).sum())
            .collect();
        Ok(HamiltonianTable { n, f })
    }

    pub fn from_table(n: ModeCount, f: Vec<f64>) -> Result<Self> {
        if f.len() != n.dim() {
            return Err(Error::Shape(format!(
                "hamiltonian table has {} entries, expected {}",
                f.len(),
                n.dim()
            )));
        }
        if let Some(bad) = f.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("hamiltonian value {bad} is not finite")));
        }
        Ok(HamiltonianTable { n, f })
    }

    pub fn random_uniform<R: RngCore>(n: ModeCount, rng: &mut R) -> Self {
        let f = (0..n.dim()).map(|_| symmetric_unit(rng)).collect();
        HamiltonianTable { n, f }
    }

    pub fn mode_count(&self) -> ModeCount {
        self.n
    }

    pub fn value(&self, sigma: SubsetIndex) -> f64 {
        self.f[sigma.index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    /// `H_f` as a diagonal operator; real diagonal, hence self-adjoint.
    pub fn as_operator(&self) -> LinearOperator {
        LinearOperator::from_real_diagonal(self.n, &self.f).expect("table length matches")
    }

    /// The unitary `e^{itH_f}`, diagonal with phases `e^{itf(σ)}`.
    pub fn phase_operator(&self, t: f64) -> LinearOperator {
        let diag: Vec<Complex64> =
            self.f.iter().map(|&v| (Complex64::i() * (t * v)).exp()).collect();
        LinearOperator::from_complex_diagonal(self.n, &diag).expect("table length matches")
    }
}

/// Serializable Hamiltonian description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum HamiltonianSpec {
    Zero,
    OneBody { epsilon: Vec<f64> },
    Explicit { table: Vec<f64> },
}

pub fn build_hamiltonian(n: ModeCount, spec: &HamiltonianSpec) -> Result<HamiltonianTable> {
    match spec {
        HamiltonianSpec::Zero => Ok(HamiltonianTable::zero(n)),
        HamiltonianSpec::OneBody { epsilon } => HamiltonianTable::one_body(n, epsilon),
        HamiltonianSpec::Explicit { table } => HamiltonianTable::from_table(n, table.clone()),
    }
}

/// One jump operator `L = √w(j,k) ∂_j*∂_k`, moving a particle `k → j`.
#[derive(Clone, Debug)]
pub struct JumpOperator {
    /// Destination site `j`.
    pub target: usize,
    /// Origin site `k`.
    pub source: usize,
    /// The kernel weight `w(j,k)` (the squared jump amplitude).
    pub rate: f64,
    op: LinearOperator,
    adjoint: LinearOperator,
}

impl JumpOperator {
    pub fn operator(&self) -> &LinearOperator {
        &self.op
    }

    pub fn adjoint_operator(&self) -> &LinearOperator {
        &self.adjoint
    }
}

/// Kernel + Hamiltonian bundle with the derived generator pieces.
#[derive(Clone, Debug)]
pub struct SemigroupModel {
    kernel: TransitionKernel,
    hamiltonian: HamiltonianTable,
    counts: WeightedCountTable,
    jumps: Vec<JumpOperator>,
    h_op: LinearOperator,
    sw_op: LinearOperator,
    generator_diag: Vec<Complex64>,
    admissibility_residual: f64,
    jump_sum_residual: f64,
}

/// Builds the model and runs its internal consistency checks:
/// `G + G* = −S_w` and `Σ L*L = S_w`, both within `1e-12`. A violation is an
/// implementation bug, reported as [`Error::Internal`].
pub fn build_model(
    kernel: TransitionKernel,
    hamiltonian: HamiltonianTable,
) -> Result<SemigroupModel> {
    let n = kernel.mode_count();
    if hamiltonian.mode_count() != n {
        return Err(Error::Shape(format!(
            "kernel has {} modes but hamiltonian {}",
            n.get(),
            hamiltonian.mode_count().get()
        )));
    }
    let counts = kernel.weighted_counts();
    let sw_op = weighted_number_spectral(&kernel);
    let h_op = hamiltonian.as_operator();

    let mut jumps = Vec::new();
    for j in 0..n.get() {
        for k in 0..n.get() {
            let rate = kernel.rate(j, k);
            if rate == 0.0 {
                continue;
            }
            let op = hop_operator(n, j, k)?.scale_re(rate.sqrt());
            let adjoint = op.adjoint();
            jumps.push(JumpOperator { target: j, source: k, rate, op, adjoint });
        }
    }

    let generator_diag: Vec<Complex64> = n
        .subsets()
        .map(|s| Complex64::new(-0.5 * counts.value(s), -hamiltonian.value(s)))
        .collect();

    // G + G* = −S_w
    let g_op = LinearOperator::from_complex_diagonal(n, &generator_diag)?;
    let admissibility_residual = g_op
        .add(&g_op.adjoint())?
        .add(&sw_op)?
        .max_abs_entry();

    // Σ L*L = S_w
    let mut lsum = LinearOperator::zeros(n);
    for jump in &jumps {
        lsum = lsum.add(&jump.adjoint.compose(&jump.op)?)?;
    }
    let jump_sum_residual = lsum.residual(&sw_op)?;

    if admissibility_residual > BUILD_RESIDUAL_CAP {
        return Err(Error::Internal(format!(
            "admissibility residual {admissibility_residual} exceeds {BUILD_RESIDUAL_CAP}"
        )));
    }
    if jump_sum_residual > BUILD_RESIDUAL_CAP {
        return Err(Error::Internal(format!(
            "jump-operator sum residual {jump_sum_residual} exceeds {BUILD_RESIDUAL_CAP}"
        )));
    }

    Ok(SemigroupModel {
        kernel,
        hamiltonian,
        counts,
        jumps,
        h_op,
        sw_op,
        generator_diag,
        admissibility_residual,
        jump_sum_residual,
    })
}

impl SemigroupModel {
    pub fn mode_count(&self) -> ModeCount {
        self.kernel.mode_count()
    }

    pub fn kernel(&self) -> &TransitionKernel {
        &self.kernel
    }

    pub fn hamiltonian(&self) -> &HamiltonianTable {
        &self.hamiltonian
    }

    pub fn weighted_counts(&self) -> &WeightedCountTable {
        &self.counts
    }

    pub fn jump_operators(&self) -> &[JumpOperator] {
        &self.jumps
    }

    /// `S_w` as a diagonal operator.
    pub fn weighted_number_op(&self) -> &LinearOperator {
        &self.sw_op
    }

    pub fn hamiltonian_op(&self) -> &LinearOperator {
        &self.h_op
    }

    /// The contraction generator `G = −iH_f − ½S_w` (diagonal).
    pub fn generator_op(&self) -> LinearOperator {
        LinearOperator::from_complex_diagonal(self.mode_count(), &self.generator_diag)
            .expect("diagonal length matches")
    }

    pub fn generator_diag(&self) -> &[Complex64] {
        &self.generator_diag
    }

    pub fn admissibility_residual(&self) -> f64 {
        self.admissibility_residual
    }

    pub fn jump_sum_residual(&self) -> f64 {
        self.jump_sum_residual
    }
}

/// Applies the contraction semigroup `P_t = e^{tG}` in closed form:
/// amplitude-wise multiplication by `e^{−[if(σ) + ϑ(σ)/2] t}`.
pub fn contraction_semigroup_apply(
    model: &SemigroupModel,
    t: f64,
    xi: &KetVector,
) -> Result<KetVector> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    if xi.mode_count() != model.mode_count() {
        return Err(Error::Shape("state and model mode counts differ".into()));
    }
    let mut out = xi.clone();
    for (idx, amp) in out.amplitudes_mut().iter_mut().enumerate() {
        *amp *= (model.generator_diag[idx] * t).exp();
    }
    Ok(out)
}

/// The Heisenberg-picture generator
/// `𝓛(X) = i[H_f, X] + Σ (L*XL − ½{L*L, X})`; `𝓛(I) = 0` up to rounding.
pub fn lindblad_apply(model: &SemigroupModel, x: &LinearOperator) -> Result<LinearOperator> {
    if x.mode_count() != model.mode_count() {
        return Err(Error::Shape("observable and model mode counts differ".into()));
    }
    let hx = model.h_op.compose(x)?;
    let xh = x.compose(&model.h_op)?;
    let mut acc = hx.sub(&xh)?.scale(Complex64::i());
    for jump in &model.jumps {
        acc = acc.add(&jump.adjoint.compose(x)?.compose(&jump.op)?)?;
    }
    let anti = model.sw_op.compose(x)?.add(&x.compose(&model.sw_op)?)?;
    acc.sub(&anti.scale_re(0.5))
}

/// The Schrödinger-picture (predual) generator
/// `𝓛*(ρ) = −i[H_f, ρ] + Σ (LρL* − ½{L*L, ρ})`.
pub fn lindblad_predual_apply(
    model: &SemigroupModel,
    rho: &LinearOperator,
) -> Result<LinearOperator> {
    if rho.mode_count() != model.mode_count() {
        return Err(Error::Shape("state and model mode counts differ".into()));
    }
    let hr = model.h_op.compose(rho)?;
    let rh = rho.compose(&model.h_op)?;
    let mut acc = hr.sub(&rh)?.scale(-Complex64::i());
    for jump in &model.jumps {
        acc = acc.add(&jump.op.compose(rho)?.compose(&jump.adjoint)?)?;
    }
    let anti = model.sw_op.compose(rho)?.add(&rho.compose(&model.sw_op)?)?;
    acc.sub(&anti.scale_re(0.5))
}

/// A density matrix: Hermitian, unit trace, positive semidefinite (up to the
/// stated numerical slack).
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n: ModeCount,
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(n: ModeCount, mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != n.dim() || mat.ncols() != n.dim() {
            return Err(Error::Shape(format!(
                "density matrix is {}x{}, expected {}",
                mat.nrows(),
                mat.ncols(),
                n.dim()
            )));
        }
        let rho = DensityMatrix { n, mat };
        if rho.hermiticity_residual() > 1e-12 {
            return Err(Error::Domain(format!(
                "density matrix not Hermitian (residual {})",
                rho.hermiticity_residual()
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::Domain(format!("density matrix trace {tr} is not 1")));
        }
        let min_eig = rho.min_eigenvalue()?;
        if min_eig < -1e-10 {
            return Err(Error::Domain(format!(
                "density matrix has negative eigenvalue {min_eig}"
            )));
        }
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(n: ModeCount, mat: DMatrix<Complex64>) -> Self {
        DensityMatrix { n, mat }
    }

    /// The vacuum state `|Z_∅⟩⟨Z_∅|`.
    pub fn vacuum(n: ModeCount) -> Self {
        Self::pure_basis(n, SubsetIndex::EMPTY).expect("empty subset is valid")
    }

    /// The pure basis state `|Z_σ⟩⟨Z_σ|`.
    pub fn pure_basis(n: ModeCount, sigma: SubsetIndex) -> Result<Self> {
        if !sigma.is_valid_for(n) {
            return Err(Error::Shape(format!("subset {sigma} invalid for {} modes", n.get())));
        }
        let mut mat = DMatrix::zeros(n.dim(), n.dim());
        mat[(sigma.index(), sigma.index())] = Complex64::ONE;
        Ok(DensityMatrix { n, mat })
    }

    /// A classical mixture of basis states: `ρ = Σ p(σ)|Z_σ⟩⟨Z_σ|`.
    pub fn from_diagonal(n: ModeCount, p: &[f64]) -> Result<Self> {
        if p.len() != n.dim() {
            return Err(Error::Shape(format!(
                "diagonal has {} entries, expected {}",
                p.len(),
                n.dim()
            )));
        }
        let sum: f64 = p.iter().sum();
        if p.iter().any(|&v| v < -1e-12) || (sum - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(
                "diagonal must be nonnegative and sum to one".into(),
            ));
        }
        let mut mat = DMatrix::zeros(n.dim(), n.dim());
        for (i, &v) in p.iter().enumerate() {
            mat[(i, i)] = Complex64::new(v.max(0.0), 0.0);
        }
        Ok(DensityMatrix { n, mat })
    }

    /// The pure state `|ψ⟩⟨ψ|` of a normalised ket.
    pub fn pure(ket: &KetVector) -> Result<Self> {
        let nrm = ket.norm();
        if (nrm - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("ket is not normalised (norm {nrm})")));
        }
        let dim = ket.mode_count().dim();
        let amps = ket.amplitudes();
        let mat = DMatrix::from_fn(dim, dim, |r, c| amps[r] * amps[c].conj());
        Ok(DensityMatrix { n: ket.mode_count(), mat })
    }

    pub fn mode_count(&self) -> ModeCount {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.diagonal().iter().sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        linalg::max_abs_diff(&self.mat, &self.mat.adjoint())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(linalg::min_hermitian_eigenvalue(&self.mat))
    }

    /// Real parts of the diagonal (the configuration populations).
    pub fn populations(&self) -> Vec<f64> {
        self.mat.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn max_offdiagonal_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for r in 0..self.mat.nrows() {
            for c in 0..self.mat.ncols() {
                if r != c {
                    m = m.max(self.mat[(r, c)].norm());
                }
            }
        }
        m
    }

    /// Expectation `tr(ρX)`.
    pub fn expectation(&self, x: &LinearOperator) -> Result<Complex64> {
        if x.mode_count() != self.n {
            return Err(Error::Shape("observable and state mode counts differ".into()));
        }
        let mut sum = Complex64::ZERO;
        for (r, c, z) in x.iter_entries() {
            sum += self.mat[(c.index(), r.index())] * z;
        }
        Ok(sum)
    }
}

/// Markov-property checks at each listed time: conservativity `T_t(I) = I`,
/// the semigroup law on a random observable, the contraction bound
/// `‖T_t(X)‖ ≤ ‖X‖`, positivity of `T_t` on a positive observable, complete
/// positivity via the Choi matrix, and Heisenberg/Schrödinger duality.
pub fn verify_markov_properties<R: RngCore>(
    model: &SemigroupModel,
    times: &[f64],
    params: &EvolutionParams,
    tol: &Tolerances,
    rng: &mut R,
) -> Result<Vec<IdentityReport>> {
    let n = model.mode_count();
    let modes = n.get();
    let identity = LinearOperator::identity(n);
    let x = LinearOperator::random_dense(n, rng);
    let x_norm = x.spectral_norm()?;
    // positive observable A*A
    let a = LinearOperator::random_dense(n, rng);
    let x_pos = a.adjoint().compose(&a)?;
    // random mixed state for the duality check
    let rho = random_density(n, rng);
    let digest = model.kernel.digest();
    let mut reports = Vec::new();

    // time zero: T_0(X) = X
    let x0 = evolve_heisenberg(model, &x, 0.0, params)?;
    reports.push(IdentityReport::new(
        "markov.time_zero",
        modes,
        json!({ "kernel": digest }),
        x0.residual(&x)?,
        tol.evolution,
    ));

    for &t in times {
        let p = json!({ "t": t, "kernel": digest });

        let tt_id = evolve_heisenberg(model, &identity, t, params)?;
        reports.push(IdentityReport::new(
            "markov.conservativity",
            modes,
            p.clone(),
            tt_id.residual(&identity)?,
            tol.evolution,
        ));

        let whole = evolve_heisenberg(model, &x, t, params)?;
        let half = evolve_heisenberg(model, &x, t / 2.0, params)?;
        let composed = evolve_heisenberg(model, &half, t / 2.0, params)?;
        reports.push(IdentityReport::new(
            "markov.semigroup_law",
            modes,
            p.clone(),
            whole.residual(&composed)?,
            tol.semigroup_law,
        ));

        let evolved_norm = whole.spectral_norm()?;
        reports.push(IdentityReport::new(
            "markov.contraction",
            modes,
            p.clone(),
            (evolved_norm - x_norm).max(0.0),
            tol.evolution,
        ));

        let pos_evolved = evolve_heisenberg(model, &x_pos, t, params)?;
        let min_eig = pos_evolved.min_hermitian_eigenvalue()?;
        reports.push(IdentityReport::new(
            "markov.positivity_order",
            modes,
            p.clone(),
            (-min_eig).max(0.0),
            tol.evolution,
        ));

        let choi = choi_matrix(model, t, params)?;
        let choi_min = linalg::min_hermitian_eigenvalue(&choi);
        reports.push(IdentityReport::new(
            "markov.choi_psd",
            modes,
            p.clone(),
            (-choi_min).max(0.0),
            tol.evolution,
        ));
        reports.push(IdentityReport::new(
            "markov.choi_partial_trace",
            modes,
            p.clone(),
            choi_partial_trace_residual(&choi, n),
            tol.evolution,
        ));

        // duality: tr(ρ T_t(X)) = tr(ρ_t X)
        let lhs = rho.expectation(&whole)?;
        let rho_t = evolve_schrodinger(model, &rho, t, params)?;
        let rhs = rho_t.expectation(&x)?;
        reports.push(IdentityReport::new(
            "markov.duality",
            modes,
            p,
            (lhs - rhs).norm(),
            tol.evolution,
        ));
    }
    Ok(reports)
}

/// Trace of each `D×D` Choi block; conservativity means the result is the
/// identity on the input factor.
fn choi_partial_trace_residual(choi: &DMatrix<Complex64>, n: ModeCount) -> f64 {
    let d = n.dim();
    let mut worst = 0.0f64;
    for sigma in 0..d {
        for tau in 0..d {
            let mut tr = Complex64::ZERO;
            for a in 0..d {
                tr += choi[(sigma * d + a, tau * d + a)];
            }
            let expected = if sigma == tau { Complex64::ONE } else { Complex64::ZERO };
            worst = worst.max((tr - expected).norm());
        }
    }
    worst
}

fn random_density<R: RngCore>(n: ModeCount, rng: &mut R) -> DensityMatrix {
    let a = LinearOperator::random_dense(n, rng).to_dense();
    let g = a.adjoint() * &a;
    let tr: Complex64 = g.diagonal().iter().sum();
    DensityMatrix::from_matrix_unchecked(n, g.map(|z| z / tr))
}

/// Subharmonicity of the vacuum projection: `min eig(T_t(E) − E) ≥ −tol`
/// for `E = |Z_∅⟩⟨Z_∅|`.
pub fn verify_subharmonic_vacuum(
    model: &SemigroupModel,
    t: f64,
    params: &EvolutionParams,
    tol: &Tolerances,
) -> Result<IdentityReport> {
    let n = model.mode_count();
    let e = LinearOperator::basis_projector(n, SubsetIndex::EMPTY)?;
    let evolved = evolve_heisenberg(model, &e, t, params)?;
    let min_eig = evolved.sub(&e)?.min_hermitian_eigenvalue()?;
    Ok(IdentityReport::new(
        "subharmonic.vacuum_projection",
        n.get(),
        json!({ "t": t, "kernel": model.kernel.digest(), "regular": model.kernel.regular() }),
        (-min_eig).max(0.0),
        tol.evolution,
    ))
}

/// Outcome of the decoherence-free check for a caller-supplied observable.
#[derive(Clone, Debug)]
pub enum DecoherenceCheck {
    /// The observable fails the commutant membership surrogate
    /// (`[X, L] = [X, L*] = 0` for every jump); nothing further is asserted.
    NotApplicable { surrogate_residual: f64 },
    /// Membership holds; the reports cover the unitary-conjugation form of
    /// the evolution, commutation with the weighted number operator, and the
    /// vanishing ladder sandwiches.
    Verified(Vec<IdentityReport>),
}

/// For observables in the commutant of the jump family, the semigroup acts
/// by unitary conjugation: `T_t(X) = e^{itH_f} X e^{−itH_f}`; moreover
/// `[S_w, X] = 0` and `∂_k X ∂_k = ∂_k* X ∂_k* = 0` for every mode.
pub fn verify_decoherence_free(
    model: &SemigroupModel,
    x: &LinearOperator,
    t: f64,
    params: &EvolutionParams,
    tol: &Tolerances,
) -> Result<DecoherenceCheck> {
    let n = model.mode_count();
    let modes = n.get();
    let mut surrogate = 0.0f64;
    for jump in &model.jumps {
        surrogate = surrogate.max(x.commutator(&jump.op)?.max_abs_entry());
        surrogate = surrogate.max(x.commutator(&jump.adjoint)?.max_abs_entry());
    }
    if surrogate > tol.weighted {
        return Ok(DecoherenceCheck::NotApplicable { surrogate_residual: surrogate });
    }
    let digest = model.kernel.digest();
    let p = json!({ "t": t, "kernel": digest });
    let mut reports = vec![IdentityReport::new(
        "decoherence.commutant_membership",
        modes,
        p.clone(),
        surrogate,
        tol.weighted,
    )];

    let evolved = evolve_heisenberg(model, x, t, params)?;
    let phase = model.hamiltonian.phase_operator(t);
    let conjugated = phase.compose(x)?.compose(&phase.adjoint())?;
    reports.push(IdentityReport::new(
        "decoherence.unitary_conjugation",
        modes,
        p.clone(),
        evolved.residual(&conjugated)?,
        tol.evolution,
    ));

    reports.push(IdentityReport::new(
        "decoherence.weighted_number_commutation",
        modes,
        p.clone(),
        model.sw_op.commutator(x)?.max_abs_entry(),
        tol.weighted,
    ));

    let mut sandwich = 0.0f64;
    for k in 0..modes {
        let ann = annihilator(n, k)?;
        let cre = creator(n, k)?;
        sandwich = sandwich.max(ann.compose(x)?.compose(&ann)?.max_abs_entry());
        sandwich = sandwich.max(cre.compose(x)?.compose(&cre)?.max_abs_entry());
    }
    reports.push(IdentityReport::new(
        "decoherence.ladder_sandwich",
        modes,
        p,
        sandwich,
        tol.weighted,
    ));

    Ok(DecoherenceCheck::Verified(reports))
}
