//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).
//!
//! Every tolerance is pinned here to its contract value; nothing is deferred
//! to runtime calibration.

use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qbn_cli::suite::{run_suite, SuiteConfig};
use qbn_core::classical::{
    classical_generator, evolve_classical, gillespie_sample, Distribution,
};
use qbn_core::fock::{BernoulliProcessSpec, KetVector, ModeCount, SubsetIndex};
use qbn_core::identities::{
    verify_car, verify_exchange_commutation, verify_weighted_commutators_1d,
    verify_weighted_commutators_2d, CorrectionCoefficient,
};
use qbn_core::linalg;
use qbn_core::operator::{annihilator, creator, LinearOperator};
use qbn_core::sample_bernoulli_gram;
use qbn_core::semigroup::{
    build_model, choi_matrix, contraction_semigroup_apply, evolve_heisenberg, evolve_schrodinger,
    verify_subharmonic_vacuum, DensityMatrix, EvolutionParams, HamiltonianTable,
};
use qbn_core::weighted::{
    norm_of_weighted_number, number_operator, weighted_number_direct, weighted_number_spectral,
    TransitionKernel, WeightFunction,
};
use qbn_core::{IdentityReport, Tolerances};

const MASTER_SEED: u64 = 2026;

fn n(modes: usize) -> ModeCount {
    ModeCount::new(modes).unwrap()
}

fn pass(criterion: usize, message: &str, started: Instant) {
    println!(
        "[PASS] criterion {criterion}: {message} ({:.2}s)",
        started.elapsed().as_secs_f64()
    );
}

fn assert_reports(reports: &[IdentityReport], context: &str) {
    for r in reports {
        assert!(
            r.pass,
            "[FAIL] {context}: {} n={} params={} residual={} tolerance={}",
            r.identity, r.n, r.params, r.residual, r.tolerance
        );
    }
}

#[test]
fn criterion_01_car_suite() {
    let started = Instant::now();
    let tol = Tolerances::default();
    for modes in 1..=8 {
        let reports = verify_car(n(modes), &tol).unwrap();
        assert_reports(&reports, "criterion 1");
        for r in &reports {
            assert_eq!(r.residual, 0.0, "CAR residual must be exactly zero at n={modes}");
        }
    }
    assert!(started.elapsed().as_secs_f64() < 10.0, "criterion 1 exceeded 10 s");
    pass(1, "CAR residuals exactly zero for n in 1..=8, all mode pairs", started);
}

#[test]
fn criterion_02_spectral_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    for modes in 1..=8 {
        for i in 0..100 {
            let kernel = TransitionKernel::random_uniform(n(modes), &mut rng);
            let direct = weighted_number_direct(&kernel).unwrap();
            let spectral = weighted_number_spectral(&kernel);
            let residual = direct.residual(&spectral).unwrap();
            assert!(
                residual <= 1e-12,
                "direct vs spectral residual {residual} at n={modes}, kernel {i}"
            );
        }
    }
    assert!(started.elapsed().as_secs_f64() < 60.0, "criterion 2 exceeded 60 s");
    pass(2, "direct and spectral constructions agree (100 kernels per n in 1..=8)", started);
}

#[test]
fn criterion_03_norm_formula() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED + 1);
    for modes in 1..=8 {
        for i in 0..100 {
            let kernel = TransitionKernel::random_uniform(n(modes), &mut rng);
            let formula = norm_of_weighted_number(&kernel);
            let matrix = weighted_number_direct(&kernel).unwrap().spectral_norm().unwrap();
            assert!(
                (formula - matrix).abs() <= 1e-12,
                "norm mismatch {formula} vs {matrix} at n={modes}, kernel {i}"
            );
        }
    }
    pass(3, "operator norm equals the max eigenvalue formula (100 kernels per n in 1..=8)", started);
}

#[test]
fn criterion_04_commutator_suite() {
    let started = Instant::now();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED + 2);
    for modes in 2..=6 {
        for _ in 0..100 {
            let u = WeightFunction::random_uniform(n(modes), &mut rng);
            assert_reports(&verify_weighted_commutators_1d(&u, &tol).unwrap(), "criterion 4 (1d)");
            let kernel = TransitionKernel::random_uniform(n(modes), &mut rng);
            assert_reports(
                &verify_weighted_commutators_2d(&kernel, CorrectionCoefficient::Standard, &tol)
                    .unwrap(),
                "criterion 4 (2d)",
            );
            assert_reports(
                &verify_exchange_commutation(&kernel, &tol).unwrap(),
                "criterion 4 (exchange)",
            );
        }
    }
    // negative control: the doubled-column-sum coefficient must fail
    let generic = TransitionKernel::random_uniform(n(4), &mut rng);
    let control =
        verify_weighted_commutators_2d(&generic, CorrectionCoefficient::DoubledColumnSum, &tol)
            .unwrap();
    let worst = control
        .iter()
        .filter(|r| r.identity == "weighted2d.annihilator_commutation")
        .map(|r| r.residual)
        .fold(0.0, f64::max);
    assert!(worst >= 1e-4, "negative control residual {worst} below 1e-4");
    pass(4, "commutator identities hold (100 kernels per n in 2..=6); fault injection detected", started);
}

#[test]
fn criterion_05_explicit_semigroup() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED + 3);
    for modes in 1..=5 {
        let kernel = TransitionKernel::random_regular(n(modes), &mut rng);
        let h = HamiltonianTable::random_uniform(n(modes), &mut rng);
        let model = build_model(kernel, h).unwrap();
        let xi = KetVector::random(n(modes), &mut rng);
        for t in [0.1, 1.0, 5.0] {
            let closed = contraction_semigroup_apply(&model, t, &xi).unwrap();
            let exp_tg = linalg::expm(&model.generator_op().to_dense().map(|z| z * t));
            let via_expm = LinearOperator::from_dense(n(modes), &exp_tg)
                .unwrap()
                .apply(&xi)
                .unwrap();
            let diff = closed.max_abs_diff(&via_expm).unwrap();
            assert!(diff <= 1e-10, "closed form vs expm differ by {diff} at n={modes}, t={t}");
        }
    }
    pass(5, "closed-form contraction semigroup matches the matrix exponential (t in {0.1, 1, 5})", started);
}

#[test]
fn criterion_06_markov_properties() {
    let started = Instant::now();
    let params = EvolutionParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED + 4);
    for modes in 1..=4 {
        let kernel = TransitionKernel::random_regular(n(modes), &mut rng);
        let h = HamiltonianTable::random_uniform(n(modes), &mut rng);
        let model = build_model(kernel, h).unwrap();
        let identity = LinearOperator::identity(n(modes));
        let x = LinearOperator::random_dense(n(modes), &mut rng);
        let x_norm = x.spectral_norm().unwrap();
        for t in [0.1, 0.5, 1.0] {
            let evolved_id = evolve_heisenberg(&model, &identity, t, &params).unwrap();
            let conserv = evolved_id.residual(&identity).unwrap();
            assert!(conserv <= 1e-8, "T_t(I) residual {conserv} at n={modes}, t={t}");

            let evolved = evolve_heisenberg(&model, &x, t, &params).unwrap();
            let norm_excess = evolve_norm_excess(&evolved, x_norm);
            assert!(norm_excess <= 1e-8, "contraction violated by {norm_excess} at n={modes}, t={t}");

            let choi = choi_matrix(&model, t, &params).unwrap();
            let min_eig = linalg::min_hermitian_eigenvalue(&choi);
            assert!(min_eig >= -1e-8, "Choi min eigenvalue {min_eig} at n={modes}, t={t}");
        }
        // semigroup law at the pinned splits
        for (s, t) in [(0.3, 0.7), (0.5, 0.5)] {
            let whole = evolve_heisenberg(&model, &x, s + t, &params).unwrap();
            let step = evolve_heisenberg(&model, &x, t, &params).unwrap();
            let composed = evolve_heisenberg(&model, &step, s, &params).unwrap();
            let law = whole.residual(&composed).unwrap();
            assert!(law <= 1e-7, "semigroup law residual {law} at n={modes}, (s,t)=({s},{t})");
        }
    }
    assert!(started.elapsed().as_secs_f64() < 300.0, "criterion 6 exceeded 5 min");
    pass(6, "conservativity, contraction, semigroup law, and complete positivity (n <= 4)", started);
}

fn evolve_norm_excess(evolved: &LinearOperator, base_norm: f64) -> f64 {
    (evolved.spectral_norm().unwrap() - base_norm).max(0.0)
}

#[test]
fn criterion_07_subharmonic_vacuum() {
    let started = Instant::now();
    let params = EvolutionParams::default();
    let tol = Tolerances::default();
    for modes in [2usize, 3] {
        let nn = n(modes);
        for kernel in [
            TransitionKernel::canonical(nn),
            TransitionKernel::nearest_neighbor(nn, 1.0, 1.0, 1.0).unwrap(),
        ] {
            assert!(kernel.regular());
            let model = build_model(kernel, HamiltonianTable::zero(nn)).unwrap();
            for t in [0.5, 1.0, 2.0] {
                let report = verify_subharmonic_vacuum(&model, t, &params, &tol).unwrap();
                assert!(
                    report.pass,
                    "vacuum projection not subharmonic at n={modes}, t={t}: residual {}",
                    report.residual
                );
            }
        }
    }
    pass(7, "vacuum projection is subharmonic for regular kernels (n in {2,3}, t in {0.5,1,2})", started);
}

#[test]
fn criterion_08_decoherence_free_number() {
    let started = Instant::now();
    let params = EvolutionParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED + 5);
    for modes in 2..=4 {
        let nn = n(modes);
        let kernel = TransitionKernel::random_regular(nn, &mut rng);
        let h = HamiltonianTable::random_uniform(nn, &mut rng);
        let model = build_model(kernel, h).unwrap();
        let nop = number_operator(nn);
        for t in [0.5, 1.0] {
            let evolved = evolve_heisenberg(&model, &nop, t, &params).unwrap();
            let drift = evolved.residual(&nop).unwrap();
            assert!(drift <= 1e-8, "T_t(N) drifted by {drift} at n={modes}, t={t}");
        }
        let comm = model.weighted_number_op().commutator(&nop).unwrap().max_abs_entry();
        assert!(comm <= 1e-12, "[S_w, N] residual {comm} at n={modes}");
        for k in 0..modes {
            let ann = annihilator(nn, k).unwrap();
            let cre = creator(nn, k).unwrap();
            let a_sandwich = ann.compose(&nop).unwrap().compose(&ann).unwrap().max_abs_entry();
            let c_sandwich = cre.compose(&nop).unwrap().compose(&cre).unwrap().max_abs_entry();
            assert_eq!(a_sandwich, 0.0, "annihilator sandwich must vanish exactly");
            assert_eq!(c_sandwich, 0.0, "creator sandwich must vanish exactly");
        }
    }
    pass(8, "number operator is decoherence-free: T_t(N) = N, [S_w,N] = 0, ladder sandwiches vanish", started);
}

#[test]
fn criterion_09_classical_correspondence() {
    let started = Instant::now();
    let params = EvolutionParams::default();
    // two-state model: single hop 0 -> 1 at rate 1
    let n2 = n(2);
    let mut table = vec![vec![0.0; 2]; 2];
    table[1][0] = 1.0;
    let kernel = TransitionKernel::from_table(n2, table).unwrap();
    let model = build_model(kernel.clone(), HamiltonianTable::zero(n2)).unwrap();
    let sigma0 = SubsetIndex::from_modes(&[0]).unwrap();
    let target = SubsetIndex::from_modes(&[1]).unwrap();
    let p0 = Distribution::point_mass(n2, sigma0).unwrap();

    let q = classical_generator(&kernel);
    let ode = evolve_classical(&q, &p0, 1.0).unwrap();
    let closed_form = 1.0 - (-1.0f64).exp();
    assert!((ode.probability(target) - closed_form).abs() <= 1e-12);

    let rho0 = DensityMatrix::from_diagonal(n2, p0.probabilities()).unwrap();
    let rho_t = evolve_schrodinger(&model, &rho0, 1.0, &params).unwrap();
    let tv_quantum = ode.tv_distance_to_slice(&rho_t.populations()).unwrap();
    assert!(tv_quantum <= 1e-6, "two-state quantum/classical TV {tv_quantum}");
    assert!((rho_t.populations()[target.index()] - closed_form).abs() <= 1e-6);

    let mc = gillespie_sample(&kernel, sigma0, 1.0, 100_000, MASTER_SEED).unwrap();
    assert!(ode.tv_distance(&mc).unwrap() <= 0.01, "gillespie vs ode");
    assert!(mc.tv_distance_to_slice(&rho_t.populations()).unwrap() <= 0.01, "gillespie vs quantum");

    // random kernels, n <= 4
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED + 6);
    for modes in 2..=4 {
        let kernel = TransitionKernel::random_uniform(n(modes), &mut rng);
        let h = HamiltonianTable::random_uniform(n(modes), &mut rng);
        let model = build_model(kernel.clone(), h).unwrap();
        let p0 = Distribution::point_mass(n(modes), SubsetIndex::from_modes(&[0]).unwrap()).unwrap();
        let rho0 = DensityMatrix::from_diagonal(n(modes), p0.probabilities()).unwrap();
        let rho_t = evolve_schrodinger(&model, &rho0, 1.0, &params).unwrap();
        let p_t = evolve_classical(&classical_generator(&kernel), &p0, 1.0).unwrap();
        let tv = p_t.tv_distance_to_slice(&rho_t.populations()).unwrap();
        assert!(tv <= 1e-6, "random-kernel TV {tv} at n={modes}");
        assert!(rho_t.max_offdiagonal_abs() <= 1e-10, "diagonal leakage at n={modes}");
    }
    pass(9, "quantum diagonal matches the classical chain (closed form, ODE, Gillespie)", started);
}

#[test]
fn criterion_10_monte_carlo_gram() {
    let started = Instant::now();
    let samples = 100_000usize;
    let bound = 5.0 / (samples as f64).sqrt();
    let mut cases: Vec<BernoulliProcessSpec> = (2..=4)
        .map(|modes| BernoulliProcessSpec::uniform(n(modes), 0.5).unwrap())
        .collect();
    cases.push(BernoulliProcessSpec::new(n(2), vec![0.3, 0.7]).unwrap());
    for spec in &cases {
        let gram = sample_bernoulli_gram(spec, samples, MASTER_SEED).unwrap();
        let dim = spec.mode_count().dim();
        for r in 0..dim {
            for c in 0..dim {
                if r == c {
                    assert!(
                        (gram[r][c] - 1.0).abs() <= 0.1,
                        "diagonal {} deviates: {}",
                        r,
                        gram[r][c]
                    );
                } else {
                    assert!(
                        gram[r][c].abs() <= bound,
                        "off-diagonal ({r},{c}) = {} exceeds {bound}",
                        gram[r][c]
                    );
                }
            }
        }
    }
    pass(10, "sampled Gram matrices are identity-close (1e5 samples, fixed seed)", started);
}

#[test]
fn criterion_11_suite_determinism() {
    let started = Instant::now();
    let config = SuiteConfig::default();
    let first = run_suite(&config).unwrap();
    let second = run_suite(&config).unwrap();
    let a = first.to_json().unwrap();
    let b = second.to_json().unwrap();
    assert_eq!(first.failed, 0, "default suite must pass");
    assert!(a.as_bytes() == b.as_bytes(), "suite.json bytes differ between identical runs");
    pass(11, "default verification suite is byte-deterministic and green", started);
}
