//! The verification suite: every identity and property check in one run,
//! aggregated into a deterministic `suite.json`.
//!
//! Determinism contract: identical config + seed produce byte-identical
//! output. Checks run in a fixed order, every random draw comes from a
//! seeded stream, and wall-clock timings are kept out of the serialized
//! report (they are printed to stdout instead).

use std::path::Path;
use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use qbn_core::classical::{
    classical_generator, evolve_classical, gillespie_sample, verify_diagonal_correspondence,
    Distribution,
};
use qbn_core::fock::{verify_gram_convergence, BernoulliProcessSpec};
use qbn_core::identities::{
    verify_car, verify_exchange_commutation, verify_weighted_commutators_1d,
    verify_weighted_commutators_2d, CorrectionCoefficient,
};
use qbn_core::semigroup::{
    build_model, verify_decoherence_free, verify_markov_properties, verify_subharmonic_vacuum,
    DecoherenceCheck, EvolutionParams, HamiltonianTable,
};
use qbn_core::weighted::{
    norm_of_weighted_number, number_operator, one_d_number_operator, weighted_number_direct,
    weighted_number_spectral, embed_1d_kernel, TransitionKernel, WeightFunction,
};
use qbn_core::{IdentityReport, ModeCount, SubsetIndex, Tolerances};

use crate::{CliError, Result};

/// Family names, in execution order. `--only NAME` selects one.
pub const FAMILIES: &[&str] = &[
    "car",
    "weighted1d",
    "weighted2d",
    "exchange",
    "spectral",
    "norm",
    "markov",
    "subharmonic",
    "decoherence",
    "classical",
    "gram",
];

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Mode counts for the algebraic families (commutators, spectra, norms).
    pub algebra_modes: Vec<usize>,
    /// Random kernels/weights per mode count in the algebraic families.
    pub kernels_per_n: usize,
    /// Mode counts for the evolution families (markov, decoherence,
    /// classical).
    pub evolution_modes: Vec<usize>,
    /// Random models per mode count in the evolution families.
    pub models_per_n: usize,
    pub times: Vec<f64>,
    pub gillespie_trials: usize,
    pub gram_samples: usize,
    pub tolerance_scale: f64,
    /// Run only the named family.
    pub only: Option<String>,
    /// Inject the doubled-column-sum fault into the weighted commutator
    /// family; the suite must then fail.
    pub negative_control: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 42,
            algebra_modes: vec![2, 3, 4, 5],
            kernels_per_n: 20,
            evolution_modes: vec![2, 3],
            models_per_n: 3,
            times: vec![0.1, 0.5, 1.0],
            gillespie_trials: 50_000,
            gram_samples: 100_000,
            tolerance_scale: 1.0,
            only: None,
            negative_control: false,
        }
    }
}

impl SuiteConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid suite config JSON: {e}")))
    }

    fn runs_family(&self, family: &str) -> bool {
        self.only.as_deref().is_none_or(|only| only == family)
    }
}

#[derive(Serialize)]
pub struct SuiteResult {
    pub seed: u64,
    pub tolerance_scale: f64,
    pub negative_control: bool,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub reports: Vec<IdentityReport>,
    /// Wall-clock per family; excluded from `suite.json` so identical runs
    /// produce identical bytes.
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

impl SuiteResult {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|s| s + "\n")
            .map_err(|e| CliError::Config(format!("suite serialization: {e}")))
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityReport> {
        self.reports.iter().filter(|r| !r.pass)
    }
}

fn family_rng(seed: u64, family: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stream = FAMILIES.iter().position(|&f| f == family).unwrap_or(usize::MAX) as u64;
    rng.set_stream(stream + 1);
    rng
}

pub fn run_suite(config: &SuiteConfig) -> Result<SuiteResult> {
    if let Some(only) = &config.only {
        if !FAMILIES.contains(&only.as_str()) {
            return Err(CliError::Config(format!(
                "unknown family `{only}`; available: {}",
                FAMILIES.join(", ")
            )));
        }
    }
    let tol = Tolerances::default().scaled(config.tolerance_scale);
    let params = EvolutionParams::default();
    let mut reports = Vec::new();
    let mut timings = Vec::new();

    for &family in FAMILIES {
        if !config.runs_family(family) {
            continue;
        }
        let started = Instant::now();
        run_family(family, config, &tol, &params, &mut reports)?;
        timings.push((family.to_string(), started.elapsed().as_secs_f64()));
    }

    let passed = reports.iter().filter(|r| r.pass).count();
    let failed = reports.len() - passed;
    Ok(SuiteResult {
        seed: config.seed,
        tolerance_scale: config.tolerance_scale,
        negative_control: config.negative_control,
        total: reports.len(),
        passed,
        failed,
        reports,
        timings,
    })
}

fn run_family(
    family: &str,
    config: &SuiteConfig,
    tol: &Tolerances,
    params: &EvolutionParams,
    reports: &mut Vec<IdentityReport>,
) -> Result<()> {
    let mut rng = family_rng(config.seed, family);
    match family {
        "car" => {
            for modes in 1..=5 {
                reports.extend(verify_car(ModeCount::new(modes)?, tol)?);
            }
        }
        "weighted1d" => {
            for &modes in &config.algebra_modes {
                let n = ModeCount::new(modes)?;
                for _ in 0..config.kernels_per_n {
                    let u = WeightFunction::random_uniform(n, &mut rng);
                    reports.extend(verify_weighted_commutators_1d(&u, tol)?);
                }
            }
        }
        "weighted2d" => {
            let coefficient = if config.negative_control {
                CorrectionCoefficient::DoubledColumnSum
            } else {
                CorrectionCoefficient::Standard
            };
            for &modes in &config.algebra_modes {
                let n = ModeCount::new(modes)?;
                for _ in 0..config.kernels_per_n {
                    let k = TransitionKernel::random_uniform(n, &mut rng);
                    reports.extend(verify_weighted_commutators_2d(&k, coefficient, tol)?);
                }
            }
        }
        "exchange" => {
            for &modes in &config.algebra_modes {
                let n = ModeCount::new(modes)?;
                for _ in 0..config.kernels_per_n {
                    let k = TransitionKernel::random_uniform(n, &mut rng);
                    reports.extend(verify_exchange_commutation(&k, tol)?);
                }
            }
        }
        "spectral" => {
            for &modes in &config.algebra_modes {
                let n = ModeCount::new(modes)?;
                for i in 0..config.kernels_per_n {
                    let k = TransitionKernel::random_uniform(n, &mut rng);
                    let residual = weighted_number_direct(&k)?
                        .residual(&weighted_number_spectral(&k))?;
                    reports.push(IdentityReport::new(
                        "spectral.direct_vs_spectral",
                        modes,
                        serde_json::json!({ "kernel": k.digest(), "index": i }),
                        residual,
                        tol.weighted,
                    ));
                    let u = WeightFunction::random_uniform(n, &mut rng);
                    let embedding_residual = one_d_number_operator(&u)
                        .residual(&weighted_number_spectral(&embed_1d_kernel(&u)))?;
                    reports.push(IdentityReport::new(
                        "spectral.embedding_identity",
                        modes,
                        serde_json::json!({ "index": i }),
                        embedding_residual,
                        tol.weighted,
                    ));
                }
            }
        }
        "norm" => {
            for &modes in &config.algebra_modes {
                let n = ModeCount::new(modes)?;
                for i in 0..config.kernels_per_n {
                    let k = TransitionKernel::random_uniform(n, &mut rng);
                    let formula = norm_of_weighted_number(&k);
                    let matrix = weighted_number_direct(&k)?.spectral_norm()?;
                    reports.push(IdentityReport::new(
                        "norm.formula_vs_matrix",
                        modes,
                        serde_json::json!({ "kernel": k.digest(), "index": i }),
                        (formula - matrix).abs(),
                        tol.weighted,
                    ));
                }
            }
        }
        "markov" => {
            for &modes in &config.evolution_modes {
                let n = ModeCount::new(modes)?;
                for _ in 0..config.models_per_n {
                    let kernel = TransitionKernel::random_regular(n, &mut rng);
                    let h = HamiltonianTable::random_uniform(n, &mut rng);
                    let model = build_model(kernel, h)?;
                    reports.extend(verify_markov_properties(
                        &model,
                        &config.times,
                        params,
                        tol,
                        &mut rng,
                    )?);
                }
            }
        }
        "subharmonic" => {
            for &modes in &config.evolution_modes {
                let n = ModeCount::new(modes)?;
                for kernel in [
                    TransitionKernel::canonical(n),
                    TransitionKernel::nearest_neighbor(n, 1.0, 1.0, 1.0)?,
                ] {
                    let model = build_model(kernel, HamiltonianTable::zero(n))?;
                    for &t in &config.times {
                        reports.push(verify_subharmonic_vacuum(&model, t, params, tol)?);
                    }
                }
            }
        }
        "decoherence" => {
            for &modes in &config.evolution_modes {
                let n = ModeCount::new(modes)?;
                for _ in 0..config.models_per_n {
                    let kernel = TransitionKernel::random_regular(n, &mut rng);
                    let h = HamiltonianTable::random_uniform(n, &mut rng);
                    let model = build_model(kernel, h)?;
                    let nop = number_operator(n);
                    let t = config.times.last().copied().unwrap_or(1.0);
                    match verify_decoherence_free(&model, &nop, t, params, tol)? {
                        DecoherenceCheck::Verified(r) => reports.extend(r),
                        DecoherenceCheck::NotApplicable { surrogate_residual } => {
                            reports.push(IdentityReport::new(
                                "decoherence.commutant_membership",
                                modes,
                                serde_json::json!({ "t": t }),
                                surrogate_residual,
                                tol.weighted,
                            ));
                        }
                    }
                }
            }
        }
        "classical" => {
            // two-state closed form first
            let n2 = ModeCount::new(2)?;
            let mut table = vec![vec![0.0; 2]; 2];
            table[1][0] = 1.0;
            let kernel = TransitionKernel::from_table(n2, table)?;
            let sigma0 = SubsetIndex::from_modes(&[0])?;
            let model = build_model(kernel.clone(), HamiltonianTable::zero(n2))?;
            let p0 = Distribution::point_mass(n2, sigma0)?;
            reports.extend(verify_diagonal_correspondence(&model, &p0, 1.0, params, tol)?);
            let q = classical_generator(&kernel);
            let ode = evolve_classical(&q, &p0, 1.0)?;
            let closed_form = 1.0 - (-1.0f64).exp();
            reports.push(IdentityReport::new(
                "classical.two_state_closed_form",
                2,
                serde_json::json!({ "t": 1.0, "lambda": 1.0 }),
                (ode.probability(SubsetIndex::from_modes(&[1])?) - closed_form).abs(),
                tol.classical_tv,
            ));
            let mc = gillespie_sample(&kernel, sigma0, 1.0, config.gillespie_trials, config.seed)?;
            reports.push(IdentityReport::new(
                "classical.gillespie_vs_ode",
                2,
                serde_json::json!({ "t": 1.0, "trials": config.gillespie_trials }),
                ode.tv_distance(&mc)?,
                0.01,
            ));
            // then random kernels
            for &modes in &config.evolution_modes {
                let n = ModeCount::new(modes)?;
                for _ in 0..config.models_per_n {
                    let kernel = TransitionKernel::random_uniform(n, &mut rng);
                    let h = HamiltonianTable::random_uniform(n, &mut rng);
                    let model = build_model(kernel, h)?;
                    let p0 = Distribution::point_mass(n, SubsetIndex::from_modes(&[0])?)?;
                    reports.extend(verify_diagonal_correspondence(&model, &p0, 1.0, params, tol)?);
                }
            }
        }
        "gram" => {
            for modes in 2..=4 {
                let n = ModeCount::new(modes)?;
                let spec = BernoulliProcessSpec::uniform(n, 0.5)?;
                reports.extend(verify_gram_convergence(&spec, config.gram_samples, config.seed)?);
            }
            let n2 = ModeCount::new(2)?;
            let spec = BernoulliProcessSpec::new(n2, vec![0.3, 0.7])?;
            reports.extend(verify_gram_convergence(&spec, config.gram_samples, config.seed)?);
        }
        other => {
            return Err(CliError::Config(format!("unknown family `{other}`")));
        }
    }
    Ok(())
}

/// Writes `suite.json` into `out_dir`.
pub fn write_suite(result: &SuiteResult, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("suite.json"), result.to_json()?)?;
    Ok(())
}
