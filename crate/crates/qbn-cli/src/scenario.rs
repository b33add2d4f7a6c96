//! Scenario runner: build a model from a JSON config, evolve an initial
//! state over a time grid, export observable expectations as CSV, and run
//! the requested property checks.
//!
//! Outputs are fully computed before anything is written, so an invalid
//! config never leaves partial artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use qbn_core::classical::{
    classical_generator, evolve_classical, gillespie_sample_mixture, Distribution,
};
use qbn_core::semigroup::{
    build_hamiltonian, build_model, evolve_schrodinger, verify_decoherence_free,
    verify_markov_properties, verify_subharmonic_vacuum, DecoherenceCheck, DensityMatrix,
    EvolutionParams, HamiltonianSpec, SemigroupModel,
};
use qbn_core::weighted::{norm_of_weighted_number, number_operator, KernelConfig};
use qbn_core::{
    IdentityReport, LinearOperator, ModeCount, SubsetIndex, Tolerances,
};

use crate::{CliError, Result};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub modes: usize,
    pub kernel: KernelConfig,
    pub hamiltonian: HamiltonianSpec,
    pub times: Vec<f64>,
    pub observables: Vec<ObservableSpec>,
    pub initial_state: InitialStateSpec,
    #[serde(default)]
    pub checks: Vec<CheckName>,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    #[serde(default)]
    pub method: EvolutionParams,
    #[serde(default)]
    pub seed: u64,
    /// Trajectories behind the Gillespie column of `distributions.csv`.
    #[serde(default = "default_gillespie_trials")]
    pub gillespie_trials: usize,
}

fn default_gillespie_trials() -> usize {
    20_000
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Markov,
    SubharmonicVacuum,
    DecoherenceFreeNumber,
    Classical,
}

/// Partial overrides of the default tolerance table.
#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub exact: Option<f64>,
    pub weighted: Option<f64>,
    pub explicit_form: Option<f64>,
    pub evolution: Option<f64>,
    pub semigroup_law: Option<f64>,
    pub classical_tv: Option<f64>,
    pub diagonal_leakage: Option<f64>,
    /// Multiplies every tolerance after the per-field overrides.
    pub scale: Option<f64>,
}

impl ToleranceOverrides {
    pub fn resolve(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(v) = self.exact {
            t.exact = v;
        }
        if let Some(v) = self.weighted {
            t.weighted = v;
        }
        if let Some(v) = self.explicit_form {
            t.explicit_form = v;
        }
        if let Some(v) = self.evolution {
            t.evolution = v;
        }
        if let Some(v) = self.semigroup_law {
            t.semigroup_law = v;
        }
        if let Some(v) = self.classical_tv {
            t.classical_tv = v;
        }
        if let Some(v) = self.diagonal_leakage {
            t.diagonal_leakage = v;
        }
        t.scaled(self.scale.unwrap_or(1.0))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ObservableSpec {
    /// `"identity"` or `"number"`.
    Named(String),
    /// `{"occupancy": k}`: the projector onto configurations occupying `k`.
    Occupancy { occupancy: usize },
    /// `{"explicit": {...}}`: a diagonal table or sparse entry list.
    Explicit { explicit: ExplicitObservable },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ExplicitObservable {
    Diagonal { diag: Vec<f64> },
    Entries { entries: Vec<EntrySpec> },
}

#[derive(Clone, Debug, Deserialize)]
pub struct EntrySpec {
    pub row: Vec<usize>,
    pub col: Vec<usize>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialStateSpec {
    Vacuum,
    Basis {
        subset: Vec<usize>,
    },
    /// Classical mixture of basis states; keys are subsets rendered as JSON
    /// arrays (e.g. `"[0,2]"`), weights are normalised.
    Mixture {
        weights: BTreeMap<String, f64>,
    },
}

pub struct ScenarioOutcome {
    pub report: serde_json::Value,
    pub timeseries_csv: String,
    /// Per-configuration probabilities from the three routes (quantum
    /// diagonal, classical ODE, Gillespie); present when the `classical`
    /// check is requested.
    pub distributions_csv: Option<String>,
    pub all_checks_pass: bool,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("invalid scenario JSON: {e}")))
}

fn build_observable(
    n: ModeCount,
    spec: &ObservableSpec,
    index: usize,
) -> Result<(String, LinearOperator)> {
    match spec {
        ObservableSpec::Named(name) => match name.as_str() {
            "identity" => Ok(("identity".into(), LinearOperator::identity(n))),
            "number" => Ok(("number".into(), number_operator(n))),
            other => Err(config_err(format!("unknown observable `{other}`"))),
        },
        ObservableSpec::Occupancy { occupancy } => {
            let op = qbn_core::operator::occupancy_projector(n, *occupancy)?;
            Ok((format!("occupancy_{occupancy}"), op))
        }
        ObservableSpec::Explicit { explicit } => {
            let op = match explicit {
                ExplicitObservable::Diagonal { diag } => {
                    LinearOperator::from_real_diagonal(n, diag)?
                }
                ExplicitObservable::Entries { entries } => {
                    let mut triplets = Vec::new();
                    for e in entries {
                        let row = SubsetIndex::from_modes(&e.row)
                            .map_err(|err| config_err(err.to_string()))?;
                        let col = SubsetIndex::from_modes(&e.col)
                            .map_err(|err| config_err(err.to_string()))?;
                        triplets.push((row, col, Complex64::new(e.re, e.im)));
                    }
                    LinearOperator::from_triplets(n, triplets)?
                }
            };
            Ok((format!("explicit_{index}"), op))
        }
    }
}

fn build_initial_state(n: ModeCount, spec: &InitialStateSpec) -> Result<DensityMatrix> {
    match spec {
        InitialStateSpec::Vacuum => Ok(DensityMatrix::vacuum(n)),
        InitialStateSpec::Basis { subset } => {
            let sigma = SubsetIndex::from_modes(subset).map_err(|e| config_err(e.to_string()))?;
            if !sigma.is_valid_for(n) {
                return Err(config_err(format!(
                    "initial subset {sigma} invalid for {} modes",
                    n.get()
                )));
            }
            Ok(DensityMatrix::pure_basis(n, sigma)?)
        }
        InitialStateSpec::Mixture { weights } => {
            let mut p = vec![0.0f64; n.dim()];
            for (key, &weight) in weights {
                if weight < 0.0 || !weight.is_finite() {
                    return Err(config_err(format!("mixture weight {weight} invalid")));
                }
                let modes: Vec<usize> = serde_json::from_str(key).map_err(|_| {
                    config_err(format!("mixture key `{key}` is not a subset array like [0,2]"))
                })?;
                let sigma =
                    SubsetIndex::from_modes(&modes).map_err(|e| config_err(e.to_string()))?;
                if !sigma.is_valid_for(n) {
                    return Err(config_err(format!(
                        "mixture subset {sigma} invalid for {} modes",
                        n.get()
                    )));
                }
                p[sigma.index()] += weight;
            }
            let total: f64 = p.iter().sum();
            if total <= 0.0 {
                return Err(config_err("mixture weights sum to zero"));
            }
            for v in &mut p {
                *v /= total;
            }
            Ok(DensityMatrix::from_diagonal(n, &p)?)
        }
    }
}

fn run_checks(
    model: &SemigroupModel,
    config: &ScenarioConfig,
    params: &EvolutionParams,
    tol: &Tolerances,
    positive_times: &[f64],
) -> Result<Vec<IdentityReport>> {
    let mut reports = Vec::new();
    for check in &config.checks {
        match check {
            CheckName::Markov => {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                reports.extend(verify_markov_properties(
                    model,
                    positive_times,
                    params,
                    tol,
                    &mut rng,
                )?);
            }
            CheckName::SubharmonicVacuum => {
                for &t in positive_times {
                    reports.push(verify_subharmonic_vacuum(model, t, params, tol)?);
                }
            }
            CheckName::DecoherenceFreeNumber => {
                let nop = number_operator(model.mode_count());
                for &t in positive_times {
                    match verify_decoherence_free(model, &nop, t, params, tol)? {
                        DecoherenceCheck::Verified(r) => reports.extend(r),
                        DecoherenceCheck::NotApplicable { surrogate_residual } => {
                            reports.push(IdentityReport::new(
                                "decoherence.commutant_membership",
                                model.mode_count().get(),
                                serde_json::json!({ "t": t }),
                                surrogate_residual,
                                tol.weighted,
                            ));
                        }
                    }
                }
            }
            CheckName::Classical => {
                // covered by the TV column; recorded as reports at the
                // final time as well
                if let Some(&t) = positive_times.last() {
                    let p0 = Distribution::new(
                        build_initial_state(model.mode_count(), &config.initial_state)?
                            .populations(),
                    )?;
                    reports.extend(qbn_core::classical::verify_diagonal_correspondence(
                        model, &p0, t, params, tol,
                    )?);
                }
            }
        }
    }
    Ok(reports)
}

/// Executes a scenario config. Nothing is written to disk here; see
/// [`write_outcome`].
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutcome> {
    let n = ModeCount::new(config.modes).map_err(|e| config_err(e.to_string()))?;
    if config.kernel.n != config.modes {
        return Err(config_err(format!(
            "kernel is for {} modes but scenario declares {}",
            config.kernel.n, config.modes
        )));
    }
    if config.times.is_empty() {
        return Err(config_err("times must be nonempty"));
    }
    if config.times.iter().any(|&t| t < 0.0 || !t.is_finite()) {
        return Err(config_err("times must be nonnegative"));
    }
    if config.times.windows(2).any(|w| w[0] > w[1]) {
        return Err(config_err("times must be sorted ascending"));
    }
    let kernel = config.kernel.build()?;
    let hamiltonian = build_hamiltonian(n, &config.hamiltonian)?;
    let model = build_model(kernel, hamiltonian)?;
    let tol = config.tolerances.resolve();
    let params = config.method;

    let observables: Vec<(String, LinearOperator)> = config
        .observables
        .iter()
        .enumerate()
        .map(|(i, spec)| build_observable(n, spec, i))
        .collect::<Result<_>>()?;
    if observables.is_empty() {
        return Err(config_err("observables must be nonempty"));
    }

    let rho0 = build_initial_state(n, &config.initial_state)?;
    let want_classical = config.checks.contains(&CheckName::Classical);
    let classical = if want_classical {
        let q = classical_generator(model.kernel());
        let p0 = Distribution::new(rho0.populations())
            .map_err(|e| config_err(format!("initial state is not diagonal-classical: {e}")))?;
        Some((q, p0))
    } else {
        None
    };

    // March the state along the sorted grid; the semigroup property makes
    // incremental steps exact.
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut distribution_rows = String::new();
    let mut state = rho0;
    let mut last_t = 0.0f64;
    for &t in &config.times {
        state = evolve_schrodinger(&model, &state, t - last_t, &params)?;
        last_t = t;
        let mut row = vec![t];
        for (_, op) in &observables {
            row.push(state.expectation(op)?.re);
        }
        if let Some((q, p0)) = &classical {
            let p_t = evolve_classical(q, p0, t)?;
            let populations = state.populations();
            row.push(p_t.tv_distance_to_slice(&populations)?);
            let mc = gillespie_sample_mixture(
                model.kernel(),
                p0,
                t,
                config.gillespie_trials,
                config.seed,
            )?;
            for sigma in n.subsets() {
                let _ = writeln!(
                    distribution_rows,
                    "{t},\"{}\",{},{},{}",
                    serde_json::to_string(&sigma).expect("subset serializes"),
                    populations[sigma.index()],
                    p_t.probability(sigma),
                    mc.probability(sigma),
                );
            }
        }
        rows.push(row);
    }
    let distributions_csv = classical.as_ref().map(|_| {
        format!("t,configuration,p_quantum,p_classical,p_gillespie\n{distribution_rows}")
    });

    let mut csv = String::from("t");
    for (name, _) in &observables {
        let _ = write!(csv, ",{name}");
    }
    if classical.is_some() {
        csv.push_str(",tv_classical");
    }
    csv.push('\n');
    for row in &rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                csv.push(',');
            }
            let _ = write!(csv, "{v}");
        }
        csv.push('\n');
    }

    let positive_times: Vec<f64> = config.times.iter().copied().filter(|&t| t > 0.0).collect();
    let checks = run_checks(&model, config, &params, &tol, &positive_times)?;
    let all_checks_pass = checks.iter().all(|r| r.pass);

    let report = serde_json::json!({
        "modes": config.modes,
        "kernel": KernelConfig::from_kernel(model.kernel()),
        "alpha": model.kernel().alpha(),
        "beta": model.kernel().beta(),
        "diag_sup": model.kernel().diag_sup(),
        "regular": model.kernel().regular(),
        "s_w_norm": norm_of_weighted_number(model.kernel()),
        "admissibility_residual": model.admissibility_residual(),
        "jump_sum_residual": model.jump_sum_residual(),
        "jump_count": model.jump_operators().len(),
        "times": config.times,
        "observables": observables.iter().map(|(name, _)| name.clone()).collect::<Vec<_>>(),
        "checks": checks,
        "all_checks_pass": all_checks_pass,
    });

    Ok(ScenarioOutcome { report, timeseries_csv: csv, distributions_csv, all_checks_pass })
}

/// Writes `report.json`, `timeseries.csv`, and (when produced)
/// `distributions.csv` into `out_dir`.
pub fn write_outcome(outcome: &ScenarioOutcome, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let report = serde_json::to_string_pretty(&outcome.report)
        .map_err(|e| CliError::Config(format!("report serialization: {e}")))?;
    std::fs::write(out_dir.join("report.json"), report + "\n")?;
    std::fs::write(out_dir.join("timeseries.csv"), &outcome.timeseries_csv)?;
    if let Some(distributions) = &outcome.distributions_csv {
        std::fs::write(out_dir.join("distributions.csv"), distributions)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> serde_json::Value {
        serde_json::json!({
            "modes": 3,
            "kernel": {"n": 3, "type": "canonical"},
            "hamiltonian": {"type": "zero"},
            "times": [0.0, 1.0, 2.0],
            "observables": ["identity", "number", {"occupancy": 0}],
            "initial_state": {"type": "basis", "subset": [0]},
            "checks": ["classical"]
        })
    }

    #[test]
    fn canonical_scenario_number_is_constant() {
        let config: ScenarioConfig = serde_json::from_value(base_config()).unwrap();
        let outcome = run_scenario(&config).unwrap();
        assert!(outcome.all_checks_pass);
        let lines: Vec<&str> = outcome.timeseries_csv.lines().collect();
        assert_eq!(lines[0], "t,identity,number,occupancy_0,tv_classical");
        // number column constant at 1 and TV at 0 (pure dephasing)
        for line in &lines[1..] {
            let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
            assert!((cols[1] - 1.0).abs() < 1e-10, "identity expectation");
            assert!((cols[2] - 1.0).abs() < 1e-10, "number expectation");
            assert!(cols[4] < 1e-9, "tv_classical");
        }
        // three-source distribution table: dephasing freezes populations, so
        // all columns stay at the initial point mass
        let dist = outcome.distributions_csv.unwrap();
        let mut lines = dist.lines();
        assert_eq!(lines.next().unwrap(), "t,configuration,p_quantum,p_classical,p_gillespie");
        for line in lines {
            let (head, probs) = line.rsplit_once('"').unwrap();
            let expected = if head.contains("\"[0]") { 1.0 } else { 0.0 };
            for p in probs.trim_start_matches(',').split(',') {
                assert!((p.parse::<f64>().unwrap() - expected).abs() < 1e-12, "{line}");
            }
        }
    }

    #[test]
    fn unsorted_times_rejected() {
        let mut v = base_config();
        v["times"] = serde_json::json!([1.0, 0.5]);
        let config: ScenarioConfig = serde_json::from_value(v).unwrap();
        assert!(matches!(run_scenario(&config), Err(CliError::Config(_))));
    }

    #[test]
    fn kernel_mode_mismatch_rejected() {
        let mut v = base_config();
        v["kernel"]["n"] = serde_json::json!(2);
        let config: ScenarioConfig = serde_json::from_value(v).unwrap();
        assert!(matches!(run_scenario(&config), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_observable_rejected() {
        let mut v = base_config();
        v["observables"] = serde_json::json!(["momentum"]);
        let config: ScenarioConfig = serde_json::from_value(v).unwrap();
        assert!(matches!(run_scenario(&config), Err(CliError::Config(_))));
    }

    #[test]
    fn mixture_state_parses_subset_keys() {
        let mut v = base_config();
        v["initial_state"] = serde_json::json!({
            "type": "mixture",
            "weights": {"[0]": 1.0, "[0,2]": 1.0}
        });
        let config: ScenarioConfig = serde_json::from_value(v).unwrap();
        let outcome = run_scenario(&config).unwrap();
        // expected occupation: ½·1 + ½·2 = 1.5, conserved in time
        for line in outcome.timeseries_csv.lines().skip(1) {
            let cols: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            assert!((cols[2] - 1.5).abs() < 1e-9);
        }
    }

    #[test]
    fn bad_mixture_key_is_config_error() {
        let mut v = base_config();
        v["initial_state"] =
            serde_json::json!({"type": "mixture", "weights": {"zero-two": 1.0}});
        let config: ScenarioConfig = serde_json::from_value(v).unwrap();
        assert!(matches!(run_scenario(&config), Err(CliError::Config(_))));
    }

    #[test]
    fn explicit_observable_and_checks() {
        let mut v = base_config();
        v["observables"] = serde_json::json!([
            "number",
            {"explicit": {"diag": [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]}},
            {"explicit": {"entries": [{"row": [0], "col": [0], "re": 1.0}]}}
        ]);
        v["checks"] =
            serde_json::json!(["markov", "subharmonic_vacuum", "decoherence_free_number"]);
        v["times"] = serde_json::json!([0.0, 0.5]);
        let config: ScenarioConfig = serde_json::from_value(v).unwrap();
        let outcome = run_scenario(&config).unwrap();
        assert!(outcome.all_checks_pass);
        let checks = outcome.report["checks"].as_array().unwrap();
        assert!(checks.iter().any(|c| c["identity"] == "markov.conservativity"));
        assert!(checks.iter().any(|c| c["identity"] == "subharmonic.vacuum_projection"));
        assert!(checks.iter().any(|c| c["identity"] == "decoherence.unitary_conjugation"));
    }

    #[test]
    fn report_carries_model_summary() {
        let config: ScenarioConfig = serde_json::from_value(base_config()).unwrap();
        let outcome = run_scenario(&config).unwrap();
        assert_eq!(outcome.report["alpha"], 1.0);
        assert_eq!(outcome.report["beta"], 1.0);
        assert_eq!(outcome.report["regular"], true);
        assert_eq!(outcome.report["s_w_norm"], 3.0);
    }

    #[test]
    fn scenario_outputs_are_byte_deterministic() {
        let mut v = base_config();
        v["checks"] = serde_json::json!(["markov", "classical"]);
        v["seed"] = serde_json::json!(7);
        let config: ScenarioConfig = serde_json::from_value(v).unwrap();
        let a = run_scenario(&config).unwrap();
        let b = run_scenario(&config).unwrap();
        assert_eq!(
            serde_json::to_string(&a.report).unwrap(),
            serde_json::to_string(&b.report).unwrap()
        );
        assert_eq!(a.timeseries_csv, b.timeseries_csv);
    }

    #[test]
    fn zero_kernel_scenario_norm_is_zero() {
        let mut v = base_config();
        v["kernel"] = serde_json::json!({
            "n": 3, "type": "explicit",
            "table": [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
        });
        v["checks"] = serde_json::json!([]);
        let config: ScenarioConfig = serde_json::from_value(v).unwrap();
        let outcome = run_scenario(&config).unwrap();
        assert_eq!(outcome.report["s_w_norm"], 0.0);
        assert_eq!(outcome.report["regular"], false);
    }
}
