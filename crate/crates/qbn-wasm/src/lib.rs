//! Browser bindings for the interactive demo page (`www/index.html`).
//!
//! Three operations, each taking and returning JSON strings so the page
//! needs no generated TypeScript:
//!
//! - [`kernel_spectrum`]: eigenvalues of the weighted number operator per
//!   configuration, plus the kernel constants.
//! - [`occupancy_evolution`]: site occupancies, total particle number, and
//!   the total-variation gap to the classical exclusion chain along a time
//!   grid.
//! - [`superposition_decay`]: survival of a uniform superposition under the
//!   contraction semigroup, split by particle number.
//!
//! The `*_impl` functions are plain Rust and unit-tested on the host; the
//! exported wrappers only translate errors into `JsValue`.

use serde::Deserialize;
use wasm_bindgen::prelude::*;

use qbn_core::classical::{classical_generator, evolve_classical, Distribution};
use qbn_core::fock::{KetVector, SubsetIndex};
use qbn_core::operator::occupancy_projector;
use qbn_core::semigroup::{
    build_model, contraction_semigroup_apply, evolve_schrodinger, DensityMatrix, EvolutionParams,
    HamiltonianTable, SemigroupModel,
};
use qbn_core::weighted::{norm_of_weighted_number, number_operator, KernelConfig};

/// Keeps the page responsive: evolution is dense in `2^n`.
const MAX_DEMO_MODES: usize = 6;

fn err_to_js(e: String) -> JsValue {
    JsValue::from_str(&e)
}

#[wasm_bindgen]
pub fn kernel_spectrum(config: &str) -> Result<String, JsValue> {
    kernel_spectrum_impl(config).map_err(err_to_js)
}

#[wasm_bindgen]
pub fn occupancy_evolution(config: &str) -> Result<String, JsValue> {
    occupancy_evolution_impl(config).map_err(err_to_js)
}

#[wasm_bindgen]
pub fn superposition_decay(config: &str) -> Result<String, JsValue> {
    superposition_decay_impl(config).map_err(err_to_js)
}

#[derive(Deserialize)]
struct SpectrumRequest {
    kernel: KernelConfig,
}

pub fn kernel_spectrum_impl(config: &str) -> Result<String, String> {
    let req: SpectrumRequest =
        serde_json::from_str(config).map_err(|e| format!("bad spectrum request: {e}"))?;
    let kernel = req.kernel.build().map_err(|e| e.to_string())?;
    let n = kernel.mode_count();
    let counts = kernel.weighted_counts();
    let labels: Vec<String> = n.subsets().map(|s| s.to_string()).collect();
    let cardinalities: Vec<u32> = n.subsets().map(|s| s.cardinality()).collect();
    let out = serde_json::json!({
        "labels": labels,
        "values": counts.values(),
        "cardinalities": cardinalities,
        "norm": norm_of_weighted_number(&kernel),
        "alpha": kernel.alpha(),
        "beta": kernel.beta(),
        "regular": kernel.regular(),
    });
    Ok(out.to_string())
}

#[derive(Deserialize)]
struct EvolutionRequest {
    kernel: KernelConfig,
    /// Optional one-body energies; empty means `H_f = 0`.
    #[serde(default)]
    epsilon: Vec<f64>,
    /// Initially occupied sites.
    initial: Vec<usize>,
    t_max: f64,
    steps: usize,
}

fn build_demo_model(req_kernel: &KernelConfig, epsilon: &[f64]) -> Result<SemigroupModel, String> {
    let kernel = req_kernel.build().map_err(|e| e.to_string())?;
    let n = kernel.mode_count();
    if n.get() > MAX_DEMO_MODES {
        return Err(format!("demo is limited to {MAX_DEMO_MODES} modes"));
    }
    let hamiltonian = if epsilon.is_empty() {
        HamiltonianTable::zero(n)
    } else {
        HamiltonianTable::one_body(n, epsilon).map_err(|e| e.to_string())?
    };
    build_model(kernel, hamiltonian).map_err(|e| e.to_string())
}

fn time_grid(t_max: f64, steps: usize) -> Result<Vec<f64>, String> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err("t_max must be positive".into());
    }
    if steps == 0 || steps > 2000 {
        return Err("steps must be in 1..=2000".into());
    }
    Ok((0..=steps).map(|i| t_max * i as f64 / steps as f64).collect())
}

pub fn occupancy_evolution_impl(config: &str) -> Result<String, String> {
    let req: EvolutionRequest =
        serde_json::from_str(config).map_err(|e| format!("bad evolution request: {e}"))?;
    let model = build_demo_model(&req.kernel, &req.epsilon)?;
    let n = model.mode_count();
    let modes = n.get();
    let sigma0 = SubsetIndex::from_modes(&req.initial).map_err(|e| e.to_string())?;
    if !sigma0.is_valid_for(n) {
        return Err(format!("initial sites must be below {modes}"));
    }
    let times = time_grid(req.t_max, req.steps)?;
    let params = EvolutionParams::default();

    let projectors: Vec<_> = (0..modes)
        .map(|k| occupancy_projector(n, k).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let nop = number_operator(n);
    let q = classical_generator(model.kernel());
    let p0 = Distribution::point_mass(n, sigma0).map_err(|e| e.to_string())?;

    let mut sites = vec![Vec::with_capacity(times.len()); modes];
    let mut number = Vec::with_capacity(times.len());
    let mut tv = Vec::with_capacity(times.len());
    let mut state = DensityMatrix::pure_basis(n, sigma0).map_err(|e| e.to_string())?;
    let mut last_t = 0.0;
    for &t in &times {
        state = evolve_schrodinger(&model, &state, t - last_t, &params).map_err(|e| e.to_string())?;
        last_t = t;
        for (k, proj) in projectors.iter().enumerate() {
            sites[k].push(state.expectation(proj).map_err(|e| e.to_string())?.re);
        }
        number.push(state.expectation(&nop).map_err(|e| e.to_string())?.re);
        let p_t = evolve_classical(&q, &p0, t).map_err(|e| e.to_string())?;
        tv.push(
            p_t.tv_distance_to_slice(&state.populations())
                .map_err(|e| e.to_string())?,
        );
    }

    let out = serde_json::json!({
        "times": times,
        "sites": sites,
        "number": number,
        "tv_classical": tv,
    });
    Ok(out.to_string())
}

#[derive(Deserialize)]
struct DecayRequest {
    kernel: KernelConfig,
    t_max: f64,
    steps: usize,
}

pub fn superposition_decay_impl(config: &str) -> Result<String, String> {
    let req: DecayRequest =
        serde_json::from_str(config).map_err(|e| format!("bad decay request: {e}"))?;
    let kernel = req.kernel.build().map_err(|e| e.to_string())?;
    let n = kernel.mode_count();
    if n.get() > MAX_DEMO_MODES {
        return Err(format!("demo is limited to {MAX_DEMO_MODES} modes"));
    }
    let model =
        build_model(kernel, HamiltonianTable::zero(n)).map_err(|e| e.to_string())?;
    let times = time_grid(req.t_max, req.steps)?;

    let uniform = KetVector::uniform_superposition(n);
    let modes = n.get();
    let mut total = Vec::with_capacity(times.len());
    let mut by_cardinality = vec![Vec::with_capacity(times.len()); modes + 1];
    for &t in &times {
        let evolved = contraction_semigroup_apply(&model, t, &uniform).map_err(|e| e.to_string())?;
        total.push(evolved.norm_sq());
        let mut class = vec![0.0f64; modes + 1];
        for s in n.subsets() {
            class[s.cardinality() as usize] += evolved.amplitude(s).norm_sqr();
        }
        for (c, v) in class.into_iter().enumerate() {
            by_cardinality[c].push(v);
        }
    }

    let out = serde_json::json!({
        "times": times,
        "total": total,
        "by_cardinality": by_cardinality,
    });
    Ok(out.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_of_canonical_kernel() {
        let out = kernel_spectrum_impl(r#"{"kernel": {"n": 3, "type": "canonical"}}"#).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["norm"], 3.0);
        assert_eq!(v["values"].as_array().unwrap().len(), 8);
        // eigenvalues equal occupation numbers for the canonical kernel
        for (value, card) in v["values"]
            .as_array()
            .unwrap()
            .iter()
            .zip(v["cardinalities"].as_array().unwrap())
        {
            assert_eq!(value.as_f64().unwrap(), card.as_f64().unwrap());
        }
    }

    #[test]
    fn evolution_conserves_particle_number() {
        let out = occupancy_evolution_impl(
            r#"{
                "kernel": {"n": 3, "type": "nearest_neighbor",
                           "params": {"a": 1.0, "b": 0.5, "d": 0.0}},
                "initial": [0],
                "t_max": 2.0,
                "steps": 8
            }"#,
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        for num in v["number"].as_array().unwrap() {
            assert!((num.as_f64().unwrap() - 1.0).abs() < 1e-8);
        }
        for tv in v["tv_classical"].as_array().unwrap() {
            assert!(tv.as_f64().unwrap() < 1e-6);
        }
        // occupancy leaves site 0
        let site0 = v["sites"][0].as_array().unwrap();
        assert!(site0.last().unwrap().as_f64().unwrap() < 0.9);
    }

    #[test]
    fn decay_splits_by_cardinality() {
        let out = superposition_decay_impl(
            r#"{"kernel": {"n": 2, "type": "canonical"}, "t_max": 1.0, "steps": 4}"#,
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        // t = 0: total survival 1; vacuum class stays at 1/4 forever
        assert!((v["total"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
        let vacuum = v["by_cardinality"][0].as_array().unwrap();
        for val in vacuum {
            assert!((val.as_f64().unwrap() - 0.25).abs() < 1e-12);
        }
        // survivals decrease in time
        let total = v["total"].as_array().unwrap();
        for pair in total.windows(2) {
            assert!(pair[1].as_f64().unwrap() <= pair[0].as_f64().unwrap() + 1e-12);
        }
    }

    #[test]
    fn oversized_request_is_rejected() {
        let err = superposition_decay_impl(
            r#"{"kernel": {"n": 9, "type": "canonical"}, "t_max": 1.0, "steps": 4}"#,
        )
        .unwrap_err();
        assert!(err.contains("limited"));
    }
}
