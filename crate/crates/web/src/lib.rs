//! Browser bindings: a noisy run, a local-complementation explorer and a stabilizer check.
//! Every function takes and returns JSON text.

use serde::{Deserialize, Serialize};
use serde_json::json;
use wasm_bindgen::prelude::*;

use clinr_lab::circuit::SchedulePolicy;
use clinr_lab::clinr::{Schedule, VerificationPlan};
use clinr_lab::graph::{local_complement, GraphCompilation};
use clinr_lab::harness::{
    block_resource, default_compilations, run_experiment, ExperimentConfig, NoiseSpec, PlanSpec,
};
use clinr_lab::noise::NoiseModel;

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Inputs of [`run`].
#[derive(Deserialize)]
pub struct RunRequest {
    /// `"direct"` or a reference pair label `S1`..`S6`.
    pub circuit: String,
    pub shots: usize,
    pub seed: u64,
    /// Multiplier on every channel of the trapped-ion model; 0 is noiseless.
    pub noise_scale: f64,
    #[serde(default)]
    pub asap: bool,
}

pub fn run_request(req: &RunRequest) -> clinr_lab::Result<serde_json::Value> {
    let mut cfg = if req.circuit == "direct" {
        ExperimentConfig::direct(req.shots, req.seed)
    } else {
        ExperimentConfig::clinr(&req.circuit, PlanSpec::reference(&req.circuit), req.shots, req.seed)
    };
    let model = NoiseModel {
        scale: req.noise_scale,
        ..NoiseModel::default()
    };
    cfg = cfg.with_noise(if req.noise_scale == 0.0 {
        NoiseSpec::Noiseless
    } else {
        NoiseSpec::Tempo1 {
            model,
            table: Default::default(),
            mapping: Default::default(),
        }
    });
    if req.asap {
        cfg.schedule = SchedulePolicy::Asap;
    }
    let rec = run_experiment(&cfg)?;
    Ok(serde_json::to_value(rec)?)
}

/// Runs the direct circuit or a reference pair and returns the experiment record.
#[wasm_bindgen]
pub fn run(request: &str) -> Result<String, JsError> {
    let req: RunRequest = serde_json::from_str(request).map_err(js)?;
    Ok(run_request(&req).map_err(js)?.to_string())
}

#[derive(Serialize)]
struct GraphView {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    zz: usize,
    gates: usize,
    /// Whether the compilation still prepares the resource state.
    same_state: bool,
    compilation: GraphCompilation,
}

fn view(gc: GraphCompilation) -> clinr_lab::Result<GraphView> {
    let same_state = gc.tableau()?.same_state(&block_resource()?.tableau()?);
    Ok(GraphView {
        vertices: gc.graph.num_vertices(),
        edges: gc.graph.edges(),
        zz: gc.cost.zz,
        gates: gc.cost.gates,
        same_state,
        compilation: gc,
    })
}

/// Entry `id` of the default compilation pool of the resource.
#[wasm_bindgen]
pub fn graph_start(id: usize) -> Result<String, JsError> {
    let pool = default_compilations().map_err(js)?;
    let gc = pool.get(id).cloned().ok_or_else(|| js(format!("pool has {} entries", pool.len())))?;
    serde_json::to_string(&view(gc).map_err(js)?).map_err(js)
}

/// Local complementation at `vertex` of a compilation returned by [`graph_start`] or itself.
#[wasm_bindgen]
pub fn graph_lc(compilation: &str, vertex: usize) -> Result<String, JsError> {
    let gc: GraphCompilation = serde_json::from_str(compilation).map_err(js)?;
    let next = local_complement(&gc, vertex).map_err(js)?;
    serde_json::to_string(&view(next).map_err(js)?).map_err(js)
}

/// Whether a Pauli text (sparse `Z6 X7 ...` or dense 12 letters) stabilizes the resource, and
/// with which sign.
#[wasm_bindgen]
pub fn check_stabilizer(text: &str) -> String {
    let out = block_resource().and_then(|spec| {
        let c = VerificationPlan::check(&spec, text, spec.n, Schedule::Mcm)?;
        Ok(json!({
            "stabilizer": true,
            "signed": c.stabilizer.to_sparse(spec.n),
            "weight": c.weight(),
            "expected_parity": c.expected_parity(),
        }))
    });
    match out {
        Ok(v) => v.to_string(),
        Err(e) => json!({"stabilizer": false, "reason": e.to_string()}).to_string(),
    }
}
