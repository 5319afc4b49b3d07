//! Experiment configuration and the run pipeline: build, lower, schedule, map, attach noise,
//! sample, post-select, decode, score.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::dataset::attach_depolarizing;
use super::metrics::{metrics, Metrics, OccupationCounts};
use crate::circuit::{lower_to_native, schedule_with, Circuit, LayeredCircuit, NativeCounts, SchedulePolicy};
use crate::clinr::{
    bell_clifford_resource, clinr_circuit, ResourcePrep, ResourceSpec, Schedule, ShotDecoder, VerificationPlan,
};
use crate::error::{Error, Result};
use crate::graph::{search_compilations, GraphCompilation};
use crate::noise::{
    attach_noise, optimize_mapping, synth_pair_table, NoiseModel, PairErrorTable, QubitMapping, SynthParams,
    UsagePattern,
};
use crate::sim::run_batch;
use crate::{gse, trotter};

/// Search budget and seed behind the default compilation pool.
pub const DEFAULT_SEARCH_ITERS: usize = 2000;
pub const DEFAULT_SEARCH_SEED: u64 = 0;
/// Size of the default compilation pool.
pub const DEFAULT_POOL: usize = 64;
/// Reference pair whose circuit calibrates the wide end of the synthetic table.
pub const CALIBRATION_PAIR: &str = "S6";

/// Resource state of the encoded block's ladder Clifford.
pub fn block_resource() -> Result<ResourceSpec> {
    static SPEC: OnceLock<ResourceSpec> = OnceLock::new();
    if let Some(s) = SPEC.get() {
        return Ok(s.clone());
    }
    let s = bell_clifford_resource(&trotter::block_clifford()?)?;
    Ok(SPEC.get_or_init(|| s).clone())
}

/// Best compilations of the block resource, ranked by (ZZ, gates).
pub fn default_compilations() -> Result<Vec<GraphCompilation>> {
    static POOL: OnceLock<Vec<GraphCompilation>> = OnceLock::new();
    if let Some(p) = POOL.get() {
        return Ok(p.clone());
    }
    let t = block_resource()?.tableau()?;
    let p = search_compilations(&t, DEFAULT_SEARCH_ITERS, DEFAULT_SEARCH_SEED, DEFAULT_POOL)?;
    Ok(POOL.get_or_init(|| p).clone())
}

/// How the CliNR resource is prepared.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResourceChoice {
    Naive,
    /// Entry `id` of the default compilation pool.
    Graph {
        #[serde(default)]
        id: usize,
    },
    Inline {
        compilation: GraphCompilation,
    },
    /// Entry `id` of a JSON array of compilations (as written by `compile-graph`).
    File {
        path: PathBuf,
        id: usize,
    },
}

impl Default for ResourceChoice {
    fn default() -> Self {
        ResourceChoice::Graph { id: 0 }
    }
}

impl ResourceChoice {
    pub fn prep(&self) -> Result<ResourcePrep> {
        let pool_entry = |id: usize| -> Result<ResourcePrep> {
            let pool = default_compilations()?;
            let c = pool
                .get(id)
                .ok_or_else(|| Error::Config(format!("pool has {} entries, asked for {id}", pool.len())))?;
            Ok(ResourcePrep::Graph { compilation: c.clone() })
        };
        match self {
            ResourceChoice::Naive => Ok(ResourcePrep::Naive),
            ResourceChoice::Graph { id } => pool_entry(*id),
            ResourceChoice::Inline { compilation } => Ok(ResourcePrep::Graph {
                compilation: compilation.clone(),
            }),
            ResourceChoice::File { path, id } => {
                let list: Vec<GraphCompilation> = serde_json::from_reader(std::fs::File::open(path)?)?;
                let c = list
                    .get(*id)
                    .ok_or_else(|| Error::Config(format!("{} has no compilation {id}", path.display())))?;
                Ok(ResourcePrep::Graph { compilation: c.clone() })
            }
        }
    }
}

/// One check in sparse full-layout text (`Z6 X7 ...`) or dense 12-letter resource form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    pub stabilizer: String,
    pub schedule: Schedule,
}

/// Optional reference pair followed by explicit checks.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub verify_cat: bool,
}

impl PlanSpec {
    pub fn reference(label: &str) -> Self {
        Self {
            reference: Some(label.into()),
            ..Self::default()
        }
    }

    pub fn checks(checks: &[(&str, Schedule)]) -> Self {
        Self {
            checks: checks
                .iter()
                .map(|&(s, schedule)| CheckSpec {
                    stabilizer: s.into(),
                    schedule,
                })
                .collect(),
            ..Self::default()
        }
    }

    pub fn resolve(&self, spec: &ResourceSpec) -> Result<VerificationPlan> {
        let mut plan = match &self.reference {
            Some(l) => VerificationPlan::reference_pair(spec, l)?,
            None => VerificationPlan::empty(),
        };
        for c in &self.checks {
            plan.checks
                .push(VerificationPlan::check(spec, &c.stabilizer, spec.n, c.schedule)?);
        }
        plan.verify_cat = self.verify_cat;
        plan.validate(spec)?;
        Ok(plan)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    Direct,
    Clinr {
        #[serde(default)]
        resource: ResourceChoice,
        #[serde(default)]
        plan: PlanSpec,
    },
}

/// Source of the per-pair two-qubit error table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TableSource {
    /// Calibrated synthetic table.
    Synthetic {
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        params: SynthParams,
    },
    /// Whatever the model carries (uniform narrow mean when absent).
    Model,
    /// `ion_i,ion_j,drb_pptt` CSV.
    Csv { path: PathBuf },
}

impl Default for TableSource {
    fn default() -> Self {
        TableSource::Synthetic {
            seed: 0,
            params: SynthParams::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingPolicy {
    #[default]
    Optimized,
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    Noiseless,
    Tempo1 {
        #[serde(default)]
        model: NoiseModel,
        #[serde(default)]
        table: TableSource,
        #[serde(default)]
        mapping: MappingPolicy,
    },
    /// Symmetric depolarizing model of the dataset generator.
    Depolarizing { p1q: f64 },
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::Tempo1 {
            model: NoiseModel::default(),
            table: TableSource::default(),
            mapping: MappingPolicy::default(),
        }
    }
}

/// Default layer policy of the harness.
pub const DEFAULT_SCHEDULE: SchedulePolicy = SchedulePolicy::Alap;

fn default_schedule() -> SchedulePolicy {
    DEFAULT_SCHEDULE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub variant: Variant,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default = "default_schedule")]
    pub schedule: SchedulePolicy,
    pub shots: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn direct(shots: usize, seed: u64) -> Self {
        Self {
            name: "direct".into(),
            variant: Variant::Direct,
            noise: NoiseSpec::default(),
            schedule: DEFAULT_SCHEDULE,
            shots,
            seed,
        }
    }

    pub fn clinr(name: &str, plan: PlanSpec, shots: usize, seed: u64) -> Self {
        Self {
            name: name.into(),
            variant: Variant::Clinr {
                resource: ResourceChoice::default(),
                plan,
            },
            noise: NoiseSpec::default(),
            schedule: DEFAULT_SCHEDULE,
            shots,
            seed,
        }
    }

    pub fn with_noise(mut self, noise: NoiseSpec) -> Self {
        self.noise = noise;
        self
    }

    /// SHA-256 of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex(&Sha256::digest(bytes))
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        match &self.noise {
            NoiseSpec::Tempo1 { model, table, .. } => {
                model.validate()?;
                if let TableSource::Csv { path } = table {
                    if !path.exists() {
                        return Err(Error::Config(format!("pair table {} not found", path.display())));
                    }
                }
            }
            NoiseSpec::Depolarizing { p1q } => {
                if !(0.0..=0.075).contains(p1q) {
                    return Err(Error::Config("p1q must lie in [0, 0.075]".into()));
                }
            }
            NoiseSpec::Noiseless => {}
        }
        if let Variant::Clinr {
            resource: ResourceChoice::File { path, .. },
            ..
        } = &self.variant
        {
            if !path.exists() {
                return Err(Error::Config(format!("compilation file {} not found", path.display())));
            }
        }
        Ok(())
    }
}

/// Wall clock; reads zero where the platform has none.
struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    fn start() -> Self {
        Self(
            #[cfg(not(target_arch = "wasm32"))]
            std::time::Instant::now(),
        )
    }

    fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.0.elapsed().as_secs_f64();
        #[cfg(target_arch = "wasm32")]
        0.0
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Logical circuit and decoder of a variant.
pub fn logical_circuit(v: &Variant) -> Result<(Circuit, ShotDecoder, Vec<usize>)> {
    match v {
        Variant::Direct => Ok((
            trotter::physical_trotter_circuit()?,
            ShotDecoder::direct((0..gse::N).collect()),
            vec![],
        )),
        Variant::Clinr { resource, plan } => {
            let spec = block_resource()?;
            let plan = plan.resolve(&spec)?;
            let cc = clinr_circuit(&gse::prep_circuit()?, &spec, &plan, &resource.prep()?)?;
            Ok((cc.circuit, cc.decoder, cc.layout.ancillas))
        }
    }
}

fn calibration_patterns() -> Result<(UsagePattern, UsagePattern)> {
    let (direct, _, _) = logical_circuit(&Variant::Direct)?;
    let (wide, _, _) = logical_circuit(&Variant::Clinr {
        resource: ResourceChoice::default(),
        plan: PlanSpec::reference(CALIBRATION_PAIR),
    })?;
    Ok((
        UsagePattern::of(&lower_to_native(&direct)?),
        UsagePattern::of(&lower_to_native(&wide)?),
    ))
}

/// Synthetic table calibrated on the direct circuit (narrow) and the default CliNR circuit
/// (wide). Cached per `(seed, params)`.
pub fn calibrated_table(seed: u64, params: &SynthParams) -> Result<PairErrorTable> {
    static CACHE: Mutex<BTreeMap<String, PairErrorTable>> = Mutex::new(BTreeMap::new());
    let key = serde_json::to_string(&(seed, params))?;
    if let Some(t) = CACHE.lock().expect("cache lock").get(&key) {
        return Ok(t.clone());
    }
    let (narrow, wide) = calibration_patterns()?;
    let t = synth_pair_table(seed, params, &narrow, &wide)?;
    CACHE.lock().expect("cache lock").insert(key, t.clone());
    Ok(t)
}

/// Every stage of a built experiment.
#[derive(Clone, Debug)]
pub struct BuiltExperiment {
    pub logical: Circuit,
    pub native: Circuit,
    pub layered: LayeredCircuit,
    pub mapping: QubitMapping,
    pub noisy: Circuit,
    pub decoder: ShotDecoder,
    pub ancillas: Vec<usize>,
    pub counts: NativeCounts,
    /// Idle-noise instructions on ancilla qubits.
    pub ancilla_idle_noise: usize,
}

pub fn build(cfg: &ExperimentConfig) -> Result<BuiltExperiment> {
    cfg.validate()?;
    let (logical, decoder, ancillas) = logical_circuit(&cfg.variant)?;
    let native = lower_to_native(&logical)?;
    let counts = NativeCounts::of(&native);
    let layered = schedule_with(&native, cfg.schedule);
    let (mapping, noisy, idle_on) = match &cfg.noise {
        NoiseSpec::Noiseless => (QubitMapping::identity(native.n_qubits), layered.flatten(), false),
        NoiseSpec::Depolarizing { p1q } => (
            QubitMapping::identity(native.n_qubits),
            attach_depolarizing(&layered.flatten(), *p1q),
            false,
        ),
        NoiseSpec::Tempo1 { model, table, mapping } => {
            let mut m = model.clone();
            match table {
                TableSource::Synthetic { seed, params } => m.pair_table = Some(calibrated_table(*seed, params)?),
                TableSource::Csv { path } => {
                    m.pair_table = Some(PairErrorTable::read_csv(std::fs::File::open(path)?)?)
                }
                TableSource::Model => {}
            }
            let map = match (mapping, &m.pair_table) {
                (MappingPolicy::Optimized, Some(t)) => optimize_mapping(&native, t)?,
                _ => QubitMapping::identity(native.n_qubits),
            };
            let noisy = attach_noise(&layered, &m, &map)?;
            let idle_on = m.channels.idle && m.scale > 0.0;
            (map, noisy, idle_on)
        }
    };
    let ancilla_idle_noise = if idle_on {
        layered
            .idle_sites()
            .iter()
            .filter(|(_, q)| ancillas.contains(q))
            .count()
    } else {
        0
    };
    Ok(BuiltExperiment {
        logical,
        native,
        layered,
        mapping,
        noisy,
        decoder,
        ancillas,
        counts,
        ancilla_idle_noise,
    })
}

/// Width and cost of the executed circuit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceSummary {
    pub qubits: usize,
    pub zz: usize,
    pub gates: usize,
    pub depth: usize,
    pub duration_s: f64,
    pub ancilla_idle_noise: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub name: String,
    pub fingerprint: String,
    pub shots: usize,
    pub seed: u64,
    /// Shots passing verification.
    pub accepted: u64,
    pub acceptance_rate: f64,
    /// Per readout (checks, then cat flags), shots failing it.
    pub check_rejections: Vec<u64>,
    /// Accepted shots with odd sector parity.
    pub rejected_parity_count: u64,
    /// Even-occupation counts keyed `"110"`.
    pub counts: BTreeMap<String, u64>,
    /// `None` when no shot survived.
    pub metrics: Option<Metrics>,
    pub resources: ResourceSummary,
    pub wall_seconds: f64,
}

pub fn run_built(cfg: &ExperimentConfig, b: &BuiltExperiment) -> Result<ExperimentRecord> {
    let start = Stopwatch::start();
    let batch = run_batch(&b.noisy, cfg.shots, cfg.seed)?;
    let ps = b.decoder.postselect(&batch);
    let occ = OccupationCounts::from_outputs(&ps.counts)?;
    let m = match metrics(&occ) {
        Ok(m) => Some(m),
        Err(Error::EmptyCounts) => None,
        Err(e) => return Err(e),
    };
    Ok(ExperimentRecord {
        name: cfg.name.clone(),
        fingerprint: cfg.fingerprint(),
        shots: cfg.shots,
        seed: cfg.seed,
        accepted: ps.accepted,
        acceptance_rate: ps.acceptance_rate(),
        check_rejections: ps.check_rejections,
        rejected_parity_count: occ.odd,
        counts: occ.to_map(),
        metrics: m,
        resources: ResourceSummary {
            qubits: b.native.n_qubits,
            zz: b.counts.zz,
            gates: b.counts.gates,
            depth: b.layered.depth(),
            duration_s: b.layered.total_duration(),
            ancilla_idle_noise: b.ancilla_idle_noise,
        },
        wall_seconds: start.seconds(),
    })
}

/// Full pipeline; deterministic per config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    let start = Stopwatch::start();
    let b = build(cfg)?;
    let mut r = run_built(cfg, &b)?;
    r.wall_seconds = start.seconds();
    Ok(r)
}
