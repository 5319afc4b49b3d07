//! Training-set export for stabilizer-pair selection under the symmetric depolarizing model.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::experiment::{
    block_resource, default_compilations, run_experiment, ExperimentConfig, NoiseSpec, PlanSpec, ResourceChoice,
    Variant, DEFAULT_SCHEDULE, DEFAULT_SEARCH_ITERS, DEFAULT_SEARCH_SEED,
};
use crate::circuit::{Circuit, Gate};
use crate::clinr::Schedule;
use crate::error::{Error, Result};
use crate::graph::{search_compilations, GraphCompilation};
use crate::pauli::PauliString;

/// Two-qubit depolarizing strength relative to `p1q`.
pub const TWO_QUBIT_FACTOR: f64 = 10.0;

/// Depolarizing `p1q` after each physical single-qubit gate, two-qubit depolarizing
/// `10 p1q` after each two-qubit gate, record flip `p1q` after each measurement. No idle noise.
pub fn attach_depolarizing(c: &Circuit, p1q: f64) -> Circuit {
    let mut out = Circuit::new(c.n_qubits);
    out.n_records = c.n_records;
    out.clifford = c.clifford;
    for g in &c.ops {
        out.ops.push(g.clone());
        if p1q == 0.0 || g.is_noise() || g.is_virtual() {
            continue;
        }
        match *g {
            Gate::MeasureZ { record, .. } => out.ops.push(Gate::FlipRecord { record, p: p1q }),
            Gate::Reset { .. } | Gate::Barrier { .. } => {}
            _ => {
                let qs = g.qubits();
                if qs.len() == 2 {
                    out.ops.push(Gate::Depolarize2 {
                        a: qs[0],
                        b: qs[1],
                        p: TWO_QUBIT_FACTOR * p1q,
                    });
                } else {
                    out.ops.push(Gate::Depolarize1 { q: qs[0], p: p1q });
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetSpec {
    pub graphs: usize,
    pub pairs_per_graph: usize,
    /// Stabilizers of weight strictly below this are eligible.
    pub weight_cap: usize,
    /// Operating point of `p1q`.
    pub noise_level: f64,
    /// Relative half-width of the uniform band around the operating point.
    pub noise_band: f64,
    pub shots: usize,
    pub seed: u64,
    pub search_iters: usize,
    pub search_seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            graphs: 10,
            pairs_per_graph: 200,
            weight_cap: 8,
            noise_level: 1e-3,
            noise_band: 0.1,
            shots: 10_000,
            seed: 0,
            search_iters: DEFAULT_SEARCH_ITERS,
            search_seed: DEFAULT_SEARCH_SEED,
        }
    }
}

impl DatasetSpec {
    pub fn row_count(&self) -> usize {
        self.graphs * self.pairs_per_graph
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub graph_id: usize,
    /// 144 characters, row-major 12x12 adjacency.
    pub adjacency: String,
    /// 24 characters, `x_0..x_11` then `z_0..z_11`.
    pub pauli1: String,
    pub pauli2: String,
    /// Sparse text with full-layout indices and sign.
    pub pauli1_text: String,
    pub pauli2_text: String,
    pub noise_level: f64,
    /// `P(000) + P(101)` over accepted even shots; empty when nothing was accepted.
    pub p_fail: Option<f64>,
    pub acceptance_rate: f64,
    pub shots: usize,
    pub seed: u64,
}

pub fn bits_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
}

/// Decodes a 24-character `x|z` string back into an unsigned Pauli.
pub fn pauli_from_bits(s: &str) -> Result<PauliString> {
    let b: Vec<bool> = s.chars().map(|c| c == '1').collect();
    if b.len() % 2 != 0 || s.chars().any(|c| c != '0' && c != '1') {
        return Err(Error::PauliParse {
            text: s.into(),
            reason: "expected an even number of 0/1 characters".into(),
        });
    }
    let n = b.len() / 2;
    let letters: Vec<_> = (0..n)
        .map(|q| crate::pauli::Letter::from_bits(b[q], b[n + q]))
        .collect();
    Ok(PauliString::from_letters(&letters))
}

/// Nonidentity resource stabilizers with weight below `cap`, signed.
pub fn eligible_stabilizers(cap: usize) -> Result<Vec<PauliString>> {
    Ok(block_resource()?
        .enumerate_stabilizers()
        .into_iter()
        .filter(|p| p.weight() < cap)
        .collect())
}

/// `k` distinct unordered index pairs over `m` items, uniform without replacement.
pub fn sample_pairs(m: usize, k: usize, rng: &mut impl Rng) -> Result<Vec<(usize, usize)>> {
    let total = m * m.saturating_sub(1) / 2;
    if k > total {
        return Err(Error::Config(format!("{k} pairs requested, {total} available")));
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let a = rng.gen_range(0..m);
        let b = rng.gen_range(0..m);
        if a == b {
            continue;
        }
        let p = (a.min(b), a.max(b));
        if seen.insert(p) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Rejects a pair list containing the same unordered pair twice.
pub fn check_unique_pairs(pairs: &[(PauliString, PauliString)]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (a, b) in pairs {
        let (a, b) = (a.to_string(), b.to_string());
        let key = if a <= b { (a, b) } else { (b, a) };
        if !seen.insert(key.clone()) {
            return Err(Error::DuplicatePair(format!("{} / {}", key.0, key.1)));
        }
    }
    Ok(())
}

/// Graph pool of the dataset: the first `graphs` entries of the ranked search result.
pub fn graph_pool(spec: &DatasetSpec) -> Result<Vec<GraphCompilation>> {
    let pool = if spec.search_iters == DEFAULT_SEARCH_ITERS && spec.search_seed == DEFAULT_SEARCH_SEED {
        default_compilations()?
    } else {
        search_compilations(
            &block_resource()?.tableau()?,
            spec.search_iters,
            spec.search_seed,
            spec.graphs,
        )?
    };
    if pool.len() < spec.graphs {
        return Err(Error::Config(format!(
            "search found {} graphs, {} requested",
            pool.len(),
            spec.graphs
        )));
    }
    Ok(pool.into_iter().take(spec.graphs).collect())
}

/// Per-row experiment configurations, in row order.
pub fn dataset_configs(spec: &DatasetSpec, pool: &[GraphCompilation]) -> Result<Vec<(usize, ExperimentConfig)>> {
    let stabs = eligible_stabilizers(spec.weight_cap)?;
    let n = block_resource()?.n;
    let mut out = vec![];
    for (g, comp) in pool.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(g as u64);
        let idx = sample_pairs(stabs.len(), spec.pairs_per_graph, &mut rng)?;
        let mut pairs: Vec<(PauliString, PauliString)> = idx
            .iter()
            .map(|&(a, b)| (stabs[a].clone(), stabs[b].clone()))
            .collect();
        // random role assignment within the pair
        for p in pairs.iter_mut() {
            if rng.gen::<bool>() {
                std::mem::swap(&mut p.0, &mut p.1);
            }
        }
        check_unique_pairs(&pairs)?;
        for (k, (a, b)) in pairs.iter().enumerate() {
            let level = spec.noise_level * (1.0 + spec.noise_band * rng.gen_range(-1.0..=1.0));
            let seed = rng.gen::<u64>();
            let cfg = ExperimentConfig {
                name: format!("g{g}-p{k}"),
                variant: Variant::Clinr {
                    resource: ResourceChoice::Inline {
                        compilation: comp.clone(),
                    },
                    plan: PlanSpec::checks(&[(&a.to_sparse(n), Schedule::Mcm), (&b.to_sparse(n), Schedule::Ecm)]),
                },
                noise: NoiseSpec::Depolarizing { p1q: level },
                schedule: DEFAULT_SCHEDULE,
                shots: spec.shots,
                seed,
            };
            out.push((g, cfg));
        }
    }
    Ok(out)
}

fn row_of(g: usize, comp: &GraphCompilation, cfg: &ExperimentConfig) -> Result<DatasetRow> {
    let spec = block_resource()?;
    let Variant::Clinr { plan, .. } = &cfg.variant else {
        unreachable!("dataset rows are CliNR runs")
    };
    let NoiseSpec::Depolarizing { p1q } = cfg.noise else {
        unreachable!("dataset rows use the depolarizing model")
    };
    let resolved = plan.resolve(&spec)?;
    let (a, b) = (&resolved.checks[0].stabilizer, &resolved.checks[1].stabilizer);
    let rec = run_experiment(cfg)?;
    Ok(DatasetRow {
        graph_id: g,
        adjacency: bits_string(&comp.graph.adjacency_bits()),
        pauli1: bits_string(&a.to_xz_bits()),
        pauli2: bits_string(&b.to_xz_bits()),
        pauli1_text: a.to_sparse(spec.n),
        pauli2_text: b.to_sparse(spec.n),
        noise_level: p1q,
        p_fail: rec.metrics.map(|m| m.incorrect_component),
        acceptance_rate: rec.acceptance_rate,
        shots: cfg.shots,
        seed: cfg.seed,
    })
}

/// Simulates every row; order follows `dataset_configs`.
pub fn generate_dataset(spec: &DatasetSpec) -> Result<(Vec<GraphCompilation>, Vec<DatasetRow>)> {
    let pool = graph_pool(spec)?;
    let cfgs = dataset_configs(spec, &pool)?;
    #[cfg(feature = "parallel")]
    let rows = {
        use rayon::prelude::*;
        cfgs.par_iter()
            .map(|(g, c)| row_of(*g, &pool[*g], c))
            .collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let rows = cfgs
        .iter()
        .map(|(g, c)| row_of(*g, &pool[*g], c))
        .collect::<Result<Vec<_>>>()?;
    Ok((pool, rows))
}

pub fn write_rows_csv(rows: &[DatasetRow], w: impl Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_rows_csv(r: impl std::io::Read) -> Result<Vec<DatasetRow>> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize().map(|x| x.map_err(Error::from)).collect()
}

#[derive(Clone, Debug, Serialize)]
struct Column {
    name: &'static str,
    dtype: &'static str,
    description: &'static str,
}

/// JSON sidecar describing the CSV columns and the generation parameters.
pub fn schema_json(spec: &DatasetSpec, rows: usize) -> serde_json::Value {
    let columns = [
        Column {
            name: "graph_id",
            dtype: "int",
            description: "index into graphs.json",
        },
        Column {
            name: "adjacency",
            dtype: "bits[144]",
            description: "row-major 12x12 adjacency of the resource graph compilation",
        },
        Column {
            name: "pauli1",
            dtype: "bits[24]",
            description: "mid-circuit check: x bits of qubits 0..11 then z bits",
        },
        Column {
            name: "pauli2",
            dtype: "bits[24]",
            description: "end-of-circuit check: x bits of qubits 0..11 then z bits",
        },
        Column {
            name: "pauli1_text",
            dtype: "string",
            description: "signed sparse form, qubits 6..17",
        },
        Column {
            name: "pauli2_text",
            dtype: "string",
            description: "signed sparse form, qubits 6..17",
        },
        Column {
            name: "noise_level",
            dtype: "float",
            description: "p1q; two-qubit depolarizing 10*p1q; readout flip p1q",
        },
        Column {
            name: "p_fail",
            dtype: "float|empty",
            description: "P(000)+P(101) over accepted even-parity shots",
        },
        Column {
            name: "acceptance_rate",
            dtype: "float",
            description: "accepted / shots",
        },
        Column {
            name: "shots",
            dtype: "int",
            description: "shots simulated",
        },
        Column {
            name: "seed",
            dtype: "u64",
            description: "sampler seed of the row",
        },
    ];
    serde_json::json!({
        "format": "clinr-dataset",
        "version": 1,
        "rows": rows,
        "columns": columns,
        "generation": spec,
        "pair_rule": "unordered pairs of distinct signed resource stabilizers with weight < weight_cap, uniform without replacement per graph; role (mid-circuit vs end) assigned by a fair coin",
    })
}

/// Writes `dataset.csv`, `dataset.schema.json` and `graphs.json` into `dir`.
pub fn export_dataset(spec: &DatasetSpec, dir: &Path) -> Result<Vec<DatasetRow>> {
    std::fs::create_dir_all(dir)?;
    let (pool, rows) = generate_dataset(spec)?;
    write_rows_csv(&rows, std::fs::File::create(dir.join("dataset.csv"))?)?;
    let schema = schema_json(spec, rows.len());
    std::fs::write(dir.join("dataset.schema.json"), serde_json::to_string_pretty(&schema)?)?;
    std::fs::write(dir.join("graphs.json"), serde_json::to_string_pretty(&pool)?)?;
    Ok(rows)
}
