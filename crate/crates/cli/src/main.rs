use std::error::Error;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use clinr_lab::circuit::{export_stim, lower_to_native, parse_stim, Circuit, NativeCounts};
use clinr_lab::clinr::{ResourcePrep, REFERENCE_PAIRS};
use clinr_lab::graph::search_compilations;
use clinr_lab::harness::report::write_report_csv;
use clinr_lab::harness::{
    block_resource, build, export_dataset, run_all, run_sweep, DatasetSpec, ExperimentConfig, RunDir, SweepKind,
    SweepPoint, SweepSpec,
};
use clinr_lab::trotter;

type Res<T> = std::result::Result<T, Box<dyn Error>>;

/// Thread-count variable; unset means one worker per core.
const THREADS_ENV: &str = "CLINR_THREADS";

#[derive(Parser)]
#[command(name = "clinr", version, about = "CliNR stabilizer laboratory")]
struct Cli {
    /// Run directory; every command writes its outputs and a manifest here.
    #[arg(long, short, global = true, default_value = "run")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Physical Trotter circuit of the encoded block.
    Synth {
        /// Emit the trapped-ion native circuit instead of the logical one.
        #[arg(long)]
        native: bool,
    },
    /// Bell+Clifford resource state: generators, stabilizer counts, naive preparation.
    Resource {
        /// Also write every signed nonidentity stabilizer to `stabilizers.csv`.
        #[arg(long)]
        enumerate: bool,
    },
    /// Local-complementation search for cheap resource preparations.
    CompileGraph {
        #[arg(long, default_value_t = 2000)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        keep: usize,
    },
    /// One experiment (or a JSON array of them) from a config file.
    Run(ConfigArg),
    /// A sweep from a spec file, or a built-in sweep.
    Sweep {
        #[arg(long, conflicts_with = "kind")]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: Option<BuiltinSweep>,
        #[arg(long, default_value_t = 500_000)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Training dataset for the stabilizer-selection surrogate.
    Dataset {
        /// JSON dataset spec; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        graphs: Option<usize>,
        #[arg(long)]
        pairs_per_graph: Option<usize>,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        noise_level: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Rebuilds `report.csv` from a sweep's `points.json`.
    Report {
        #[arg(long)]
        points: PathBuf,
    },
    /// Lowers a Stim-format circuit to trapped-ion natives.
    Lower {
        #[arg(long)]
        input: PathBuf,
    },
    /// Writes every compilation stage of an experiment as Stim text.
    Export(ConfigArg),
}

#[derive(Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuiltinSweep {
    Pairs,
    Schedules,
    Random,
}

fn threads() -> Res<usize> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v.parse()?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(rayon::current_num_threads())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Res<T> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?)
}

fn read_configs(path: &PathBuf) -> Res<Vec<ExperimentConfig>> {
    let v: serde_json::Value = read_json(path)?;
    Ok(match v {
        serde_json::Value::Array(_) => serde_json::from_value(v)?,
        _ => vec![serde_json::from_value(v)?],
    })
}

#[derive(Serialize)]
struct CircuitSummary {
    qubits: usize,
    records: usize,
    ops: usize,
    native: NativeCounts,
}

fn summary(c: &Circuit) -> Res<CircuitSummary> {
    Ok(CircuitSummary {
        qubits: c.n_qubits,
        records: c.n_records,
        ops: c.ops.len(),
        native: NativeCounts::of(&lower_to_native(c)?),
    })
}

fn print_points(points: &[SweepPoint]) {
    println!("{:<8} {:>2} {:>9} {:>9} {:>9} {:>9} {:>6}", "label", "r", "accept", "tvd", "tvd_se", "incorrect", "idle");
    for p in points {
        let r = &p.record;
        let (t, se, inc) = r
            .metrics
            .map_or((f64::NAN, f64::NAN, f64::NAN), |m| (m.tvd, m.tvd_se, m.incorrect_component));
        println!(
            "{:<8} {:>2} {:>9.4} {:>9.5} {:>9.5} {:>9.5} {:>6}",
            p.label, p.r, r.acceptance_rate, t, se, inc, r.resources.ancilla_idle_noise
        );
    }
}

fn main() {
    if let Err(e) = real_main() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn real_main() -> Res<()> {
    let cli = Cli::parse();
    let threads = threads()?;
    let command = std::env::args().collect::<Vec<_>>().join(" ");
    let mut dir = RunDir::create(&cli.out)?;
    let mut seed = 0;
    let mut configs: Vec<ExperimentConfig> = vec![];

    match cli.cmd {
        Cmd::Synth { native } => {
            let logical = trotter::physical_trotter_circuit()?;
            let c = if native { lower_to_native(&logical)? } else { logical.clone() };
            dir.write_bytes("trotter.stim", export_stim(&c)?.as_bytes())?;
            dir.write_json("summary.json", &summary(&logical)?)?;
            println!("{}", serde_json::to_string_pretty(&summary(&logical)?)?);
        }
        Cmd::Resource { enumerate } => {
            let spec = block_resource()?;
            let naive = spec.naive_circuit();
            let pairs: Vec<_> = REFERENCE_PAIRS
                .iter()
                .map(|(l, a, b)| json!({"label": l, "first": a, "second": b}))
                .collect();
            let info = json!({
                "n": spec.n,
                "generators": spec.generators.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                "nonidentity_stabilizers": spec.nonidentity_stabilizer_count() as u64,
                "unordered_pairs": spec.stabilizer_pair_count() as u64,
                "naive": summary(&naive)?,
                "reference_pairs": pairs,
            });
            dir.write_bytes("naive.stim", export_stim(&naive)?.as_bytes())?;
            dir.write_json("resource.json", &info)?;
            if enumerate {
                let mut w = csv::Writer::from_path(dir.file("stabilizers.csv"))?;
                w.write_record(["index", "stabilizer", "weight"])?;
                for (i, s) in spec.enumerate_stabilizers().iter().enumerate() {
                    w.write_record([i.to_string(), s.to_sparse(spec.n), s.weight().to_string()])?;
                }
                w.flush()?;
                dir.track("stabilizers.csv");
            }
            println!("{}", serde_json::to_string_pretty(&info)?);
        }
        Cmd::CompileGraph { iters, seed: s, keep } => {
            seed = s;
            let spec = block_resource()?;
            let naive = NativeCounts::of(&lower_to_native(&ResourcePrep::Naive.circuit(&spec))?);
            let found = search_compilations(&spec.tableau()?, iters, s, keep)?;
            for gc in &found {
                if !gc.tableau()?.same_state(&spec.tableau()?) {
                    return Err("compilation does not reproduce the resource state".into());
                }
            }
            dir.write_json("compilations.json", &found)?;
            let rows: Vec<_> = found.iter().map(|g| g.cost).collect();
            let info = json!({"naive": naive, "found": found.len(), "costs": rows});
            dir.write_json("summary.json", &info)?;
            println!("naive zz {} gates {}", naive.zz, naive.gates);
            for (i, c) in rows.iter().enumerate().take(10) {
                println!("#{i:<3} edges {:>3} zz {:>3} gates {:>4}", c.edges, c.zz, c.gates);
            }
        }
        Cmd::Run(a) => {
            configs = read_configs(&a.config)?;
            for c in &configs {
                c.validate()?;
            }
            seed = configs.first().map_or(0, |c| c.seed);
            let recs = run_all(&configs)?;
            if recs.len() == 1 {
                dir.write_json("record.json", &recs[0])?;
            } else {
                dir.write_json("records.json", &recs)?;
            }
            println!("{}", serde_json::to_string_pretty(&recs)?);
        }
        Cmd::Sweep {
            config,
            kind,
            shots,
            seed: s,
        } => {
            let spec: SweepSpec = match (config, kind) {
                (Some(p), _) => read_json(&p)?,
                (None, Some(k)) => SweepSpec {
                    sweep: match k {
                        BuiltinSweep::Pairs => SweepKind::Pairs,
                        BuiltinSweep::Schedules => SweepKind::Schedules,
                        BuiltinSweep::Random => serde_json::from_value(json!({"kind": "random"}))?,
                    },
                    shots,
                    seed: s,
                    base: None,
                },
                (None, None) => return Err("sweep needs --config or --kind".into()),
            };
            seed = spec.seed;
            configs = clinr_lab::harness::sweep::sweep_configs(&spec)?
                .into_iter()
                .map(|(_, _, c)| c)
                .collect();
            let points = run_sweep(&spec)?;
            dir.write_json("sweep.json", &spec)?;
            dir.write_json("points.json", &points)?;
            let mut buf = vec![];
            write_report_csv(&points, &mut buf)?;
            dir.write_bytes("report.csv", &buf)?;
            print_points(&points);
        }
        Cmd::Dataset {
            config,
            graphs,
            pairs_per_graph,
            shots,
            noise_level,
            seed: s,
        } => {
            let mut spec: DatasetSpec = match config {
                Some(p) => read_json(&p)?,
                None => DatasetSpec::default(),
            };
            spec.graphs = graphs.unwrap_or(spec.graphs);
            spec.pairs_per_graph = pairs_per_graph.unwrap_or(spec.pairs_per_graph);
            spec.shots = shots.unwrap_or(spec.shots);
            spec.noise_level = noise_level.unwrap_or(spec.noise_level);
            spec.seed = s.unwrap_or(spec.seed);
            seed = spec.seed;
            let rows = export_dataset(&spec, &dir.path)?;
            for f in ["dataset.csv", "dataset.schema.json", "graphs.json"] {
                dir.track(f);
            }
            println!("{} rows in {}", rows.len(), dir.file("dataset.csv").display());
        }
        Cmd::Report { points } => {
            let pts: Vec<SweepPoint> = read_json(&points)?;
            let mut buf = vec![];
            write_report_csv(&pts, &mut buf)?;
            dir.write_bytes("report.csv", &buf)?;
            print_points(&pts);
        }
        Cmd::Lower { input } => {
            let c = parse_stim(&std::fs::read_to_string(&input)?)?;
            let n = lower_to_native(&c)?;
            dir.write_bytes("native.stim", export_stim(&n)?.as_bytes())?;
            let counts = NativeCounts::of(&n);
            dir.write_json("counts.json", &counts)?;
            println!("{}", serde_json::to_string_pretty(&counts)?);
        }
        Cmd::Export(a) => {
            configs = read_configs(&a.config)?;
            seed = configs.first().map_or(0, |c| c.seed);
            for (i, c) in configs.iter().enumerate() {
                let b = build(c)?;
                let stem = if configs.len() == 1 { String::new() } else { format!("{i}-") };
                dir.write_bytes(&format!("{stem}logical.stim"), export_stim(&b.logical)?.as_bytes())?;
                dir.write_bytes(&format!("{stem}native.stim"), export_stim(&b.native)?.as_bytes())?;
                dir.write_bytes(&format!("{stem}noisy.stim"), export_stim(&b.noisy)?.as_bytes())?;
                dir.write_json(&format!("{stem}mapping.json"), &b.mapping)?;
                println!(
                    "{}: {} qubits, {} zz, depth {}, ancilla idle noise {}",
                    c.name,
                    b.native.n_qubits,
                    b.counts.zz,
                    b.layered.depth(),
                    b.ancilla_idle_noise
                );
            }
        }
    }
    let m = dir.write_manifest(&command, seed, threads, &configs)?;
    eprintln!("{} files + manifest.json in {}", m.files.len(), dir.path.display());
    Ok(())
}
