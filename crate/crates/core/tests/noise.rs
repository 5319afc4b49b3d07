use clinr_lab::circuit::{lower_to_native, schedule_layers, Gate, LayerKind};
use clinr_lab::harness::{build, calibrated_table, run_experiment, ExperimentConfig, NoiseSpec, PlanSpec, TableSource};
use clinr_lab::noise::{
    attach_noise, idle_dephasing_prob, optimize_mapping, usage_weighted_mean, NoiseModel, PairErrorTable,
    QubitMapping, SynthParams, DEFAULT_IONS, PPTT,
};
use clinr_lab::pauli::Letter;
use clinr_lab::trotter;

fn tempo1(scale: f64) -> NoiseSpec {
    NoiseSpec::Tempo1 {
        model: NoiseModel {
            scale,
            ..NoiseModel::default()
        },
        table: TableSource::default(),
        mapping: Default::default(),
    }
}

#[test]
fn noise_is_purely_additive() {
    for cfg in [
        ExperimentConfig::direct(1, 0),
        ExperimentConfig::clinr("S3", PlanSpec::reference("S3"), 1, 0),
    ] {
        let b = build(&cfg).unwrap();
        assert!(b.noisy.ops.len() > b.layered.flatten().ops.len());
        assert_eq!(b.noisy.without_noise(), b.layered.flatten());
    }
}

#[test]
fn zero_scale_emits_no_noise() {
    let b = build(&ExperimentConfig::direct(1, 0).with_noise(tempo1(0.0))).unwrap();
    assert!(b.noisy.ops.iter().all(|g| !g.is_noise()));
}

#[test]
fn every_zz_is_followed_by_half_its_pair_rate_on_both_operands() {
    let cfg = ExperimentConfig::direct(1, 0);
    let b = build(&cfg).unwrap();
    let table = calibrated_table(0, &SynthParams::default()).unwrap();
    let mut seen = 0;
    for (k, g) in b.noisy.ops.iter().enumerate() {
        if let Gate::Zz { a, b: bq, .. } = *g {
            let want = table.get(b.mapping.ions[a], b.mapping.ions[bq]) / 2.0;
            for (off, q) in [(1, a), (2, bq)] {
                match b.noisy.ops[k + off] {
                    Gate::PauliError { q: eq, pauli: Letter::Z, p } => {
                        assert_eq!(eq, q);
                        assert!((p - want).abs() < 1e-18);
                    }
                    ref other => panic!("{other:?} after {g:?}"),
                }
            }
            seen += 1;
        }
    }
    assert_eq!(seen, b.counts.zz);
}

#[test]
fn drb_41_pptt_gives_20_5e4_per_operand() {
    let mut c = clinr_lab::circuit::Circuit::new(2);
    c.cnot(0, 1);
    let low = lower_to_native(&c).unwrap();
    let m = NoiseModel::default().with_table(PairErrorTable::uniform(4, 41.0 * PPTT));
    let noisy = attach_noise(&schedule_layers(&low), &m, &QubitMapping::identity(2)).unwrap();
    let zz_errors: Vec<f64> = noisy
        .ops
        .iter()
        .filter_map(|g| match *g {
            Gate::PauliError { p, .. } if p > 1e-3 => Some(p),
            _ => None,
        })
        .collect();
    assert_eq!(zz_errors.len(), 2);
    assert!(zz_errors.iter().all(|p| (p - 20.5e-4).abs() < 1e-18));
}

#[test]
fn idle_errors_use_the_layer_duration() {
    let b = build(&ExperimentConfig::clinr("S6", PlanSpec::reference("S6"), 1, 0)).unwrap();
    let allowed: Vec<f64> = [LayerKind::Single, LayerKind::Two, LayerKind::Measure]
        .iter()
        .map(|&k| idle_dephasing_prob(NoiseModel::default().durations.of(k), 1.5))
        .collect();
    assert!((allowed[1] - 3.1656641e-4).abs() < 1e-11);
    let idle_sites = b.layered.idle_sites().len();
    let mut idle_errors = 0;
    for g in &b.noisy.ops {
        if let Gate::PauliError { p, .. } = *g {
            if allowed.iter().any(|a| (a - p).abs() < 1e-18) {
                idle_errors += 1;
            }
        }
    }
    assert_eq!(idle_errors, idle_sites);
}

#[test]
fn synthetic_table_is_calibrated() {
    let t = calibrated_table(0, &SynthParams::default()).unwrap();
    assert_eq!(t.n_ions(), DEFAULT_IONS);
    assert_eq!(t.len(), 780);
    assert!(t.pairs().all(|(_, _, p)| p > 0.0 && p < 0.05));

    let direct = lower_to_native(&trotter::physical_trotter_circuit().unwrap()).unwrap();
    let b_direct = build(&ExperimentConfig::direct(1, 0)).unwrap();
    let narrow = usage_weighted_mean(&b_direct.native.interactions(), &t, &b_direct.mapping) / PPTT;
    assert!((35.0..=47.0).contains(&narrow), "{narrow}");
    assert_eq!(b_direct.native.n_qubits, direct.n_qubits);

    let b_wide = build(&ExperimentConfig::clinr("S6", PlanSpec::reference("S6"), 1, 0)).unwrap();
    let wide = usage_weighted_mean(&b_wide.native.interactions(), &t, &b_wide.mapping) / PPTT;
    assert!(wide > narrow, "wide {wide} narrow {narrow}");
}

#[test]
fn optimized_mapping_never_loses_to_identity() {
    let t = calibrated_table(0, &SynthParams::default()).unwrap();
    for cfg in [
        ExperimentConfig::direct(1, 0),
        ExperimentConfig::clinr("S1", PlanSpec::reference("S1"), 1, 0),
    ] {
        let native = build(&cfg).unwrap().native;
        let inter = native.interactions();
        let opt = optimize_mapping(&native, &t).unwrap();
        let id = QubitMapping::identity(native.n_qubits);
        assert!(usage_weighted_mean(&inter, &t, &opt) <= usage_weighted_mean(&inter, &t, &id));
        let mut ions = opt.ions.clone();
        ions.sort_unstable();
        ions.dedup();
        assert_eq!(ions.len(), native.n_qubits);
    }
}

#[test]
fn chain_too_small_is_an_error() {
    let t = PairErrorTable::uniform(4, 0.001);
    let b = build(&ExperimentConfig::direct(1, 0)).unwrap();
    assert!(optimize_mapping(&b.native, &t).is_err());
}

#[test]
fn incorrect_outcomes_grow_with_the_noise_scale() {
    let shots = 100_000;
    let (mut last, mut last_se) = (0.0, 0.0);
    for scale in [0.25, 0.5, 1.0] {
        let rec = run_experiment(&ExperimentConfig::direct(shots, 21).with_noise(tempo1(scale))).unwrap();
        let p = rec.metrics.unwrap().incorrect_component;
        let se = (p * (1.0 - p) / rec.accepted as f64).sqrt();
        let combined = (se * se + last_se * last_se).sqrt();
        assert!(p > last + 2.0 * combined, "scale {scale}: {p} after {last}");
        (last, last_se) = (p, se);
    }
}
