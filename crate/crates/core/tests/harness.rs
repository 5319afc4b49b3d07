use clinr_lab::clinr::Schedule;
use clinr_lab::harness::dataset::{check_unique_pairs, read_rows_csv, write_rows_csv};
use clinr_lab::harness::metrics::{tvd_bootstrap_se, OccupationCounts};
use clinr_lab::harness::reference::FULL_SCALE_ROWS;
use clinr_lab::harness::report::REPORT_COLUMNS;
use clinr_lab::harness::sweep::SINGLE_CHECK;
use clinr_lab::harness::{
    bias_significance, generate_dataset, metrics, run_experiment, run_sweep, write_report_csv, DatasetSpec,
    ExperimentConfig, PlanSpec, SweepKind, SweepSpec,
};
use clinr_lab::pauli::PauliString;
use clinr_lab::Error;
use proptest::prelude::*;

fn occ(n000: u64, n110: u64, n101: u64, n011: u64) -> OccupationCounts {
    OccupationCounts {
        even: [n000, n110, n101, n011],
        odd: 0,
    }
}

proptest! {
    #[test]
    fn tvd_splits_into_incorrect_and_bias(a in 0u64..2000, b in 0u64..200_000, c in 0u64..2000, d in 0u64..200_000) {
        prop_assume!(a + b + c + d > 0);
        let m = metrics(&occ(a, b, c, d)).unwrap();
        prop_assert!(m.bias_component >= 0.0);
        prop_assert!(m.tvd + 1e-15 >= m.incorrect_component);
        prop_assert!((m.tvd - m.incorrect_component - m.bias_component).abs() < 1e-12);
        prop_assert!(m.tvd <= 1.0);
        prop_assert!((m.p110 + m.p011 + m.incorrect_component - 1.0).abs() < 1e-12);
    }

    #[test]
    fn balanced_outputs_carry_no_bias(a in 0u64..500, b in 1u64..100_000, c in 0u64..500) {
        let m = metrics(&occ(a, b, c, b)).unwrap();
        prop_assert!(m.bias_component.abs() < 1e-12);
        prop_assert_eq!(m.bias_significance, 0.0);
    }
}

#[test]
fn empty_histogram_has_no_metrics() {
    assert!(matches!(metrics(&occ(0, 0, 0, 0)), Err(Error::EmptyCounts)));
    let odd_only = OccupationCounts {
        even: [0; 4],
        odd: 10,
    };
    assert!(matches!(metrics(&odd_only), Err(Error::EmptyCounts)));
}

#[test]
fn bias_significance_values() {
    assert!(bias_significance(51_000, 49_000).unwrap() > 0.999_999);
    assert_eq!(bias_significance(500, 500).unwrap(), 0.0);
    // 60 of 100: two-sided exact p-value 0.056887...
    let s = bias_significance(60, 40).unwrap();
    assert!((s - (1.0 - 0.056_887_933_640_980_79)).abs() < 1e-9, "{s}");
    assert_eq!(bias_significance(7, 3).unwrap(), bias_significance(3, 7).unwrap());
}

#[test]
fn bootstrap_se_is_seeded() {
    let c = occ(300, 49_000, 400, 50_300);
    assert_eq!(tvd_bootstrap_se(&c, 200, 1).unwrap(), tvd_bootstrap_se(&c, 200, 1).unwrap());
    assert!(tvd_bootstrap_se(&c, 200, 1).unwrap() > 0.0);
}

#[test]
fn more_checks_never_accept_more() {
    let shots = 100_000;
    let one = run_experiment(&ExperimentConfig::clinr(
        "one",
        PlanSpec::checks(&[(SINGLE_CHECK, Schedule::Mcm)]),
        shots,
        4,
    ))
    .unwrap();
    let pair = run_experiment(&ExperimentConfig::clinr("S1", PlanSpec::reference("S1"), shots, 4)).unwrap();
    let (a, b) = (one.acceptance_rate, pair.acceptance_rate);
    let se = ((a * (1.0 - a) + b * (1.0 - b)) / shots as f64).sqrt();
    assert!(b <= a + 3.0 * se, "{b} vs {a}");
    assert!(a < 1.0);
}

#[test]
fn reference_pair_s6_improves_on_direct() {
    let shots = 200_000;
    let direct = run_experiment(&ExperimentConfig::direct(shots, 40)).unwrap();
    let s6 = run_experiment(&ExperimentConfig::clinr("S6", PlanSpec::reference("S6"), shots, 41)).unwrap();
    assert!(s6.acceptance_rate > 0.8 && s6.acceptance_rate < 1.0, "{}", s6.acceptance_rate);
    let (d, s) = (direct.metrics.unwrap(), s6.metrics.unwrap());
    assert!(s.incorrect_component <= 0.8 * d.incorrect_component, "{s:?} vs {d:?}");
    assert!(s6.resources.qubits > direct.resources.qubits);
    assert!(s6.resources.zz > direct.resources.zz);
}

#[test]
fn report_csv_is_deterministic() {
    let spec = SweepSpec {
        sweep: SweepKind::Schedules,
        shots: 3000,
        seed: 2,
        base: None,
    };
    let pts = run_sweep(&spec).unwrap();
    let (mut a, mut b) = (vec![], vec![]);
    write_report_csv(&pts, &mut a).unwrap();
    write_report_csv(&run_sweep(&spec).unwrap(), &mut b).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header, REPORT_COLUMNS);
    let labels: Vec<&str> = pts.iter().map(|p| p.label.as_str()).collect();
    assert_eq!(labels, ["direct", "none", "mcm", "ecm", "1+1"]);
}

fn small_dataset(noise_level: f64) -> DatasetSpec {
    DatasetSpec {
        graphs: 2,
        pairs_per_graph: 4,
        shots: 500,
        noise_level,
        seed: 5,
        ..DatasetSpec::default()
    }
}

#[test]
fn dataset_is_deterministic_and_round_trips() {
    let spec = small_dataset(1e-3);
    let (pool, rows) = generate_dataset(&spec).unwrap();
    assert_eq!(pool.len(), 2);
    assert_eq!(rows.len(), spec.row_count());
    assert_eq!(generate_dataset(&spec).unwrap().1, rows);
    for r in &rows {
        assert_eq!(r.adjacency.len(), 144);
        assert_eq!(r.pauli1.len(), 24);
        assert_ne!(r.pauli1, r.pauli2);
        let bound = spec.noise_level * (1.0 + spec.noise_band);
        assert!(r.noise_level > 0.0 && r.noise_level <= bound);
    }
    let mut buf = vec![];
    write_rows_csv(&rows, &mut buf).unwrap();
    assert_eq!(read_rows_csv(&buf[..]).unwrap(), rows);
}

#[test]
fn noiseless_dataset_never_fails() {
    let (_, rows) = generate_dataset(&small_dataset(0.0)).unwrap();
    assert!(rows.iter().all(|r| r.p_fail == Some(0.0) && r.acceptance_rate == 1.0));
}

#[test]
fn duplicate_pairs_are_rejected() {
    let a: PauliString = "ZX".parse().unwrap();
    let b: PauliString = "XZ".parse().unwrap();
    let pairs = vec![(a.clone(), b.clone()), (b, a)];
    assert!(matches!(check_unique_pairs(&pairs), Err(Error::DuplicatePair(_))));
}

#[test]
fn dataset_sizes() {
    assert_eq!(FULL_SCALE_ROWS, 57_536);
    assert_eq!(DatasetSpec::default().row_count(), 2000);
}
