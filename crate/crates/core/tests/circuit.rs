mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use clinr_lab::circuit::{
    export_stim, lower_to_native, parse_stim, schedule_layers, schedule_with, Circuit, Gate, LayerKind, NativeCounts,
    SchedulePolicy,
};
use clinr_lab::pauli::Letter;
use clinr_lab::sim::{oracle_state, run_batch};
use clinr_lab::{trotter, Error};
use common::random_clifford;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Columns of the unitary of a measurement-free circuit.
fn unitary(c: &Circuit) -> Vec<Vec<Complex64>> {
    (0..1usize << c.n_qubits)
        .map(|k| {
            let mut prep = Circuit::new(c.n_qubits);
            for q in 0..c.n_qubits {
                if k >> q & 1 == 1 {
                    prep.push(Gate::X { q });
                }
            }
            prep.append(c);
            oracle_state(&prep, &[]).unwrap().0.amplitudes().to_vec()
        })
        .collect()
}

/// `a = e^{i phi} b` for one phase `phi` across every column.
fn equal_up_to_global_phase(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> bool {
    let mut phase: Option<Complex64> = None;
    for (ca, cb) in a.iter().zip(b) {
        for (x, y) in ca.iter().zip(cb) {
            if y.norm() > 1e-9 {
                let r = x / y;
                match phase {
                    None => phase = Some(r),
                    Some(p) if (p - r).norm() > 1e-9 => return false,
                    _ => {}
                }
            } else if x.norm() > 1e-9 {
                return false;
            }
        }
    }
    phase.is_some_and(|p| (p.norm() - 1.0).abs() < 1e-9)
}

fn one_gate(n: usize, g: Gate) -> Circuit {
    let mut c = Circuit::new(n);
    c.push(g);
    c
}

#[test]
fn every_lowering_rule_matches_the_oracle() {
    let mut gates = vec![
        Gate::H { q: 0 },
        Gate::S { q: 0 },
        Gate::SDag { q: 0 },
        Gate::X { q: 0 },
        Gate::Y { q: 0 },
        Gate::Z { q: 0 },
        Gate::Cnot { control: 0, target: 1 },
        Gate::Cnot { control: 1, target: 0 },
        Gate::Cz { a: 0, b: 1 },
    ];
    for k in -4..=4 {
        let angle = k as f64 * FRAC_PI_2;
        gates.push(Gate::Rx { q: 1, angle });
        gates.push(Gate::Rz { q: 1, angle });
    }
    for g in gates {
        let c = one_gate(2, g.clone());
        let low = lower_to_native(&c).unwrap();
        assert!(low.ops.iter().all(Gate::is_native), "{g:?}");
        assert!(equal_up_to_global_phase(&unitary(&c), &unitary(&low)), "{g:?}");
    }
}

#[test]
fn two_qubit_gates_lower_to_one_zz() {
    for g in [Gate::Cnot { control: 0, target: 1 }, Gate::Cz { a: 1, b: 0 }] {
        let low = lower_to_native(&one_gate(2, g)).unwrap();
        let zz: Vec<_> = low.ops.iter().filter(|g| matches!(g, Gate::Zz { .. })).collect();
        assert_eq!(zz.len(), 1);
        let Gate::Zz { angle, .. } = zz[0] else { unreachable!() };
        assert!((angle.abs() - PI / 4.0).abs() < 1e-12);
    }
}

#[test]
fn random_three_qubit_cliffords_survive_lowering() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for _ in 0..50 {
        let c = random_clifford(3, 20, &mut rng);
        let low = lower_to_native(&c).unwrap();
        assert!(equal_up_to_global_phase(&unitary(&c), &unitary(&low)));
        assert_eq!(NativeCounts::of(&low).zz, c.two_qubit_count());
    }
}

#[test]
fn relowering_is_stable() {
    let c = trotter::physical_trotter_circuit().unwrap();
    let a = lower_to_native(&c).unwrap();
    let b = lower_to_native(&c).unwrap();
    assert_eq!(a, b);
    assert_eq!(lower_to_native(&a).unwrap(), a);
    assert_eq!(NativeCounts::of(&a), NativeCounts::of(&b));
}

#[test]
fn non_clifford_angle_is_rejected_under_the_flag() {
    let mut c = Circuit::new(1);
    c.rz(0, 0.3);
    assert!(matches!(lower_to_native(&c), Err(Error::NonClifford(_))));
}

#[test]
fn ladder_of_the_block_is_ten_serial_two_qubit_layers() {
    let ladder = trotter::block_clifford().unwrap();
    let lc = schedule_layers(&ladder);
    let two: Vec<_> = lc.layers.iter().filter(|l| l.kind == LayerKind::Two).collect();
    assert_eq!(two.len(), 10);
    assert!(two.iter().all(|l| l.gates.len() == 1));
}

#[test]
fn layers_have_fixed_durations_and_distinct_qubits() {
    let c = lower_to_native(&trotter::physical_trotter_circuit().unwrap()).unwrap();
    for policy in [SchedulePolicy::Asap, SchedulePolicy::Alap] {
        let lc = schedule_with(&c, policy);
        for l in &lc.layers {
            let want = match l.kind {
                LayerKind::Single => 130e-6,
                LayerKind::Two => 950e-6,
                LayerKind::Measure => 400e-6,
                LayerKind::Virtual => 0.0,
            };
            assert_eq!(l.duration, want);
            let mut seen = vec![false; c.n_qubits];
            for g in l.gates.iter().filter(|g| !g.is_virtual() && !g.is_noise()) {
                for q in g.qubits() {
                    assert!(!seen[q], "qubit {q} twice in one layer");
                    seen[q] = true;
                }
            }
            let busy: Vec<usize> = (0..c.n_qubits).filter(|&q| seen[q]).collect();
            assert!(busy.iter().all(|q| !l.idle.contains(q)));
            assert_eq!(busy.len() + l.idle.len(), c.n_qubits);
        }
        assert_eq!(lc.flatten().ops.len(), c.ops.len());
    }
}

fn random_measured_circuit(n: usize, rng: &mut impl Rng) -> Circuit {
    let mut c = random_clifford(n, 12, rng);
    for _ in 0..3 {
        let q = rng.gen_range(0..n);
        c.measure(q);
        if rng.gen_bool(0.5) {
            c.reset(q);
        }
        c.append(&random_clifford(n, 6, rng));
    }
    for q in 0..n {
        c.measure(q);
    }
    c
}

#[test]
fn scheduling_preserves_unitaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let c = lower_to_native(&random_clifford(4, 25, &mut rng)).unwrap();
        for policy in [SchedulePolicy::Asap, SchedulePolicy::Alap] {
            let flat = schedule_with(&c, policy).flatten();
            assert!(equal_up_to_global_phase(&unitary(&c), &unitary(&flat)));
        }
    }
}

#[test]
fn scheduling_preserves_outcome_distributions() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let shots = 20_000;
    for trial in 0..6 {
        let c = lower_to_native(&random_measured_circuit(4, &mut rng)).unwrap();
        for policy in [SchedulePolicy::Asap, SchedulePolicy::Alap] {
            let flat = schedule_with(&c, policy).flatten();
            let a = run_batch(&c, shots, trial).unwrap().all_counts();
            let b = run_batch(&flat, shots, trial + 100).unwrap().all_counts();
            let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
            for k in keys {
                let pa = *a.get(k).unwrap_or(&0) as f64 / shots as f64;
                let pb = *b.get(k).unwrap_or(&0) as f64 / shots as f64;
                let sigma = (pa.max(pb) * (1.0 - pa.min(pb)) * 2.0 / shots as f64).sqrt();
                assert!((pa - pb).abs() <= 5.0 * sigma + 1e-9, "{k}: {pa} vs {pb}");
            }
        }
    }
}

fn noisy_random_circuit(rng: &mut impl Rng) -> Circuit {
    let n = 3;
    let mut c = lower_to_native(&random_clifford(n, 10, rng)).unwrap();
    c.clifford = true;
    let q = rng.gen_range(0..n);
    c.push(Gate::PauliError {
        q,
        pauli: Letter::Z,
        p: 0.000255,
    });
    c.push(Gate::PauliChannel1 {
        q: (q + 1) % n,
        px: 0.01,
        py: 0.02,
        pz: 0.03,
    });
    c.push(Gate::Depolarize2 { a: 0, b: 2, p: 0.004 });
    c.push(Gate::Barrier { qubits: vec![0, 2] });
    let r = c.measure(1);
    c.push(Gate::FlipRecord { record: r, p: 0.0012 });
    c.reset(1);
    c.cnot(0, 1);
    c.measure(0);
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn stim_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = noisy_random_circuit(&mut rng);
        let text = export_stim(&c).unwrap();
        let back = parse_stim(&text).unwrap();
        prop_assert_eq!(back.ops, c.ops);
        prop_assert_eq!(back.n_records, c.n_records);
    }
}

#[test]
fn unknown_instruction_is_named_with_its_line() {
    let err = parse_stim("H 0\nMPP X0*X1\n").unwrap_err().to_string();
    assert!(err.contains("MPP"), "{err}");
    assert!(err.contains('2'), "{err}");
}

#[test]
fn validate_rejects_out_of_range_qubits() {
    let mut c = Circuit::new(2);
    c.push(Gate::H { q: 2 });
    assert!(c.validate().is_err());
}
