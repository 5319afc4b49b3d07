mod common;

use std::collections::BTreeMap;

use clinr_lab::circuit::{Circuit, Gate};
use clinr_lab::pauli::Letter;
use clinr_lab::sim::{oracle_state, reference_sample, run_batch, run_shot, Tableau, BLOCK_SHOTS};
use common::random_clifford;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn freq(counts: &BTreeMap<String, u64>, key: &str, shots: usize) -> f64 {
    *counts.get(key).unwrap_or(&0) as f64 / shots as f64
}

fn within_sigma(p_hat: f64, p: f64, shots: usize, k: f64) -> bool {
    let sigma = (p * (1.0 - p) / shots as f64).sqrt();
    (p_hat - p).abs() <= k * sigma + 1e-12
}

/// Mid-circuit measurements reset their qubit immediately, so the oracle accepts the resets.
fn random_measured(n: usize, rng: &mut impl Rng) -> Circuit {
    let mut c = random_clifford(n, 15, rng);
    for _ in 0..2 {
        let q = rng.gen_range(0..n);
        c.measure(q);
        c.reset(q);
        c.append(&random_clifford(n, 8, rng));
    }
    for q in 0..n {
        c.measure(q);
    }
    c
}

fn bits_of(key: &str) -> Vec<bool> {
    key.chars().map(|ch| ch == '1').collect()
}

#[test]
fn hadamard_then_measure_is_fair() {
    let mut c = Circuit::new(1);
    c.h(0);
    c.measure(0);
    let shots = 100_000;
    let b = run_batch(&c, shots, 1).unwrap();
    assert!(within_sigma(freq(&b.all_counts(), "1", shots), 0.5, shots, 3.0));
}

#[test]
fn bell_pair_outcomes_agree_in_every_shot() {
    let mut c = Circuit::new(2);
    c.h(0);
    c.cnot(0, 1);
    c.measure(0);
    c.measure(1);
    let shots = 10_000;
    let b = run_batch(&c, shots, 2).unwrap();
    assert_eq!(b.planes[0], b.planes[1]);
    let ones = b.planes[0].iter().map(|w| w.count_ones() as usize).sum::<usize>();
    assert!(within_sigma(ones as f64 / shots as f64, 0.5, shots, 3.0));
}

#[test]
fn bits_past_the_last_shot_are_zero() {
    let mut c = Circuit::new(1);
    c.push(Gate::X { q: 0 });
    c.measure(0);
    let b = run_batch(&c, 100, 0).unwrap();
    assert_eq!(b.planes[0], vec![u64::MAX, (1u64 << 36) - 1]);
}

#[test]
fn batches_do_not_depend_on_the_thread_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut c = random_measured(6, &mut rng);
    c.push(Gate::Depolarize1 { q: 2, p: 0.05 });
    c.measure(2);
    let shots = 5 * BLOCK_SHOTS + 17;
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_batch(&c, shots, 77).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(3));
    assert_ne!(one, run_batch(&c, shots, 78).unwrap());
}

#[test]
fn z_error_before_final_measurement_changes_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let core = random_clifford(4, 20, &mut rng);
        let mut plain = core.clone();
        let mut with_z = core.clone();
        for q in 0..4 {
            with_z.push(Gate::PauliError { q, pauli: Letter::Z, p: 0.3 });
        }
        for q in 0..4 {
            plain.measure(q);
            with_z.measure(q);
        }
        assert_eq!(run_batch(&plain, 4000, 9).unwrap(), run_batch(&with_z, 4000, 9).unwrap());
    }
}

#[test]
fn z_error_before_mid_circuit_measurement_keeps_the_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let shots = 50_000;
    for _ in 0..3 {
        let c = random_measured(3, &mut rng);
        let mut with_z = Circuit::new(3);
        for g in &c.ops {
            if let Gate::MeasureZ { q, .. } = *g {
                with_z.push(Gate::PauliError { q, pauli: Letter::Z, p: 0.5 });
            }
            with_z.push(g.clone());
        }
        with_z.n_records = c.n_records;
        let a = run_batch(&c, shots, 10).unwrap().all_counts();
        let b = run_batch(&with_z, shots, 11).unwrap().all_counts();
        for key in a.keys().chain(b.keys()) {
            let (pa, pb) = (freq(&a, key, shots), freq(&b, key, shots));
            let sigma = (pa.max(pb) * (1.0 - pa.min(pb)) * 2.0 / shots as f64).sqrt();
            assert!((pa - pb).abs() <= 5.0 * sigma + 1e-9, "{key}: {pa} vs {pb}");
        }
    }
}

#[test]
fn sampled_frequencies_match_the_state_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let shots = 100_000;
    for trial in 0..4 {
        let c = random_measured(5, &mut rng);
        let counts = run_batch(&c, shots, trial).unwrap().all_counts();
        let mut total = 0.0;
        for key in (0..1usize << c.n_records).map(|k| {
            (0..c.n_records)
                .map(|r| if k >> r & 1 == 1 { '1' } else { '0' })
                .collect::<String>()
        }) {
            let p = oracle_state(&c, &bits_of(&key)).unwrap().1;
            total += p;
            assert!(within_sigma(freq(&counts, &key, shots), p, shots, 3.0), "{key}: p={p}");
            if p == 0.0 {
                assert!(!counts.contains_key(&key));
            }
        }
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn reference_sample_is_a_possible_outcome() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let c = random_measured(4, &mut rng);
        let (records, random) = reference_sample(&c).unwrap();
        assert!(oracle_state(&c, &records).unwrap().1 > 0.0);
        for (r, &is_random) in random.iter().enumerate() {
            let end = c
                .ops
                .iter()
                .position(|g| matches!(g, Gate::MeasureZ { record, .. } if *record == r))
                .unwrap();
            let mut prefix = c.clone();
            prefix.ops.truncate(end + 1);
            let mut flipped = records.clone();
            flipped[r] = !flipped[r];
            let p = oracle_state(&prefix, &flipped).unwrap().1;
            assert_eq!(is_random, p > 0.0, "record {r}");
        }
    }
}

#[test]
fn tableau_invariants_hold_after_every_instruction() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let c = random_measured(7, &mut rng);
        let mut t = Tableau::new(c.n_qubits);
        let mut records = vec![false; c.n_records];
        for g in &c.ops {
            t.apply(g, &mut records, None, &mut rng).unwrap();
            assert!(t.check_invariants(), "after {g}");
        }
    }
}

#[test]
fn tableau_shots_and_frame_batches_agree_under_noise() {
    let mut c = Circuit::new(3);
    c.h(0);
    c.cnot(0, 1);
    c.push(Gate::PauliChannel1 { q: 1, px: 0.05, py: 0.03, pz: 0.1 });
    c.push(Gate::Depolarize2 { a: 0, b: 2, p: 0.08 });
    c.cnot(1, 2);
    for q in 0..3 {
        let r = c.measure(q);
        c.push(Gate::FlipRecord { record: r, p: 0.02 });
    }
    let shots = 40_000;
    let frame = run_batch(&c, shots, 12).unwrap().all_counts();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut tab: BTreeMap<String, u64> = BTreeMap::new();
    for _ in 0..shots {
        let bits = run_shot(&c, &mut rng).unwrap();
        *tab.entry(bits.iter().map(|&b| if b { '1' } else { '0' }).collect()).or_insert(0) += 1;
    }
    for key in frame.keys().chain(tab.keys()) {
        let (pa, pb) = (freq(&frame, key, shots), freq(&tab, key, shots));
        let sigma = (pa.max(pb) * (1.0 - pa.min(pb)) * 2.0 / shots as f64).sqrt();
        assert!((pa - pb).abs() <= 5.0 * sigma + 1e-9, "{key}: {pa} vs {pb}");
    }
}
