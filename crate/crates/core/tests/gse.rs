use clinr_lab::gse::{self, decode, relative_phase, Occupation};
use clinr_lab::harness::{run_experiment, ExperimentConfig, NoiseSpec};
use clinr_lab::pauli::PauliString;
use clinr_lab::sim::{oracle_state, stabilizer_state};
use clinr_lab::trotter;
use num_complex::Complex64;

fn p(s: &str) -> PauliString {
    s.parse().unwrap()
}

fn bits(s: &str) -> [bool; 6] {
    let v: Vec<bool> = s.chars().map(|c| c == '1').collect();
    v.try_into().unwrap()
}

#[test]
fn prepared_state_has_the_expected_expectations() {
    let t = stabilizer_state(&gse::prep_circuit().unwrap()).unwrap();
    for s in gse::STABILIZERS {
        assert_eq!(t.expectation(&p(s)), 1, "{s}");
    }
    assert_eq!(t.expectation(&p("ZZIIII")), -1);
    assert_eq!(t.expectation(&p("IIZZII")), -1);
    assert_eq!(t.expectation(&p("IIIIZZ")), 1);
    assert_eq!(t.expectation(&p("ZZZZZZ")), 1);
    assert_eq!(t.expectation(&p("XIIIII")), 0);
}

#[test]
fn commutation_structure() {
    let stabs = gse::stabilizers();
    let occ = gse::occupation_operators();
    let block = gse::block_operator();
    for a in &stabs {
        for b in stabs.iter().chain(&occ) {
            assert!(a.commutes(b).unwrap(), "{a} {b}");
        }
        assert!(a.commutes(&block).unwrap());
    }
    // the block hops a pair between modes 0 and 2
    let flips: Vec<bool> = occ.iter().map(|o| block.anticommutes(o).unwrap()).collect();
    assert_eq!(flips, vec![true, false, true]);
}

#[test]
fn decoding_examples() {
    let d = decode(&bits("011110"));
    assert_eq!(d.occupation, Occupation([true, false, true]));
    assert!(!d.sector_parity);
    let d = decode(&bits("110100"));
    assert!(d.sector_parity);
    assert_eq!(decode(&bits("101000")).occupation.key(), "110");
    for o in Occupation::EVEN {
        assert_eq!(Occupation::from_key(&o.key()), Some(o));
        assert!(!o.parity());
    }
}

#[test]
fn block_preserves_the_code_space() {
    let t = stabilizer_state(&trotter::physical_trotter_unitary().unwrap()).unwrap();
    for s in gse::STABILIZERS {
        assert_eq!(t.expectation(&p(s)), 1, "{s}");
    }
    assert_eq!(t.expectation(&p("IIZZII")), -1);
    // occupations 0 and 2 are now in superposition
    assert_eq!(t.expectation(&p("ZZIIII")), 0);
}

#[test]
fn block_output_has_relative_phase_i() {
    let (sv, _) = oracle_state(&trotter::physical_trotter_unitary().unwrap(), &[]).unwrap();
    let phase = relative_phase(&sv);
    assert!((phase - Complex64::new(0.0, 1.0)).norm() < 1e-9, "{phase}");
    let mass = |o: Occupation| {
        sv.amplitudes()
            .iter()
            .enumerate()
            .filter(|(i, _)| gse::sector_of_index(*i) == o)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
    };
    assert!((mass(Occupation::EVEN[1]) - 0.5).abs() < 1e-12);
    assert!((mass(Occupation::EVEN[3]) - 0.5).abs() < 1e-12);
}

#[test]
fn noiseless_direct_run_splits_evenly() {
    let shots = 100_000;
    let rec = run_experiment(&ExperimentConfig::direct(shots, 3).with_noise(NoiseSpec::Noiseless)).unwrap();
    assert_eq!(rec.counts["000"] + rec.counts["101"], 0);
    assert_eq!(rec.rejected_parity_count, 0);
    let f = rec.counts["110"] as f64 / shots as f64;
    assert!((f - 0.5).abs() <= 3.0 * (0.25 / shots as f64).sqrt(), "{f}");
}
