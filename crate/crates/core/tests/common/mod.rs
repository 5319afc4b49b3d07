#![allow(dead_code)]

use clinr_lab::circuit::{Circuit, Gate};
use clinr_lab::clinr::{bell_clifford_resource, clinr_circuit, feedforward_frame, ResourcePrep, VerificationPlan};
use clinr_lab::sim::oracle_state;
use clinr_lab::pauli::{Letter, PauliString, Prim};
use rand::Rng;

pub fn random_clifford(n: usize, depth: usize, rng: &mut impl Rng) -> Circuit {
    let mut c = Circuit::new(n);
    for _ in 0..depth {
        let q = rng.gen_range(0..n);
        match rng.gen_range(0..6) {
            0 => {
                c.h(q);
            }
            1 => {
                c.s(q);
            }
            2 => {
                c.s_dag(q);
            }
            3 => {
                c.ops.push(Gate::X { q });
            }
            k if n > 1 => {
                let mut t = rng.gen_range(0..n - 1);
                if t >= q {
                    t += 1;
                }
                if k == 4 {
                    c.cnot(q, t);
                } else {
                    c.cz(q, t);
                }
            }
            _ => {
                c.h(q);
            }
        }
    }
    c
}

/// Uniform Pauli string with a uniform phase.
pub fn random_pauli(n: usize, rng: &mut impl Rng) -> PauliString {
    let letters: Vec<Letter> = (0..n)
        .map(|_| Letter::from_bits(rng.gen(), rng.gen()))
        .collect();
    let mut p = PauliString::from_letters(&letters);
    p.set_phase(rng.gen_range(0..4));
    p
}

/// Random Clifford primitive word on `n` qubits.
pub fn random_prims(n: usize, len: usize, rng: &mut impl Rng) -> Vec<Prim> {
    (0..len)
        .map(|_| {
            let q = rng.gen_range(0..n);
            let t = (q + 1 + rng.gen_range(0..n.max(2) - 1)) % n.max(2);
            match rng.gen_range(0..8) {
                0 => Prim::H(q),
                1 => Prim::S(q),
                2 => Prim::SDag(q),
                3 => Prim::X(q),
                4 => Prim::Y(q),
                5 => Prim::Z(q),
                6 if n > 1 => Prim::Cx(q, t),
                7 if n > 1 => Prim::Cz(q, t),
                _ => Prim::H(q),
            }
        })
        .collect()
}

/// Largest deviation from 1 of the fidelity between the frame-corrected CliNR output and
/// `cliff` applied to the state of `data_prep`, over every Bell-measurement branch. Branch
/// probabilities must all be `4^-n`.
pub fn teleportation_error(data_prep: &Circuit, cliff: &Circuit) -> f64 {
    let n = cliff.n_qubits;
    let spec = bell_clifford_resource(cliff).unwrap();
    let cc = clinr_circuit(data_prep, &spec, &VerificationPlan::empty(), &ResourcePrep::Naive).unwrap();
    let l = &cc.layout;
    let mut body = cc.circuit.clone();
    body.ops
        .retain(|g| !matches!(g, Gate::MeasureZ { record, .. } if l.output_records.contains(record)));
    let mut worst: f64 = 0.0;
    for branch in 0..1usize << (2 * n) {
        let o: Vec<bool> = (0..2 * n).map(|k| branch >> k & 1 == 1).collect();
        let mut forced = vec![false; body.n_records];
        for i in 0..n {
            forced[l.data_records[i]] = o[i];
            forced[l.resource_records[i]] = o[n + i];
        }
        let (mut sv, p) = oracle_state(&body, &forced).unwrap();
        worst = worst.max((p * (1u64 << (2 * n)) as f64 - 1.0).abs());
        let q = feedforward_frame(&o, &spec.clifford);
        let mut x = vec![false; 3 * n];
        let mut z = vec![false; 3 * n];
        for j in 0..n {
            x[l.resource_out[j]] = q.x_bit(j);
            z[l.resource_out[j]] = q.z_bit(j);
        }
        sv.apply_pauli_bits(&x, &z);

        // measured registers collapse to the branch outcomes
        let mut expect = Circuit::new(3 * n);
        for k in 0..n {
            if o[k] {
                expect.ops.push(Gate::X { q: l.data[k] });
            }
            if o[n + k] {
                expect.ops.push(Gate::X { q: l.resource_in[k] });
            }
        }
        expect.append_mapped(data_prep, &l.resource_out);
        expect.append_mapped(cliff, &l.resource_out);
        let (ev, _) = oracle_state(&expect, &[]).unwrap();
        worst = worst.max((sv.fidelity(&ev) / sv.norm_sqr() - 1.0).abs());
    }
    worst
}
