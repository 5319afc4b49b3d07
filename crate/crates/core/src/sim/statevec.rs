use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

pub const ORACLE_MAX_QUBITS: usize = 12;

/// Dense state over at most [`ORACLE_MAX_QUBITS`] qubits. Qubit `q` is bit `q` of the index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

type M2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn expi(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, t)
}

impl StateVector {
    pub fn new(n: usize) -> Result<Self> {
        if n > ORACLE_MAX_QUBITS {
            return Err(Error::OracleTooLarge {
                max: ORACLE_MAX_QUBITS,
                got: n,
            });
        }
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        amps[0] = c(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|^2` for normalized states.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    fn apply_1q(&mut self, q: usize, m: &M2) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply_diag2(&mut self, a: usize, b: usize, d: [Complex64; 4]) {
        for (i, amp) in self.amps.iter_mut().enumerate() {
            let k = ((i >> a) & 1) | (((i >> b) & 1) << 1);
            *amp *= d[k];
        }
    }

    fn single_matrix(g: &Gate) -> Option<M2> {
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        let r = c(FRAC_1_SQRT_2, 0.0);
        Some(match *g {
            Gate::H { .. } => [[r, r], [r, -r]],
            Gate::S { .. } => [[o, z], [z, c(0.0, 1.0)]],
            Gate::SDag { .. } => [[o, z], [z, c(0.0, -1.0)]],
            Gate::X { .. } => [[z, o], [o, z]],
            Gate::Y { .. } => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
            Gate::Z { .. } => [[o, z], [z, -o]],
            Gate::Rx { angle, .. } => {
                let (s, co) = (angle / 2.0).sin_cos();
                [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
            }
            Gate::Rz { angle, .. } | Gate::Gz { angle, .. } => {
                [[expi(-angle / 2.0), z], [z, expi(angle / 2.0)]]
            }
            Gate::Gpi { phase, .. } => [[z, expi(-phase)], [expi(phase), z]],
            Gate::Gpi2 { phase, .. } => [
                [r, c(0.0, -FRAC_1_SQRT_2) * expi(-phase)],
                [c(0.0, -FRAC_1_SQRT_2) * expi(phase), r],
            ],
            _ => return None,
        })
    }

    /// Applies a unitary gate. Noise instructions are skipped.
    pub fn apply_unitary(&mut self, g: &Gate) -> Result<()> {
        if g.is_noise() || matches!(g, Gate::Barrier { .. }) {
            return Ok(());
        }
        if let Some(m) = Self::single_matrix(g) {
            self.apply_1q(g.qubits()[0], &m);
            return Ok(());
        }
        let o = c(1.0, 0.0);
        match *g {
            Gate::Cnot { control, target } => {
                let (cb, tb) = (1usize << control, 1usize << target);
                for i in 0..self.amps.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
            Gate::Cz { a, b } => self.apply_diag2(a, b, [o, o, o, -o]),
            Gate::Zz { a, b, angle } => {
                let (m, p) = (expi(-angle), expi(angle));
                self.apply_diag2(a, b, [m, p, p, m]);
            }
            _ => {
                return Err(Error::InvalidCircuit(format!(
                    "{g} is not a unitary gate"
                )))
            }
        }
        Ok(())
    }

    /// Probability of reading 1 on qubit `q`.
    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects qubit `q` onto `outcome` and renormalizes. Returns the outcome probability;
    /// a zero-probability branch leaves the zero vector.
    pub fn measure_forced(&mut self, q: usize, outcome: bool) -> f64 {
        let bit = 1usize << q;
        let mut p = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & bit) != 0) != outcome {
                *a = c(0.0, 0.0);
            } else {
                p += a.norm_sqr();
            }
        }
        if p > 0.0 {
            let s = 1.0 / p.sqrt();
            for a in self.amps.iter_mut() {
                *a *= s;
            }
        }
        p
    }

    /// Sector-restricted copy: amplitudes whose basis index fails `keep` are zeroed.
    pub fn project(&self, keep: impl Fn(usize) -> bool) -> StateVector {
        let mut out = self.clone();
        for (i, a) in out.amps.iter_mut().enumerate() {
            if !keep(i) {
                *a = c(0.0, 0.0);
            }
        }
        out
    }

    /// Applies a Pauli given as `(x, z)` bits per qubit, ignoring global phase.
    pub fn apply_pauli_bits(&mut self, x: &[bool], z: &[bool]) {
        for q in 0..self.n {
            match (x[q], z[q]) {
                (false, false) => {}
                (true, false) => self.apply_unitary(&Gate::X { q }).unwrap(),
                (true, true) => self.apply_unitary(&Gate::Y { q }).unwrap(),
                (false, true) => self.apply_unitary(&Gate::Z { q }).unwrap(),
            }
        }
    }
}

/// Exact final state of `c`. Measurement `r` is forced to `forced[r]`; reset requires the
/// qubit to be in a definite Z state. Returns the state and the probability of the forced
/// branch.
pub fn oracle_state(c: &Circuit, forced: &[bool]) -> Result<(StateVector, f64)> {
    let mut sv = StateVector::new(c.n_qubits)?;
    let mut branch = 1.0;
    for g in &c.ops {
        match *g {
            Gate::MeasureZ { q, record } => {
                let outcome = *forced.get(record).ok_or_else(|| {
                    Error::InvalidCircuit(format!("no forced outcome for record {record}"))
                })?;
                branch *= sv.measure_forced(q, outcome);
                if branch == 0.0 {
                    return Ok((sv, 0.0));
                }
            }
            Gate::Reset { q } => {
                let p1 = sv.prob_one(q);
                if p1 > 1e-12 && p1 < 1.0 - 1e-12 {
                    return Err(Error::InvalidCircuit(format!(
                        "reset of qubit {q} in superposition"
                    )));
                }
                if p1 > 0.5 {
                    sv.apply_unitary(&Gate::X { q })?;
                }
            }
            _ => sv.apply_unitary(g)?,
        }
    }
    Ok((sv, branch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn empty_circuit_is_ground_state() {
        let (sv, p) = oracle_state(&Circuit::new(3), &[]).unwrap();
        assert_eq!(p, 1.0);
        assert!((sv.amplitude(0) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn size_limit() {
        assert!(StateVector::new(13).is_err());
    }

    #[test]
    fn zz_is_diagonal_with_parity_phase() {
        let mut sv = StateVector::new(2).unwrap();
        sv.apply_unitary(&Gate::H { q: 0 }).unwrap();
        sv.apply_unitary(&Gate::Zz {
            a: 0,
            b: 1,
            angle: FRAC_PI_4,
        })
        .unwrap();
        let ratio = sv.amplitude(1) / sv.amplitude(0);
        assert!((ratio - expi(FRAC_PI_2)).norm() < 1e-12);
    }
}
