//! Circuit representation, layer scheduling, native lowering and Stim interchange.

mod lower;
mod schedule;
mod stim;

pub use lower::{lower_to_native, NativeCounts};
pub use schedule::{
    schedule_layers, schedule_with, Layer, LayerKind, LayeredCircuit, SchedulePolicy,
    MEASURE_LAYER_SECONDS, SINGLE_LAYER_SECONDS,
    TWO_LAYER_SECONDS,
};
pub use stim::{export_stim, parse_stim};

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Letter, Prim};

/// Angle tolerance used when matching rotations to multiples of pi/2 or pi/4.
pub const ANGLE_TOL: f64 = 1e-9;

/// Returns `k` in `0..period_count` when `angle == k * step (mod 2pi)`.
pub(crate) fn angle_multiple(angle: f64, step: f64) -> Option<u32> {
    let turns = (2.0 * PI / step).round() as i64;
    let k = angle / step;
    let r = k.round();
    if (k - r).abs() * step > ANGLE_TOL {
        return None;
    }
    Some((r as i64).rem_euclid(turns) as u32)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Gate {
    H { q: usize },
    S { q: usize },
    SDag { q: usize },
    X { q: usize },
    Y { q: usize },
    Z { q: usize },
    Cnot { control: usize, target: usize },
    Cz { a: usize, b: usize },
    Rx { q: usize, angle: f64 },
    Rz { q: usize, angle: f64 },
    /// `[[0, e^{-i phi}], [e^{i phi}, 0]]`
    Gpi { q: usize, phase: f64 },
    /// `(1/sqrt2) [[1, -i e^{-i phi}], [-i e^{i phi}, 1]]`
    Gpi2 { q: usize, phase: f64 },
    /// Virtual Z rotation, `exp(-i angle Z / 2)`.
    Gz { q: usize, angle: f64 },
    /// `exp(-i angle Z(x)Z)`
    Zz { a: usize, b: usize, angle: f64 },
    MeasureZ { q: usize, record: usize },
    Reset { q: usize },
    PauliError { q: usize, pauli: Letter, p: f64 },
    PauliChannel1 { q: usize, px: f64, py: f64, pz: f64 },
    Depolarize1 { q: usize, p: f64 },
    Depolarize2 { a: usize, b: usize, p: f64 },
    FlipRecord { record: usize, p: f64 },
    /// Scheduling fence: no operation on these qubits moves across it. No physical action.
    Barrier { qubits: Vec<usize> },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        use Gate::*;
        match *self {
            H { q }
            | S { q }
            | SDag { q }
            | X { q }
            | Y { q }
            | Z { q }
            | Rx { q, .. }
            | Rz { q, .. }
            | Gpi { q, .. }
            | Gpi2 { q, .. }
            | Gz { q, .. }
            | MeasureZ { q, .. }
            | Reset { q }
            | PauliError { q, .. }
            | PauliChannel1 { q, .. }
            | Depolarize1 { q, .. } => vec![q],
            Cnot { control, target } => vec![control, target],
            Cz { a, b } | Zz { a, b, .. } | Depolarize2 { a, b, .. } => vec![a, b],
            FlipRecord { .. } => vec![],
            Barrier { ref qubits } => qubits.clone(),
        }
    }

    pub fn name(&self) -> &'static str {
        use Gate::*;
        match self {
            H { .. } => "H",
            S { .. } => "S",
            SDag { .. } => "S_DAG",
            X { .. } => "X",
            Y { .. } => "Y",
            Z { .. } => "Z",
            Cnot { .. } => "CNOT",
            Cz { .. } => "CZ",
            Rx { .. } => "RX",
            Rz { .. } => "RZ",
            Gpi { .. } => "GPI",
            Gpi2 { .. } => "GPI2",
            Gz { .. } => "GZ",
            Zz { .. } => "ZZ",
            MeasureZ { .. } => "MEASURE_Z",
            Reset { .. } => "RESET",
            PauliError { .. } => "PAULI_ERROR",
            PauliChannel1 { .. } => "PAULI_CHANNEL_1",
            Depolarize1 { .. } => "DEPOLARIZE1",
            Depolarize2 { .. } => "DEPOLARIZE2",
            FlipRecord { .. } => "FLIP_RECORD",
            Barrier { .. } => "BARRIER",
        }
    }

    pub fn is_noise(&self) -> bool {
        matches!(
            self,
            Gate::PauliError { .. }
                | Gate::PauliChannel1 { .. }
                | Gate::Depolarize1 { .. }
                | Gate::Depolarize2 { .. }
                | Gate::FlipRecord { .. }
        )
    }

    pub fn is_virtual(&self) -> bool {
        matches!(self, Gate::Gz { .. })
    }

    pub fn is_measurement_like(&self) -> bool {
        matches!(self, Gate::MeasureZ { .. } | Gate::Reset { .. })
    }

    pub fn is_two_qubit_unitary(&self) -> bool {
        matches!(self, Gate::Cnot { .. } | Gate::Cz { .. } | Gate::Zz { .. })
    }

    pub fn is_native(&self) -> bool {
        matches!(
            self,
            Gate::Gpi { .. }
                | Gate::Gpi2 { .. }
                | Gate::Gz { .. }
                | Gate::Zz { .. }
                | Gate::MeasureZ { .. }
                | Gate::Reset { .. }
                | Gate::Barrier { .. }
        ) || self.is_noise()
    }

    /// Decomposition into Clifford primitives (time order), exact up to global phase.
    pub fn clifford_prims(&self) -> Result<Vec<Prim>> {
        use Gate::*;
        let bad = || Error::NonClifford(format!("{self:?}"));
        let s_pow = |q: usize, k: u32| -> Vec<Prim> {
            match k % 4 {
                0 => vec![],
                1 => vec![Prim::S(q)],
                2 => vec![Prim::Z(q)],
                _ => vec![Prim::SDag(q)],
            }
        };
        Ok(match *self {
            H { q } => vec![Prim::H(q)],
            S { q } => vec![Prim::S(q)],
            SDag { q } => vec![Prim::SDag(q)],
            X { q } => vec![Prim::X(q)],
            Y { q } => vec![Prim::Y(q)],
            Z { q } => vec![Prim::Z(q)],
            Cnot { control, target } => vec![Prim::Cx(control, target)],
            Cz { a, b } => vec![Prim::Cz(a, b)],
            Rz { q, angle } | Gz { q, angle } => {
                s_pow(q, angle_multiple(angle, FRAC_PI_2).ok_or_else(bad)?)
            }
            Rx { q, angle } => {
                let k = angle_multiple(angle, FRAC_PI_2).ok_or_else(bad)?;
                let mut v = vec![Prim::H(q)];
                v.extend(s_pow(q, k));
                v.push(Prim::H(q));
                if k == 0 {
                    vec![]
                } else {
                    v
                }
            }
            Gpi { q, phase } => {
                // GPI(phi) = RZ(2 phi) X up to phase
                let k = angle_multiple(2.0 * phase, FRAC_PI_2).ok_or_else(bad)?;
                let mut v = vec![Prim::X(q)];
                v.extend(s_pow(q, k));
                v
            }
            Gpi2 { q, phase } => {
                // GPI2(phi) = RZ(phi) RX(pi/2) RZ(-phi)
                let k = angle_multiple(phase, FRAC_PI_2).ok_or_else(bad)?;
                let mut v = s_pow(q, (4 - k) % 4);
                v.extend([Prim::H(q), Prim::S(q), Prim::H(q)]);
                v.extend(s_pow(q, k));
                v
            }
            Zz { a, b, angle } => {
                // ZZ(-pi/4) = CZ S^dag(a) S^dag(b); ZZ(k pi/4) is the k-th power of ZZ(pi/4).
                let k = angle_multiple(angle, PI / 4.0).ok_or_else(bad)?;
                match k % 4 {
                    0 => vec![],
                    1 => vec![Prim::Cz(a, b), Prim::S(a), Prim::S(b)],
                    2 => vec![Prim::Z(a), Prim::Z(b)],
                    _ => vec![Prim::Cz(a, b), Prim::SDag(a), Prim::SDag(b)],
                }
            }
            Barrier { .. } => vec![],
            _ => return Err(bad()),
        })
    }

    pub(crate) fn remap(&self, f: &impl Fn(usize) -> usize) -> Gate {
        use Gate::*;
        let mut g = self.clone();
        match &mut g {
            H { q }
            | S { q }
            | SDag { q }
            | X { q }
            | Y { q }
            | Z { q }
            | Rx { q, .. }
            | Rz { q, .. }
            | Gpi { q, .. }
            | Gpi2 { q, .. }
            | Gz { q, .. }
            | MeasureZ { q, .. }
            | Reset { q }
            | PauliError { q, .. }
            | PauliChannel1 { q, .. }
            | Depolarize1 { q, .. } => *q = f(*q),
            Cnot { control, target } => {
                *control = f(*control);
                *target = f(*target);
            }
            Cz { a, b } | Zz { a, b, .. } | Depolarize2 { a, b, .. } => {
                *a = f(*a);
                *b = f(*b);
            }
            FlipRecord { .. } => {}
            Barrier { qubits } => qubits.iter_mut().for_each(|q| *q = f(*q)),
        }
        g
    }

    fn shift_record(&self, offset: usize) -> Gate {
        let mut g = self.clone();
        match &mut g {
            Gate::MeasureZ { record, .. } | Gate::FlipRecord { record, .. } => *record += offset,
            _ => {}
        }
        g
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        for q in self.qubits() {
            write!(f, " {q}")?;
        }
        Ok(())
    }
}

/// An ordered gate list over `n_qubits` qubits and `n_records` classical bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub ops: Vec<Gate>,
    pub n_records: usize,
    pub clifford: bool,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ops: vec![],
            n_records: 0,
            clifford: true,
        }
    }

    pub fn push(&mut self, g: Gate) -> &mut Self {
        self.ops.push(g);
        self
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.push(Gate::H { q })
    }

    pub fn s(&mut self, q: usize) -> &mut Self {
        self.push(Gate::S { q })
    }

    pub fn s_dag(&mut self, q: usize) -> &mut Self {
        self.push(Gate::SDag { q })
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> &mut Self {
        self.push(Gate::Cnot { control, target })
    }

    pub fn cz(&mut self, a: usize, b: usize) -> &mut Self {
        self.push(Gate::Cz { a, b })
    }

    pub fn rx(&mut self, q: usize, angle: f64) -> &mut Self {
        self.push(Gate::Rx { q, angle })
    }

    pub fn rz(&mut self, q: usize, angle: f64) -> &mut Self {
        self.push(Gate::Rz { q, angle })
    }

    /// Appends a Z-basis measurement and returns its record index.
    pub fn measure(&mut self, q: usize) -> usize {
        let record = self.n_records;
        self.n_records += 1;
        self.ops.push(Gate::MeasureZ { q, record });
        record
    }

    pub fn reset(&mut self, q: usize) -> &mut Self {
        self.push(Gate::Reset { q })
    }

    /// Appends `other`, mapping its qubit `q` to `qubit_map[q]` and shifting its records.
    pub fn append_mapped(&mut self, other: &Circuit, qubit_map: &[usize]) -> Vec<usize> {
        assert_eq!(qubit_map.len(), other.n_qubits);
        let offset = self.n_records;
        for g in &other.ops {
            self.ops
                .push(g.remap(&|q| qubit_map[q]).shift_record(offset));
        }
        self.n_records += other.n_records;
        self.clifford &= other.clifford;
        (offset..offset + other.n_records).collect()
    }

    pub fn append(&mut self, other: &Circuit) -> Vec<usize> {
        let map: Vec<usize> = (0..other.n_qubits).collect();
        self.append_mapped(other, &map)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.n_records];
        for g in &self.ops {
            for q in g.qubits() {
                if q >= self.n_qubits {
                    return Err(Error::InvalidCircuit(format!(
                        "{g} uses qubit {q} >= {}",
                        self.n_qubits
                    )));
                }
            }
            if let Gate::Cnot {
                control: a,
                target: b,
            }
            | Gate::Cz { a, b }
            | Gate::Zz { a, b, .. }
            | Gate::Depolarize2 { a, b, .. } = *g
            {
                if a == b {
                    return Err(Error::InvalidCircuit(format!("{g} repeats a qubit")));
                }
            }
            match *g {
                Gate::MeasureZ { record, .. } => {
                    if record >= self.n_records || seen[record] {
                        return Err(Error::InvalidCircuit(format!(
                            "measurement record {record} invalid or reused"
                        )));
                    }
                    seen[record] = true;
                }
                Gate::FlipRecord { record, .. } if record >= self.n_records => {
                    return Err(Error::InvalidCircuit(format!("record {record} out of range")));
                }
                _ => {}
            }
            if self.clifford && !g.is_noise() && !g.is_measurement_like() {
                g.clifford_prims()?;
                if let Gate::Zz { angle, .. } = *g {
                    if angle_multiple(angle.abs(), PI / 4.0) != Some(1) {
                        return Err(Error::NonClifford(format!("{g:?}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Copy with every noise instruction removed.
    pub fn without_noise(&self) -> Circuit {
        Circuit {
            ops: self.ops.iter().filter(|g| !g.is_noise()).cloned().collect(),
            ..self.clone()
        }
    }

    pub fn count_where(&self, f: impl Fn(&Gate) -> bool) -> usize {
        self.ops.iter().filter(|g| f(g)).count()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.count_where(Gate::is_two_qubit_unitary)
    }

    /// Clifford primitive sequence of the unitary part (measurement-free circuits).
    pub fn to_prims(&self) -> Result<Vec<Prim>> {
        let mut v = vec![];
        for g in &self.ops {
            if g.is_noise() {
                continue;
            }
            if g.is_measurement_like() {
                return Err(Error::InvalidCircuit(
                    "measurement inside a unitary section".into(),
                ));
            }
            v.extend(g.clifford_prims()?);
        }
        Ok(v)
    }

    /// Two-qubit interaction multiset as `((a, b), count)` with `a < b`, sorted.
    pub fn interactions(&self) -> Vec<((usize, usize), usize)> {
        let mut m = std::collections::BTreeMap::new();
        for g in &self.ops {
            if g.is_two_qubit_unitary() {
                let qs = g.qubits();
                let key = (qs[0].min(qs[1]), qs[0].max(qs[1]));
                *m.entry(key).or_insert(0usize) += 1;
            }
        }
        m.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_catches_bad_records_and_angles() {
        let mut c = Circuit::new(2);
        c.measure(0);
        c.push(Gate::MeasureZ { q: 1, record: 0 });
        assert!(c.validate().is_err());

        let mut c = Circuit::new(1);
        c.rx(0, 0.3);
        assert!(matches!(c.validate(), Err(Error::NonClifford(_))));
        c.clifford = false;
        assert!(c.validate().is_ok());

        let mut c = Circuit::new(2);
        c.push(Gate::Zz {
            a: 0,
            b: 1,
            angle: FRAC_PI_2,
        });
        assert!(c.validate().is_err());
    }

    #[test]
    fn append_mapped_shifts_records() {
        let mut a = Circuit::new(3);
        a.measure(0);
        let mut b = Circuit::new(1);
        b.h(0);
        b.measure(0);
        let recs = a.append_mapped(&b, &[2]);
        assert_eq!(recs, vec![1]);
        assert_eq!(a.ops[2], Gate::MeasureZ { q: 2, record: 1 });
    }

    #[test]
    fn angle_matching() {
        assert_eq!(angle_multiple(-FRAC_PI_2, FRAC_PI_2), Some(3));
        assert_eq!(angle_multiple(5.0 * PI / 2.0, FRAC_PI_2), Some(1));
        assert_eq!(angle_multiple(0.1, FRAC_PI_2), None);
    }
}
