//! The [[6,3,2]] generalized superfast encoding of three fermionic modes: stabilizers,
//! occupation operators, encoded preparation of occupation (1,1,0) and shot decoding.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::Result;
use crate::graph::{emit_graph_circuit, search_compilations};
use crate::pauli::PauliString;
use crate::sim::{StateVector, Tableau};

/// Physical qubits per block.
pub const N: usize = 6;
/// Logical fermionic modes.
pub const MODES: usize = 3;

pub const STABILIZERS: [&str; 4] = ["XYIIII", "YXXYII", "IIYXXY", "IIIIYX"];
pub const OCCUPATION: [&str; 3] = ["ZZIIII", "IIZZII", "IIIIZZ"];
pub const BLOCK: &str = "YZYYZY";
/// Prepared logical occupation.
pub const INITIAL: Occupation = Occupation([true, true, false]);

fn parse(s: &str) -> PauliString {
    s.parse().expect("constant Pauli text")
}

pub fn stabilizers() -> Vec<PauliString> {
    STABILIZERS.iter().map(|s| parse(s)).collect()
}

pub fn occupation_operators() -> Vec<PauliString> {
    OCCUPATION.iter().map(|s| parse(s)).collect()
}

pub fn block_operator() -> PauliString {
    parse(BLOCK)
}

/// Generators of the prepared state: the four code stabilizers with `+` and
/// `B_i = 1 - 2 n_i` signs for occupation (1,1,0) on `B_0`, `B_1`.
pub fn prep_generators() -> Vec<PauliString> {
    let mut g = stabilizers();
    for (i, b) in occupation_operators().into_iter().take(2).enumerate() {
        g.push(if INITIAL.0[i] { b.negated() } else { b });
    }
    g
}

/// LC search budget for the preparation circuit.
const PREP_SEARCH_ITERS: usize = 2000;

/// Encoded preparation of occupation (1,1,0), synthesized as the lowest-CZ graph compilation
/// found by a seeded local-complementation search.
pub fn prep_circuit() -> Result<Circuit> {
    static PREP: OnceLock<Circuit> = OnceLock::new();
    if let Some(c) = PREP.get() {
        return Ok(c.clone());
    }
    let t = Tableau::from_stabilizers(&prep_generators())?;
    let best = search_compilations(&t, PREP_SEARCH_ITERS, 0, 1)?;
    let c = emit_graph_circuit(&best[0]);
    Ok(PREP.get_or_init(|| c).clone())
}

/// Logical occupation `(n0, n1, n2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occupation(pub [bool; MODES]);

impl Occupation {
    /// The four even-parity occupations in reporting order.
    pub const EVEN: [Occupation; 4] = [
        Occupation([false, false, false]),
        Occupation([true, true, false]),
        Occupation([true, false, true]),
        Occupation([false, true, true]),
    ];

    pub fn parity(&self) -> bool {
        self.0.iter().fold(false, |a, &b| a ^ b)
    }

    pub fn key(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_key(s: &str) -> Option<Self> {
        let b: Vec<bool> = s
            .chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<_>>()?;
        (b.len() == MODES).then(|| Occupation([b[0], b[1], b[2]]))
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.0.map(u8::from);
        write!(f, "({a},{b},{c})")
    }
}

impl Serialize for Occupation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.key())
    }
}

impl<'de> Deserialize<'de> for Occupation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Occupation::from_key(&s).ok_or_else(|| serde::de::Error::custom(format!("bad occupation {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodedShot {
    pub occupation: Occupation,
    /// True for odd sector parity (a detected error).
    pub sector_parity: bool,
    pub raw: [bool; N],
}

/// `n_i = m_{2i} xor m_{2i+1}`.
pub fn decode(bits: &[bool; N]) -> DecodedShot {
    let occ = Occupation([bits[0] ^ bits[1], bits[2] ^ bits[3], bits[4] ^ bits[5]]);
    DecodedShot {
        occupation: occ,
        sector_parity: occ.parity(),
        raw: *bits,
    }
}

/// `{(1,1,0): 1/2, (0,1,1): 1/2}` over the four even occupations.
pub fn ideal_distribution() -> BTreeMap<Occupation, f64> {
    Occupation::EVEN
        .iter()
        .map(|&o| (o, if o == Occupation::EVEN[1] || o == Occupation::EVEN[3] { 0.5 } else { 0.0 }))
        .collect()
}

/// Occupation sector of a 6-qubit computational basis index (qubit q is bit q).
pub fn sector_of_index(i: usize) -> Occupation {
    let b = |q: usize| i >> q & 1 == 1;
    Occupation([b(0) ^ b(1), b(2) ^ b(3), b(4) ^ b(5)])
}

/// `<P phi_110 | phi_011> / <phi_110 | phi_110>` for the sector projections of `sv`, with `P`
/// the block operator. Equals the relative phase `i` for `(|110> + i|011>)/sqrt(2)`.
pub fn relative_phase(sv: &StateVector) -> Complex64 {
    let from = Occupation::EVEN[1];
    let to = Occupation::EVEN[3];
    let phi0 = sv.project(|i| sector_of_index(i) == from);
    let phi1 = sv.project(|i| sector_of_index(i) == to);
    let p = block_operator();
    let x: Vec<bool> = (0..N).map(|q| p.x_bit(q)).collect();
    let z: Vec<bool> = (0..N).map(|q| p.z_bit(q)).collect();
    let mut pphi0 = phi0.clone();
    pphi0.apply_pauli_bits(&x, &z);
    pphi0.inner(&phi1) / phi0.norm_sqr()
}
