//! CNOT-ladder synthesis of Pauli exponentials and the direct encoded Trotter circuit.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gse;
use crate::pauli::{Letter, PauliString};

/// `exp(+i theta/2 P)`.
///
/// With this sign the encoded block `exp(i pi/4 YZYYZY)` is `PauliRotation { YZYYZY, pi/2 }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliRotation {
    pub pauli: PauliString,
    pub theta: f64,
}

impl PauliRotation {
    pub fn new(pauli: PauliString, theta: f64) -> Result<Self> {
        if pauli.is_identity() {
            return Err(Error::IdentityRotation);
        }
        Ok(Self { pauli, theta })
    }

    /// Clifford iff theta is a multiple of pi/2.
    pub fn is_clifford(&self) -> bool {
        let k = self.theta / FRAC_PI_2;
        (k - k.round()).abs() < 1e-9
    }
}

/// Ladder circuit for `r` over the support in ascending order: basis changes (RX(pi/2) on Y,
/// H on X), CNOTs down the support, RZ(-theta) on the last support qubit, then the mirror.
/// Realizes `exp(+i theta/2 P)` up to global phase.
pub fn pauli_exp_ladder(r: &PauliRotation) -> Result<Circuit> {
    let p = &r.pauli;
    if p.is_identity() {
        return Err(Error::IdentityRotation);
    }
    if p.sign_bit() != Some(false) {
        return Err(Error::InvalidCircuit(format!("rotation axis {p} must be +P")));
    }
    let n = p.num_qubits();
    let support = p.support();
    let mut c = Circuit::new(n);
    c.clifford = r.is_clifford();
    let basis = |c: &mut Circuit, undo: bool| {
        for &q in &support {
            match p.letter(q) {
                Letter::X => {
                    c.h(q);
                }
                Letter::Y => {
                    c.rx(q, if undo { -FRAC_PI_2 } else { FRAC_PI_2 });
                }
                _ => {}
            }
        }
    };
    basis(&mut c, false);
    for w in support.windows(2) {
        c.cnot(w[0], w[1]);
    }
    c.rz(*support.last().unwrap(), -r.theta);
    for w in support.windows(2).rev() {
        c.cnot(w[0], w[1]);
    }
    basis(&mut c, true);
    Ok(c)
}

/// The encoded block rotation `exp(i pi/4 YZYYZY)`.
pub fn block_rotation() -> PauliRotation {
    PauliRotation::new(gse::block_operator(), FRAC_PI_2).expect("nonidentity")
}

/// Ladder circuit of the block rotation; the Clifford `C` teleported by CliNR.
pub fn block_clifford() -> Result<Circuit> {
    pauli_exp_ladder(&block_rotation())
}

/// Unitary part of the direct circuit: encoded-state preparation then the block ladder.
pub fn physical_trotter_unitary() -> Result<Circuit> {
    let mut c = gse::prep_circuit()?;
    c.append(&block_clifford()?);
    Ok(c)
}

/// Direct baseline: preparation, block ladder, Z readout of all six qubits (records 0..6).
pub fn physical_trotter_circuit() -> Result<Circuit> {
    let mut c = physical_trotter_unitary()?;
    for q in 0..gse::N {
        c.measure(q);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    #[test]
    fn weight_one_is_single_rz() {
        let r = PauliRotation::new("IZI".parse().unwrap(), FRAC_PI_2).unwrap();
        let c = pauli_exp_ladder(&r).unwrap();
        assert_eq!(c.ops.len(), 1);
        assert!(matches!(c.ops[0], Gate::Rz { q: 1, .. }));
    }

    #[test]
    fn zz_uses_two_cnots() {
        let r = PauliRotation::new("ZZ".parse().unwrap(), FRAC_PI_2).unwrap();
        assert_eq!(pauli_exp_ladder(&r).unwrap().two_qubit_count(), 2);
    }

    #[test]
    fn identity_rejected() {
        assert!(matches!(
            PauliRotation::new(PauliString::identity(3), 1.0),
            Err(Error::IdentityRotation)
        ));
    }
}
