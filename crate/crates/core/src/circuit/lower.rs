use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use super::{angle_multiple, Circuit, Gate};
use crate::error::{Error, Result};

/// Gate counts of a lowered circuit, in the shape of a compiled-width report.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NativeCounts {
    pub qubits: usize,
    pub zz: usize,
    pub gpi: usize,
    pub gpi2: usize,
    /// Virtual Z rotations, not counted in `gates`.
    pub gz: usize,
    pub measure: usize,
    pub reset: usize,
    /// Physical gate total: GPI + GPI2 + ZZ + measurements + resets.
    pub gates: usize,
}

impl NativeCounts {
    pub fn of(c: &Circuit) -> Self {
        let mut k = NativeCounts {
            qubits: c.n_qubits,
            ..Default::default()
        };
        for g in &c.ops {
            match g {
                Gate::Zz { .. } => k.zz += 1,
                Gate::Gpi { .. } => k.gpi += 1,
                Gate::Gpi2 { .. } => k.gpi2 += 1,
                Gate::Gz { .. } => k.gz += 1,
                Gate::MeasureZ { .. } => k.measure += 1,
                Gate::Reset { .. } => k.reset += 1,
                _ => {}
            }
        }
        k.gates = k.zz + k.gpi + k.gpi2 + k.measure + k.reset;
        k
    }
}

fn h_native(q: usize, out: &mut Vec<Gate>) {
    // H = GPI2(pi/2) . Z
    out.push(Gate::Gz { q, angle: PI });
    out.push(Gate::Gpi2 {
        q,
        phase: FRAC_PI_2,
    });
}

fn cz_native(a: usize, b: usize, out: &mut Vec<Gate>) {
    // CZ = ZZ(-pi/4) . GZ_a(pi/2) . GZ_b(pi/2), all diagonal
    out.push(Gate::Zz {
        a,
        b,
        angle: -FRAC_PI_4,
    });
    out.push(Gate::Gz {
        q: a,
        angle: FRAC_PI_2,
    });
    out.push(Gate::Gz {
        q: b,
        angle: FRAC_PI_2,
    });
}

fn rx_native(q: usize, angle: f64, clifford: bool, out: &mut Vec<Gate>) -> Result<()> {
    match angle_multiple(angle, FRAC_PI_2) {
        Some(0) => {}
        Some(1) => out.push(Gate::Gpi2 { q, phase: 0.0 }),
        Some(2) => out.push(Gate::Gpi { q, phase: 0.0 }),
        Some(3) => out.push(Gate::Gpi2 { q, phase: PI }),
        _ if clifford => return Err(Error::NonClifford(format!("RX({angle}) on {q}"))),
        _ => {
            // RX(t) = H RZ(t) H
            h_native(q, out);
            out.push(Gate::Gz { q, angle });
            h_native(q, out);
        }
    }
    Ok(())
}

/// Rewrites a circuit into GPI, GPI2, virtual GZ and ZZ(+-pi/4) plus measurement and reset.
///
/// Each CNOT and CZ becomes exactly one ZZ gate. No cancellation or merging is attempted.
pub fn lower_to_native(c: &Circuit) -> Result<Circuit> {
    let mut ops = Vec::with_capacity(c.ops.len() * 3);
    for g in &c.ops {
        match *g {
            Gate::H { q } => h_native(q, &mut ops),
            Gate::S { q } => ops.push(Gate::Gz {
                q,
                angle: FRAC_PI_2,
            }),
            Gate::SDag { q } => ops.push(Gate::Gz {
                q,
                angle: -FRAC_PI_2,
            }),
            Gate::Z { q } => ops.push(Gate::Gz { q, angle: PI }),
            Gate::X { q } => ops.push(Gate::Gpi { q, phase: 0.0 }),
            Gate::Y { q } => ops.push(Gate::Gpi {
                q,
                phase: FRAC_PI_2,
            }),
            Gate::Rz { q, angle } => {
                if c.clifford && angle_multiple(angle, FRAC_PI_2).is_none() {
                    return Err(Error::NonClifford(format!("RZ({angle}) on {q}")));
                }
                if angle_multiple(angle, 2.0 * PI) != Some(0) {
                    ops.push(Gate::Gz { q, angle });
                }
            }
            Gate::Rx { q, angle } => rx_native(q, angle, c.clifford, &mut ops)?,
            Gate::Cz { a, b } => cz_native(a, b, &mut ops),
            Gate::Cnot { control, target } => {
                h_native(target, &mut ops);
                cz_native(control, target, &mut ops);
                h_native(target, &mut ops);
            }
            _ if g.is_native() => ops.push(g.clone()),
            _ => unreachable!("all gate kinds handled"),
        }
    }
    Ok(Circuit {
        n_qubits: c.n_qubits,
        ops,
        n_records: c.n_records,
        clifford: c.clifford,
    })
}
