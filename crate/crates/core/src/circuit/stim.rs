//! Stim text subset.
//!
//! Supported on parse: `H S S_DAG SQRT_Z SQRT_Z_DAG X Y Z CX CNOT ZCX CZ SQRT_X SQRT_X_DAG
//! SQRT_ZZ SQRT_ZZ_DAG M MZ R RZ X_ERROR Y_ERROR Z_ERROR PAULI_CHANNEL_1 DEPOLARIZE1 DEPOLARIZE2
//! TICK`. `M(p)` carries a readout flip probability. Gates outside plain Stim (natives and
//! rotations) are written as the equivalent Stim Clifford with the exact gate kept in a tag,
//! e.g. `SQRT_X[GPI2(0)] 3`, so export then parse is lossless.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt::Write as _;

use super::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{CliffordMap, Letter, Prim};

/// Single-qubit Stim gates recognised on export, with their primitive sequences.
fn single_qubit_table() -> Vec<(&'static str, Vec<Prim>)> {
    use Prim::*;
    vec![
        ("I", vec![]),
        ("X", vec![X(0)]),
        ("Y", vec![Y(0)]),
        ("Z", vec![Z(0)]),
        ("H", vec![H(0)]),
        ("S", vec![S(0)]),
        ("S_DAG", vec![SDag(0)]),
        ("SQRT_X", vec![H(0), S(0), H(0)]),
        ("SQRT_X_DAG", vec![H(0), SDag(0), H(0)]),
        ("SQRT_Y", vec![H(0), X(0)]),
        ("SQRT_Y_DAG", vec![X(0), H(0)]),
        ("H_XY", vec![X(0), S(0)]),
    ]
}

fn stim_name_for(g: &Gate) -> Result<&'static str> {
    let unrepresentable = || Error::InvalidCircuit(format!("{g:?} has no Stim equivalent"));
    let prims = g.clifford_prims().map_err(|_| unrepresentable())?;
    if let Gate::Zz { angle, .. } = *g {
        return match super::angle_multiple(angle, FRAC_PI_4) {
            Some(0) => Ok("I"),
            Some(1) => Ok("SQRT_ZZ"),
            Some(7) => Ok("SQRT_ZZ_DAG"),
            _ => Err(unrepresentable()),
        };
    }
    let local: Vec<Prim> = prims
        .iter()
        .map(|p| match *p {
            Prim::H(_) => Prim::H(0),
            Prim::S(_) => Prim::S(0),
            Prim::SDag(_) => Prim::SDag(0),
            Prim::X(_) => Prim::X(0),
            Prim::Y(_) => Prim::Y(0),
            Prim::Z(_) => Prim::Z(0),
            other => other,
        })
        .collect();
    let target = CliffordMap::from_prims(1, local);
    single_qubit_table()
        .into_iter()
        .find(|(_, seq)| CliffordMap::from_prims(1, seq.clone()) == target)
        .map(|(name, _)| name)
        .ok_or_else(unrepresentable)
}

fn tag_of(g: &Gate) -> Option<String> {
    Some(match *g {
        Gate::Rx { angle, .. } => format!("RX({angle})"),
        Gate::Rz { angle, .. } => format!("RZ({angle})"),
        Gate::Gpi { phase, .. } => format!("GPI({phase})"),
        Gate::Gpi2 { phase, .. } => format!("GPI2({phase})"),
        Gate::Gz { angle, .. } => format!("GZ({angle})"),
        Gate::Zz { angle, .. } => format!("ZZ({angle})"),
        _ => return None,
    })
}

/// Writes the circuit as Stim text, one instruction per gate.
///
/// Measurements must carry records in program order. A `FLIP_RECORD` is only representable
/// directly after the measurement it flips, where it becomes `M(p)`.
pub fn export_stim(c: &Circuit) -> Result<String> {
    let mut out = String::new();
    let mut next_record = 0usize;
    let mut i = 0;
    while i < c.ops.len() {
        let g = &c.ops[i];
        let qs = g.qubits();
        let targets = qs
            .iter()
            .map(|q| q.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        match *g {
            Gate::H { .. }
            | Gate::S { .. }
            | Gate::SDag { .. }
            | Gate::X { .. }
            | Gate::Y { .. }
            | Gate::Z { .. }
            | Gate::Cz { .. }
            | Gate::Reset { .. } => {
                let name = match g {
                    Gate::Reset { .. } => "R",
                    other => other.name(),
                };
                writeln!(out, "{name} {targets}").unwrap();
            }
            Gate::Cnot { .. } => writeln!(out, "CX {targets}").unwrap(),
            Gate::Rx { .. }
            | Gate::Rz { .. }
            | Gate::Gpi { .. }
            | Gate::Gpi2 { .. }
            | Gate::Gz { .. }
            | Gate::Zz { .. } => {
                let name = stim_name_for(g)?;
                let tag = tag_of(g).expect("tagged kinds");
                writeln!(out, "{name}[{tag}] {targets}").unwrap();
            }
            Gate::MeasureZ { record, .. } => {
                if record != next_record {
                    return Err(Error::InvalidCircuit(format!(
                        "measurement record {record} out of program order"
                    )));
                }
                next_record += 1;
                match c.ops.get(i + 1) {
                    Some(Gate::FlipRecord { record: r, p }) if *r == record => {
                        writeln!(out, "M({p}) {targets}").unwrap();
                        i += 1;
                    }
                    _ => writeln!(out, "M {targets}").unwrap(),
                }
            }
            Gate::PauliError { pauli, p, .. } => {
                let name = match pauli {
                    Letter::X => "X_ERROR",
                    Letter::Y => "Y_ERROR",
                    Letter::Z => "Z_ERROR",
                    Letter::I => {
                        return Err(Error::InvalidCircuit("identity Pauli error".into()));
                    }
                };
                writeln!(out, "{name}({p}) {targets}").unwrap();
            }
            Gate::PauliChannel1 { px, py, pz, .. } => {
                writeln!(out, "PAULI_CHANNEL_1({px}, {py}, {pz}) {targets}").unwrap();
            }
            Gate::Depolarize1 { p, .. } => writeln!(out, "DEPOLARIZE1({p}) {targets}").unwrap(),
            Gate::Depolarize2 { p, .. } => writeln!(out, "DEPOLARIZE2({p}) {targets}").unwrap(),
            Gate::FlipRecord { record, .. } => {
                return Err(Error::InvalidCircuit(format!(
                    "record flip on {record} does not directly follow its measurement"
                )));
            }
            Gate::Barrier { .. } => {
                let list = qs.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",");
                writeln!(out, "TICK[BARRIER:{list}]").unwrap();
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Instruction<'a> {
    name: &'a str,
    tag: Option<&'a str>,
    args: Vec<f64>,
    targets: Vec<usize>,
}

const KNOWN: &[&str] = &[
    "H", "S", "SQRT_Z", "S_DAG", "SQRT_Z_DAG", "X", "Y", "Z", "SQRT_X", "SQRT_X_DAG", "SQRT_Y",
    "SQRT_Y_DAG", "H_XY", "I", "R", "RZ", "CX", "CNOT", "ZCX", "CZ", "SQRT_ZZ", "SQRT_ZZ_DAG",
    "M", "MZ", "X_ERROR", "Y_ERROR", "Z_ERROR", "PAULI_CHANNEL_1", "DEPOLARIZE1", "DEPOLARIZE2",
    "TICK",
];

fn split_instruction(line: &str) -> std::result::Result<Instruction<'_>, String> {
    let name_end = line
        .find(|c: char| c == '[' || c == '(' || c.is_whitespace())
        .unwrap_or(line.len());
    let name = &line[..name_end];
    if !KNOWN.contains(&name) {
        return Err(format!("unsupported instruction {name}"));
    }
    let mut rest = &line[name_end..];
    let mut tag = None;
    if let Some(r) = rest.strip_prefix('[') {
        let close = r.find(']').ok_or("unclosed tag")?;
        tag = Some(&r[..close]);
        rest = &r[close + 1..];
    }
    let mut args = vec![];
    if let Some(r) = rest.strip_prefix('(') {
        let close = r.find(')').ok_or("unclosed parenthesis")?;
        args = r[..close]
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad argument {a:?}: {e}"))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        rest = &r[close + 1..];
    }
    let targets = rest
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| format!("unsupported target {t:?}"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Instruction {
        name,
        tag,
        args,
        targets,
    })
}

fn parse_tag(tag: &str, q: &[usize]) -> std::result::Result<Gate, String> {
    let open = tag.find('(').ok_or_else(|| format!("bad tag {tag:?}"))?;
    if !tag.ends_with(')') {
        return Err(format!("bad tag {tag:?}"));
    }
    let v: f64 = tag[open + 1..tag.len() - 1]
        .trim()
        .parse()
        .map_err(|e| format!("bad tag argument in {tag:?}: {e}"))?;
    let need = |k: usize| {
        if q.len() == k {
            Ok(())
        } else {
            Err(format!("tag {tag:?} expects {k} targets"))
        }
    };
    Ok(match &tag[..open] {
        "RX" => need(1).map(|_| Gate::Rx { q: q[0], angle: v })?,
        "RZ" => need(1).map(|_| Gate::Rz { q: q[0], angle: v })?,
        "GPI" => need(1).map(|_| Gate::Gpi { q: q[0], phase: v })?,
        "GPI2" => need(1).map(|_| Gate::Gpi2 { q: q[0], phase: v })?,
        "GZ" => need(1).map(|_| Gate::Gz { q: q[0], angle: v })?,
        "ZZ" => need(2).map(|_| Gate::Zz {
            a: q[0],
            b: q[1],
            angle: v,
        })?,
        other => return Err(format!("unknown tag gate {other:?}")),
    })
}

/// Parses the supported Stim subset. Errors name the offending line (1-based).
pub fn parse_stim(text: &str) -> Result<Circuit> {
    let mut ops: Vec<Gate> = vec![];
    let mut n_records = 0usize;
    let mut max_q: Option<usize> = None;
    let mut clifford = true;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::StimParse {
            line: lineno + 1,
            message,
        };
        let ins = split_instruction(line).map_err(err)?;
        if ins.name == "TICK" {
            if let Some(list) = ins.tag.and_then(|t| t.strip_prefix("BARRIER:")) {
                let qubits = list
                    .split(',')
                    .filter(|t| !t.is_empty())
                    .map(|t| t.trim().parse::<usize>().map_err(|e| err(format!("bad barrier qubit {t:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                if let Some(&m) = qubits.iter().max() {
                    max_q = Some(max_q.map_or(m, |x| x.max(m)));
                }
                ops.push(Gate::Barrier { qubits });
            }
            continue;
        }
        if let Some(&m) = ins.targets.iter().max() {
            max_q = Some(max_q.map_or(m, |x| x.max(m)));
        }
        let arity = |k: usize| -> Result<()> {
            if ins.targets.is_empty() || ins.targets.len() % k != 0 {
                Err(err(format!(
                    "{} needs a positive multiple of {k} targets",
                    ins.name
                )))
            } else {
                Ok(())
            }
        };
        let nargs = |k: usize| -> Result<()> {
            if ins.args.len() != k {
                Err(err(format!("{} takes {k} argument(s)", ins.name)))
            } else {
                Ok(())
            }
        };

        if let Some(tag) = ins.tag {
            let k = if tag.starts_with("ZZ") { 2 } else { 1 };
            arity(k)?;
            for chunk in ins.targets.chunks(k) {
                let g = parse_tag(tag, chunk).map_err(err)?;
                if g.clifford_prims().is_err() {
                    clifford = false;
                }
                ops.push(g);
            }
            continue;
        }

        let t = &ins.targets;
        match ins.name {
            "H" | "S" | "SQRT_Z" | "S_DAG" | "SQRT_Z_DAG" | "X" | "Y" | "Z" | "SQRT_X"
            | "SQRT_X_DAG" | "R" | "RZ" => {
                nargs(0)?;
                arity(1)?;
                for &q in t {
                    ops.push(match ins.name {
                        "H" => Gate::H { q },
                        "S" | "SQRT_Z" => Gate::S { q },
                        "S_DAG" | "SQRT_Z_DAG" => Gate::SDag { q },
                        "X" => Gate::X { q },
                        "Y" => Gate::Y { q },
                        "Z" => Gate::Z { q },
                        "SQRT_X" => Gate::Rx {
                            q,
                            angle: FRAC_PI_2,
                        },
                        "SQRT_X_DAG" => Gate::Rx {
                            q,
                            angle: -FRAC_PI_2,
                        },
                        _ => Gate::Reset { q },
                    });
                }
            }
            "CX" | "CNOT" | "ZCX" | "CZ" | "SQRT_ZZ" | "SQRT_ZZ_DAG" => {
                nargs(0)?;
                arity(2)?;
                for p in t.chunks(2) {
                    let (a, b) = (p[0], p[1]);
                    ops.push(match ins.name {
                        "CZ" => Gate::Cz { a, b },
                        "SQRT_ZZ" => Gate::Zz {
                            a,
                            b,
                            angle: FRAC_PI_4,
                        },
                        "SQRT_ZZ_DAG" => Gate::Zz {
                            a,
                            b,
                            angle: -FRAC_PI_4,
                        },
                        _ => Gate::Cnot {
                            control: a,
                            target: b,
                        },
                    });
                }
            }
            "M" | "MZ" => {
                if ins.args.len() > 1 {
                    return Err(err("M takes at most one argument".into()));
                }
                arity(1)?;
                for &q in t {
                    let record = n_records;
                    n_records += 1;
                    ops.push(Gate::MeasureZ { q, record });
                    if let Some(&p) = ins.args.first() {
                        ops.push(Gate::FlipRecord { record, p });
                    }
                }
            }
            "X_ERROR" | "Y_ERROR" | "Z_ERROR" => {
                nargs(1)?;
                arity(1)?;
                let pauli = match ins.name {
                    "X_ERROR" => Letter::X,
                    "Y_ERROR" => Letter::Y,
                    _ => Letter::Z,
                };
                for &q in t {
                    ops.push(Gate::PauliError {
                        q,
                        pauli,
                        p: ins.args[0],
                    });
                }
            }
            "PAULI_CHANNEL_1" => {
                nargs(3)?;
                arity(1)?;
                for &q in t {
                    ops.push(Gate::PauliChannel1 {
                        q,
                        px: ins.args[0],
                        py: ins.args[1],
                        pz: ins.args[2],
                    });
                }
            }
            "DEPOLARIZE1" => {
                nargs(1)?;
                arity(1)?;
                for &q in t {
                    ops.push(Gate::Depolarize1 { q, p: ins.args[0] });
                }
            }
            "DEPOLARIZE2" => {
                nargs(1)?;
                arity(2)?;
                for p in t.chunks(2) {
                    ops.push(Gate::Depolarize2 {
                        a: p[0],
                        b: p[1],
                        p: ins.args[0],
                    });
                }
            }
            other => return Err(err(format!("unsupported instruction {other}"))),
        }
    }

    let c = Circuit {
        n_qubits: max_q.map_or(0, |m| m + 1),
        ops,
        n_records,
        clifford,
    };
    c.validate()?;
    Ok(c)
}
