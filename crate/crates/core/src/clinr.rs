//! Clifford noise reduction: Bell+Clifford resource states, Shor-style cat-state verification
//! under mid-circuit or end-of-circuit readout, transversal Bell measurement, post-selection
//! and the feed-forward Pauli frame.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::graph::{emit_graph_circuit, extract_graph, GraphCompilation};
use crate::pauli::{CliffordMap, Direction, Letter, PauliGroup, PauliString};
use crate::sim::{ShotBatch, Tableau};

/// Stabilizer pairs on the 6-qubit block's resource (qubits 6..18 of the full layout). The
/// first of each pair is read out mid-circuit, the second at the end.
pub const REFERENCE_PAIRS: [(&str, &str, &str); 6] = [
    ("S1", "X6 Y8 Z12 Z13 Y15 Z16 Y17", "Z6 X9 Z12 X15"),
    ("S2", "Y10 Z11 Y16 Z17", "Z6 Z8 Z10 Z12 Z14 Z16"),
    ("S3", "Y10 Z11 Y16 Z17", "Z6 Z7 Z11 Z12 Z13 Z17"),
    ("S4", "Z8 Y10 Z14 Y16", "Y6 X8 Y9 Z13 Z14 Z16 Y17"),
    ("S5", "Y6 Y8 Y9 Y10 Z13 X16 Y17", "X6 Y9 Z12 Z13 Y14 Z16 Y17"),
    ("S6", "Z6 X7 Z10 Z12 X13 Z16", "Z6 Z8 Y11 Z12 Z14 Y17"),
];

/// `n` Bell pairs with the Clifford `C` applied to the second half.
#[derive(Clone, Debug)]
pub struct ResourceSpec {
    pub n: usize,
    /// `C` as a measurement-free Clifford circuit on `n` qubits.
    pub circuit: Circuit,
    pub clifford: CliffordMap,
    /// `X_i (x) C X_i C^dag` and `Z_i (x) C Z_i C^dag` on `2n` qubits.
    pub generators: Vec<PauliString>,
}

/// Resource for the Clifford circuit `c`.
pub fn bell_clifford_resource(c: &Circuit) -> Result<ResourceSpec> {
    let n = c.n_qubits;
    let clifford = CliffordMap::from_prims(n, c.to_prims()?);
    let mut generators = Vec::with_capacity(2 * n);
    for i in 0..n {
        for (letter, img) in [(Letter::X, clifford.x_image(i)), (Letter::Z, clifford.z_image(i))] {
            let mut g = img.embed(2 * n, n);
            g.set(i, letter);
            generators.push(g);
        }
    }
    Ok(ResourceSpec {
        n,
        circuit: c.clone(),
        clifford,
        generators,
    })
}

impl ResourceSpec {
    pub fn tableau(&self) -> Result<Tableau> {
        Tableau::from_stabilizers(&self.generators)
    }

    pub fn group(&self) -> PauliGroup {
        PauliGroup::new(&self.generators).expect("generators share a width")
    }

    /// `2^(2n) - 1`
    pub fn nonidentity_stabilizer_count(&self) -> u128 {
        (1u128 << (2 * self.n)) - 1
    }

    /// Unordered pairs of distinct nonidentity stabilizers.
    pub fn stabilizer_pair_count(&self) -> u128 {
        let s = self.nonidentity_stabilizer_count();
        s * (s - 1) / 2
    }

    /// Every nonidentity stabilizer with its sign, in generator-subset order.
    pub fn enumerate_stabilizers(&self) -> Vec<PauliString> {
        let m = self.generators.len();
        assert!(m < 32, "enumeration limited to 31 generators");
        let mut out = Vec::with_capacity((1usize << m) - 1);
        // Gray-code walk: one multiplication per element
        let mut acc = PauliString::identity(2 * self.n);
        for k in 1u64..(1 << m) {
            let bit = k.trailing_zeros() as usize;
            acc = acc.multiply(&self.generators[bit]).expect("same width");
            out.push(acc.clone());
        }
        out
    }

    /// Bell pairs (H, CNOT) then `C` on the second half.
    pub fn naive_circuit(&self) -> Circuit {
        let n = self.n;
        let mut c = Circuit::new(2 * n);
        for i in 0..n {
            c.h(i).cnot(i, n + i);
        }
        let map: Vec<usize> = (n..2 * n).collect();
        c.append_mapped(&self.circuit, &map);
        c
    }
}

/// How the resource state is prepared.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResourcePrep {
    Naive,
    Graph { compilation: GraphCompilation },
}

impl ResourcePrep {
    pub fn circuit(&self, spec: &ResourceSpec) -> Circuit {
        match self {
            ResourcePrep::Naive => spec.naive_circuit(),
            ResourcePrep::Graph { compilation } => emit_graph_circuit(compilation),
        }
    }

    /// Direct graph extraction of the resource (no search).
    pub fn extracted(spec: &ResourceSpec) -> Result<Self> {
        Ok(ResourcePrep::Graph {
            compilation: extract_graph(&spec.tableau()?)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Readout and reset right after the parity circuit; ancillas return to the pool.
    Mcm,
    /// Same parity circuit; readout deferred to the end of the circuit.
    Ecm,
    /// Same gates as `Ecm` but the outcome is ignored.
    Unverified,
}

/// One stabilizer check on the resource (indices local to the `2n` resource qubits).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub stabilizer: PauliString,
    pub schedule: Schedule,
}

impl Check {
    pub fn weight(&self) -> usize {
        self.stabilizer.weight()
    }

    /// Expected parity of the cat readout: odd for a `-P` stabilizer.
    pub fn expected_parity(&self) -> bool {
        self.stabilizer.sign_bit() == Some(true)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationPlan {
    pub checks: Vec<Check>,
    /// Adds a flag ancilla per gadget reading `Z_first Z_last` of the cat; off by default.
    #[serde(default)]
    pub verify_cat: bool,
}

impl VerificationPlan {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Check on `text` (sparse `X6 Y8 ...` or dense form, qubits offset by `offset`). Without an
    /// explicit sign the sign is taken from the resource group; an explicit sign is kept.
    pub fn check(spec: &ResourceSpec, text: &str, offset: usize, schedule: Schedule) -> Result<Check> {
        let t = text.trim();
        let explicit = t.starts_with(['+', '-', '−']);
        let p = if t.chars().any(|c| c.is_ascii_digit()) {
            PauliString::parse_sparse(t, 2 * spec.n, offset)?
        } else {
            t.parse::<PauliString>()?
        };
        if p.num_qubits() != 2 * spec.n {
            return Err(Error::LengthMismatch(p.num_qubits(), 2 * spec.n));
        }
        let elem = spec
            .group()
            .find(&p)
            .ok_or_else(|| Error::NotAStabilizer(p.to_sparse(offset)))?;
        if p.is_identity() {
            return Err(Error::NotAStabilizer("identity".into()));
        }
        Ok(Check {
            stabilizer: if explicit { p } else { elem },
            schedule,
        })
    }

    /// The labelled reference pair: first check MCM, second ECM.
    pub fn reference_pair(spec: &ResourceSpec, label: &str) -> Result<Self> {
        let &(_, a, b) = REFERENCE_PAIRS
            .iter()
            .find(|(l, _, _)| *l == label)
            .ok_or_else(|| Error::Config(format!("unknown reference pair {label}")))?;
        let off = spec.n;
        Ok(Self {
            checks: vec![
                Self::check(spec, a, off, Schedule::Mcm)?,
                Self::check(spec, b, off, Schedule::Ecm)?,
            ],
            verify_cat: false,
        })
    }

    /// Rejects signs that disagree with the group (such a check rejects every shot).
    pub fn validate(&self, spec: &ResourceSpec) -> Result<()> {
        let g = spec.group();
        for c in &self.checks {
            match g.find(&c.stabilizer) {
                Some(e) if e == c.stabilizer => {}
                _ => return Err(Error::NotAStabilizer(c.stabilizer.to_string())),
            }
        }
        Ok(())
    }
}

/// Qubit and record layout of a CliNR circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClinrLayout {
    pub n: usize,
    pub data: Vec<usize>,
    /// Resource half entangled with the data by the Bell measurement.
    pub resource_in: Vec<usize>,
    /// Resource half carrying the output.
    pub resource_out: Vec<usize>,
    pub ancillas: Vec<usize>,
    /// Per check, the cat readout records.
    pub check_records: Vec<Vec<usize>>,
    /// Per check, the cat flag record when `verify_cat` is set.
    pub flag_records: Vec<Option<usize>>,
    /// Bell outcomes `o_i` (data, X basis).
    pub data_records: Vec<usize>,
    /// Bell outcomes `o_{n+i}` (first resource half, Z basis).
    pub resource_records: Vec<usize>,
    /// Raw output readout.
    pub output_records: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ClinrCircuit {
    pub circuit: Circuit,
    pub layout: ClinrLayout,
    pub plan: VerificationPlan,
    pub decoder: ShotDecoder,
}

struct AncillaPool {
    next: usize,
    free: Vec<usize>,
    all: Vec<usize>,
}

impl AncillaPool {
    fn take(&mut self, k: usize) -> Vec<usize> {
        let mut v = vec![];
        while v.len() < k {
            if self.free.is_empty() {
                self.free.push(self.next);
                self.all.push(self.next);
                self.next += 1;
            }
            v.push(self.free.remove(0));
        }
        v
    }
}

/// Cat state on `anc`, controlled Paulis onto the support of `s` (mapped through `qmap`), then
/// H on every ancilla. With `flag`, the cat's end-to-end `ZZ` parity is copied onto it before
/// the controlled Paulis. Readout is left to the caller.
pub fn shor_gadget(c: &mut Circuit, s: &PauliString, qmap: &[usize], anc: &[usize], flag: Option<usize>) {
    let support = s.support();
    assert_eq!(support.len(), anc.len());
    c.h(anc[0]);
    let mut have = 1;
    while have < anc.len() {
        for i in 0..have.min(anc.len() - have) {
            c.cnot(anc[i], anc[i + have]);
        }
        have *= 2;
    }
    if let Some(f) = flag {
        c.cnot(anc[0], f).cnot(anc[anc.len() - 1], f);
    }
    for (j, &q) in support.iter().enumerate() {
        let t = qmap[q];
        match s.letter(q) {
            Letter::X => {
                c.cnot(anc[j], t);
            }
            Letter::Z => {
                c.cz(anc[j], t);
            }
            Letter::Y => {
                c.s_dag(t).cnot(anc[j], t).s(t);
            }
            Letter::I => unreachable!(),
        }
    }
    for &a in anc {
        c.h(a);
    }
}

/// Full CliNR circuit: data preparation, resource preparation, verification gadgets per
/// plan, transversal Bell measurement and output readout. Qubits: data `0..n`, resource
/// `n..3n`, ancillas from `3n`.
pub fn clinr_circuit(
    data_prep: &Circuit,
    spec: &ResourceSpec,
    plan: &VerificationPlan,
    prep: &ResourcePrep,
) -> Result<ClinrCircuit> {
    let n = spec.n;
    if data_prep.n_qubits != n {
        return Err(Error::LengthMismatch(data_prep.n_qubits, n));
    }
    if data_prep.n_records != 0 {
        return Err(Error::InvalidCircuit("data preparation must be measurement-free".into()));
    }
    let res_circ = prep.circuit(spec);
    if res_circ.n_qubits != 2 * n {
        return Err(Error::LengthMismatch(res_circ.n_qubits, 2 * n));
    }
    let flagged = |ch: &Check| usize::from(plan.verify_cat && ch.weight() > 1);
    let max_anc: usize = plan.checks.iter().map(|ch| ch.weight() + flagged(ch)).sum();
    let mut c = Circuit::new(3 * n + max_anc);
    c.clifford = data_prep.clifford && res_circ.clifford;
    let data: Vec<usize> = (0..n).collect();
    let res: Vec<usize> = (n..3 * n).collect();
    c.append_mapped(data_prep, &data);
    c.append_mapped(&res_circ, &res);

    let mut pool = AncillaPool {
        next: 3 * n,
        free: vec![],
        all: vec![],
    };
    let mut check_records: Vec<Vec<usize>> = vec![vec![]; plan.checks.len()];
    let mut flag_records: Vec<Option<usize>> = vec![None; plan.checks.len()];
    let mut deferred: Vec<(usize, usize)> = vec![];
    let mut deferred_flags: Vec<(usize, usize)> = vec![];
    for (ci, check) in plan.checks.iter().enumerate() {
        let anc = pool.take(check.weight());
        let flag = (flagged(check) == 1).then(|| pool.take(1)[0]);
        shor_gadget(&mut c, &check.stabilizer, &res, &anc, flag);
        match check.schedule {
            Schedule::Mcm => {
                for &a in &anc {
                    check_records[ci].push(c.measure(a));
                    c.reset(a);
                }
                pool.free.extend(&anc);
                let mut fence = anc.clone();
                if let Some(f) = flag {
                    flag_records[ci] = Some(c.measure(f));
                    c.reset(f);
                    pool.free.push(f);
                    fence.push(f);
                }
                // the readout completes before the resource is consumed
                fence.extend(&res);
                c.push(Gate::Barrier { qubits: fence });
            }
            Schedule::Ecm | Schedule::Unverified => {
                deferred.extend(anc.iter().map(|&a| (ci, a)));
                deferred_flags.extend(flag.map(|f| (ci, f)));
            }
        }
    }
    for i in 0..n {
        c.cnot(data[i], res[i]);
    }
    for &d in &data {
        c.h(d);
    }
    let data_records: Vec<usize> = data.iter().map(|&q| c.measure(q)).collect();
    let resource_records: Vec<usize> = res[..n].iter().map(|&q| c.measure(q)).collect();
    let output_records: Vec<usize> = res[n..].iter().map(|&q| c.measure(q)).collect();
    for (ci, a) in deferred {
        check_records[ci].push(c.measure(a));
    }
    for (ci, f) in deferred_flags {
        flag_records[ci] = Some(c.measure(f));
    }
    c.n_qubits = pool.next;
    c.validate()?;

    let layout = ClinrLayout {
        n,
        data,
        resource_in: res[..n].to_vec(),
        resource_out: res[n..].to_vec(),
        ancillas: pool.all,
        check_records,
        flag_records,
        data_records,
        resource_records,
        output_records,
    };
    let decoder = ShotDecoder::clinr(&layout, plan, &spec.clifford);
    Ok(ClinrCircuit {
        circuit: c,
        layout,
        plan: plan.clone(),
        decoder,
    })
}

/// `Q = prod_i (C X_i C^dag)^{o_{n+i}} (C Z_i C^dag)^{o_i}` with `o_i` the data (X-basis)
/// outcomes and `o_{n+i}` the first resource half (Z-basis) outcomes. Applying `Q` to the
/// output register yields `C|psi>`.
pub fn feedforward_frame(o: &[bool], c: &CliffordMap) -> PauliString {
    let n = c.num_qubits();
    assert_eq!(o.len(), 2 * n, "2n outcome bits");
    let mut q = PauliString::identity(n);
    for i in 0..n {
        if o[n + i] {
            q = q.multiply(c.x_image(i)).expect("same width");
        }
        if o[i] {
            q = q.multiply(c.z_image(i)).expect("same width");
        }
    }
    q
}

/// Same frame expressed with the inverse map, for callers holding `C^dag`.
pub fn feedforward_frame_inverse(o: &[bool], c_dag: &CliffordMap) -> Result<PauliString> {
    let n = c_dag.num_qubits();
    let mut q = PauliString::identity(n);
    for i in 0..n {
        if o[n + i] {
            q = q.multiply(&c_dag.conjugate(&PauliString::single(n, i, Letter::X), Direction::Inverse)?)?;
        }
        if o[i] {
            q = q.multiply(&c_dag.conjugate(&PauliString::single(n, i, Letter::Z), Direction::Inverse)?)?;
        }
    }
    Ok(q)
}

/// Readout of one verification check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReadout {
    pub records: Vec<usize>,
    pub expected_parity: bool,
    /// False for unverified gadgets.
    pub enforced: bool,
}

/// Classical post-processing: verification post-selection and frame correction of the output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotDecoder {
    pub outputs: Vec<usize>,
    pub checks: Vec<CheckReadout>,
    /// `(record, output positions flipped when the record reads 1)`.
    pub frame: Vec<(usize, Vec<usize>)>,
}

/// Per-shot view of a CliNR run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClinrShot {
    /// Per readout (checks, then cat flags), whether the parity matched the expected value.
    pub verification: Vec<bool>,
    /// `o_0 .. o_{2n-1}`.
    pub bell: Vec<bool>,
    /// Output bits after frame correction.
    pub data: Vec<bool>,
    pub accepted: bool,
}

/// Post-selected output histogram.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Postselected {
    pub total: u64,
    pub accepted: u64,
    /// Shots failing each readout, checks then cat flags (a shot may fail several).
    pub check_rejections: Vec<u64>,
    /// Frame-corrected output bitstrings (position 0 first) of accepted shots.
    pub counts: BTreeMap<String, u64>,
}

impl Postselected {
    pub fn acceptance_rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.accepted as f64 / self.total as f64
        }
    }

    /// Accepted counts, or `EmptyCounts` when nothing was accepted.
    pub fn accepted_counts(&self) -> Result<&BTreeMap<String, u64>> {
        if self.accepted == 0 {
            Err(Error::EmptyCounts)
        } else {
            Ok(&self.counts)
        }
    }
}

impl ShotDecoder {
    /// Plain readout of `outputs`, no checks and no frame.
    pub fn direct(outputs: Vec<usize>) -> Self {
        Self {
            outputs,
            checks: vec![],
            frame: vec![],
        }
    }

    pub fn clinr(layout: &ClinrLayout, plan: &VerificationPlan, c: &CliffordMap) -> Self {
        let n = layout.n;
        let xs = |p: &PauliString| (0..n).filter(|&j| p.x_bit(j)).collect::<Vec<_>>();
        let mut frame = vec![];
        for i in 0..n {
            frame.push((layout.resource_records[i], xs(c.x_image(i))));
            frame.push((layout.data_records[i], xs(c.z_image(i))));
        }
        frame.retain(|(_, f)| !f.is_empty());
        let mut checks: Vec<CheckReadout> = plan
            .checks
            .iter()
            .zip(&layout.check_records)
            .map(|(ch, rec)| CheckReadout {
                records: rec.clone(),
                expected_parity: ch.expected_parity(),
                enforced: ch.schedule != Schedule::Unverified,
            })
            .collect();
        // flag readouts follow the checks
        for (ch, f) in plan.checks.iter().zip(&layout.flag_records) {
            if let Some(f) = f {
                checks.push(CheckReadout {
                    records: vec![*f],
                    expected_parity: false,
                    enforced: ch.schedule != Schedule::Unverified,
                });
            }
        }
        Self {
            outputs: layout.output_records.clone(),
            checks,
            frame,
        }
    }

    pub fn shot(&self, records: &[bool], bell_records: &[usize]) -> ClinrShot {
        let verification: Vec<bool> = self
            .checks
            .iter()
            .map(|c| c.records.iter().fold(false, |a, &r| a ^ records[r]) == c.expected_parity)
            .collect();
        let accepted = self
            .checks
            .iter()
            .zip(&verification)
            .all(|(c, &ok)| ok || !c.enforced);
        let mut data: Vec<bool> = self.outputs.iter().map(|&r| records[r]).collect();
        for (r, flips) in &self.frame {
            if records[*r] {
                for &j in flips {
                    data[j] ^= true;
                }
            }
        }
        ClinrShot {
            verification,
            bell: bell_records.iter().map(|&r| records[r]).collect(),
            data,
            accepted,
        }
    }

    /// Word-parallel post-selection and frame correction over a batch.
    pub fn postselect(&self, batch: &ShotBatch) -> Postselected {
        let words = batch.words();
        let n_out = self.outputs.len();
        assert!(n_out <= 20, "histogram limited to 20 output bits");
        let mut bins = vec![0u64; 1 << n_out];
        let mut check_rejections = vec![0u64; self.checks.len()];
        let mut accepted_total = 0u64;
        let mut out = vec![0u64; n_out];
        for w in 0..words {
            let valid = batch.valid_mask(w);
            let mut accept = valid;
            for (ci, c) in self.checks.iter().enumerate() {
                let mut parity = if c.expected_parity { !0u64 } else { 0 };
                for &r in &c.records {
                    parity ^= batch.planes[r][w];
                }
                let fail = parity & valid;
                check_rejections[ci] += fail.count_ones() as u64;
                if c.enforced {
                    accept &= !fail;
                }
            }
            for (j, &r) in self.outputs.iter().enumerate() {
                out[j] = batch.planes[r][w];
            }
            for (r, flips) in &self.frame {
                let m = batch.planes[*r][w];
                for &j in flips {
                    out[j] ^= m;
                }
            }
            accepted_total += accept.count_ones() as u64;
            let mut rest = accept;
            while rest != 0 {
                let b = rest.trailing_zeros();
                rest &= rest - 1;
                let mut key = 0usize;
                for (j, o) in out.iter().enumerate() {
                    key |= ((o >> b & 1) as usize) << j;
                }
                bins[key] += 1;
            }
        }
        let counts = bins
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(k, &v)| ((0..n_out).map(|j| if k >> j & 1 == 1 { '1' } else { '0' }).collect(), v))
            .collect();
        Postselected {
            total: batch.shots as u64,
            accepted: accepted_total,
            check_rejections,
            counts,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_qubit(c: Circuit) -> ResourceSpec {
        bell_clifford_resource(&c).unwrap()
    }

    #[test]
    fn identity_resource_is_bell_pair() {
        let spec = one_qubit(Circuit::new(1));
        let g: Vec<String> = spec.generators.iter().map(|p| p.to_string()).collect();
        assert_eq!(g, vec!["+XX", "+ZZ"]);
    }

    #[test]
    fn hadamard_resource() {
        let mut c = Circuit::new(1);
        c.h(0);
        let g: Vec<String> = one_qubit(c).generators.iter().map(|p| p.to_string()).collect();
        assert_eq!(g, vec!["+XZ", "+ZX"]);
    }

    #[test]
    fn frame_examples() {
        let id = CliffordMap::identity(1);
        assert!(feedforward_frame(&[false, false], &id).is_identity());
        assert_eq!(feedforward_frame(&[false, true], &id).to_string(), "+X");
        let mut c = Circuit::new(1);
        c.h(0);
        let h = one_qubit(c).clifford;
        assert_eq!(feedforward_frame(&[false, true], &h).unsigned().to_string(), "+Z");
    }

    #[test]
    fn pair_counts() {
        let spec = bell_clifford_resource(&Circuit::new(6)).unwrap();
        assert_eq!(spec.nonidentity_stabilizer_count(), 4095);
        assert_eq!(spec.stabilizer_pair_count(), 8_382_465);
    }
}
