use serde::{Deserialize, Serialize};

use super::{Circuit, Gate};

/// Physical duration of a single-qubit layer, seconds.
pub const SINGLE_LAYER_SECONDS: f64 = 130e-6;
/// Physical duration of a two-qubit layer, seconds.
pub const TWO_LAYER_SECONDS: f64 = 950e-6;
/// Physical duration of a measurement layer, seconds.
pub const MEASURE_LAYER_SECONDS: f64 = 400e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Single,
    Two,
    Measure,
    /// Holds only virtual gates; only produced for circuits without physical operations.
    Virtual,
}

impl LayerKind {
    pub fn duration(self) -> f64 {
        match self {
            LayerKind::Single => SINGLE_LAYER_SECONDS,
            LayerKind::Two => TWO_LAYER_SECONDS,
            LayerKind::Measure => MEASURE_LAYER_SECONDS,
            LayerKind::Virtual => 0.0,
        }
    }

    fn of(g: &Gate) -> Option<LayerKind> {
        if g.is_virtual() || g.is_noise() || matches!(g, Gate::Barrier { .. }) {
            None
        } else if g.is_measurement_like() {
            Some(LayerKind::Measure)
        } else if g.qubits().len() == 2 {
            Some(LayerKind::Two)
        } else {
            Some(LayerKind::Single)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub kind: LayerKind,
    pub duration: f64,
    pub gates: Vec<Gate>,
    /// Qubits with no physical operation in this layer.
    pub idle: Vec<usize>,
}

impl Layer {
    fn new(kind: LayerKind) -> Self {
        Self {
            kind,
            duration: kind.duration(),
            gates: vec![],
            idle: vec![],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayeredCircuit {
    pub n_qubits: usize,
    pub n_records: usize,
    pub clifford: bool,
    pub layers: Vec<Layer>,
    /// Per qubit, the first and last layer holding a physical operation on it.
    pub active: Vec<Option<(usize, usize)>>,
}

impl LayeredCircuit {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn total_duration(&self) -> f64 {
        self.layers.iter().map(|l| l.duration).sum()
    }

    /// Whether qubit `q` is idle in layer `li` strictly inside its active window.
    pub fn idles_inside_window(&self, li: usize, q: usize) -> bool {
        matches!(self.active[q], Some((a, b)) if a < li && li < b)
    }

    /// `(layer, qubit)` for every idle slot strictly inside the qubit's active window.
    pub fn idle_sites(&self) -> Vec<(usize, usize)> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(li, l)| l.idle.iter().map(move |&q| (li, q)))
            .filter(|&(li, q)| self.idles_inside_window(li, q))
            .collect()
    }

    /// Flattens back into a gate list, layer by layer.
    pub fn flatten(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            ops: self.layers.iter().flat_map(|l| l.gates.iter().cloned()).collect(),
            n_records: self.n_records,
            clifford: self.clifford,
        }
    }
}

/// Layer assignment strategy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulePolicy {
    /// Greedy as-soon-as-possible packing.
    #[default]
    Asap,
    /// As late as possible, except that a single-qubit gate directly before a measurement
    /// runs in the first single-qubit layer after its predecessor.
    Alap,
}

/// One physical operation with the virtual gates riding in front of it and the noise
/// instructions behind it. A reset directly after a measurement of the same qubit joins it.
struct Unit {
    kind: LayerKind,
    /// Barrier: occupies no layer, records the boundary layer in `at`.
    fence: bool,
    qubits: Vec<usize>,
    gates: Vec<Gate>,
}

struct Units {
    units: Vec<Unit>,
    prefix_noise: Vec<Gate>,
    trailing: Vec<Gate>,
}

fn build_units(c: &Circuit) -> Units {
    let n = c.n_qubits;
    let mut units: Vec<Unit> = vec![];
    let mut last_unit: Vec<Option<usize>> = vec![None; n];
    let mut last_was_measure = vec![false; n];
    let mut pending: Vec<Vec<Gate>> = vec![vec![]; n];
    let mut prefix_noise = vec![];

    for g in &c.ops {
        let qs = g.qubits();
        if let Gate::Barrier { .. } = g {
            units.push(Unit {
                kind: LayerKind::Virtual,
                fence: true,
                qubits: qs.clone(),
                gates: vec![],
            });
            for &q in &qs {
                last_was_measure[q] = false;
            }
            continue;
        }
        let Some(kind) = LayerKind::of(g) else {
            if g.is_virtual() {
                pending[qs[0]].push(g.clone());
                continue;
            }
            // noise follows the latest operation it touches
            let target = match g {
                Gate::FlipRecord { record, .. } => units.iter().rposition(|u| {
                    u.gates
                        .iter()
                        .any(|h| matches!(h, Gate::MeasureZ { record: r, .. } if r == record))
                }),
                _ => qs.iter().filter_map(|&q| last_unit[q]).max(),
            };
            match target {
                Some(u) => units[u].gates.push(g.clone()),
                None => prefix_noise.push(g.clone()),
            }
            continue;
        };
        let joins = matches!(g, Gate::Reset { q } if last_was_measure[*q]);
        let idx = if joins {
            last_unit[qs[0]].expect("measured qubit has a unit")
        } else {
            units.push(Unit {
                kind,
                fence: false,
                qubits: qs.clone(),
                gates: vec![],
            });
            units.len() - 1
        };
        for &q in &qs {
            let pend = std::mem::take(&mut pending[q]);
            units[idx].gates.extend(pend);
        }
        units[idx].gates.push(g.clone());
        for &q in &qs {
            last_unit[q] = Some(idx);
            last_was_measure[q] = matches!(g, Gate::MeasureZ { .. });
        }
    }
    Units {
        units,
        prefix_noise,
        trailing: pending.into_iter().flatten().collect(),
    }
}

/// First-fit packing of units in the given order; returns the layer kinds and each unit's
/// layer. A fence unit gets the first layer open to everything behind it.
fn pack(units: &[Unit], order: impl Iterator<Item = usize>, n: usize) -> (Vec<LayerKind>, Vec<usize>) {
    let mut kinds: Vec<LayerKind> = vec![];
    let mut ready = vec![0usize; n];
    let mut at = vec![0usize; units.len()];
    for u in order {
        let unit = &units[u];
        let start = unit.qubits.iter().map(|&q| ready[q]).max().unwrap_or(0);
        if unit.fence {
            at[u] = start;
            for &q in &unit.qubits {
                ready[q] = start;
            }
            continue;
        }
        let l = match (start..kinds.len()).find(|&l| kinds[l] == unit.kind) {
            Some(l) => l,
            None => {
                kinds.push(unit.kind);
                kinds.len() - 1
            }
        };
        at[u] = l;
        for &q in &unit.qubits {
            ready[q] = l + 1;
        }
    }
    (kinds, at)
}

/// Moves single-qubit units that directly precede a measurement on their qubit to the first
/// single-qubit layer after the qubit's previous unit.
fn pull_basis_changes(units: &[Unit], kinds: &[LayerKind], at: &mut [usize], n: usize) {
    let mut per_qubit: Vec<Vec<usize>> = vec![vec![]; n];
    for (u, unit) in units.iter().enumerate() {
        for &q in &unit.qubits {
            per_qubit[q].push(u);
        }
    }
    for seq in &per_qubit {
        for i in 0..seq.len().saturating_sub(1) {
            let (u, next) = (seq[i], seq[i + 1]);
            if units[u].fence
                || units[next].fence
                || units[u].kind != LayerKind::Single
                || units[next].kind != LayerKind::Measure
            {
                continue;
            }
            let lo = match i.checked_sub(1).map(|j| seq[j]) {
                None => 0,
                Some(p) if units[p].fence => at[p],
                Some(p) => at[p] + 1,
            };
            if let Some(l) = (lo..at[u]).find(|&l| kinds[l] == LayerKind::Single) {
                at[u] = l;
            }
        }
    }
}

/// Greedy ASAP packing into homogeneous layers (single-qubit, two-qubit, measurement).
///
/// Per-qubit gate order is preserved. Virtual gates ride in front of the next physical gate on
/// their qubit; noise instructions stay directly behind the gate they follow. A `RESET` right
/// after a `MEASURE_Z` on the same qubit shares its measurement layer. Barriers are honored
/// and dropped.
pub fn schedule_layers(c: &Circuit) -> LayeredCircuit {
    schedule_with(c, SchedulePolicy::Asap)
}

pub fn schedule_with(c: &Circuit, policy: SchedulePolicy) -> LayeredCircuit {
    let n = c.n_qubits;
    let Units {
        units,
        prefix_noise,
        trailing,
    } = build_units(c);
    let (kinds, at) = match policy {
        SchedulePolicy::Asap => pack(&units, 0..units.len(), n),
        SchedulePolicy::Alap => {
            let (mut kinds, at_rev) = pack(&units, (0..units.len()).rev(), n);
            kinds.reverse();
            let len = kinds.len();
            let mut at: Vec<usize> = at_rev
                .iter()
                .zip(&units)
                .map(|(&l, u)| if u.fence { len - l } else { len - 1 - l })
                .collect();
            pull_basis_changes(&units, &kinds, &mut at, n);
            (kinds, at)
        }
    };

    let mut members: Vec<Vec<usize>> = vec![vec![]; kinds.len()];
    for (u, &l) in at.iter().enumerate() {
        if units[u].fence {
            continue;
        }
        members[l].push(u);
    }
    let mut layers: Vec<Layer> = vec![];
    for (l, mut us) in members.into_iter().enumerate() {
        if us.is_empty() {
            continue;
        }
        us.sort_unstable();
        let mut layer = Layer::new(kinds[l]);
        for u in us {
            layer.gates.extend(units[u].gates.iter().cloned());
        }
        layers.push(layer);
    }
    if !trailing.is_empty() {
        if layers.is_empty() {
            layers.push(Layer::new(LayerKind::Virtual));
        }
        layers.last_mut().unwrap().gates.extend(trailing);
    }
    if !prefix_noise.is_empty() {
        if layers.is_empty() {
            layers.push(Layer::new(LayerKind::Virtual));
        }
        let first = &mut layers[0].gates;
        let rest = std::mem::take(first);
        first.extend(prefix_noise);
        first.extend(rest);
    }

    let mut active: Vec<Option<(usize, usize)>> = vec![None; n];
    for (li, layer) in layers.iter_mut().enumerate() {
        let mut busy = vec![false; n];
        for g in &layer.gates {
            if LayerKind::of(g).is_some() {
                for q in g.qubits() {
                    busy[q] = true;
                    active[q] = Some(match active[q] {
                        None => (li, li),
                        Some((a, _)) => (a, li),
                    });
                }
            }
        }
        layer.idle = (0..n).filter(|&q| !busy[q]).collect();
    }

    LayeredCircuit {
        n_qubits: n,
        n_records: c.n_records,
        clifford: c.clifford,
        layers,
        active,
    }
}
