//! Calibrated trapped-ion Pauli noise: gate dephasing, per-pair two-qubit dephasing, idle T2*
//! dephasing and readout flips. Also a synthetic per-pair error table and the qubit-to-ion
//! mapping optimizer.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::circuit::{
    Circuit, Gate, LayerKind, LayeredCircuit, MEASURE_LAYER_SECONDS, SINGLE_LAYER_SECONDS,
    TWO_LAYER_SECONDS,
};
use crate::error::{Error, Result};
use crate::pauli::Letter;

pub const DEFAULT_P1Q_Z: f64 = 2.55e-4;
pub const DEFAULT_T2_STAR: f64 = 1.5;
pub const DEFAULT_P_SPAM: f64 = 1.2e-3;
pub const DEFAULT_IONS: usize = 40;
/// One part per ten thousand.
pub const PPTT: f64 = 1e-4;

/// `(1 - exp(-dt / t2)) / 2`
pub fn idle_dephasing_prob(dt: f64, t2: f64) -> f64 {
    assert!(dt >= 0.0 && t2 > 0.0, "dt >= 0 and t2 > 0 required");
    -(-dt / t2).exp_m1() / 2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Durations {
    pub single: f64,
    pub two: f64,
    pub measure: f64,
}

impl Default for Durations {
    fn default() -> Self {
        Self {
            single: SINGLE_LAYER_SECONDS,
            two: TWO_LAYER_SECONDS,
            measure: MEASURE_LAYER_SECONDS,
        }
    }
}

impl Durations {
    pub fn of(&self, kind: LayerKind) -> f64 {
        match kind {
            LayerKind::Single => self.single,
            LayerKind::Two => self.two,
            LayerKind::Measure => self.measure,
            LayerKind::Virtual => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Channels {
    pub single: bool,
    pub two: bool,
    pub idle: bool,
    pub readout: bool,
}

impl Default for Channels {
    fn default() -> Self {
        Self {
            single: true,
            two: true,
            idle: true,
            readout: true,
        }
    }
}

impl Channels {
    pub fn none() -> Self {
        Self {
            single: false,
            two: false,
            idle: false,
            readout: false,
        }
    }
}

/// Symmetric table of two-qubit DRB error rates over an ion chain (probabilities, not pptt).
#[derive(Clone, Debug, PartialEq)]
pub struct PairErrorTable {
    n_ions: usize,
    /// Row-major strict upper triangle.
    drb: Vec<f64>,
}

fn tri_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

impl PairErrorTable {
    pub fn uniform(n_ions: usize, p: f64) -> Self {
        Self {
            n_ions,
            drb: vec![p; n_ions * (n_ions - 1) / 2],
        }
    }

    pub fn from_fn(n_ions: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut drb = Vec::with_capacity(n_ions * (n_ions.saturating_sub(1)) / 2);
        for i in 0..n_ions {
            for j in i + 1..n_ions {
                drb.push(f(i, j));
            }
        }
        Self { n_ions, drb }
    }

    pub fn n_ions(&self) -> usize {
        self.n_ions
    }

    pub fn len(&self) -> usize {
        self.drb.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drb.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i != j && i < self.n_ions && j < self.n_ions);
        self.drb[tri_index(self.n_ions, i, j)]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n_ions;
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j, self.get(i, j))))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_ions: self.n_ions,
            drb: self.drb.iter().map(|p| p * factor).collect(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.drb.iter().sum::<f64>() / self.drb.len() as f64
    }

    /// CSV with header `ion_i,ion_j,drb_pptt`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["ion_i", "ion_j", "drb_pptt"])?;
        for (i, j, p) in self.pairs() {
            wr.write_record([i.to_string(), j.to_string(), (p / PPTT).to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv(r: impl Read) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            ion_i: usize,
            ion_j: usize,
            drb_pptt: f64,
        }
        let mut rows = vec![];
        for rec in csv::Reader::from_reader(r).deserialize() {
            let row: Row = rec?;
            rows.push(row);
        }
        let n = rows
            .iter()
            .map(|r| r.ion_i.max(r.ion_j) + 1)
            .max()
            .unwrap_or(0);
        let mut drb = vec![f64::NAN; n * n.saturating_sub(1) / 2];
        for r in &rows {
            if r.ion_i == r.ion_j || !(r.drb_pptt > 0.0) {
                return Err(Error::Config(format!(
                    "bad pair entry ({}, {}, {})",
                    r.ion_i, r.ion_j, r.drb_pptt
                )));
            }
            drb[tri_index(n, r.ion_i, r.ion_j)] = r.drb_pptt * PPTT;
        }
        if drb.iter().any(|p| p.is_nan()) {
            return Err(Error::Config("pair table is missing entries".into()));
        }
        Ok(Self { n_ions: n, drb })
    }
}

impl Serialize for PairErrorTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<(usize, usize, f64)> = self.pairs().map(|(i, j, p)| (i, j, p / PPTT)).collect();
        #[derive(Serialize)]
        struct Repr {
            n_ions: usize,
            drb_pptt: Vec<(usize, usize, f64)>,
        }
        Repr {
            n_ions: self.n_ions,
            drb_pptt: rows,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PairErrorTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            n_ions: usize,
            drb_pptt: Vec<(usize, usize, f64)>,
        }
        let r = Repr::deserialize(d)?;
        let n = r.n_ions;
        let mut drb = vec![f64::NAN; n * n.saturating_sub(1) / 2];
        for (i, j, p) in r.drb_pptt {
            if i == j || i >= n || j >= n {
                return Err(serde::de::Error::custom(format!("bad pair ({i}, {j})")));
            }
            drb[tri_index(n, i, j)] = p * PPTT;
        }
        if drb.iter().any(|p| p.is_nan()) {
            return Err(serde::de::Error::custom("pair table is missing entries"));
        }
        Ok(Self { n_ions: n, drb })
    }
}

/// Injective logical-qubit to ion assignment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitMapping {
    pub ions: Vec<usize>,
}

impl QubitMapping {
    pub fn identity(n: usize) -> Self {
        Self {
            ions: (0..n).collect(),
        }
    }

    pub fn validate(&self, n_ions: usize) -> Result<()> {
        let mut used = vec![false; n_ions];
        for &ion in &self.ions {
            if ion >= n_ions || used[ion] {
                return Err(Error::Config(format!("mapping reuses or exceeds ion {ion}")));
            }
            used[ion] = true;
        }
        Ok(())
    }
}

/// Usage-weighted mean pair error of `interactions` under `map`.
pub fn usage_weighted_mean(
    interactions: &[((usize, usize), usize)],
    table: &PairErrorTable,
    map: &QubitMapping,
) -> f64 {
    let total: usize = interactions.iter().map(|(_, k)| k).sum();
    if total == 0 {
        return 0.0;
    }
    let s: f64 = interactions
        .iter()
        .map(|&((a, b), k)| k as f64 * table.get(map.ions[a], map.ions[b]))
        .sum();
    s / total as f64
}

fn cost(inter: &[((usize, usize), usize)], t: &PairErrorTable, ions: &[usize]) -> f64 {
    inter
        .iter()
        .map(|&((a, b), k)| k as f64 * t.get(ions[a], ions[b]))
        .sum()
}

/// Swap/move descent until no strict improvement.
fn descend(inter: &[((usize, usize), usize)], t: &PairErrorTable, ions: &mut Vec<usize>) {
    let n = ions.len();
    let m = t.n_ions();
    let mut best = cost(inter, t, ions);
    loop {
        let mut improved = false;
        for a in 0..n {
            for b in a + 1..n {
                ions.swap(a, b);
                let c = cost(inter, t, ions);
                if c < best - 1e-15 {
                    best = c;
                    improved = true;
                } else {
                    ions.swap(a, b);
                }
            }
            let mut used = vec![false; m];
            for &i in ions.iter() {
                used[i] = true;
            }
            for ion in 0..m {
                if used[ion] {
                    continue;
                }
                let old = ions[a];
                ions[a] = ion;
                let c = cost(inter, t, ions);
                if c < best - 1e-15 {
                    best = c;
                    improved = true;
                    used[old] = false;
                    used[ion] = true;
                } else {
                    ions[a] = old;
                }
            }
        }
        if !improved {
            return;
        }
    }
}

/// Greedy placement starting from ion pair `(i0, j0)` for the heaviest interaction.
fn greedy(
    n: usize,
    inter: &[((usize, usize), usize)],
    t: &PairErrorTable,
    seed_pair: (usize, usize),
) -> Vec<usize> {
    let m = t.n_ions();
    let mut weight = vec![vec![0usize; n]; n];
    for &((a, b), k) in inter {
        weight[a][b] += k;
        weight[b][a] += k;
    }
    let mut ions = vec![usize::MAX; n];
    let mut used = vec![false; m];
    let &((a0, b0), _) = inter
        .iter()
        .max_by(|x, y| x.1.cmp(&y.1).then(y.0.cmp(&x.0)))
        .expect("nonempty interactions");
    ions[a0] = seed_pair.0;
    ions[b0] = seed_pair.1;
    used[seed_pair.0] = true;
    used[seed_pair.1] = true;
    for _ in 2..n {
        // next logical qubit: strongest tie to placed ones, then lowest index
        let q = (0..n)
            .filter(|&q| ions[q] == usize::MAX)
            .max_by(|&x, &y| {
                let wx: usize = (0..n).filter(|&p| ions[p] != usize::MAX).map(|p| weight[x][p]).sum();
                let wy: usize = (0..n).filter(|&p| ions[p] != usize::MAX).map(|p| weight[y][p]).sum();
                wx.cmp(&wy).then(y.cmp(&x))
            })
            .unwrap();
        let mut best = (f64::INFINITY, usize::MAX);
        for ion in (0..m).filter(|&i| !used[i]) {
            let c: f64 = (0..n)
                .filter(|&p| ions[p] != usize::MAX && weight[q][p] > 0)
                .map(|p| weight[q][p] as f64 * t.get(ion, ions[p]))
                .sum();
            if c < best.0 {
                best = (c, ion);
            }
        }
        ions[q] = best.1;
        used[best.1] = true;
    }
    ions
}

/// Mapping minimizing the usage-weighted mean pair error of `c`'s two-qubit interactions.
///
/// Greedy placements seeded from the cleanest pairs, each refined by swap/move descent, are
/// compared with the descended identity mapping. Ties keep the identity-derived mapping, so the
/// result is never worse than the identity.
pub fn optimize_mapping(c: &Circuit, t: &PairErrorTable) -> Result<QubitMapping> {
    optimize_mapping_for(c.n_qubits, &c.interactions(), t)
}

pub fn optimize_mapping_for(
    n: usize,
    inter: &[((usize, usize), usize)],
    t: &PairErrorTable,
) -> Result<QubitMapping> {
    if n > t.n_ions() {
        return Err(Error::ChainTooSmall {
            needed: n,
            available: t.n_ions(),
        });
    }
    let mut best = (0..n).collect::<Vec<_>>();
    if inter.is_empty() || n < 2 {
        return Ok(QubitMapping { ions: best });
    }
    descend(inter, t, &mut best);
    let mut best_cost = cost(inter, t, &best);
    let mut pairs: Vec<(usize, usize, f64)> = t.pairs().collect();
    pairs.sort_by(|x, y| x.2.total_cmp(&y.2).then((x.0, x.1).cmp(&(y.0, y.1))));
    for &(i, j, _) in pairs.iter().take(4) {
        for seed in [(i, j), (j, i)] {
            let mut ions = greedy(n, inter, t, seed);
            descend(inter, t, &mut ions);
            let c = cost(inter, t, &ions);
            if c < best_cost - 1e-15 {
                best_cost = c;
                best = ions;
            }
        }
    }
    Ok(QubitMapping { ions: best })
}

/// Parameters for the synthetic pair table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub n_ions: usize,
    /// Target optimized usage-weighted mean for the narrow circuit, pptt.
    pub narrow_mean_pptt: f64,
    /// Target optimized usage-weighted mean for the wide circuit, pptt.
    pub wide_mean_pptt: f64,
    /// Strength of the nearest-neighbour advantage in log space.
    pub neighbour_bias: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            n_ions: DEFAULT_IONS,
            narrow_mean_pptt: 41.0,
            wide_mean_pptt: 59.0,
            neighbour_bias: 0.35,
        }
    }
}

/// Usage pattern of a circuit for calibration: width and interaction multiset.
#[derive(Clone, Debug, PartialEq)]
pub struct UsagePattern {
    pub n_qubits: usize,
    pub interactions: Vec<((usize, usize), usize)>,
}

impl UsagePattern {
    pub fn of(c: &Circuit) -> Self {
        Self {
            n_qubits: c.n_qubits,
            interactions: c.interactions(),
        }
    }

    fn optimized_mean(&self, t: &PairErrorTable) -> Result<f64> {
        let map = optimize_mapping_for(self.n_qubits, &self.interactions, t)?;
        Ok(usage_weighted_mean(&self.interactions, t, &map))
    }
}

/// Log-normal pair table with a nearest-neighbour bias, calibrated so that the optimized
/// narrow and wide usage means hit the targets.
///
/// `drb(i, j) = s * exp(sigma * g_ij + bias * ln(1 + |i - j|) / ln(n))` with `g_ij` standard
/// normal draws from `seed`. `sigma` is bisected to match the wide/narrow ratio, then `s` fixes
/// the narrow mean.
pub fn synth_pair_table(
    seed: u64,
    params: &SynthParams,
    narrow: &UsagePattern,
    wide: &UsagePattern,
) -> Result<PairErrorTable> {
    let n = params.n_ions;
    if narrow.n_qubits > n || wide.n_qubits > n {
        return Err(Error::ChainTooSmall {
            needed: narrow.n_qubits.max(wide.n_qubits),
            available: n,
        });
    }
    if !(params.narrow_mean_pptt > 0.0 && params.wide_mean_pptt > 0.0) {
        return Err(Error::InfeasibleTargets("means must be positive".into()));
    }
    let target_ratio = params.wide_mean_pptt / params.narrow_mean_pptt;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<f64> = (0..n * (n - 1) / 2)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let build = |sigma: f64| {
        let ln_n = (n as f64).ln();
        PairErrorTable::from_fn(n, |i, j| {
            let k = tri_index(n, i, j);
            let d = (j - i) as f64;
            (sigma * g[k] + params.neighbour_bias * (1.0 + d).ln() / ln_n).exp()
        })
    };
    let ratio = |sigma: f64| -> Result<f64> {
        let t = build(sigma);
        Ok(wide.optimized_mean(&t)? / narrow.optimized_mean(&t)?)
    };

    let sigma = if (target_ratio - 1.0).abs() < 1e-12 && params.neighbour_bias == 0.0 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0f64, 3.0f64);
        let (r_lo, r_hi) = (ratio(lo)?, ratio(hi)?);
        if target_ratio < r_lo - 1e-9 || target_ratio > r_hi {
            return Err(Error::InfeasibleTargets(format!(
                "wide/narrow ratio {target_ratio:.3} outside reachable [{r_lo:.3}, {r_hi:.3}]"
            )));
        }
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if ratio(mid)? < target_ratio {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let t = build(sigma);
    let scale = params.narrow_mean_pptt * PPTT / narrow.optimized_mean(&t)?;
    Ok(t.scaled(scale))
}

/// The full noise model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    pub p1q_z: f64,
    pub t2_star: f64,
    pub durations: Durations,
    pub p_spam: f64,
    pub channels: Channels,
    /// Multiplies every error probability; 1 is the calibrated model.
    pub scale: f64,
    /// `None` means a uniform table at the narrow target mean.
    pub pair_table: Option<PairErrorTable>,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            p1q_z: DEFAULT_P1Q_Z,
            t2_star: DEFAULT_T2_STAR,
            durations: Durations::default(),
            p_spam: DEFAULT_P_SPAM,
            channels: Channels::default(),
            scale: 1.0,
            pair_table: None,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            channels: Channels::none(),
            ..Self::default()
        }
    }

    pub fn with_table(mut self, t: PairErrorTable) -> Self {
        self.pair_table = Some(t);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [self.p1q_z * self.scale, self.p_spam * self.scale];
        if probs.iter().any(|p| !(0.0..=0.5).contains(p)) {
            return Err(Error::Config("probabilities must lie in [0, 0.5]".into()));
        }
        let d = &self.durations;
        if !(d.single > 0.0 && d.two > 0.0 && d.measure > 0.0 && self.t2_star > 0.0) {
            return Err(Error::Config("durations and T2* must be positive".into()));
        }
        if !(self.scale >= 0.0) {
            return Err(Error::Config("scale must be nonnegative".into()));
        }
        if let Some(t) = &self.pair_table {
            if t.pairs().any(|(_, _, p)| !(p > 0.0 && p * self.scale / 2.0 <= 0.5)) {
                return Err(Error::Config("pair rates must be positive and valid".into()));
            }
        }
        Ok(())
    }

    fn pair_rate(&self, a: usize, b: usize, map: &QubitMapping) -> Result<f64> {
        let ia = *map.ions.get(a).ok_or(Error::UnmappedQubit(a))?;
        let ib = *map.ions.get(b).ok_or(Error::UnmappedQubit(b))?;
        Ok(match &self.pair_table {
            Some(t) => t.get(ia, ib),
            None => SynthParams::default().narrow_mean_pptt * PPTT,
        })
    }
}

fn z_error(q: usize, p: f64) -> Gate {
    Gate::PauliError {
        q,
        pauli: Letter::Z,
        p,
    }
}

/// Inlines the noise channels into a scheduled circuit.
///
/// After each physical single-qubit gate a Z error with `p1q_z`; after each two-qubit gate a Z
/// error on each operand with half the pair's DRB rate; after each layer a Z error on every
/// idle qubit inside its active window; after each measurement a record flip with `p_spam`.
/// Virtual gates get nothing. Zero-probability channels emit no instruction.
pub fn attach_noise(lc: &LayeredCircuit, m: &NoiseModel, map: &QubitMapping) -> Result<Circuit> {
    for q in 0..lc.n_qubits {
        if q >= map.ions.len() {
            return Err(Error::UnmappedQubit(q));
        }
    }
    let s = m.scale;
    let mut ops = Vec::new();
    for (li, layer) in lc.layers.iter().enumerate() {
        for g in &layer.gates {
            ops.push(g.clone());
            if g.is_noise() || g.is_virtual() {
                continue;
            }
            match *g {
                Gate::MeasureZ { record, .. } => {
                    if m.channels.readout && m.p_spam * s > 0.0 {
                        ops.push(Gate::FlipRecord {
                            record,
                            p: m.p_spam * s,
                        });
                    }
                }
                Gate::Reset { .. } => {}
                _ => {
                    let qs = g.qubits();
                    if qs.len() == 2 {
                        if m.channels.two {
                            let p = m.pair_rate(qs[0], qs[1], map)? / 2.0 * s;
                            if p > 0.0 {
                                ops.push(z_error(qs[0], p));
                                ops.push(z_error(qs[1], p));
                            }
                        }
                    } else if m.channels.single && m.p1q_z * s > 0.0 {
                        ops.push(z_error(qs[0], m.p1q_z * s));
                    }
                }
            }
        }
        if m.channels.idle {
            let p = idle_dephasing_prob(m.durations.of(layer.kind), m.t2_star) * s;
            if p > 0.0 {
                for &q in &layer.idle {
                    if lc.idles_inside_window(li, q) {
                        ops.push(z_error(q, p));
                    }
                }
            }
        }
    }
    Ok(Circuit {
        n_qubits: lc.n_qubits,
        ops,
        n_records: lc.n_records,
        clifford: lc.clifford,
    })
}
