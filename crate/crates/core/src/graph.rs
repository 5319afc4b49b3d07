//! Graph-state compilations of stabilizer states: extraction from a tableau, local
//! complementation with local-Clifford bookkeeping, a seeded low-CZ search and circuit emission.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{lower_to_native, Circuit, Gate, NativeCounts};
use crate::error::{Error, Result};
use crate::pauli::{CliffordMap, PauliString, Prim};
use crate::sim::{stabilizer_state, Tableau};

pub const MAX_VERTICES: usize = 64;

/// Simple undirected graph on at most 64 vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Graph {
    m: usize,
    adj: Vec<u64>,
}

impl Graph {
    pub fn empty(m: usize) -> Self {
        assert!(m <= MAX_VERTICES, "at most {MAX_VERTICES} vertices");
        Self { m, adj: vec![0; m] }
    }

    pub fn from_edges(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(m);
        for &(a, b) in edges {
            for v in [a, b] {
                if v >= m {
                    return Err(Error::VertexOutOfRange { vertex: v, m });
                }
            }
            if a == b {
                return Err(Error::InvalidCircuit(format!("self-loop at {a}")));
            }
            g.set_edge(a, b, true);
        }
        Ok(g)
    }

    pub fn num_vertices(&self) -> usize {
        self.m
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a] >> b & 1 == 1
    }

    pub fn set_edge(&mut self, a: usize, b: usize, on: bool) {
        assert!(a != b);
        if on {
            self.adj[a] |= 1 << b;
            self.adj[b] |= 1 << a;
        } else {
            self.adj[a] &= !(1 << b);
            self.adj[b] &= !(1 << a);
        }
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.m).filter(|&u| self.has_edge(v, u)).collect()
    }

    pub fn row(&self, v: usize) -> u64 {
        self.adj[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edges `(a, b)` with `a < b`, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = vec![];
        for a in 0..self.m {
            for b in a + 1..self.m {
                if self.has_edge(a, b) {
                    e.push((a, b));
                }
            }
        }
        e
    }

    /// Toggles every edge inside the neighbourhood of `v`.
    pub fn local_complement(&self, v: usize) -> Result<Graph> {
        if v >= self.m {
            return Err(Error::VertexOutOfRange { vertex: v, m: self.m });
        }
        let mut g = self.clone();
        let nb = self.neighbors(v);
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                let on = g.has_edge(a, b);
                g.set_edge(a, b, !on);
            }
        }
        Ok(g)
    }

    /// Row-major `m * m` adjacency bits.
    pub fn adjacency_bits(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(self.m * self.m);
        for a in 0..self.m {
            for b in 0..self.m {
                v.push(self.has_edge(a, b) as u8);
            }
        }
        v
    }

    /// Graph-state stabilizer generators `X_v Z_N(v)`.
    pub fn stabilizers(&self) -> Vec<PauliString> {
        (0..self.m)
            .map(|v| {
                let mut x = vec![0u64; 1];
                x[0] = 1 << v;
                PauliString::from_bits(self.m, x, vec![self.adj[v]], 0)
            })
            .collect()
    }
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<String> = (0..self.m)
            .map(|a| (0..self.m).map(|b| if self.has_edge(a, b) { '1' } else { '0' }).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rows = Vec::<String>::deserialize(d)?;
        let m = rows.len();
        if m > MAX_VERTICES {
            return Err(D::Error::custom("too many vertices"));
        }
        let mut g = Graph::empty(m);
        for (a, r) in rows.iter().enumerate() {
            let bits: Vec<char> = r.chars().collect();
            if bits.len() != m {
                return Err(D::Error::custom("adjacency must be square"));
            }
            for (b, &c) in bits.iter().enumerate() {
                match c {
                    '0' => {}
                    '1' if a != b => g.adj[a] |= 1 << b,
                    _ => return Err(D::Error::custom(format!("bad adjacency entry {a},{b}"))),
                }
            }
        }
        if (0..m).any(|a| (0..m).any(|b| g.has_edge(a, b) != g.has_edge(b, a))) {
            return Err(D::Error::custom("adjacency must be symmetric"));
        }
        Ok(g)
    }
}

struct LocalEntry {
    map: CliffordMap,
    word: Vec<Prim>,
}

fn physical_cost(p: &Prim) -> usize {
    match p {
        Prim::S(_) | Prim::SDag(_) | Prim::Z(_) => 0,
        _ => 1,
    }
}

/// The 24 single-qubit Cliffords (Pauli signs included), each with a word of minimal physical
/// cost over H, S, S_DAG, X, Y, Z (Z-axis rotations are virtual after lowering).
fn local_table() -> &'static [LocalEntry] {
    static TABLE: OnceLock<Vec<LocalEntry>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let gens = [
            Prim::H(0),
            Prim::S(0),
            Prim::SDag(0),
            Prim::X(0),
            Prim::Y(0),
            Prim::Z(0),
        ];
        let mut words: Vec<Vec<Prim>> = vec![vec![]];
        let mut frontier: Vec<Vec<Prim>> = vec![vec![]];
        for _ in 0..5 {
            let mut next = vec![];
            for w in &frontier {
                for g in gens {
                    let mut v = w.clone();
                    v.push(g);
                    next.push(v);
                }
            }
            words.extend(next.iter().cloned());
            frontier = next;
        }
        let mut table: Vec<LocalEntry> = vec![];
        let key = |w: &Vec<Prim>| (w.iter().map(physical_cost).sum::<usize>(), w.len());
        for w in words {
            let map = CliffordMap::from_prims(1, w.iter().copied());
            match table.iter_mut().find(|e| e.map == map) {
                Some(e) => {
                    if key(&w) < key(&e.word) {
                        e.word = w;
                    }
                }
                None => table.push(LocalEntry { map, word: w }),
            }
        }
        assert_eq!(table.len(), 24);
        table
    })
}

/// Element of the single-qubit Clifford group (24 elements; global phase ignored).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalClifford(u8);

impl LocalClifford {
    pub const ORDER: usize = 24;

    pub fn identity() -> Self {
        Self::from_prims(&[])
    }

    pub fn all() -> impl Iterator<Item = LocalClifford> {
        (0..Self::ORDER as u8).map(LocalClifford)
    }

    /// The product of single-qubit primitives applied in time order; qubit indices ignored.
    pub fn from_prims(prims: &[Prim]) -> Self {
        let at0 = prims.iter().map(|p| match *p {
            Prim::H(_) => Prim::H(0),
            Prim::S(_) => Prim::S(0),
            Prim::SDag(_) => Prim::SDag(0),
            Prim::X(_) => Prim::X(0),
            Prim::Y(_) => Prim::Y(0),
            Prim::Z(_) => Prim::Z(0),
            Prim::Cx(..) | Prim::Cz(..) => panic!("two-qubit primitive in a local Clifford"),
        });
        Self::from_map(&CliffordMap::from_prims(1, at0))
    }

    fn from_map(map: &CliffordMap) -> Self {
        let i = local_table()
            .iter()
            .position(|e| e.map == *map)
            .expect("every single-qubit Clifford is tabulated");
        LocalClifford(i as u8)
    }

    pub fn map(&self) -> &'static CliffordMap {
        &local_table()[self.0 as usize].map
    }

    /// Minimal-cost word on qubit `q`.
    pub fn word(&self, q: usize) -> Vec<Prim> {
        local_table()[self.0 as usize]
            .word
            .iter()
            .map(|p| match *p {
                Prim::H(_) => Prim::H(q),
                Prim::S(_) => Prim::S(q),
                Prim::SDag(_) => Prim::SDag(q),
                Prim::X(_) => Prim::X(q),
                Prim::Y(_) => Prim::Y(q),
                Prim::Z(_) => Prim::Z(q),
                p => p,
            })
            .collect()
    }

    /// `self` then `later`, in time order.
    pub fn then(&self, later: LocalClifford) -> Self {
        let mut w = self.word(0);
        w.extend(later.word(0));
        Self::from_prims(&w)
    }

    pub fn inverse(&self) -> Self {
        let w: Vec<Prim> = self.word(0).into_iter().rev().map(Prim::inverse).collect();
        Self::from_prims(&w)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }
}

impl fmt::Display for LocalClifford {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.word(0);
        if w.is_empty() {
            return write!(f, "I");
        }
        let names: Vec<&str> = w
            .iter()
            .map(|p| match p {
                Prim::H(_) => "H",
                Prim::S(_) => "S",
                Prim::SDag(_) => "S_DAG",
                Prim::X(_) => "X",
                Prim::Y(_) => "Y",
                _ => "Z",
            })
            .collect();
        write!(f, "{}", names.join(" "))
    }
}

impl FromStr for LocalClifford {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut prims = vec![];
        for tok in s.split_whitespace() {
            prims.push(match tok {
                "I" => continue,
                "H" => Prim::H(0),
                "S" => Prim::S(0),
                "S_DAG" => Prim::SDag(0),
                "X" => Prim::X(0),
                "Y" => Prim::Y(0),
                "Z" => Prim::Z(0),
                _ => return Err(Error::Config(format!("unknown local Clifford token {tok:?}"))),
            });
        }
        Ok(Self::from_prims(&prims))
    }
}

impl Serialize for LocalClifford {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for LocalClifford {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CompilationCost {
    pub edges: usize,
    /// Lowered ZZ count of the emitted preparation.
    pub zz: usize,
    /// Lowered physical native gate count of the emitted preparation.
    pub gates: usize,
}

/// `(locals) |graph>`: H on every vertex, one CZ per edge, then the per-vertex locals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphCompilation {
    pub graph: Graph,
    pub locals: Vec<LocalClifford>,
    pub cost: CompilationCost,
}

impl GraphCompilation {
    pub fn new(graph: Graph, locals: Vec<LocalClifford>) -> Result<Self> {
        assert_eq!(graph.num_vertices(), locals.len());
        let mut gc = Self {
            graph,
            locals,
            cost: CompilationCost {
                edges: 0,
                zz: 0,
                gates: 0,
            },
        };
        let counts = NativeCounts::of(&lower_to_native(&emit_graph_circuit(&gc))?);
        gc.cost = CompilationCost {
            edges: gc.graph.edge_count(),
            zz: counts.zz,
            gates: counts.gates,
        };
        Ok(gc)
    }

    fn rank_key(&self) -> (usize, usize, &Graph, &[LocalClifford]) {
        (self.cost.zz, self.cost.gates, &self.graph, &self.locals)
    }

    /// The represented state.
    pub fn tableau(&self) -> Result<Tableau> {
        stabilizer_state(&emit_graph_circuit(self))
    }
}

/// Preparation circuit: H layer, one CZ per edge in lexicographic order, locals.
pub fn emit_graph_circuit(gc: &GraphCompilation) -> Circuit {
    let m = gc.graph.num_vertices();
    let mut c = Circuit::new(m);
    for v in 0..m {
        c.h(v);
    }
    for (a, b) in gc.graph.edges() {
        c.cz(a, b);
    }
    for (v, l) in gc.locals.iter().enumerate() {
        for p in l.word(v) {
            c.push(prim_gate(p));
        }
    }
    c
}

pub(crate) fn prim_gate(p: Prim) -> Gate {
    match p {
        Prim::H(q) => Gate::H { q },
        Prim::S(q) => Gate::S { q },
        Prim::SDag(q) => Gate::SDag { q },
        Prim::X(q) => Gate::X { q },
        Prim::Y(q) => Gate::Y { q },
        Prim::Z(q) => Gate::Z { q },
        Prim::Cx(control, target) => Gate::Cnot { control, target },
        Prim::Cz(a, b) => Gate::Cz { a, b },
    }
}

fn gf2_rank(mut rows: Vec<u64>) -> usize {
    let mut rank = 0;
    for bit in 0..64 {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i] >> bit & 1 == 1) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for (i, r) in rows.iter_mut().enumerate() {
            if i != rank && *r >> bit & 1 == 1 {
                *r ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}

fn x_rank_after_h(stabs: &[PauliString], h: u64) -> usize {
    let rows = stabs
        .iter()
        .map(|s| (s.x_words()[0] & !h) | (s.z_words()[0] & h))
        .collect();
    gf2_rank(rows)
}

/// Set of qubits on which a Hadamard makes the X block invertible.
fn hadamard_set(stabs: &[PauliString], m: usize) -> Result<u64> {
    let mut h = 0u64;
    if m == 0 {
        return Ok(h);
    }
    let mut rank = x_rank_after_h(stabs, h);
    'grow: while rank < m {
        for q in 0..m {
            let r = x_rank_after_h(stabs, h ^ (1 << q));
            if r > rank {
                h ^= 1 << q;
                rank = r;
                continue 'grow;
            }
        }
        // no single toggle helps; exhaustive by subset size
        if m > 20 {
            return Err(Error::InvalidCircuit("graph extraction stuck".into()));
        }
        let mut subsets: Vec<u64> = (0..1u64 << m).collect();
        subsets.sort_by_key(|s| (s.count_ones(), *s));
        return subsets
            .into_iter()
            .find(|&s| x_rank_after_h(stabs, s) == m)
            .ok_or_else(|| Error::InvalidCircuit("stabilizer rows are dependent".into()));
    }
    Ok(h)
}

/// Graph compilation of a pure stabilizer state: Hadamards make the X block invertible,
/// Gauss-Jordan brings it to the identity, phase gates clear the diagonal and Z gates fix
/// signs. The result is verified by tableau equality.
pub fn extract_graph(t: &Tableau) -> Result<GraphCompilation> {
    let m = t.num_qubits();
    if m > MAX_VERTICES {
        return Err(Error::InvalidCircuit(format!("{m} qubits exceed {MAX_VERTICES}")));
    }
    let mut rows: Vec<PauliString> = t.stabilizers().to_vec();
    let h = hadamard_set(&rows, m)?;
    let apply = |rows: &mut Vec<PauliString>, p: Prim| rows.iter_mut().for_each(|r| r.conjugate_prim(p));
    for q in 0..m {
        if h >> q & 1 == 1 {
            apply(&mut rows, Prim::H(q));
        }
    }
    for col in 0..m {
        let p = (col..m)
            .find(|&i| rows[i].x_bit(col))
            .expect("X block is invertible");
        rows.swap(col, p);
        let pivot = rows[col].clone();
        for (i, r) in rows.iter_mut().enumerate() {
            if i != col && r.x_bit(col) {
                r.mul_assign_right(&pivot);
            }
        }
    }
    let mut s_set = vec![false; m];
    for v in 0..m {
        if rows[v].z_bit(v) {
            apply(&mut rows, Prim::S(v));
            s_set[v] = true;
        }
    }
    let mut z_set = vec![false; m];
    for v in 0..m {
        if rows[v].phase() == 2 {
            apply(&mut rows, Prim::Z(v));
            z_set[v] = true;
        }
    }
    let mut g = Graph::empty(m);
    for (v, r) in rows.iter().enumerate() {
        debug_assert_eq!(r.phase(), 0);
        g.adj[v] = r.z_words().first().copied().unwrap_or(0);
    }
    if (0..m).any(|a| (0..m).any(|b| g.has_edge(a, b) != g.has_edge(b, a))) {
        return Err(Error::InvalidCircuit("input is not a valid stabilizer state".into()));
    }
    let locals = (0..m)
        .map(|v| {
            let mut w = vec![];
            if z_set[v] {
                w.push(Prim::Z(v));
            }
            if s_set[v] {
                w.push(Prim::SDag(v));
            }
            if h >> v & 1 == 1 {
                w.push(Prim::H(v));
            }
            LocalClifford::from_prims(&w)
        })
        .collect();
    let gc = GraphCompilation::new(g, locals)?;
    if !gc.tableau()?.same_state(t) {
        return Err(Error::InvalidCircuit("graph extraction failed to round-trip".into()));
    }
    Ok(gc)
}

/// Local complementation at `v` with the locals updated so the represented state is unchanged.
pub fn local_complement(gc: &GraphCompilation, v: usize) -> Result<GraphCompilation> {
    let g = gc.graph.local_complement(v)?;
    let mut locals = gc.locals.clone();
    let at_v = LocalClifford::from_prims(&[Prim::H(0), Prim::SDag(0), Prim::H(0)]);
    let at_nb = LocalClifford::from_prims(&[Prim::S(0)]);
    locals[v] = at_v.then(locals[v]);
    for u in gc.graph.neighbors(v) {
        locals[u] = at_nb.then(locals[u]);
    }
    GraphCompilation::new(g, locals)
}

/// Steps per restart of the LC walk.
pub const WALK_LENGTH: usize = 100;

fn walk(start: &GraphCompilation, steps: usize, rng: &mut ChaCha8Rng) -> Result<Vec<GraphCompilation>> {
    let m = start.graph.num_vertices();
    let mut cur = start.clone();
    let mut seen = vec![cur.clone()];
    if m == 0 {
        return Ok(seen);
    }
    for _ in 0..steps {
        let v = rng.gen_range(0..m);
        let next = local_complement(&cur, v)?;
        if next.cost.edges <= cur.cost.edges {
            cur = next;
            seen.push(cur.clone());
        }
    }
    Ok(seen)
}

/// Seeded greedy local-complementation walk with restarts. Returns up to `keep` distinct
/// graphs, best first by (lowered ZZ count, native gate count).
pub fn search_compilations(
    target: &Tableau,
    iters: usize,
    seed: u64,
    keep: usize,
) -> Result<Vec<GraphCompilation>> {
    let start = extract_graph(target)?;
    let restarts = iters.max(1).div_ceil(WALK_LENGTH);
    let run = |r: usize| -> Result<Vec<GraphCompilation>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let steps = WALK_LENGTH.min(iters.max(1) - r * WALK_LENGTH);
        walk(&start, steps, &mut rng)
    };
    #[cfg(feature = "parallel")]
    let walks: Vec<Result<Vec<GraphCompilation>>> = {
        use rayon::prelude::*;
        (0..restarts).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let walks: Vec<Result<Vec<GraphCompilation>>> = (0..restarts).map(run).collect();

    let mut best: BTreeMap<Graph, GraphCompilation> = BTreeMap::new();
    for w in walks {
        for gc in w? {
            match best.get(&gc.graph) {
                Some(old) if old.rank_key() <= gc.rank_key() => {}
                _ => {
                    best.insert(gc.graph.clone(), gc);
                }
            }
        }
    }
    let mut out: Vec<GraphCompilation> = best.into_values().collect();
    out.sort_by(|a, b| a.rank_key().cmp(&b.rank_key()));
    out.truncate(keep);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> Tableau {
        let mut c = Circuit::new(2);
        c.h(0).cnot(0, 1);
        stabilizer_state(&c).unwrap()
    }

    #[test]
    fn twenty_four_locals() {
        let all: Vec<_> = LocalClifford::all().collect();
        assert_eq!(all.len(), 24);
        for l in all {
            assert!(l.then(l.inverse()).is_identity());
            assert_eq!(l.to_string().parse::<LocalClifford>().unwrap(), l);
        }
    }

    #[test]
    fn plus_state_is_empty_graph() {
        let mut c = Circuit::new(2);
        c.h(0).h(1);
        let gc = extract_graph(&stabilizer_state(&c).unwrap()).unwrap();
        assert_eq!(gc.graph.edge_count(), 0);
        assert!(gc.locals.iter().all(LocalClifford::is_identity));
    }

    #[test]
    fn bell_pair_is_k2() {
        let gc = extract_graph(&bell()).unwrap();
        assert_eq!(gc.graph.edges(), vec![(0, 1)]);
        assert!(gc.tableau().unwrap().same_state(&bell()));
    }

    #[test]
    fn triangle_to_path() {
        let g = Graph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        assert_eq!(g.local_complement(0).unwrap().edges(), vec![(0, 1), (0, 2)]);
        assert!(g.local_complement(3).is_err());
    }

    #[test]
    fn lc_keeps_state() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (1, 3), (2, 3)]).unwrap();
        let gc = GraphCompilation::new(g, vec![LocalClifford::identity(); 4]).unwrap();
        let t = gc.tableau().unwrap();
        for v in 0..4 {
            let lc = local_complement(&gc, v).unwrap();
            assert!(lc.tableau().unwrap().same_state(&t), "vertex {v}");
        }
    }

    #[test]
    fn search_is_deterministic() {
        let mut c = Circuit::new(4);
        c.h(0).cnot(0, 1).cnot(1, 2).cnot(2, 3).h(3).s(1);
        let t = stabilizer_state(&c).unwrap();
        let a = search_compilations(&t, 300, 7, 5).unwrap();
        let b = search_compilations(&t, 300, 7, 5).unwrap();
        assert_eq!(a, b);
        for gc in &a {
            assert!(gc.tableau().unwrap().same_state(&t));
        }
    }
}
