use std::collections::BTreeMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tableau::reference_sample;
use crate::circuit::{Circuit, Gate};
use crate::error::Result;
use crate::pauli::{Letter, Prim};

/// Shots per RNG block. Each block draws from its own ChaCha stream, so results do not
/// depend on how blocks are spread over threads.
pub const BLOCK_SHOTS: usize = 1024;
const BLOCK_WORDS: usize = BLOCK_SHOTS / 64;

/// Measurement records of a batch, stored as one bit-plane per record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotBatch {
    pub shots: usize,
    pub seed: u64,
    pub n_records: usize,
    /// `planes[r][w]` holds record `r` for shots `64w..64w+63`; bits past `shots` are zero.
    pub planes: Vec<Vec<u64>>,
}

impl ShotBatch {
    pub fn words(&self) -> usize {
        self.shots.div_ceil(64)
    }

    pub fn bit(&self, record: usize, shot: usize) -> bool {
        (self.planes[record][shot / 64] >> (shot % 64)) & 1 == 1
    }

    pub fn shot_bits(&self, shot: usize) -> Vec<bool> {
        (0..self.n_records).map(|r| self.bit(r, shot)).collect()
    }

    /// Mask of valid shot bits for word `w`.
    pub fn valid_mask(&self, w: usize) -> u64 {
        let rem = self.shots - 64 * w;
        if rem >= 64 {
            u64::MAX
        } else {
            (1u64 << rem) - 1
        }
    }

    /// Frequencies of the bitstrings formed by `records` (first record leftmost).
    pub fn counts(&self, records: &[usize]) -> BTreeMap<String, u64> {
        let mut m = BTreeMap::new();
        for s in 0..self.shots {
            let key: String = records
                .iter()
                .map(|&r| if self.bit(r, s) { '1' } else { '0' })
                .collect();
            *m.entry(key).or_insert(0) += 1;
        }
        m
    }

    /// Frequencies over all records.
    pub fn all_counts(&self) -> BTreeMap<String, u64> {
        let all: Vec<usize> = (0..self.n_records).collect();
        self.counts(&all)
    }
}

/// Instruction stream with Clifford gates pre-decomposed and Pauli gates dropped.
enum Op {
    H(usize),
    Phase(usize),
    Cx(usize, usize),
    Cz(usize, usize),
    Measure(usize, usize),
    Reset(usize),
    Error { q: usize, x: bool, z: bool, p: f64 },
    Channel1 { q: usize, px: f64, py: f64, pz: f64 },
    Depol2 { a: usize, b: usize, p: f64 },
    Flip { record: usize, p: f64 },
}

fn compile(c: &Circuit) -> Result<Vec<Op>> {
    let mut ops = Vec::with_capacity(c.ops.len() * 2);
    for g in &c.ops {
        match *g {
            Gate::MeasureZ { q, record } => ops.push(Op::Measure(q, record)),
            Gate::Reset { q } => ops.push(Op::Reset(q)),
            Gate::PauliError { q, pauli, p } => {
                let (x, z) = pauli.bits();
                if pauli != Letter::I && p > 0.0 {
                    ops.push(Op::Error { q, x, z, p });
                }
            }
            Gate::PauliChannel1 { q, px, py, pz } => ops.push(Op::Channel1 { q, px, py, pz }),
            Gate::Depolarize1 { q, p } => ops.push(Op::Channel1 {
                q,
                px: p / 3.0,
                py: p / 3.0,
                pz: p / 3.0,
            }),
            Gate::Depolarize2 { a, b, p } => ops.push(Op::Depol2 { a, b, p }),
            Gate::FlipRecord { record, p } => ops.push(Op::Flip { record, p }),
            _ => {
                for prim in g.clifford_prims()? {
                    match prim {
                        Prim::H(q) => ops.push(Op::H(q)),
                        Prim::S(q) | Prim::SDag(q) => ops.push(Op::Phase(q)),
                        Prim::Cx(a, b) => ops.push(Op::Cx(a, b)),
                        Prim::Cz(a, b) => ops.push(Op::Cz(a, b)),
                        Prim::X(_) | Prim::Y(_) | Prim::Z(_) => {}
                    }
                }
            }
        }
    }
    Ok(ops)
}

fn random_words(rng: &mut ChaCha8Rng, out: &mut [u64]) {
    for w in out.iter_mut() {
        *w = rng.next_u64();
    }
}

/// Calls `hit(shot)` for each shot independently selected with probability `p`.
fn for_each_hit(rng: &mut ChaCha8Rng, p: f64, shots: usize, mut hit: impl FnMut(usize)) {
    if p <= 0.0 {
        return;
    }
    if p >= 0.25 {
        for s in 0..shots {
            if rng.gen::<f64>() < p {
                hit(s);
            }
        }
        return;
    }
    // geometric gaps between hits
    let log_q = (-p).ln_1p();
    let mut s = 0usize;
    loop {
        let u: f64 = 1.0 - rng.gen::<f64>();
        let gap = (u.ln() / log_q).floor();
        if gap >= (shots - s) as f64 {
            return;
        }
        s += gap as usize;
        hit(s);
        s += 1;
        if s >= shots {
            return;
        }
    }
}

struct Frame {
    x: Vec<[u64; BLOCK_WORDS]>,
    z: Vec<[u64; BLOCK_WORDS]>,
    rec: Vec<[u64; BLOCK_WORDS]>,
}

#[inline]
fn flip(words: &mut [u64; BLOCK_WORDS], s: usize) {
    words[s / 64] ^= 1u64 << (s % 64);
}

fn run_block(
    ops: &[Op],
    n: usize,
    reference: &[bool],
    n_records: usize,
    seed: u64,
    block: u64,
    shots: usize,
) -> Vec<[u64; BLOCK_WORDS]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    let mut f = Frame {
        x: vec![[0; BLOCK_WORDS]; n],
        z: vec![[0; BLOCK_WORDS]; n],
        rec: vec![[0; BLOCK_WORDS]; n_records],
    };
    for q in 0..n {
        random_words(&mut rng, &mut f.z[q]);
    }
    for op in ops {
        match *op {
            Op::H(q) => std::mem::swap(&mut f.x[q], &mut f.z[q]),
            Op::Phase(q) => {
                for w in 0..BLOCK_WORDS {
                    f.z[q][w] ^= f.x[q][w];
                }
            }
            Op::Cx(c, t) => {
                for w in 0..BLOCK_WORDS {
                    f.x[t][w] ^= f.x[c][w];
                    f.z[c][w] ^= f.z[t][w];
                }
            }
            Op::Cz(a, b) => {
                for w in 0..BLOCK_WORDS {
                    f.z[a][w] ^= f.x[b][w];
                    f.z[b][w] ^= f.x[a][w];
                }
            }
            Op::Measure(q, r) => {
                f.rec[r] = f.x[q];
                random_words(&mut rng, &mut f.z[q]);
            }
            Op::Reset(q) => {
                f.x[q] = [0; BLOCK_WORDS];
                random_words(&mut rng, &mut f.z[q]);
            }
            Op::Error { q, x, z, p } => for_each_hit(&mut rng, p, shots, |s| {
                if x {
                    flip(&mut f.x[q], s);
                }
                if z {
                    flip(&mut f.z[q], s);
                }
            }),
            Op::Channel1 { q, px, py, pz } => {
                let total = px + py + pz;
                let mut hits = vec![];
                for_each_hit(&mut rng, total, shots, |s| hits.push(s));
                for s in hits {
                    let u = rng.gen::<f64>() * total;
                    let l = if u < px {
                        Letter::X
                    } else if u < px + py {
                        Letter::Y
                    } else {
                        Letter::Z
                    };
                    let (x, z) = l.bits();
                    if x {
                        flip(&mut f.x[q], s);
                    }
                    if z {
                        flip(&mut f.z[q], s);
                    }
                }
            }
            Op::Depol2 { a, b, p } => {
                let mut hits = vec![];
                for_each_hit(&mut rng, p, shots, |s| hits.push(s));
                for s in hits {
                    let k = rng.gen_range(1..16u8);
                    for (q, bits) in [(a, k & 3), (b, k >> 2)] {
                        if bits & 1 != 0 {
                            flip(&mut f.x[q], s);
                        }
                        if bits & 2 != 0 {
                            flip(&mut f.z[q], s);
                        }
                    }
                }
            }
            Op::Flip { record, p } => for_each_hit(&mut rng, p, shots, |s| flip(&mut f.rec[record], s)),
        }
    }
    let valid = |w: usize| -> u64 {
        let rem = shots.saturating_sub(64 * w);
        if rem >= 64 {
            u64::MAX
        } else {
            (1u64 << rem) - 1
        }
    };
    for (r, plane) in f.rec.iter_mut().enumerate() {
        let base = if reference[r] { u64::MAX } else { 0 };
        for (w, word) in plane.iter_mut().enumerate() {
            *word = (*word ^ base) & valid(w);
        }
    }
    f.rec
}

/// Samples `shots` executions of a Clifford circuit with inlined Pauli noise.
///
/// Uses a noise-free reference sample plus a per-shot Pauli frame. Output is a pure function
/// of `(c, shots, seed)` whatever the thread count.
pub fn run_batch(c: &Circuit, shots: usize, seed: u64) -> Result<ShotBatch> {
    let ops = compile(c)?;
    let (reference, _) = reference_sample(c)?;
    let n_blocks = shots.div_ceil(BLOCK_SHOTS);
    let job = |b: usize| {
        let here = (shots - b * BLOCK_SHOTS).min(BLOCK_SHOTS);
        run_block(
            &ops,
            c.n_qubits,
            &reference,
            c.n_records,
            seed,
            b as u64,
            here,
        )
    };
    #[cfg(feature = "parallel")]
    let blocks: Vec<_> = {
        use rayon::prelude::*;
        (0..n_blocks).into_par_iter().map(job).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let blocks: Vec<_> = (0..n_blocks).map(job).collect();

    let words = shots.div_ceil(64);
    let mut planes = vec![Vec::with_capacity(words); c.n_records];
    for (b, block) in blocks.iter().enumerate() {
        let here = (shots - b * BLOCK_SHOTS).min(BLOCK_SHOTS);
        let wn = here.div_ceil(64);
        for (r, plane) in planes.iter_mut().enumerate() {
            plane.extend_from_slice(&block[r][..wn]);
        }
    }
    Ok(ShotBatch {
        shots,
        seed,
        n_records: c.n_records,
        planes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hadamard_measure_is_balanced() {
        let mut c = Circuit::new(1);
        c.h(0);
        c.measure(0);
        let b = run_batch(&c, 100_000, 7).unwrap();
        let ones = b.counts(&[0]).get("1").copied().unwrap_or(0) as f64;
        let p = ones / 1e5;
        assert!((p - 0.5).abs() < 3.0 * 0.00158, "{p}");
    }

    #[test]
    fn bell_pair_outcomes_agree() {
        let mut c = Circuit::new(2);
        c.h(0).cnot(0, 1);
        c.measure(0);
        c.measure(1);
        let b = run_batch(&c, 5000, 1).unwrap();
        let counts = b.all_counts();
        assert!(counts.keys().all(|k| k == "00" || k == "11"));
        assert_eq!(counts.values().sum::<u64>(), 5000);
    }

    #[test]
    fn deterministic_per_seed() {
        let mut c = Circuit::new(2);
        c.h(0).cnot(0, 1);
        c.push(Gate::PauliError {
            q: 1,
            pauli: Letter::X,
            p: 0.1,
        });
        c.measure(0);
        c.measure(1);
        let a = run_batch(&c, 3000, 42).unwrap();
        let b = run_batch(&c, 3000, 42).unwrap();
        let d = run_batch(&c, 3000, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, d);
    }

    #[test]
    fn bit_flip_rate_matches() {
        let mut c = Circuit::new(1);
        c.push(Gate::PauliError {
            q: 0,
            pauli: Letter::X,
            p: 0.01,
        });
        c.measure(0);
        let b = run_batch(&c, 200_000, 5).unwrap();
        let ones = b.counts(&[0]).get("1").copied().unwrap_or(0) as f64 / 2e5;
        let sigma = (0.01f64 * 0.99 / 2e5).sqrt();
        assert!((ones - 0.01).abs() < 4.0 * sigma, "{ones}");
    }
}
