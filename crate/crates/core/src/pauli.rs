//! Pauli strings and Clifford conjugation in the symplectic (x|z) picture.
//!
//! A [`PauliString`] stores `i^phase * P_0 (x) P_1 (x) ...` where each letter
//! `P_q` is chosen by the bit pair `(x_q, z_q)`: `(1,0) = X`, `(0,1) = Z`,
//! `(1,1) = Y`. The letter convention means `Y = iXZ`, so a Hermitian
//! string always carries phase 0 or 2.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

#[inline]
pub(crate) fn get_bit(words: &[u64], i: usize) -> bool {
    (words[i / 64] >> (i % 64)) & 1 == 1
}

#[inline]
pub(crate) fn set_bit(words: &mut [u64], i: usize, v: bool) {
    let mask = 1u64 << (i % 64);
    if v {
        words[i / 64] |= mask;
    } else {
        words[i / 64] &= !mask;
    }
}


/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | '_' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// Clifford primitives shared by every simulation back end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Prim {
    H(usize),
    S(usize),
    SDag(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cx(usize, usize),
    Cz(usize, usize),
}

impl Prim {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Prim::H(q) | Prim::S(q) | Prim::SDag(q) | Prim::X(q) | Prim::Y(q) | Prim::Z(q) => {
                (q, None)
            }
            Prim::Cx(a, b) | Prim::Cz(a, b) => (a, Some(b)),
        }
    }

    pub fn inverse(self) -> Prim {
        match self {
            Prim::S(q) => Prim::SDag(q),
            Prim::SDag(q) => Prim::S(q),
            p => p,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    pub fn single(n: usize, q: usize, letter: Letter) -> Self {
        let mut p = Self::identity(n);
        p.set(q, letter);
        p
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut p = Self::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            p.set(q, l);
        }
        p
    }

    /// Builds a string from packed bit vectors; bits beyond `n` must be clear.
    pub fn from_bits(n: usize, x: Vec<u64>, z: Vec<u64>, phase: u8) -> Self {
        assert_eq!(x.len(), words_for(n));
        assert_eq!(z.len(), words_for(n));
        Self {
            n,
            x,
            z,
            phase: phase & 3,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase & 3;
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn x_bit(&self, q: usize) -> bool {
        get_bit(&self.x, q)
    }

    pub fn z_bit(&self, q: usize) -> bool {
        get_bit(&self.z, q)
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x_bit(q), self.z_bit(q))
    }

    pub fn set(&mut self, q: usize, letter: Letter) {
        let (xb, zb) = letter.bits();
        set_bit(&mut self.x, q, xb);
        set_bit(&mut self.z, q, zb);
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(self.z.iter()).all(|&w| w == 0)
    }

    /// True when the operator is `+-` a tensor product of letters.
    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// `Some(true)` for a `-` sign, `Some(false)` for `+`, `None` when the phase is `+-i`.
    pub fn sign_bit(&self) -> Option<bool> {
        match self.phase {
            0 => Some(false),
            2 => Some(true),
            _ => None,
        }
    }

    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        p.phase = (p.phase + 2) & 3;
        p
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&q| self.x_bit(q) || self.z_bit(q))
            .collect()
    }

    /// Same letters with the phase cleared.
    pub fn unsigned(&self) -> Self {
        let mut p = self.clone();
        p.phase = 0;
        p
    }

    pub fn inverse(&self) -> Self {
        // Letters square to identity, so only the phase is inverted.
        let mut p = self.clone();
        p.phase = (4 - p.phase) & 3;
        p
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::LengthMismatch(self.n, other.n));
        }
        Ok(())
    }

    /// Symplectic inner product parity.
    pub fn anticommutes(&self, other: &Self) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.anticommutes_unchecked(other))
    }

    pub(crate) fn anticommutes_unchecked(&self, other: &Self) -> bool {
        let mut acc = 0u32;
        for i in 0..self.x.len() {
            acc += ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones();
        }
        acc & 1 == 1
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        Ok(!self.anticommutes(other)?)
    }

    /// Product `self * other` with the exact power of `i`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        let mut out = self.clone();
        out.mul_assign_right(other);
        Ok(out)
    }

    /// `self <- self * other`.
    pub(crate) fn mul_assign_right(&mut self, other: &Self) {
        let mut plus = 0u32;
        let mut minus = 0u32;
        for i in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[i], self.z[i], other.x[i], other.z[i]);
            // Letter products giving +i: XY, YZ, ZX; giving -i: YX, ZY, XZ.
            let p = (x1 & z1 & !x2 & z2) | (x1 & !z1 & x2 & z2) | (!x1 & z1 & x2 & !z2);
            let m = (x1 & z1 & x2 & !z2) | (x1 & !z1 & !x2 & z2) | (!x1 & z1 & x2 & z2);
            plus += p.count_ones();
            minus += m.count_ones();
            self.x[i] = x1 ^ x2;
            self.z[i] = z1 ^ z2;
        }
        let delta = (plus as i64 - minus as i64).rem_euclid(4) as u8;
        self.phase = (self.phase + other.phase + delta) & 3;
    }

    /// Conjugates in place: `P <- G P G^dagger`.
    pub fn conjugate_prim(&mut self, g: Prim) {
        match g {
            Prim::H(q) => {
                let (xb, zb) = (self.x_bit(q), self.z_bit(q));
                if xb && zb {
                    self.phase = (self.phase + 2) & 3;
                }
                set_bit(&mut self.x, q, zb);
                set_bit(&mut self.z, q, xb);
            }
            Prim::S(q) => {
                let (xb, zb) = (self.x_bit(q), self.z_bit(q));
                if xb && zb {
                    self.phase = (self.phase + 2) & 3;
                }
                set_bit(&mut self.z, q, zb ^ xb);
            }
            Prim::SDag(q) => {
                let (xb, zb) = (self.x_bit(q), self.z_bit(q));
                if xb && !zb {
                    self.phase = (self.phase + 2) & 3;
                }
                set_bit(&mut self.z, q, zb ^ xb);
            }
            Prim::X(q) => {
                if self.z_bit(q) {
                    self.phase = (self.phase + 2) & 3;
                }
            }
            Prim::Y(q) => {
                if self.x_bit(q) ^ self.z_bit(q) {
                    self.phase = (self.phase + 2) & 3;
                }
            }
            Prim::Z(q) => {
                if self.x_bit(q) {
                    self.phase = (self.phase + 2) & 3;
                }
            }
            Prim::Cx(c, t) => {
                let (xc, zc, xt, zt) = (self.x_bit(c), self.z_bit(c), self.x_bit(t), self.z_bit(t));
                if xc && zt && (xt == zc) {
                    self.phase = (self.phase + 2) & 3;
                }
                set_bit(&mut self.x, t, xt ^ xc);
                set_bit(&mut self.z, c, zc ^ zt);
            }
            Prim::Cz(a, b) => {
                self.conjugate_prim(Prim::H(b));
                self.conjugate_prim(Prim::Cx(a, b));
                self.conjugate_prim(Prim::H(b));
            }
        }
    }

    /// Embeds into a wider register, placing qubit `q` at `offset + q`.
    pub fn embed(&self, n: usize, offset: usize) -> Self {
        assert!(offset + self.n <= n);
        let mut p = Self::identity(n);
        for q in 0..self.n {
            p.set(offset + q, self.letter(q));
        }
        p.phase = self.phase;
        p
    }

    /// Restriction to `len` qubits starting at `offset`; the phase is kept.
    pub fn slice(&self, offset: usize, len: usize) -> Self {
        let mut p = Self::identity(len);
        for q in 0..len {
            p.set(q, self.letter(offset + q));
        }
        p.phase = self.phase;
        p
    }

    /// Parses the sparse token form, e.g. `"Z6 X7 Z10"`. Indices are shifted down by `offset`.
    pub fn parse_sparse(text: &str, n: usize, offset: usize) -> Result<Self> {
        let err = |reason: String| Error::PauliParse {
            text: text.to_string(),
            reason,
        };
        let mut body = text.trim();
        let mut phase = 0u8;
        for (prefix, ph) in [("+i", 1u8), ("-i", 3), ("−i", 3), ("+", 0), ("-", 2), ("−", 2)] {
            if let Some(rest) = body.strip_prefix(prefix) {
                phase = ph;
                body = rest.trim_start();
                break;
            }
        }
        let mut p = Self::identity(n);
        for tok in body.split(|c: char| c.is_whitespace() || c == '*' || c == ',') {
            if tok.is_empty() {
                continue;
            }
            let mut chars = tok.chars();
            let l = chars
                .next()
                .and_then(Letter::from_char)
                .ok_or_else(|| err(format!("bad token {tok:?}")))?;
            let idx: usize = chars
                .as_str()
                .trim_start_matches('_')
                .parse()
                .map_err(|_| err(format!("bad index in {tok:?}")))?;
            if idx < offset || idx - offset >= n {
                return Err(err(format!("index {idx} outside [{offset}, {})", offset + n)));
            }
            if p.letter(idx - offset) != Letter::I {
                return Err(err(format!("qubit {idx} repeated")));
            }
            p.set(idx - offset, l);
        }
        p.phase = phase;
        Ok(p)
    }

    /// Sparse token form, indices shifted up by `offset`.
    pub fn to_sparse(&self, offset: usize) -> String {
        let mut s = String::new();
        match self.phase {
            1 => s.push_str("+i "),
            2 => s.push_str("-"),
            3 => s.push_str("-i "),
            _ => {}
        }
        let toks: Vec<String> = self
            .support()
            .into_iter()
            .map(|q| format!("{}{}", self.letter(q).as_char(), q + offset))
            .collect();
        s.push_str(&toks.join(" "));
        s
    }

    /// 2n-bit encoding, `[x_0..x_{n-1}, z_0..z_{n-1}]`.
    pub fn to_xz_bits(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(2 * self.n);
        v.extend((0..self.n).map(|q| self.x_bit(q) as u8));
        v.extend((0..self.n).map(|q| self.z_bit(q) as u8));
        v
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(sign)?;
        for q in 0..self.n {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Dense form with optional sign (`+`, `-`, `+i`, `-i`, `i`), leftmost letter is qubit 0.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (phase, body) = if let Some(r) = t.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = t.strip_prefix("-i").or_else(|| t.strip_prefix("−i")) {
            (3, r)
        } else if let Some(r) = t.strip_prefix('i') {
            (1, r)
        } else if let Some(r) = t.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = t.strip_prefix('-').or_else(|| t.strip_prefix('−')) {
            (2, r)
        } else {
            (0, t)
        };
        let letters = body
            .chars()
            .map(|c| {
                Letter::from_char(c).ok_or_else(|| Error::PauliParse {
                    text: s.to_string(),
                    reason: format!("unexpected character {c:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::PauliParse {
                text: s.to_string(),
                reason: "no letters".into(),
            });
        }
        let mut p = PauliString::from_letters(&letters);
        p.phase = phase;
        Ok(p)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Direction of Clifford conjugation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `C P C^dagger`
    Forward,
    /// `C^dagger P C`
    Inverse,
}

/// A Clifford unitary recorded by the images of `X_q` and `Z_q` under conjugation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordMap {
    n: usize,
    x_images: Vec<PauliString>,
    z_images: Vec<PauliString>,
}

impl CliffordMap {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            x_images: (0..n).map(|q| PauliString::single(n, q, Letter::X)).collect(),
            z_images: (0..n).map(|q| PauliString::single(n, q, Letter::Z)).collect(),
        }
    }

    /// Map for the sequence `prims` applied in time order.
    pub fn from_prims(n: usize, prims: impl IntoIterator<Item = Prim>) -> Self {
        let mut c = Self::identity(n);
        for g in prims {
            c.then(g);
        }
        c
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_image(&self, q: usize) -> &PauliString {
        &self.x_images[q]
    }

    pub fn z_image(&self, q: usize) -> &PauliString {
        &self.z_images[q]
    }

    /// Appends a gate after the current map: `C <- G C`.
    pub fn then(&mut self, g: Prim) {
        for img in self.x_images.iter_mut().chain(self.z_images.iter_mut()) {
            img.conjugate_prim(g);
        }
    }

    pub fn is_symplectic(&self) -> bool {
        for a in 0..self.n {
            for b in 0..self.n {
                let xx = self.x_images[a].anticommutes_unchecked(&self.x_images[b]);
                let zz = self.z_images[a].anticommutes_unchecked(&self.z_images[b]);
                let xz = self.x_images[a].anticommutes_unchecked(&self.z_images[b]);
                if xx || zz || xz != (a == b) {
                    return false;
                }
            }
        }
        true
    }

    fn apply_images(
        x_images: &[PauliString],
        z_images: &[PauliString],
        p: &PauliString,
    ) -> PauliString {
        let n = p.num_qubits();
        let mut out = PauliString::identity(n);
        out.phase = p.phase;
        for q in 0..n {
            let (xb, zb) = (p.x_bit(q), p.z_bit(q));
            if xb {
                out.mul_assign_right(&x_images[q]);
            }
            if zb {
                out.mul_assign_right(&z_images[q]);
            }
            if xb && zb {
                // Y = i X Z
                out.phase = (out.phase + 1) & 3;
            }
        }
        out
    }

    pub fn inverse(&self) -> Self {
        let n = self.n;
        // Symplectic inverse: the preimage of X_q has x-bits from the z-row of
        // the images, and vice versa.
        let mut xi = Vec::with_capacity(n);
        let mut zi = Vec::with_capacity(n);
        for q in 0..n {
            let mut px = PauliString::identity(n);
            let mut pz = PauliString::identity(n);
            for a in 0..n {
                // coefficient of X_a in preimage of X_q: does image(Z_a) anticommute with X_q?
                let xq = PauliString::single(n, q, Letter::X);
                let zq = PauliString::single(n, q, Letter::Z);
                let x_of_xq = self.z_images[a].anticommutes_unchecked(&xq);
                let z_of_xq = self.x_images[a].anticommutes_unchecked(&xq);
                let x_of_zq = self.z_images[a].anticommutes_unchecked(&zq);
                let z_of_zq = self.x_images[a].anticommutes_unchecked(&zq);
                set_bit(&mut px.x, a, x_of_xq);
                set_bit(&mut px.z, a, z_of_xq);
                set_bit(&mut pz.x, a, x_of_zq);
                set_bit(&mut pz.z, a, z_of_zq);
            }
            xi.push(px);
            zi.push(pz);
        }
        // Fix signs so that C (C^-1 P) = P exactly.
        for q in 0..n {
            let back = Self::apply_images(&self.x_images, &self.z_images, &xi[q]);
            xi[q].phase = (4 - back.phase) & 3;
            let back = Self::apply_images(&self.x_images, &self.z_images, &zi[q]);
            zi[q].phase = (4 - back.phase) & 3;
        }
        Self {
            n,
            x_images: xi,
            z_images: zi,
        }
    }

    pub fn conjugate(&self, p: &PauliString, dir: Direction) -> Result<PauliString> {
        if p.num_qubits() != self.n {
            return Err(Error::LengthMismatch(self.n, p.num_qubits()));
        }
        Ok(match dir {
            Direction::Forward => Self::apply_images(&self.x_images, &self.z_images, p),
            Direction::Inverse => {
                let inv = self.inverse();
                Self::apply_images(&inv.x_images, &inv.z_images, p)
            }
        })
    }
}

/// Row-reduced generating set of an abelian (or arbitrary) Pauli group, used for
/// membership and sign lookup.
#[derive(Clone, Debug)]
pub struct PauliGroup {
    n: usize,
    /// Reduced rows with their pivot bit index in the `[x | z]` layout.
    rows: Vec<(usize, PauliString)>,
}

impl PauliGroup {
    pub fn new(generators: &[PauliString]) -> Result<Self> {
        let n = generators.first().map_or(0, |g| g.num_qubits());
        let mut group = Self { n, rows: vec![] };
        for g in generators {
            if g.num_qubits() != n {
                return Err(Error::LengthMismatch(n, g.num_qubits()));
            }
            let r = group.reduce(g);
            if let Some(pivot) = first_bit(&r) {
                // keep rows fully reduced against the new pivot
                for (_, row) in group.rows.iter_mut() {
                    if bit_at(row, pivot) {
                        row.mul_assign_right(&r);
                    }
                }
                group.rows.push((pivot, r));
            }
        }
        Ok(group)
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, p: &PauliString) -> PauliString {
        let mut r = p.clone();
        for (pivot, row) in &self.rows {
            if bit_at(&r, *pivot) {
                r.mul_assign_right(row);
            }
        }
        r
    }

    /// Returns the group element with the same letters as `p` (including its phase),
    /// or `None` when no element matches up to phase.
    pub fn find(&self, p: &PauliString) -> Option<PauliString> {
        if p.num_qubits() != self.n {
            return None;
        }
        // product of rows whose pivots appear in p
        let mut acc = PauliString::identity(self.n);
        let mut residual = p.unsigned();
        for (pivot, row) in &self.rows {
            if bit_at(&residual, *pivot) {
                residual.mul_assign_right(row);
                acc.mul_assign_right(row);
            }
        }
        if residual.x.iter().chain(residual.z.iter()).any(|&w| w != 0) {
            return None;
        }
        Some(acc)
    }

    pub fn contains_up_to_phase(&self, p: &PauliString) -> bool {
        self.find(p).is_some()
    }

    /// Phase of the group element matching `p`'s letters, relative to `+letters`.
    pub fn phase_of(&self, p: &PauliString) -> Option<u8> {
        self.find(p).map(|e| e.phase)
    }
}

fn bit_at(p: &PauliString, idx: usize) -> bool {
    if idx < p.n {
        p.x_bit(idx)
    } else {
        p.z_bit(idx - p.n)
    }
}

fn first_bit(p: &PauliString) -> Option<usize> {
    (0..p.n)
        .find(|&q| p.x_bit(q))
        .or_else(|| (0..p.n).find(|&q| p.z_bit(q)).map(|q| q + p.n))
}
