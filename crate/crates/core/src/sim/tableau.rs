use rand::Rng;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString, Prim};

/// Aaronson-Gottesman tableau: rows `0..n` are destabilizers, rows `n..2n` stabilizers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    rows: Vec<PauliString>,
}

/// Outcome of a single Z measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Measurement {
    pub outcome: bool,
    pub random: bool,
}

impl Tableau {
    /// `|0...0>`
    pub fn new(n: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * n);
        rows.extend((0..n).map(|q| PauliString::single(n, q, Letter::X)));
        rows.extend((0..n).map(|q| PauliString::single(n, q, Letter::Z)));
        Self { n, rows }
    }

    /// The state stabilized by `generators` (with signs), built by measuring each generator on
    /// `|0...0>` and fixing the outcome with a Pauli.
    pub fn from_stabilizers(generators: &[PauliString]) -> Result<Self> {
        let n = generators.first().map_or(0, PauliString::num_qubits);
        if generators.len() != n {
            return Err(Error::InvalidCircuit(format!(
                "{} generators for {n} qubits",
                generators.len()
            )));
        }
        for (i, a) in generators.iter().enumerate() {
            if !a.is_hermitian() || a.is_identity() {
                return Err(Error::NotAStabilizer(a.to_string()));
            }
            for b in &generators[..i] {
                if !a.commutes(b)? {
                    return Err(Error::NotAStabilizer(format!("{a} anticommutes with {b}")));
                }
            }
        }
        let mut t = Self::new(n);
        let mut imposed = vec![false; n];
        for g in generators {
            if let Some(piv) = (n..2 * n).find(|&i| t.rows[i].anticommutes_unchecked(g)) {
                t.measure_pauli(g, false);
                imposed[piv - n] = true;
                continue;
            }
            // g is already in the group; rotate one free factor row onto it
            let factors: Vec<usize> = (0..n)
                .filter(|&i| t.rows[i].anticommutes_unchecked(g))
                .collect();
            let j = *factors
                .iter()
                .find(|&&i| !imposed[i])
                .ok_or_else(|| Error::NotAStabilizer(format!("{g} is dependent")))?;
            if t.expectation(g) != 1 {
                let fix = t.rows[j].clone();
                t.apply_pauli(&fix);
            }
            for &i in factors.iter().filter(|&&i| i != j) {
                let si = t.rows[n + i].clone();
                t.rows[n + j].mul_assign_right(&si);
                let dj = t.rows[j].clone();
                t.rows[i].mul_assign_right(&dj);
            }
            imposed[j] = true;
        }
        t.debug_check();
        Ok(t)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.rows[self.n..]
    }

    pub fn destabilizers(&self) -> &[PauliString] {
        &self.rows[..self.n]
    }

    pub fn apply_prim(&mut self, g: Prim) {
        for r in self.rows.iter_mut() {
            r.conjugate_prim(g);
        }
    }

    /// Applies the Pauli `p` as a unitary (conjugation flips anticommuting row signs).
    pub fn apply_pauli(&mut self, p: &PauliString) {
        for r in self.rows.iter_mut() {
            if r.anticommutes_unchecked(p) {
                r.set_phase((r.phase() + 2) & 3);
            }
        }
    }

    /// Applies a unitary gate. Non-Clifford gates are rejected; noise instructions are ignored.
    pub fn apply_unitary(&mut self, g: &Gate) -> Result<()> {
        if g.is_noise() {
            return Ok(());
        }
        for p in g.clifford_prims()? {
            self.apply_prim(p);
        }
        Ok(())
    }

    fn row_product(&self, idx: impl Iterator<Item = usize>) -> PauliString {
        let mut acc = PauliString::identity(self.n);
        for i in idx {
            acc.mul_assign_right(&self.rows[i]);
        }
        acc
    }

    /// Measures the Hermitian Pauli `p`. Random outcomes take `choice`. Returns `None` only
    /// when `p` is the identity up to sign.
    fn measure_pauli(&mut self, p: &PauliString, choice: bool) -> Option<bool> {
        let n = self.n;
        if p.is_identity() {
            return None;
        }
        let pivot = (n..2 * n).find(|&i| self.rows[i].anticommutes_unchecked(p));
        match pivot {
            Some(piv) => {
                let prow = self.rows[piv].clone();
                for i in 0..2 * n {
                    if i != piv && self.rows[i].anticommutes_unchecked(p) {
                        self.rows[i].mul_assign_right(&prow);
                    }
                }
                self.rows[piv - n] = prow;
                let mut s = p.unsigned();
                let sign = p.phase() == 2;
                s.set_phase(if sign ^ choice { 2 } else { 0 });
                self.rows[piv] = s;
                Some(choice)
            }
            None => {
                let acc = self.row_product(
                    (0..n).filter(|&i| self.rows[i].anticommutes_unchecked(p)).map(|i| i + n),
                );
                // acc equals +-p up to the sign of p
                let rel = (acc.phase() + 4 - p.phase()) & 3;
                Some(rel == 2)
            }
        }
    }

    /// Z measurement of qubit `q`. Random outcomes are drawn from `rng`, or forced to `force`.
    pub fn measure(&mut self, q: usize, force: Option<bool>, rng: &mut impl Rng) -> Measurement {
        let z = PauliString::single(self.n, q, Letter::Z);
        let random = (self.n..2 * self.n).any(|i| self.rows[i].x_bit(q));
        let choice = if random {
            force.unwrap_or_else(|| rng.gen())
        } else {
            false
        };
        let outcome = self.measure_pauli(&z, choice).expect("Z is not identity");
        self.debug_check();
        Measurement { outcome, random }
    }

    /// Resets qubit `q` to `|0>`.
    pub fn reset(&mut self, q: usize, rng: &mut impl Rng) {
        let m = self.measure(q, Some(false), rng);
        if m.outcome {
            self.apply_prim(Prim::X(q));
        }
    }

    /// Expectation of a Hermitian Pauli: +1, -1 or 0.
    pub fn expectation(&self, p: &PauliString) -> i32 {
        let n = self.n;
        if (n..2 * n).any(|i| self.rows[i].anticommutes_unchecked(p)) {
            return 0;
        }
        let acc = self.row_product(
            (0..n).filter(|&i| self.rows[i].anticommutes_unchecked(p)).map(|i| i + n),
        );
        if acc.unsigned() != p.unsigned() {
            // only possible for the identity
            return if p.phase() == 0 { 1 } else { -1 };
        }
        if (acc.phase() + 4 - p.phase()) & 3 == 0 {
            1
        } else {
            -1
        }
    }

    /// True when both tableaus describe the same stabilizer state, signs included.
    pub fn same_state(&self, other: &Tableau) -> bool {
        self.n == other.n && other.stabilizers().iter().all(|s| self.expectation(s) == 1)
    }

    /// Checks the canonical commutation pattern.
    pub fn check_invariants(&self) -> bool {
        let n = self.n;
        for i in 0..2 * n {
            if !self.rows[i].is_hermitian() && i >= n {
                return false;
            }
            for j in 0..i {
                let anti = self.rows[i].anticommutes_unchecked(&self.rows[j]);
                let expected = i >= n && j == i - n;
                if anti != expected {
                    return false;
                }
            }
        }
        true
    }

    #[inline]
    fn debug_check(&self) {
        debug_assert!(self.check_invariants(), "tableau commutation invariant broken");
    }

    /// Applies any non-noise instruction; measurements push into `records`.
    pub fn apply(
        &mut self,
        g: &Gate,
        records: &mut [bool],
        force_random: Option<bool>,
        rng: &mut impl Rng,
    ) -> Result<Option<Measurement>> {
        match *g {
            Gate::MeasureZ { q, record } => {
                let m = self.measure(q, force_random, rng);
                records[record] = m.outcome;
                Ok(Some(m))
            }
            Gate::Reset { q } => {
                self.reset(q, rng);
                Ok(None)
            }
            _ => {
                self.apply_unitary(g)?;
                Ok(None)
            }
        }
    }
}

/// Stabilizer state prepared from `|0...0>` by a measurement-free Clifford circuit.
pub fn stabilizer_state(c: &Circuit) -> Result<Tableau> {
    let mut t = Tableau::new(c.n_qubits);
    for g in &c.ops {
        if g.is_measurement_like() && !g.is_noise() {
            return Err(Error::InvalidCircuit(format!("{g} in a unitary preparation")));
        }
        t.apply_unitary(g)?;
    }
    Ok(t)
}

/// Noise-free reference sample: every random measurement outcome is forced to 0.
/// Returns the records and, per record, whether its outcome was random.
pub fn reference_sample(c: &Circuit) -> Result<(Vec<bool>, Vec<bool>)> {
    let mut t = Tableau::new(c.n_qubits);
    let mut records = vec![false; c.n_records];
    let mut random = vec![false; c.n_records];
    let mut rng = rand::rngs::mock::StepRng::new(0, 0);
    for g in &c.ops {
        if g.is_noise() {
            continue;
        }
        if let Some(m) = t.apply(g, &mut records, Some(false), &mut rng)? {
            if let Gate::MeasureZ { record, .. } = *g {
                random[record] = m.random;
            }
        }
    }
    Ok((records, random))
}

fn sample_letter(rng: &mut impl Rng, px: f64, py: f64, pz: f64) -> Letter {
    let u: f64 = rng.gen();
    if u < px {
        Letter::X
    } else if u < px + py {
        Letter::Y
    } else if u < px + py + pz {
        Letter::Z
    } else {
        Letter::I
    }
}

/// One noisy shot on the full tableau, for cross-checking the frame sampler.
pub fn run_shot(c: &Circuit, rng: &mut impl Rng) -> Result<Vec<bool>> {
    let n = c.n_qubits;
    let mut t = Tableau::new(n);
    let mut records = vec![false; c.n_records];
    let pauli = |t: &mut Tableau, q: usize, l: Letter| {
        if l != Letter::I {
            t.apply_pauli(&PauliString::single(n, q, l));
        }
    };
    for g in &c.ops {
        match *g {
            Gate::PauliError { q, pauli: l, p } => {
                if rng.gen::<f64>() < p {
                    pauli(&mut t, q, l);
                }
            }
            Gate::PauliChannel1 { q, px, py, pz } => {
                let l = sample_letter(rng, px, py, pz);
                pauli(&mut t, q, l);
            }
            Gate::Depolarize1 { q, p } => {
                let l = sample_letter(rng, p / 3.0, p / 3.0, p / 3.0);
                pauli(&mut t, q, l);
            }
            Gate::Depolarize2 { a, b, p } => {
                if rng.gen::<f64>() < p {
                    let k = rng.gen_range(1..16u8);
                    pauli(&mut t, a, Letter::from_bits(k & 1 != 0, k & 2 != 0));
                    pauli(&mut t, b, Letter::from_bits(k & 4 != 0, k & 8 != 0));
                }
            }
            Gate::FlipRecord { record, p } => {
                if rng.gen::<f64>() < p {
                    records[record] ^= true;
                }
            }
            _ => {
                t.apply(g, &mut records, None, rng)?;
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn hadamard_turns_z_into_x() {
        let mut t = Tableau::new(1);
        t.apply_prim(Prim::H(0));
        assert_eq!(t.stabilizers()[0], ps("+X"));
    }

    #[test]
    fn cnot_spreads_x() {
        let mut t = Tableau::new(2);
        t.apply_prim(Prim::H(0));
        t.apply_prim(Prim::Cx(0, 1));
        assert_eq!(t.expectation(&ps("XX")), 1);
        assert_eq!(t.expectation(&ps("ZZ")), 1);
        assert_eq!(t.expectation(&ps("IZ")), 0);
        assert!(t.check_invariants());
    }

    #[test]
    fn repeated_measurement_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut t = Tableau::new(1);
            t.apply_prim(Prim::H(0));
            let a = t.measure(0, None, &mut rng);
            let b = t.measure(0, None, &mut rng);
            assert!(a.random && !b.random);
            assert_eq!(a.outcome, b.outcome);
        }
    }

    #[test]
    fn from_stabilizers_respects_signs() {
        let gens = [ps("-ZZ"), ps("+XX")];
        let t = Tableau::from_stabilizers(&gens).unwrap();
        assert_eq!(t.expectation(&ps("ZZ")), -1);
        assert_eq!(t.expectation(&ps("XX")), 1);
        assert_eq!(t.expectation(&ps("YY")), 1);
        assert!(Tableau::from_stabilizers(&[ps("ZZ"), ps("XI")]).is_err());
        assert!(Tableau::from_stabilizers(&[ps("ZZ"), ps("-ZZ")]).is_err());
    }

    #[test]
    fn reset_returns_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut t = Tableau::new(2);
        t.apply_prim(Prim::H(0));
        t.apply_prim(Prim::Cx(0, 1));
        t.reset(1, &mut rng);
        assert_eq!(t.expectation(&ps("IZ")), 1);
    }
}
