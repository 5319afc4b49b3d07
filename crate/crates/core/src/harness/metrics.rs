//! Distance to the ideal `(|110> + i|011>)/sqrt(2)` output, its decomposition and the exact
//! binomial bias test.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gse::{self, Occupation};

/// Decoded occupation histogram: the four even states in `Occupation::EVEN` order plus the
/// number of odd-parity (rejected) shots.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupationCounts {
    /// `[000, 110, 101, 011]`
    pub even: [u64; 4],
    pub odd: u64,
}

impl OccupationCounts {
    /// Decodes 6-bit output strings (qubit 0 first).
    pub fn from_outputs(counts: &BTreeMap<String, u64>) -> Result<Self> {
        let mut out = Self::default();
        for (k, &v) in counts {
            let bits: Vec<bool> = k.chars().map(|c| c == '1').collect();
            let bits: [bool; gse::N] = bits
                .try_into()
                .map_err(|_| Error::Config(format!("output string {k:?} is not 6 bits")))?;
            let d = gse::decode(&bits);
            if d.sector_parity {
                out.odd += v;
            } else {
                let i = Occupation::EVEN.iter().position(|&o| o == d.occupation).expect("even");
                out.even[i] += v;
            }
        }
        Ok(out)
    }

    pub fn get(&self, o: Occupation) -> u64 {
        Occupation::EVEN
            .iter()
            .position(|&e| e == o)
            .map_or(0, |i| self.even[i])
    }

    pub fn n000(&self) -> u64 {
        self.even[0]
    }
    pub fn n110(&self) -> u64 {
        self.even[1]
    }
    pub fn n101(&self) -> u64 {
        self.even[2]
    }
    pub fn n011(&self) -> u64 {
        self.even[3]
    }

    pub fn even_total(&self) -> u64 {
        self.even.iter().sum()
    }

    /// Keyed map `"110" -> count` over the even states.
    pub fn to_map(&self) -> BTreeMap<String, u64> {
        Occupation::EVEN
            .iter()
            .zip(self.even)
            .map(|(o, c)| (o.key(), c))
            .collect()
    }
}

/// Metrics of one histogram.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tvd: f64,
    /// `tvd - incorrect_component`, never negative.
    pub bias_component: f64,
    /// `P(000) + P(101)`
    pub incorrect_component: f64,
    pub bias_significance: f64,
    /// Parametric-bootstrap standard error of `tvd` (fixed seed, `BOOTSTRAP_RESAMPLES` draws).
    pub tvd_se: f64,
    /// Binomial standard error of `incorrect_component`.
    pub incorrect_se: f64,
    pub p110: f64,
    pub p011: f64,
}

fn probabilities(counts: &OccupationCounts) -> Result<([f64; 4], f64)> {
    let n = counts.even_total();
    if n == 0 {
        return Err(Error::EmptyCounts);
    }
    let nf = n as f64;
    Ok((counts.even.map(|c| c as f64 / nf), nf))
}

/// `1/2 sum |p - q|` over the four even states against the ideal distribution.
pub fn tvd(counts: &OccupationCounts) -> Result<f64> {
    let (p, _) = probabilities(counts)?;
    let ideal = gse::ideal_distribution();
    Ok(0.5
        * Occupation::EVEN
            .iter()
            .zip(p)
            .map(|(o, pi)| (pi - ideal[o]).abs())
            .sum::<f64>())
}

pub const BOOTSTRAP_RESAMPLES: usize = 400;
pub const BOOTSTRAP_SEED: u64 = 0x5e;

/// Standard deviation of `tvd` over multinomial resamples of the histogram.
pub fn tvd_bootstrap_se(counts: &OccupationCounts, resamples: usize, seed: u64) -> Result<f64> {
    let (p, _) = probabilities(counts)?;
    let n = counts.even_total();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vals = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut left = n;
        let mut mass = 1.0;
        let mut even = [0u64; 4];
        for i in 0..3 {
            let pi = if mass > 0.0 { (p[i] / mass).clamp(0.0, 1.0) } else { 0.0 };
            let k = Binomial::new(left, pi).expect("probability in range").sample(&mut rng);
            even[i] = k;
            left -= k;
            mass -= p[i];
        }
        even[3] = left;
        vals.push(tvd(&OccupationCounts { even, odd: 0 })?);
    }
    let m = vals.iter().sum::<f64>() / resamples as f64;
    let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (resamples as f64 - 1.0).max(1.0);
    Ok(var.sqrt())
}

pub fn metrics(counts: &OccupationCounts) -> Result<Metrics> {
    let (p, nf) = probabilities(counts)?;
    let t = tvd(counts)?;
    let incorrect = p[0] + p[2];
    Ok(Metrics {
        tvd: t,
        bias_component: (t - incorrect).max(0.0),
        incorrect_component: incorrect,
        bias_significance: bias_significance(counts.n110(), counts.n011())?,
        tvd_se: tvd_bootstrap_se(counts, BOOTSTRAP_RESAMPLES, BOOTSTRAP_SEED)?,
        incorrect_se: (incorrect * (1.0 - incorrect) / nf).sqrt(),
        p110: p[1],
        p011: p[3],
    })
}

/// `1 -` the two-sided exact binomial p-value of `n110` successes in `n110 + n011` trials at
/// `p = 1/2`. Summed exactly in log space; no normal approximation.
pub fn bias_significance(n110: u64, n011: u64) -> Result<f64> {
    let n = n110 + n011;
    if n == 0 {
        return Err(Error::EmptyCounts);
    }
    let k = n110.min(n011);
    if 2 * k == n {
        return Ok(0.0);
    }
    // ln C(n, k) - n ln 2
    let ln_c: f64 = (1..=k).map(|j| ((n - k + j) as f64 / j as f64).ln()).sum();
    let ln_pk = ln_c - n as f64 * std::f64::consts::LN_2;
    // tail sum relative to the k-th term, descending
    let mut sum = 1.0f64;
    let mut term = 1.0f64;
    let mut i = k;
    while i > 0 {
        term *= i as f64 / (n - i + 1) as f64;
        sum += term;
        if term < sum * 1e-18 {
            break;
        }
        i -= 1;
    }
    let p_value = (2.0 * (ln_pk + sum.ln()).exp()).min(1.0);
    Ok(1.0 - p_value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(n000: u64, n110: u64, n101: u64, n011: u64) -> OccupationCounts {
        OccupationCounts {
            even: [n000, n110, n101, n011],
            odd: 0,
        }
    }

    #[test]
    fn perfect_split_is_zero() {
        assert_eq!(tvd(&counts(0, 50000, 0, 50000)).unwrap(), 0.0);
    }

    #[test]
    fn decomposition_example() {
        let m = metrics(&counts(1000, 49000, 1000, 49000)).unwrap();
        assert!((m.tvd - 0.02).abs() < 1e-15);
        assert!((m.incorrect_component - 0.02).abs() < 1e-15);
        assert!(m.bias_component.abs() < 1e-15);
        assert_eq!(m.bias_significance, 0.0);
    }

    #[test]
    fn small_binomial_matches_enumeration() {
        // n = 10, k = 2: 2 * (1 + 10 + 45) / 1024
        let s = bias_significance(2, 8).unwrap();
        assert!((s - (1.0 - 112.0 / 1024.0)).abs() < 1e-14);
    }

    #[test]
    fn bootstrap_se_matches_binomial_away_from_the_kink() {
        // all excess sits on incorrect states, so tvd = P(000) + P(101)
        let c = counts(2000, 48000, 2000, 48000);
        let se = tvd_bootstrap_se(&c, 2000, 1).unwrap();
        let exact = (0.04f64 * 0.96 / 100000.0).sqrt();
        assert!((se / exact - 1.0).abs() < 0.1, "{se} vs {exact}");
        assert_eq!(se, tvd_bootstrap_se(&c, 2000, 1).unwrap());
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(tvd(&OccupationCounts::default()), Err(Error::EmptyCounts)));
        assert!(matches!(bias_significance(0, 0), Err(Error::EmptyCounts)));
    }
}
