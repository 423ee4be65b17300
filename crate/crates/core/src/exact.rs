//! Exact arithmetic for operators whose matrix entries are square roots of
//! integers (ladder words and their products).
//!
//! Entries are finite sums `Σ cᵢ √qᵢ` with rational `cᵢ` and square-free
//! `qᵢ`, so nested commutators of such operators are evaluated without
//! rounding. Deep nested commutators of `Y±` involve products of size
//! `~ N^{n(n+1)/2}` whose floating-point cancellation would swamp the
//! residual being measured.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;

use crate::fock::{apply_word_squared, Ladder, OccupationState};
use crate::polyalg::{AlgebraRep, RepDomain, PUMP, SIGNAL};
use crate::{Error, Result};

type Q = Ratio<i128>;

/// Split `m = a² q` with `q` square-free; returns `(a, q)`.
fn square_free(mut m: u128) -> (u128, u128) {
    let mut a = 1u128;
    let mut p = 2u128;
    while p * p <= m {
        while m % (p * p) == 0 {
            m /= p * p;
            a *= p;
        }
        p += 1;
    }
    (a, m)
}

/// Element of `Q(√2, √3, √5, ...)`: map from square-free radicand to coefficient.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Surd(BTreeMap<u128, Q>);

impl Surd {
    pub fn sqrt_of(m: u128) -> Self {
        if m == 0 {
            return Self::default();
        }
        let (a, q) = square_free(m);
        let mut map = BTreeMap::new();
        map.insert(q, Q::from_integer(a as i128));
        Self(map)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add_term(&mut self, q: u128, c: Q) {
        let entry = self.0.entry(q).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.0.remove(&q);
        }
    }

    pub fn add_scaled(&mut self, other: &Surd, sign: i128) {
        for (&q, &c) in &other.0 {
            self.add_term(q, c * Q::from_integer(sign));
        }
    }

    pub fn mul(&self, other: &Surd) -> Surd {
        let mut out = Surd::default();
        for (&q1, &c1) in &self.0 {
            for (&q2, &c2) in &other.0 {
                let g = q1.gcd(&q2);
                out.add_term((q1 / g) * (q2 / g), c1 * c2 * Q::from_integer(g as i128));
            }
        }
        out
    }

    pub fn to_f64(&self) -> f64 {
        self.0
            .iter()
            .map(|(&q, c)| (*c.numer() as f64 / *c.denom() as f64) * (q as f64).sqrt())
            .sum()
    }
}

/// Sparse matrix with [`Surd`] entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SurdMatrix {
    dim: usize,
    entries: BTreeMap<(usize, usize), Surd>,
}

impl SurdMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: BTreeMap::new() }
    }

    /// Exact matrix of a ladder word on the span of `states`.
    pub fn from_word(states: &[OccupationState], word: &[Ladder]) -> Self {
        let index: BTreeMap<&OccupationState, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut m = Self::zeros(states.len());
        for (col, s) in states.iter().enumerate() {
            if let Some((amp2, target)) = apply_word_squared(word, s) {
                if let Some(&row) = index.get(&target) {
                    m.entries.insert((row, col), Surd::sqrt_of(amp2));
                }
            }
        }
        m
    }

    /// Transpose (entries are real).
    pub fn transpose(&self) -> Self {
        let entries = self.entries.iter().map(|(&(r, c), v)| ((c, r), v.clone())).collect();
        Self { dim: self.dim, entries }
    }

    pub fn mul(&self, other: &SurdMatrix) -> SurdMatrix {
        let mut by_row: BTreeMap<usize, Vec<(usize, &Surd)>> = BTreeMap::new();
        for (&(r, c), v) in &other.entries {
            by_row.entry(r).or_default().push((c, v));
        }
        let mut out = SurdMatrix::zeros(self.dim);
        for (&(r, k), a) in &self.entries {
            if let Some(row) = by_row.get(&k) {
                for &(c, b) in row {
                    let prod = a.mul(b);
                    let slot = out.entries.entry((r, c)).or_default();
                    slot.add_scaled(&prod, 1);
                }
            }
        }
        out.entries.retain(|_, v| !v.is_zero());
        out
    }

    pub fn commutator(&self, other: &SurdMatrix) -> SurdMatrix {
        let mut out = self.mul(other);
        for (&key, v) in &other.mul(self).entries {
            out.entries.entry(key).or_default().add_scaled(v, -1);
        }
        out.entries.retain(|_, v| !v.is_zero());
        out
    }

    /// Largest `|entry|` over kept rows and columns.
    pub fn max_abs_masked(&self, keep: &[bool]) -> f64 {
        self.entries
            .iter()
            .filter(|(&(r, c), _)| keep[r] && keep[c])
            .map(|(_, v)| v.to_f64().abs())
            .fold(0.0, f64::max)
    }
}

/// Exact `Y±` of an [`AlgebraRep`], rebuilt from its Fock realization.
#[derive(Debug, Clone)]
pub struct ExactShiftCheck {
    y_plus: SurdMatrix,
    y_minus: SurdMatrix,
}

impl ExactShiftCheck {
    pub fn new(rep: &AlgebraRep) -> Result<Self> {
        let word = match rep.domain {
            RepDomain::Sector(sector) => {
                let mut w = alloc::vec![Ladder::Create(SIGNAL); sector.n() as usize];
                w.push(Ladder::Annihilate(PUMP));
                w
            }
            RepDomain::ResidueClass { n, .. } => alloc::vec![Ladder::Create(0); n as usize],
        };
        if rep.states.is_empty() {
            return Err(Error::InvalidArgument("empty representation"));
        }
        let y_plus = SurdMatrix::from_word(&rep.states, &word);
        let y_minus = y_plus.transpose();
        Ok(Self { y_plus, y_minus })
    }

    /// Interior norms of `ad^order Y⁺` and `ad^(order-1) Y⁺`.
    pub fn nested_commutator_norms(&self, order: usize, keep: &[bool]) -> (f64, f64) {
        let mut x = self.y_plus.clone();
        let mut previous = 0.0;
        for _ in 0..order {
            previous = x.max_abs_masked(keep);
            x = self.y_minus.commutator(&x);
        }
        (x.max_abs_masked(keep), previous)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_free_parts() {
        assert_eq!(square_free(72), (6, 2));
        assert_eq!(square_free(1), (1, 1));
        assert_eq!(square_free(30), (1, 30));
    }

    #[test]
    fn surd_products_are_exact() {
        let a = Surd::sqrt_of(6);
        let b = Surd::sqrt_of(15);
        // √6 √15 = 3√10
        assert_eq!(a.mul(&b), Surd::sqrt_of(90));
        let mut z = Surd::sqrt_of(8);
        z.add_scaled(&Surd::sqrt_of(2), -2);
        assert!(z.is_zero());
        assert!((Surd::sqrt_of(12).to_f64() - 12f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn canonical_commutator_exact() {
        let states: Vec<OccupationState> = (0..6).map(|k| OccupationState(alloc::vec![k])).collect();
        let ad = SurdMatrix::from_word(&states, &[Ladder::Create(0)]);
        let a = ad.transpose();
        let c = a.commutator(&ad);
        let keep = [true, true, true, true, true, false];
        for i in 0..5 {
            assert_eq!(c.entries.get(&(i, i)), Some(&Surd::sqrt_of(1)));
        }
        assert_eq!(c.entries.len(), 6);
        assert!(c.max_abs_masked(&keep) == 1.0);
    }
}
