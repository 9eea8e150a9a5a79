use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Ratio};
use num_traits::Num;

use crate::error::{invalid, Result};
use crate::flows::Flow;
use crate::linalg::c;

/// Element of the free group on generators `g_i`, `i ∈ ℤ`, stored as runs
/// `(i, k)` meaning `g_i^k` with `k != 0` and no two adjacent runs on the
/// same generator. The empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ReducedWord {
    runs: Vec<(i64, i64)>,
}

impl ReducedWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn generator(i: i64) -> Self {
        Self { runs: vec![(i, 1)] }
    }

    /// Freely reduces `g_{i₁}^{k₁} g_{i₂}^{k₂} ⋯`.
    pub fn from_runs(runs: &[(i64, i64)]) -> Self {
        let mut w = Self::identity();
        for &(i, k) in runs {
            w.push(i, k);
        }
        w
    }

    /// Freely reduces a sequence of letters `g_i^{±1}`.
    pub fn from_letters(letters: &[(i64, i8)]) -> Result<Self> {
        let mut w = Self::identity();
        for &(i, e) in letters {
            if e != 1 && e != -1 {
                return Err(invalid(format!("letter exponent must be ±1, got {e}")));
            }
            w.push(i, e as i64);
        }
        Ok(w)
    }

    // one stack step: merge with the top run, popping it if the powers cancel
    fn push(&mut self, i: i64, k: i64) {
        if k == 0 {
            return;
        }
        match self.runs.last_mut() {
            Some(top) if top.0 == i => {
                top.1 += k;
                if top.1 == 0 {
                    self.runs.pop();
                }
            }
            _ => self.runs.push((i, k)),
        }
    }

    pub fn runs(&self) -> &[(i64, i64)] {
        &self.runs
    }

    pub fn letters(&self) -> Vec<(i64, i8)> {
        self.runs
            .iter()
            .flat_map(|&(i, k)| std::iter::repeat_n((i, k.signum() as i8), k.unsigned_abs() as usize))
            .collect()
    }

    /// Number of letters.
    pub fn len(&self) -> u64 {
        self.runs.iter().map(|r| r.1.unsigned_abs()).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn inverse(&self) -> Self {
        Self {
            runs: self.runs.iter().rev().map(|&(i, k)| (i, -k)).collect(),
        }
    }

    pub fn multiply(&self, other: &Self) -> Self {
        let mut w = self.clone();
        for &(i, k) in &other.runs {
            w.push(i, k);
        }
        w
    }

    /// `αⁿ`: `g_i ↦ g_{i+n}`.
    pub fn shift(&self, n: i64) -> Self {
        Self {
            runs: self.runs.iter().map(|&(i, k)| (i + n, k)).collect(),
        }
    }

    /// `max |i|` over the generators used; 0 for the identity.
    pub fn max_abs_index(&self) -> u64 {
        self.runs.iter().map(|r| r.0.unsigned_abs()).max().unwrap_or(0)
    }
}

impl Mul for &ReducedWord {
    type Output = ReducedWord;
    fn mul(self, rhs: &ReducedWord) -> ReducedWord {
        self.multiply(rhs)
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.runs.is_empty() {
            return write!(f, "e");
        }
        for (n, &(i, k)) in self.runs.iter().enumerate() {
            if n > 0 {
                write!(f, " ")?;
            }
            if k == 1 {
                write!(f, "g{i}")?;
            } else {
                write!(f, "g{i}^{k}")?;
            }
        }
        Ok(())
    }
}

/// Scalars for group-algebra elements.
pub trait Coefficient: Clone + PartialEq + Num + Neg<Output = Self> {
    fn conj(&self) -> Self;
}

impl Coefficient for Complex64 {
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
}

macro_rules! real_coefficient {
    ($($t:ty),*) => {$(
        impl Coefficient for $t {
            fn conj(&self) -> Self {
                self.clone()
            }
        }
    )*};
}

real_coefficient!(f64, i64, BigInt, Ratio<i64>, BigRational);

/// Finite sum `Σ c_w w` in the group algebra; zero coefficients are never
/// stored.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElementSum<T> {
    terms: BTreeMap<ReducedWord, T>,
}

impl<T: Coefficient> GroupElementSum<T> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::from_word(ReducedWord::identity())
    }

    pub fn from_word(w: ReducedWord) -> Self {
        Self::from_terms([(w, T::one())])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (ReducedWord, T)>) -> Self {
        let mut s = Self::zero();
        for (w, c) in terms {
            s.add_term(w, c);
        }
        s
    }

    pub fn add_term(&mut self, w: ReducedWord, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ReducedWord, &T)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn coefficient(&self, w: &ReducedWord) -> T {
        self.terms.get(w).cloned().unwrap_or_else(T::zero)
    }

    /// Canonical trace: the coefficient of `e`.
    pub fn trace(&self) -> T {
        self.coefficient(&ReducedWord::identity())
    }

    pub fn shift(&self, n: i64) -> Self {
        Self {
            terms: self.terms.iter().map(|(w, c)| (w.shift(n), c.clone())).collect(),
        }
    }

    /// `x* = Σ conj(c_w) w⁻¹`.
    pub fn adjoint(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(w, c)| (w.inverse(), c.conj())).collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, c)| (w.clone(), c.clone() * s.clone())))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }
}

/// Canonical trace `τ(x)`.
pub fn trace<T: Coefficient>(x: &GroupElementSum<T>) -> T {
    x.trace()
}

/// `αⁿ(x)`.
pub fn shift<T: Coefficient>(x: &GroupElementSum<T>, n: i64) -> GroupElementSum<T> {
    x.shift(n)
}

impl<T: Coefficient> Add for &GroupElementSum<T> {
    type Output = GroupElementSum<T>;
    fn add(self, rhs: &GroupElementSum<T>) -> GroupElementSum<T> {
        let mut out = self.clone();
        for (w, c) in rhs.terms() {
            out.add_term(w.clone(), c.clone());
        }
        out
    }
}

impl<T: Coefficient> Sub for &GroupElementSum<T> {
    type Output = GroupElementSum<T>;
    fn sub(self, rhs: &GroupElementSum<T>) -> GroupElementSum<T> {
        let mut out = self.clone();
        for (w, c) in rhs.terms() {
            out.add_term(w.clone(), -c.clone());
        }
        out
    }
}

impl<T: Coefficient> Mul for &GroupElementSum<T> {
    type Output = GroupElementSum<T>;
    fn mul(self, rhs: &GroupElementSum<T>) -> GroupElementSum<T> {
        let mut out = GroupElementSum::zero();
        for (a, x) in self.terms() {
            for (b, y) in rhs.terms() {
                out.add_term(a * b, x.clone() * y.clone());
            }
        }
        out
    }
}

/// `n ↦ τ(v* αⁿ(w) v)`: the shift flow in the vector state of `v ∈ ℓ²(F_ℤ)`.
pub struct FreeShiftFlow {
    label: String,
    w: ReducedWord,
    v: ReducedWord,
}

pub fn free_shift_flow(w: ReducedWord, v: ReducedWord) -> FreeShiftFlow {
    FreeShiftFlow {
        label: format!("free_shift[{w} | {v}]"),
        w,
        v,
    }
}

impl Flow for FreeShiftFlow {
    fn label(&self) -> &str {
        &self.label
    }

    fn bound(&self) -> f64 {
        1.0
    }

    fn evaluate(&self, n: u64) -> Complex64 {
        let moved = self.w.shift(n as i64);
        if self.v.inverse().multiply(&moved).multiply(&self.v).is_identity() {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::seeded_rng;
    use rand::Rng;

    fn g(i: i64) -> ReducedWord {
        ReducedWord::generator(i)
    }

    #[test]
    fn basic_products() {
        assert!(g(1).multiply(&g(1).inverse()).is_identity());
        let w = ReducedWord::from_runs(&[(1, 2), (2, -1), (2, 1), (1, -1)]);
        assert_eq!(w, g(1));
        assert_eq!(w.len(), 1);
        assert_eq!(ReducedWord::from_runs(&[(0, 3), (1, 0)]).to_string(), "g0^3");
        assert_eq!(ReducedWord::identity().to_string(), "e");
        assert!(ReducedWord::from_letters(&[(0, 2)]).is_err());
    }

    #[test]
    fn trace_and_shift() {
        let x = GroupElementSum::<i64>::from_word(g(1).multiply(&g(2)));
        assert_eq!(x.trace(), 0);
        assert_eq!(GroupElementSum::<i64>::one().trace(), 1);
        assert_eq!(g(0).shift(5), g(5));
        let w = ReducedWord::from_runs(&[(0, 2), (-3, -1)]);
        assert_eq!(w.shift(2).shift(-7), w.shift(-5));
    }

    fn random_letters<R: Rng>(len: usize, rng: &mut R) -> Vec<(i64, i8)> {
        (0..len)
            .map(|_| (rng.random_range(0..3), if rng.random_bool(0.5) { 1 } else { -1 }))
            .collect()
    }

    #[test]
    fn reduction_is_confluent() {
        let mut rng = seeded_rng(5);
        for _ in 0..300 {
            let mut letters = random_letters(rng.random_range(0..24), &mut rng);
            let canonical = ReducedWord::from_letters(&letters).unwrap();
            // cancel a randomly chosen adjacent inverse pair until none is left
            loop {
                let pairs: Vec<usize> = (0..letters.len().saturating_sub(1))
                    .filter(|&i| letters[i].0 == letters[i + 1].0 && letters[i].1 == -letters[i + 1].1)
                    .collect();
                if pairs.is_empty() {
                    break;
                }
                let i = pairs[rng.random_range(0..pairs.len())];
                letters.drain(i..i + 2);
            }
            assert_eq!(canonical.letters(), letters);
        }
    }

    fn random_sum<R: Rng>(rng: &mut R) -> GroupElementSum<BigRational> {
        let n = rng.random_range(1..=20);
        GroupElementSum::from_terms((0..n).map(|_| {
            let w = ReducedWord::from_letters(&random_letters(rng.random_range(0..5), rng)).unwrap();
            let c = BigRational::new(rng.random_range(-9..=9).into(), rng.random_range(1..=4).into());
            (w, c)
        }))
    }

    #[test]
    fn trace_is_tracial_and_shift_invariant() {
        let mut rng = seeded_rng(6);
        for _ in 0..50 {
            let x = random_sum(&mut rng);
            let y = random_sum(&mut rng);
            assert_eq!((&x * &y).trace(), (&y * &x).trace());
            assert_eq!(x.shift(17).trace(), x.trace());
            assert_eq!((&x - &x), GroupElementSum::zero());
            assert_eq!(x.adjoint().adjoint(), x);
        }
    }

    #[test]
    fn free_shift_flow_values() {
        let f = free_shift_flow(g(0), ReducedWord::identity());
        let h = free_shift_flow(ReducedWord::identity(), ReducedWord::identity());
        let k = free_shift_flow(g(0), g(3));
        for n in 1..200 {
            assert_eq!(f.evaluate(n), c(0.0, 0.0));
            assert_eq!(h.evaluate(n), c(1.0, 0.0));
            assert_eq!(k.evaluate(n), c(0.0, 0.0));
        }
    }
}
