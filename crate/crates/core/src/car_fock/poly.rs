use std::collections::HashMap;
use std::ops::{Add, Mul};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{FockSpace, OneParticleUnitary};
use crate::error::{invalid, Result};
use crate::linalg::{c, inner, random_unit_vector, CMatrix, CVector};

/// One factor of a CAR monomial.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// `a(f)`.
    Create(CVector),
    /// `a(g)*`.
    Annihilate(CVector),
}

impl Factor {
    pub fn vector(&self) -> &CVector {
        match self {
            Factor::Create(v) | Factor::Annihilate(v) => v,
        }
    }

    fn adjoint(&self) -> Self {
        match self {
            Factor::Create(v) => Factor::Annihilate(v.clone()),
            Factor::Annihilate(v) => Factor::Create(v.clone()),
        }
    }

    pub(crate) fn map(&self, f: impl Fn(&CVector) -> CVector) -> Self {
        match self {
            Factor::Create(v) => Factor::Create(f(v)),
            Factor::Annihilate(v) => Factor::Annihilate(f(v)),
        }
    }

    pub fn matrix(&self, space: &FockSpace) -> Result<CMatrix> {
        match self {
            Factor::Create(v) => space.creation_matrix(v),
            Factor::Annihilate(v) => space.annihilation_matrix(v),
        }
    }
}

// factor kinds and bit patterns of the vectors; equal keys merge
type MonomialKey = Vec<(bool, Vec<(u64, u64)>)>;

/// `scalar · F₁ F₂ ⋯ F_r`, read left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct CARMonomial {
    pub scalar: Complex64,
    pub factors: Vec<Factor>,
}

impl CARMonomial {
    pub fn scalar(z: Complex64) -> Self {
        Self {
            scalar: z,
            factors: Vec::new(),
        }
    }

    pub fn new(scalar: Complex64, factors: Vec<Factor>) -> Self {
        Self { scalar, factors }
    }

    /// `scalar · a(g_m)* ⋯ a(g_1)* a(f_1) ⋯ a(f_n)` from `starred = [g_m, …, g_1]`
    /// and `plain = [f_1, …, f_n]`.
    pub fn from_parts(scalar: Complex64, starred: Vec<CVector>, plain: Vec<CVector>) -> Self {
        let factors = starred
            .into_iter()
            .map(Factor::Annihilate)
            .chain(plain.into_iter().map(Factor::Create))
            .collect();
        Self { scalar, factors }
    }

    /// Every `a(g)*` precedes every `a(f)`.
    pub fn is_normal_ordered(&self) -> bool {
        let mut seen_create = false;
        for f in &self.factors {
            match f {
                Factor::Create(_) => seen_create = true,
                Factor::Annihilate(_) if seen_create => return false,
                Factor::Annihilate(_) => {}
            }
        }
        true
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    /// Vectors of the `a(g)*` factors, left to right.
    pub fn starred(&self) -> Vec<&CVector> {
        self.factors
            .iter()
            .filter_map(|f| match f {
                Factor::Annihilate(v) => Some(v),
                Factor::Create(_) => None,
            })
            .collect()
    }

    /// Vectors of the `a(f)` factors, left to right.
    pub fn plain(&self) -> Vec<&CVector> {
        self.factors
            .iter()
            .filter_map(|f| match f {
                Factor::Create(v) => Some(v),
                Factor::Annihilate(_) => None,
            })
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            scalar: self.scalar.conj(),
            factors: self.factors.iter().rev().map(Factor::adjoint).collect(),
        }
    }

    /// `|scalar| · Π ‖v‖`, an upper bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.factors.iter().map(|f| f.vector().norm()).product::<f64>() * self.scalar.norm()
    }

    pub fn matrix(&self, space: &FockSpace) -> Result<CMatrix> {
        let mut m = CMatrix::identity(space.dim()).scale(self.scalar);
        for f in &self.factors {
            m = &m * &f.matrix(space)?;
        }
        Ok(m)
    }

    fn key(&self) -> MonomialKey {
        self.factors
            .iter()
            .map(|f| {
                let bits = f.vector().iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect();
                (matches!(f, Factor::Create(_)), bits)
            })
            .collect()
    }

    /// Random monomial of the given degree with unit vectors and a uniformly
    /// random order of creations and annihilations.
    pub fn random<R: Rng + ?Sized>(d: usize, degree: usize, rng: &mut R) -> Self {
        let factors = (0..degree)
            .map(|_| {
                let v = random_unit_vector(d, rng);
                if rng.random_bool(0.5) {
                    Factor::Create(v)
                } else {
                    Factor::Annihilate(v)
                }
            })
            .collect();
        Self::new(c(1.0, 0.0), factors)
    }

    /// Random monomial with `degree / 2` creations and as many
    /// annihilations in a uniformly random order, so that gauge-invariant
    /// states need not vanish on it.
    pub fn random_balanced<R: Rng + ?Sized>(d: usize, degree: usize, rng: &mut R) -> Self {
        let mut kinds: Vec<bool> = (0..degree).map(|i| i < degree / 2).collect();
        kinds.shuffle(rng);
        let factors = kinds
            .into_iter()
            .map(|create| {
                let v = random_unit_vector(d, rng);
                if create {
                    Factor::Create(v)
                } else {
                    Factor::Annihilate(v)
                }
            })
            .collect();
        Self::new(c(1.0, 0.0), factors)
    }

    /// Random normal-ordered monomial with `m` starred and `n` plain factors.
    pub fn random_normal_ordered<R: Rng + ?Sized>(d: usize, m: usize, n: usize, rng: &mut R) -> Self {
        let starred = (0..m).map(|_| random_unit_vector(d, rng)).collect();
        let plain = (0..n).map(|_| random_unit_vector(d, rng)).collect();
        Self::from_parts(c(1.0, 0.0), starred, plain)
    }
}

/// Finite sum of CAR monomials, kept in canonical form: identical factor
/// lists merged, zero coefficients dropped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CARPolynomial {
    terms: Vec<CARMonomial>,
}

impl CARPolynomial {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_monomial(CARMonomial::scalar(c(1.0, 0.0)))
    }

    pub fn from_monomial(m: CARMonomial) -> Self {
        Self::from_terms(vec![m])
    }

    pub fn from_terms(terms: Vec<CARMonomial>) -> Self {
        let mut order: Vec<MonomialKey> = Vec::new();
        let mut merged: HashMap<MonomialKey, CARMonomial> = HashMap::new();
        for t in terms {
            let k = t.key();
            match merged.get_mut(&k) {
                Some(existing) => existing.scalar += t.scalar,
                None => {
                    order.push(k.clone());
                    merged.insert(k, t);
                }
            }
        }
        let terms = order
            .into_iter()
            .filter_map(|k| merged.remove(&k))
            .filter(|t| t.scalar != c(0.0, 0.0))
            .collect();
        Self { terms }
    }

    /// `a(f)`.
    pub fn create(f: CVector) -> Self {
        Self::from_monomial(CARMonomial::new(c(1.0, 0.0), vec![Factor::Create(f)]))
    }

    /// `a(g)*`.
    pub fn annihilate(g: CVector) -> Self {
        Self::from_monomial(CARMonomial::new(c(1.0, 0.0), vec![Factor::Annihilate(g)]))
    }

    pub fn terms(&self) -> &[CARMonomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_normal_ordered(&self) -> bool {
        self.terms.iter().all(CARMonomial::is_normal_ordered)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_terms(self.terms.iter().map(CARMonomial::adjoint).collect())
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| CARMonomial::new(t.scalar * z, t.factors.clone()))
                .collect(),
        )
    }

    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(CARMonomial::norm_bound).sum()
    }

    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(CARMonomial::degree).max().unwrap_or(0)
    }

    /// Fock-space matrix of the polynomial.
    pub fn matrix(&self, space: &FockSpace) -> Result<CMatrix> {
        let mut acc = CMatrix::zeros(space.dim(), space.dim());
        for t in &self.terms {
            acc = &acc + &t.matrix(space)?;
        }
        Ok(acc)
    }

    fn map_vectors(&self, f: impl Fn(&CVector) -> CVector) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| CARMonomial::new(t.scalar, t.factors.iter().map(|x| x.map(&f)).collect()))
                .collect(),
        )
    }
}

impl Add for &CARPolynomial {
    type Output = CARPolynomial;

    fn add(self, rhs: &CARPolynomial) -> CARPolynomial {
        CARPolynomial::from_terms(self.terms.iter().chain(&rhs.terms).cloned().collect())
    }
}

impl Mul for &CARPolynomial {
    type Output = CARPolynomial;

    fn mul(self, rhs: &CARPolynomial) -> CARPolynomial {
        let mut out = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                let mut factors = a.factors.clone();
                factors.extend(b.factors.iter().cloned());
                out.push(CARMonomial::new(a.scalar * b.scalar, factors));
            }
        }
        CARPolynomial::from_terms(out)
    }
}

/// `α_U^n`: replace every vector `v` by `Uⁿ v`.
pub fn bogoliubov_apply<U: OneParticleUnitary + ?Sized>(u: &U, p: &CARPolynomial, n: u64) -> Result<CARPolynomial> {
    for t in p.terms() {
        for f in &t.factors {
            if f.vector().len() != u.dim() {
                return Err(invalid(format!(
                    "vector of length {} under a unitary on ℂ^{}",
                    f.vector().len(),
                    u.dim()
                )));
            }
        }
    }
    if n == 0 {
        return Ok(p.clone());
    }
    Ok(p.map_vectors(|v| u.apply_power(v, n)))
}

/// Rewrite `a(f)a(g)* → ⟨f,g⟩·1 − a(g)*a(f)` until every monomial is
/// normal-ordered.
///
/// Each rewrite removes one (create, annihilate) inversion from the
/// swapped term and two factors from the contracted one, so the process
/// terminates.
pub fn normal_order(p: &CARPolynomial) -> CARPolynomial {
    let mut done = Vec::new();
    let mut work: Vec<CARMonomial> = p.terms().to_vec();
    while let Some(m) = work.pop() {
        let hit = m
            .factors
            .windows(2)
            .position(|w| matches!((&w[0], &w[1]), (Factor::Create(_), Factor::Annihilate(_))));
        let Some(i) = hit else {
            done.push(m);
            continue;
        };
        let (f, g) = (m.factors[i].vector(), m.factors[i + 1].vector());
        let overlap = inner(f, g);
        if overlap != c(0.0, 0.0) {
            let mut rest = m.factors[..i].to_vec();
            rest.extend_from_slice(&m.factors[i + 2..]);
            work.push(CARMonomial::new(m.scalar * overlap, rest));
        }
        let mut swapped = m.factors.clone();
        swapped.swap(i, i + 1);
        work.push(CARMonomial::new(-m.scalar, swapped));
    }
    CARPolynomial::from_terms(done)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::car_fock::DiagonalPhases;
    use crate::linalg::{seeded_rng, UnitaryMatrix};

    #[test]
    fn normal_ordered_monomial_unchanged() {
        let mut rng = seeded_rng(1);
        let m = CARMonomial::random_normal_ordered(3, 2, 2, &mut rng);
        let p = CARPolynomial::from_monomial(m);
        assert_eq!(normal_order(&p), p);
    }

    #[test]
    fn single_car_rewrite() {
        let mut rng = seeded_rng(2);
        let f = random_unit_vector(3, &mut rng);
        let g = random_unit_vector(3, &mut rng);
        let p = &CARPolynomial::create(f.clone()) * &CARPolynomial::annihilate(g.clone());
        let q = normal_order(&p);
        let want = &CARPolynomial::one().scale(inner(&f, &g))
            + &(&CARPolynomial::annihilate(g) * &CARPolynomial::create(f)).scale(c(-1.0, 0.0));
        assert_eq!(q.terms().len(), 2);
        for t in want.terms() {
            assert!(q.terms().contains(t));
        }
    }

    #[test]
    fn normal_order_preserves_operator() {
        let space = FockSpace::new(4).unwrap();
        let mut rng = seeded_rng(3);
        for _ in 0..10 {
            let p = CARPolynomial::from_monomial(CARMonomial::random(4, 4, &mut rng));
            let q = normal_order(&p);
            assert!(q.is_normal_ordered());
            let diff = p.matrix(&space).unwrap().max_abs_diff(&q.matrix(&space).unwrap());
            assert!(diff < 1e-10, "{diff}");
        }
    }

    #[test]
    fn canonical_form_merges_and_drops() {
        let mut rng = seeded_rng(4);
        let f = random_unit_vector(2, &mut rng);
        let a = CARPolynomial::create(f.clone());
        let sum = &a + &a;
        assert_eq!(sum.terms().len(), 1);
        assert_eq!(sum.terms()[0].scalar, c(2.0, 0.0));
        let zero = &a + &a.scale(c(-1.0, 0.0));
        assert!(zero.is_zero());
    }

    #[test]
    fn bogoliubov_identity_and_composition() {
        let mut rng = seeded_rng(5);
        let p = CARPolynomial::from_monomial(CARMonomial::random(3, 3, &mut rng));
        let u = crate::car_fock::CyclicShift::forward(3);
        assert_eq!(bogoliubov_apply(&u, &p, 0).unwrap(), p);
        let two_then_five = bogoliubov_apply(&u, &bogoliubov_apply(&u, &p, 2).unwrap(), 5).unwrap();
        assert_eq!(two_then_five, bogoliubov_apply(&u, &p, 7).unwrap());

        let w = UnitaryMatrix::haar_seeded(3, 6);
        let a = bogoliubov_apply(&w, &bogoliubov_apply(&w, &p, 3).unwrap(), 4).unwrap();
        let b = bogoliubov_apply(&w, &p, 7).unwrap();
        for (x, y) in a.terms().iter().zip(b.terms()) {
            for (fx, fy) in x.factors.iter().zip(&y.factors) {
                assert!((fx.vector() - fy.vector()).norm() < 1e-12);
            }
        }
        let bad = DiagonalPhases { angles: vec![0.1; 4] };
        assert!(bogoliubov_apply(&bad, &p, 1).is_err());
    }
}
