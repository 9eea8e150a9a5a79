use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::{gamma, normal_order, CARMonomial, CARPolynomial, FockSpace};
use crate::error::{invalid, Result};
use crate::linalg::{c, inner, CMatrix, CVector, DensityState, UnitaryMatrix};

const SYMBOL_TOL: f64 = 1e-10;

/// Symbol `0 <= T <= 1` of a gauge-invariant quasi-free state.
#[derive(Debug, Clone, PartialEq)]
pub enum Symbol {
    Dense(CMatrix),
    /// Diagonal in the standard basis; used for the large one-particle
    /// spaces of the counterexample flows.
    Diagonal(Vec<f64>),
}

impl Symbol {
    pub fn dense(t: CMatrix) -> Result<Self> {
        if !t.is_hermitian(SYMBOL_TOL) {
            return Err(invalid("symbol must be self-adjoint"));
        }
        let ev = t.hermitian_eigenvalues();
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        if lo < -SYMBOL_TOL || hi > 1.0 + SYMBOL_TOL {
            return Err(invalid(format!("symbol spectrum [{lo}, {hi}] leaves [0, 1]")));
        }
        Ok(Symbol::Dense(t))
    }

    pub fn diagonal(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(invalid("symbol needs at least one mode"));
        }
        if let Some(l) = lambdas
            .iter()
            .find(|l| !(**l >= -SYMBOL_TOL && **l <= 1.0 + SYMBOL_TOL))
        {
            return Err(invalid(format!("symbol eigenvalue {l} outside [0, 1]")));
        }
        Ok(Symbol::Diagonal(lambdas))
    }

    /// `V diag(λ) V*` for a seeded Haar `V` and uniform `λ ∈ [0, 1]`.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let v = UnitaryMatrix::haar(d, rng);
        let lambdas: Vec<Complex64> = (0..d).map(|_| c(rng.random::<f64>(), 0.0)).collect();
        let t = &(v.matrix() * &CMatrix::from_diagonal(&lambdas)) * &v.matrix().adjoint();
        // exact Hermitian part
        let t = (&t + &t.adjoint()).scale(c(0.5, 0.0));
        Symbol::dense(t).expect("random symbol lies in [0, 1]")
    }

    pub fn dim(&self) -> usize {
        match self {
            Symbol::Dense(t) => t.rows(),
            Symbol::Diagonal(l) => l.len(),
        }
    }

    pub fn apply(&self, f: &CVector) -> CVector {
        match self {
            Symbol::Dense(t) => t.apply(f),
            Symbol::Diagonal(l) => CVector::from_iterator(f.len(), f.iter().zip(l).map(|(x, l)| x * *l)),
        }
    }

    /// Dense matrix form.
    pub fn matrix(&self) -> CMatrix {
        match self {
            Symbol::Dense(t) => t.clone(),
            Symbol::Diagonal(l) => CMatrix::from_diagonal(&l.iter().map(|x| c(*x, 0.0)).collect::<Vec<_>>()),
        }
    }

    /// Eigenvalues and orthonormal eigenvectors (as matrix columns).
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        match self {
            Symbol::Diagonal(l) => (l.clone(), CMatrix::identity(l.len())),
            Symbol::Dense(t) => {
                let h = (t.as_dmatrix() + t.as_dmatrix().adjoint()) * c(0.5, 0.0);
                let e = nalgebra::SymmetricEigen::new(h);
                (e.eigenvalues.iter().copied().collect(), CMatrix::wrap(e.eigenvectors))
            }
        }
    }
}

/// `det(⟨T f_i, g_j⟩)` for a normal-ordered monomial with `n` starred and
/// `n` plain factors, times its scalar. Zero when the counts differ.
pub(crate) fn normal_ordered_value(t: &Symbol, m: &CARMonomial) -> Complex64 {
    let starred = m.starred();
    let plain = m.plain();
    if starred.len() != plain.len() {
        return c(0.0, 0.0);
    }
    let n = plain.len();
    if n == 0 {
        return m.scalar;
    }
    // starred holds g_n, …, g_1 left to right
    let tf: Vec<CVector> = plain.iter().map(|f| t.apply(f)).collect();
    let gram = DMatrix::from_fn(n, n, |i, j| inner(&tf[i], starred[n - 1 - j]));
    m.scalar * gram.determinant()
}

/// `φ_T(P)`: normal-order `P`, then apply
/// `φ_T(a(g_m)*⋯a(g_1)* a(f_1)⋯a(f_n)) = δ_{mn} det(⟨T f_i, g_j⟩)`.
pub fn quasifree_eval(t: &Symbol, p: &CARPolynomial) -> Result<Complex64> {
    for term in p.terms() {
        for f in &term.factors {
            if f.vector().len() != t.dim() {
                return Err(invalid("polynomial and symbol act on different spaces"));
            }
        }
    }
    let ordered = if p.is_normal_ordered() {
        p.clone()
    } else {
        normal_order(p)
    };
    Ok(ordered
        .terms()
        .iter()
        .map(|m| normal_ordered_value(t, m))
        .fold(c(0.0, 0.0), |a, b| a + b))
}

/// Density matrix of `φ_T` on the Fock space: in the Fock basis built from
/// eigenvectors `v_k` of `T`, occupation set `S` has weight
/// `∏_{k∈S}(1 − λ_k) ∏_{k∉S} λ_k`. Mode `k` is empty with probability `λ_k`.
pub fn quasifree_density_matrix(t: &Symbol, space: &FockSpace) -> Result<DensityState> {
    if t.dim() != space.modes() {
        return Err(invalid("symbol and Fock space have different one-particle dimensions"));
    }
    let (lambdas, vecs) = t.eigen();
    let weights: Vec<Complex64> = (0..space.dim())
        .map(|i| {
            let mask = space.mask(i);
            let w: f64 = lambdas
                .iter()
                .enumerate()
                .map(|(k, &l)| {
                    let l = l.clamp(0.0, 1.0);
                    if mask & (1 << k) != 0 {
                        1.0 - l
                    } else {
                        l
                    }
                })
                .product();
            c(w, 0.0)
        })
        .collect();
    let diag = CMatrix::from_diagonal(&weights);
    let g = gamma(space, &UnitaryMatrix::new(vecs)?)?;
    let rho = &(g.matrix() * &diag) * &g.matrix().adjoint();
    let rho = (&rho + &rho.adjoint()).scale(c(0.5, 0.0));
    DensityState::new(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_unit_vector, seeded_rng};

    #[test]
    fn two_point_function() {
        let mut rng = seeded_rng(1);
        let t = Symbol::random(3, &mut rng);
        let f = random_unit_vector(3, &mut rng);
        let g = random_unit_vector(3, &mut rng);
        let p = &CARPolynomial::annihilate(g.clone()) * &CARPolynomial::create(f.clone());
        let v = quasifree_eval(&t, &p).unwrap();
        assert!((v - inner(&t.apply(&f), &g)).norm() < 1e-14);

        let id = Symbol::diagonal(vec![1.0; 3]).unwrap();
        assert!((quasifree_eval(&id, &p).unwrap() - inner(&f, &g)).norm() < 1e-14);
        let zero = Symbol::diagonal(vec![0.0; 3]).unwrap();
        assert_eq!(quasifree_eval(&zero, &p).unwrap(), c(0.0, 0.0));
        assert_eq!(quasifree_eval(&t, &CARPolynomial::one()).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn single_mode_density() {
        let space = FockSpace::new(1).unwrap();
        let rho = quasifree_density_matrix(&Symbol::diagonal(vec![0.3]).unwrap(), &space).unwrap();
        let want = CMatrix::from_diagonal(&[c(0.3, 0.0), c(0.7, 0.0)]);
        assert!(rho.matrix().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn identity_symbol_is_vacuum() {
        let space = FockSpace::new(3).unwrap();
        let rho = quasifree_density_matrix(&Symbol::diagonal(vec![1.0; 3]).unwrap(), &space).unwrap();
        assert!(rho.matrix().max_abs_diff(&CMatrix::unit(8, 0, 0)) < 1e-15);
    }

    #[test]
    fn symbol_validation() {
        assert!(Symbol::diagonal(vec![1.5]).is_err());
        assert!(Symbol::diagonal(vec![]).is_err());
        assert!(Symbol::dense(CMatrix::identity(2).scale(c(2.0, 0.0))).is_err());
        let nonherm = CMatrix::from_row_major(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!(Symbol::dense(nonherm).is_err());
    }

    #[test]
    fn two_point_functions_match_density_d2() {
        let space = FockSpace::new(2).unwrap();
        let mut rng = seeded_rng(2);
        let lambdas = vec![rng.random::<f64>(), rng.random::<f64>()];
        let t = Symbol::diagonal(lambdas).unwrap();
        let rho = quasifree_density_matrix(&t, &space).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut ei = CVector::zeros(2);
                ei[i] = c(1.0, 0.0);
                let mut ej = CVector::zeros(2);
                ej[j] = c(1.0, 0.0);
                let p = &CARPolynomial::annihilate(ej) * &CARPolynomial::create(ei);
                let det = quasifree_eval(&t, &p).unwrap();
                let dm = rho.expect(&p.matrix(&space).unwrap());
                assert!((det - dm).norm() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn determinant_formula_matches_density_up_to_degree_six() {
        let mut rng = seeded_rng(3);
        for d in [3, 4] {
            let space = FockSpace::new(d).unwrap();
            let t = Symbol::random(d, &mut rng);
            let rho = quasifree_density_matrix(&t, &space).unwrap();
            for n in 0..=3 {
                let m = CARMonomial::random_normal_ordered(d, n, n, &mut rng);
                let p = CARPolynomial::from_monomial(m);
                let det = quasifree_eval(&t, &p).unwrap();
                let dm = rho.expect(&p.matrix(&space).unwrap());
                assert!((det - dm).norm() < 1e-10, "d = {d}, n = {n}: {det} vs {dm}");
            }
        }
    }
}
