use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::linalg::{c, CMatrix, CVector, UnitaryMatrix};

/// Largest one-particle dimension for which Fock matrices are built.
pub const MAX_FOCK_MODES: usize = 10;

/// `ΛH` for `H = ℂ^d`, with basis vectors `e_S = e_{s₁} ∧ ⋯ ∧ e_{s_k}`
/// (`s₁ < ⋯ < s_k`) ordered by `|S|` and then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockSpace {
    d: usize,
    // occupation bitmask of each basis vector, in basis order
    basis: Vec<u32>,
    // bitmask -> basis index
    index: Vec<usize>,
}

impl FockSpace {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("one-particle dimension must be positive"));
        }
        if d > MAX_FOCK_MODES {
            return Err(invalid(format!(
                "Fock matrices are limited to d <= {MAX_FOCK_MODES} (2^d = {})",
                1u64 << d
            )));
        }
        let mut basis: Vec<u32> = (0..(1u32 << d)).collect();
        basis.sort_by_key(|&m| (m.count_ones(), elements(m)));
        let mut index = vec![0; 1 << d];
        for (i, &m) in basis.iter().enumerate() {
            index[m as usize] = i;
        }
        Ok(Self { d, basis, index })
    }

    pub fn modes(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Occupied modes (0-based, ascending) of basis vector `i`.
    pub fn subset(&self, i: usize) -> Vec<usize> {
        elements(self.basis[i])
    }

    pub fn mask(&self, i: usize) -> u32 {
        self.basis[i]
    }

    pub fn index_of_mask(&self, mask: u32) -> usize {
        self.index[mask as usize]
    }

    /// Basis indices of the `n`-particle sector, in basis order.
    pub fn sector(&self, n: usize) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.basis[i].count_ones() as usize == n)
            .collect()
    }

    pub fn vacuum(&self) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[0] = c(1.0, 0.0);
        v
    }

    fn check(&self, f: &CVector) -> Result<()> {
        if f.len() != self.d {
            return Err(invalid(format!(
                "one-particle vector has length {}, space has d = {}",
                f.len(),
                self.d
            )));
        }
        Ok(())
    }

    /// Matrix of `a(f)`: `a(e_j) e_S = (−1)^{#{i∈S : i<j}} e_{S∪{j}}` for
    /// `j ∉ S`, zero otherwise, extended linearly in `f`.
    pub fn creation_matrix(&self, f: &CVector) -> Result<CMatrix> {
        self.check(f)?;
        let dim = self.dim();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (col, &mask) in self.basis.iter().enumerate() {
            for j in 0..self.d {
                let bit = 1u32 << j;
                if mask & bit != 0 || f[j] == c(0.0, 0.0) {
                    continue;
                }
                let below = (mask & (bit - 1)).count_ones();
                let sign = if below.is_multiple_of(2) { 1.0 } else { -1.0 };
                let row = self.index[(mask | bit) as usize];
                m[(row, col)] += f[j] * sign;
            }
        }
        Ok(CMatrix::wrap(m))
    }

    /// Matrix of `a(f)*`.
    pub fn annihilation_matrix(&self, f: &CVector) -> Result<CMatrix> {
        Ok(self.creation_matrix(f)?.adjoint())
    }
}

fn elements(mask: u32) -> Vec<usize> {
    (0..32).filter(|&j| mask & (1 << j) != 0).collect()
}

/// Second quantization `Γ(U)`: `⟨e_T, Γ(U) e_S⟩ = det U[T, S]` for
/// `|T| = |S|`, zero between sectors.
pub fn gamma(space: &FockSpace, u: &UnitaryMatrix) -> Result<UnitaryMatrix> {
    let d = space.modes();
    if u.dim() != d {
        return Err(invalid(format!("U is {}x{}, space has d = {d}", u.dim(), u.dim())));
    }
    let um = u.matrix().as_dmatrix();
    let dim = space.dim();
    let mut g = DMatrix::<Complex64>::zeros(dim, dim);
    for n in 0..=d {
        let sector = space.sector(n);
        let subsets: Vec<Vec<usize>> = sector.iter().map(|&i| space.subset(i)).collect();
        for (ti, t) in sector.iter().zip(&subsets) {
            for (si, s) in sector.iter().zip(&subsets) {
                g[(*ti, *si)] = if n == 0 {
                    c(1.0, 0.0)
                } else {
                    DMatrix::from_fn(n, n, |r, col| um[(t[r], s[col])]).determinant()
                };
            }
        }
    }
    UnitaryMatrix::new(CMatrix::wrap(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_vector, seeded_rng};

    fn anticomm(a: &CMatrix, b: &CMatrix) -> CMatrix {
        &(a * b) + &(b * a)
    }

    #[test]
    fn basis_order() {
        let s = FockSpace::new(3).unwrap();
        let subsets: Vec<Vec<usize>> = (0..8).map(|i| s.subset(i)).collect();
        assert_eq!(
            subsets,
            vec![
                vec![],
                vec![0],
                vec![1],
                vec![2],
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 1, 2]
            ]
        );
        assert_eq!(s.sector(2).len(), 3);
        assert!(FockSpace::new(0).is_err());
        assert!(FockSpace::new(MAX_FOCK_MODES + 1).is_err());
    }

    #[test]
    fn single_mode_partial_isometry() {
        let s = FockSpace::new(1).unwrap();
        let a = s.creation_matrix(&CVector::from_row_slice(&[c(1.0, 0.0)])).unwrap();
        let want = CMatrix::from_row_major(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(a, want);
    }

    #[test]
    fn car_relations_d4() {
        let s = FockSpace::new(4).unwrap();
        let mut rng = seeded_rng(4);
        for _ in 0..5 {
            let f = random_vector(4, &mut rng);
            let g = random_vector(4, &mut rng);
            let af = s.creation_matrix(&f).unwrap();
            let ag = s.creation_matrix(&g).unwrap();
            let zero = CMatrix::zeros(16, 16);
            assert!((&af * &af).max_abs_diff(&zero) < 1e-12);
            assert!(anticomm(&af, &ag).max_abs_diff(&zero) < 1e-12);
            let id = CMatrix::identity(16).scale(crate::linalg::inner(&f, &g));
            assert!(anticomm(&af, &ag.adjoint()).max_abs_diff(&id) < 1e-12);
        }
        assert!(s.creation_matrix(&CVector::zeros(3)).is_err());
    }

    #[test]
    fn gamma_basics() {
        let s = FockSpace::new(3).unwrap();
        let g = gamma(&s, &UnitaryMatrix::identity(3)).unwrap();
        assert!(g.matrix().max_abs_diff(&CMatrix::identity(8)) < 1e-15);
        let u = UnitaryMatrix::haar_seeded(3, 8);
        let g = gamma(&s, &u).unwrap();
        let vac = s.vacuum();
        assert!((g.apply(&vac) - &vac).norm() < 1e-15);
    }

    #[test]
    fn gamma_matches_wedge_expansion() {
        let s = FockSpace::new(4).unwrap();
        let u = UnitaryMatrix::haar_seeded(4, 21);
        let g = gamma(&s, &u).unwrap();
        for col in 0..s.dim() {
            // U e_{i1} ∧ … ∧ U e_{ik} = a(Ue_{i1}) ⋯ a(Ue_{ik}) Ω
            let mut v = s.vacuum();
            for &i in s.subset(col).iter().rev() {
                let ue = u.matrix().as_dmatrix().column(i).into_owned();
                v = s.creation_matrix(&ue).unwrap().apply(&v);
            }
            let got = g.matrix().as_dmatrix().column(col).into_owned();
            assert!((got - v).norm() < 1e-10, "column {col}");
        }
    }

    #[test]
    fn gamma_is_multiplicative() {
        let s = FockSpace::new(4).unwrap();
        let u = UnitaryMatrix::haar_seeded(4, 1);
        let v = UnitaryMatrix::haar_seeded(4, 2);
        let lhs = gamma(&s, &u.compose(&v)).unwrap();
        let rhs = gamma(&s, &u).unwrap().compose(&gamma(&s, &v).unwrap());
        assert!(lhs.matrix().max_abs_diff(rhs.matrix()) < 1e-9);
    }
}
