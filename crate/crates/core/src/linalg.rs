//! Dense complex matrices, unitaries, spectral decompositions and density
//! matrices.
//!
//! Storage and the heavy lifting (QR, Schur, Hermitian eigen, SVD) are
//! delegated to `nalgebra`; this module owns the conventions: row-major pair
//! flattening for tensors, the normalized trace, and eigenphases measured in
//! turns.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::moebius::unit_phase;

pub type CVector = DVector<Complex64>;

/// Tolerance on `‖UU* − I‖_max` accepted as unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// Eigenphases closer than this (in turns) are merged into one projection.
pub const DEGENERACY_TOL: f64 = 1e-9;

pub const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `⟨x, y⟩ = Σ x_i conj(y_i)`, linear in the first slot.
pub fn inner(x: &CVector, y: &CVector) -> Complex64 {
    y.dotc(x)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian: real and imaginary parts N(0, 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    CVector::from_fn(dim, |_, _| complex_gaussian(rng))
}

pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = random_vector(dim, rng);
    let n = v.norm();
    v / c(n, 0.0)
}

/// Dense complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix(DMatrix<Complex64>);

impl CMatrix {
    /// Build from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("matrix dimensions must be positive"));
        }
        if entries.len() != rows * cols {
            return Err(invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("matrix has non-finite entries"));
        }
        Ok(Self(m))
    }

    pub(crate) fn wrap(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_row_slice(diag)))
    }

    /// Matrix unit `E_{ij}` of size `dim`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(i, j)] = c(1.0, 0.0);
        Self(m)
    }

    /// `|x⟩⟨y|`.
    pub fn outer(x: &CVector, y: &CVector) -> Self {
        Self(x * y.adjoint())
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self(DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng)))
    }

    /// Random matrix rescaled to operator norm `norm`.
    pub fn random_with_norm<R: Rng + ?Sized>(dim: usize, norm: f64, rng: &mut R) -> Self {
        let m = Self::random(dim, dim, rng);
        let s = norm / m.op_norm();
        m.scale(c(s, 0.0))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.0[(i, j)] = v;
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.0 * v
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(Self(&self.0 * &other.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `tr_k(A) = tr(A) / k`.
    pub fn normalized_trace(&self) -> Result<Complex64> {
        if !self.is_square() {
            return Err(invalid("trace of a non-square matrix"));
        }
        Ok(self.trace() / self.rows() as f64)
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        self.0.singular_values().iter().copied().fold(0.0, f64::max)
    }

    /// Tracial 2-norm `tr_k(A*A)^{1/2}`.
    pub fn hs_norm(&self) -> f64 {
        let ss: f64 = self.0.iter().map(|z| z.norm_sqr()).sum();
        (ss / self.rows() as f64).sqrt()
    }

    /// Unnormalized Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    /// `‖A − B‖_max`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "shape mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `(A⊗B)[(i₁,i₂),(j₁,j₂)] = A[i₁,j₁]·B[i₂,j₂]`, pairs flattened row-major.
    pub fn tensor(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    /// Block-diagonal `A ⊕ B`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (r1, c1) = self.0.shape();
        let (r2, c2) = other.0.shape();
        let mut m = DMatrix::zeros(r1 + r2, c1 + c2);
        m.view_mut((0, 0), (r1, c1)).copy_from(&self.0);
        m.view_mut((r1, c1), (r2, c2)).copy_from(&other.0);
        Self(m)
    }

    /// `A^n` by binary exponentiation.
    pub fn pow(&self, mut n: u64) -> Self {
        assert!(self.is_square());
        let mut result = DMatrix::identity(self.rows(), self.rows());
        let mut base = self.0.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        Self(result)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = (&self.0 + self.0.adjoint()) * c(0.5, 0.0);
        let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Trace norm `‖A‖₁` of a Hermitian matrix.
    pub fn hermitian_trace_norm(&self) -> f64 {
        self.hermitian_eigenvalues().iter().map(|x| x.abs()).sum()
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &'a CMatrix) -> CMatrix {
        self.try_mul(rhs).expect("dimension mismatch in matrix product")
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(&self.0 - &rhs.0)
    }
}

/// Square matrix verified unitary at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(invalid("unitary must be square"));
        }
        let dev = unitarity_defect(&m);
        if dev > UNITARY_TOL {
            return Err(invalid(format!("matrix is not unitary: ‖UU* − I‖_max = {dev:.3e}")));
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim))
    }

    /// `diag(e(θ_1), …, e(θ_d))` with angles in turns.
    pub fn diagonal_phases(angles: &[f64]) -> Self {
        let d: Vec<Complex64> = angles.iter().map(|&t| unit_phase(t.rem_euclid(1.0))).collect();
        Self(CMatrix::from_diagonal(&d))
    }

    /// Haar-distributed unitary: QR of a complex Gaussian matrix with the
    /// phases of R's diagonal pushed into Q.
    pub fn haar<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let g = CMatrix::random(dim, dim, rng).into_dmatrix();
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..dim {
            let d = r[(j, j)];
            let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
            for i in 0..dim {
                q[(i, j)] *= ph;
            }
        }
        Self(CMatrix(q))
    }

    pub fn haar_seeded(dim: usize, seed: u64) -> Self {
        Self::haar(dim, &mut seeded_rng(seed))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn pow(&self, n: u64) -> CMatrix {
        self.0.pow(n)
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        self.0.apply(v)
    }
}

fn unitarity_defect(m: &CMatrix) -> f64 {
    let p = &m.0 * m.0.adjoint();
    CMatrix(p).max_abs_diff(&CMatrix::identity(m.rows()))
}

/// One Newton–Schulz step `X ← X(3I − X*X)/2` toward the unitary polar factor.
pub fn polar_correct(m: &CMatrix) -> CMatrix {
    let k = m.rows();
    let xtx = m.0.adjoint() * &m.0;
    let corr = (DMatrix::identity(k, k) * c(3.0, 0.0) - xtx) * c(0.5, 0.0);
    CMatrix(&m.0 * corr)
}

/// `U = Σ_k e(θ_k) P_k` with distinct eigenphases sorted ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    pub angles: Vec<f64>,
    pub projections: Vec<CMatrix>,
}

impl SpectralDecomp {
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projections[0].rows()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.power(1)
    }

    /// `Σ_k e(nθ_k) P_k`, reducing `nθ_k` mod 1 before the exponential.
    pub fn power(&self, n: u64) -> CMatrix {
        let dim = self.dim();
        let mut acc = DMatrix::zeros(dim, dim);
        for (theta, p) in self.angles.iter().zip(&self.projections) {
            let z = unit_phase(crate::moebius::frac_times_int(*theta, n, n as f64));
            acc += p.as_dmatrix() * z;
        }
        CMatrix(acc)
    }

    /// Largest violation among `Σ P_k = I` and `P_k P_j = δ_{kj} P_k`.
    pub fn projection_defect(&self) -> f64 {
        let dim = self.dim();
        let mut sum = DMatrix::zeros(dim, dim);
        let mut worst: f64 = 0.0;
        for (i, p) in self.projections.iter().enumerate() {
            sum += p.as_dmatrix();
            for (j, q) in self.projections.iter().enumerate() {
                let prod = p * q;
                let target = if i == j { p.clone() } else { CMatrix::zeros(dim, dim) };
                worst = worst.max(prod.max_abs_diff(&target));
            }
        }
        worst.max(CMatrix(sum).max_abs_diff(&CMatrix::identity(dim)))
    }
}

/// Spectral decomposition of a unitary via its complex Schur form.
pub fn eig_unitary(u: &UnitaryMatrix) -> Result<SpectralDecomp> {
    let dim = u.dim();
    let schur = u
        .matrix()
        .as_dmatrix()
        .clone()
        .try_schur(f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();

    let mut phases: Vec<(f64, usize)> = (0..dim)
        .map(|i| {
            let z = t[(i, i)];
            let turns = (z.arg() / std::f64::consts::TAU).rem_euclid(1.0);
            (if turns >= 1.0 { 0.0 } else { turns }, i)
        })
        .collect();
    phases.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut clusters: Vec<Vec<(f64, usize)>> = Vec::new();
    for p in phases {
        match clusters.last_mut() {
            Some(cl) if p.0 - cl.last().unwrap().0 < DEGENERACY_TOL => cl.push(p),
            _ => clusters.push(vec![p]),
        }
    }
    // merge across the wrap at 0 ≡ 1
    if clusters.len() > 1 {
        let first = clusters[0][0].0;
        let last = clusters.last().unwrap().last().unwrap().0;
        if first + 1.0 - last < DEGENERACY_TOL {
            let tail = clusters.pop().unwrap();
            clusters[0].extend(tail.into_iter().map(|(t, i)| (t - 1.0, i)));
        }
    }

    let mut out: Vec<(f64, CMatrix)> = clusters
        .into_iter()
        .map(|cl| {
            let mean = cl.iter().map(|p| p.0).sum::<f64>() / cl.len() as f64;
            let mut proj = DMatrix::zeros(dim, dim);
            for &(_, i) in &cl {
                let col = q.column(i);
                proj += col * col.adjoint();
            }
            (mean.rem_euclid(1.0), CMatrix(proj))
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (angles, projections) = out.into_iter().unzip();
    Ok(SpectralDecomp { angles, projections })
}

/// Positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState(CMatrix);

impl DensityState {
    pub fn new(rho: CMatrix) -> Result<Self> {
        if !rho.is_hermitian(1e-10) {
            return Err(invalid("density matrix must be Hermitian"));
        }
        let tr = rho.trace();
        if (tr - c(1.0, 0.0)).norm() > 1e-10 {
            return Err(invalid(format!("density matrix has trace {tr}")));
        }
        let min = rho.hermitian_eigenvalues()[0];
        if min < -1e-10 {
            return Err(invalid(format!("density matrix has negative eigenvalue {min:.3e}")));
        }
        Ok(Self(rho))
    }

    /// Vector state `|ψ⟩⟨ψ|` of a unit vector.
    pub fn pure(psi: &CVector) -> Result<Self> {
        if (psi.norm() - 1.0).abs() > 1e-10 {
            return Err(invalid("pure state needs a unit vector"));
        }
        Self::new(CMatrix::outer(psi, psi))
    }

    /// Random full-rank state `G G* / tr(G G*)`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let g = CMatrix::random(dim, dim, rng);
        let gg = &g * &g.adjoint();
        let tr = gg.trace().re;
        Self(gg.scale(c(1.0 / tr, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// `ρ(A) = tr(ρA)`.
    pub fn expect(&self, a: &CMatrix) -> Complex64 {
        let r = self.0.as_dmatrix();
        let a = a.as_dmatrix();
        let k = r.nrows();
        let mut acc = c(0.0, 0.0);
        for i in 0..k {
            for j in 0..k {
                acc += r[(i, j)] * a[(j, i)];
            }
        }
        acc
    }

    /// `‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).hermitian_trace_norm()
    }

    /// The state `X ↦ ρ(W X W*)` as a density matrix `W*ρW`.
    pub fn conjugated_by(&self, w: &UnitaryMatrix) -> Self {
        let wm = w.matrix();
        Self(&(&wm.adjoint() * &self.0) * wm)
    }
}
