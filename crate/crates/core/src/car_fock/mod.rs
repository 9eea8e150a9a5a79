//! Antisymmetric Fock space over ℂ^d, the CAR algebra on it, Bogoliubov
//! automorphisms and gauge-invariant quasi-free states.
//!
//! Conventions: `a(f)` is the creation operator `ξ ↦ f ∧ ξ`, linear in `f`;
//! its adjoint `a(f)*` annihilates. Inner products are linear in the first
//! slot. With these conventions `a(f)a(g)* + a(g)*a(f) = ⟨f, g⟩ 1`, and a
//! monomial is normal-ordered when every `a(g)*` stands left of every `a(f)`.
//!
//! Fock matrices are only built for small `d` (they exist as a test oracle);
//! quasi-free expectations work at the symbol level and never touch the
//! `2^d`-dimensional space.

mod counterexample;
mod fock;
mod poly;
mod quasifree;

pub use counterexample::{counterexample_flow, pure_point_flow, CounterexampleFlows, QuasiFreeFlow, MAX_SHIFT_DIM};
pub use fock::{gamma, FockSpace, MAX_FOCK_MODES};
pub use poly::{bogoliubov_apply, normal_order, CARMonomial, CARPolynomial, Factor};
pub use quasifree::{quasifree_density_matrix, quasifree_eval, Symbol};

use crate::linalg::{CVector, UnitaryMatrix};
use crate::moebius::{frac_times_int, unit_phase};

/// A one-particle unitary that can act by integer powers on vectors.
pub trait OneParticleUnitary: Send + Sync {
    fn dim(&self) -> usize;

    /// `Uⁿ v`.
    fn apply_power(&self, v: &CVector, n: u64) -> CVector;
}

impl OneParticleUnitary for UnitaryMatrix {
    fn dim(&self) -> usize {
        UnitaryMatrix::dim(self)
    }

    fn apply_power(&self, v: &CVector, n: u64) -> CVector {
        self.pow(n).apply(v)
    }
}

/// `diag(e(θ_1), …, e(θ_d))`, with `nθ_k` reduced mod 1 before the
/// exponential.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalPhases {
    pub angles: Vec<f64>,
}

impl OneParticleUnitary for DiagonalPhases {
    fn dim(&self) -> usize {
        self.angles.len()
    }

    fn apply_power(&self, v: &CVector, n: u64) -> CVector {
        CVector::from_iterator(
            v.len(),
            v.iter()
                .zip(&self.angles)
                .map(|(x, t)| x * unit_phase(frac_times_int(*t, n, n as f64))),
        )
    }
}

/// Cyclic shift `e_i ↦ e_{i+step mod len}` with `step = ±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclicShift {
    pub len: usize,
    pub step: i8,
}

impl CyclicShift {
    pub fn forward(len: usize) -> Self {
        Self { len, step: 1 }
    }

    pub fn adjoint(self) -> Self {
        Self {
            len: self.len,
            step: -self.step,
        }
    }
}

impl OneParticleUnitary for CyclicShift {
    fn dim(&self) -> usize {
        self.len
    }

    fn apply_power(&self, v: &CVector, n: u64) -> CVector {
        let len = self.len as u64;
        let shift = (n % len) as usize;
        let shift = if self.step > 0 {
            shift
        } else {
            (self.len - shift) % self.len
        };
        let mut out = CVector::zeros(self.len);
        for (i, x) in v.iter().enumerate() {
            out[(i + shift) % self.len] = *x;
        }
        out
    }
}
