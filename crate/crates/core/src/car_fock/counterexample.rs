use num_complex::Complex64;

use super::quasifree::normal_ordered_value;
use super::{normal_order, CARMonomial, CARPolynomial, CyclicShift, DiagonalPhases, OneParticleUnitary, Symbol};
use crate::error::{invalid, range, Result};
use crate::flows::{average_series, AverageSeries, Flow};
use crate::linalg::{c, CVector};
use crate::moebius::MoebiusTable;

/// Largest one-particle dimension `2L + 1` for the truncated shift.
pub const MAX_SHIFT_DIM: usize = 4_000_001;

/// `n ↦ φ_T(α_Uⁿ(A))` evaluated at the symbol level.
///
/// `A` is normal-ordered once up front. `α_U` maps normal-ordered monomials
/// to normal-ordered monomials, so each evaluation is one small determinant
/// per term and never touches the Fock space.
pub struct QuasiFreeFlow {
    label: String,
    unitary: Box<dyn OneParticleUnitary>,
    symbol: Symbol,
    terms: Vec<CARMonomial>,
    bound: f64,
}

impl QuasiFreeFlow {
    pub fn new(
        label: impl Into<String>,
        unitary: Box<dyn OneParticleUnitary>,
        symbol: Symbol,
        observable: &CARPolynomial,
    ) -> Result<Self> {
        if unitary.dim() != symbol.dim() {
            return Err(invalid(format!(
                "unitary acts on ℂ^{}, symbol on ℂ^{}",
                unitary.dim(),
                symbol.dim()
            )));
        }
        for t in observable.terms() {
            if t.factors.iter().any(|f| f.vector().len() != symbol.dim()) {
                return Err(invalid("observable vectors do not match the one-particle dimension"));
            }
        }
        let ordered = normal_order(observable);
        // ‖a(f)‖ = ‖f‖ and states have norm one
        let bound = observable.norm_bound();
        Ok(Self {
            label: label.into(),
            unitary,
            symbol,
            terms: ordered.terms().to_vec(),
            bound,
        })
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    /// Normal-ordered form of the observable.
    pub fn observable(&self) -> CARPolynomial {
        CARPolynomial::from_terms(self.terms.clone())
    }
}

impl Flow for QuasiFreeFlow {
    fn label(&self) -> &str {
        &self.label
    }

    fn bound(&self) -> f64 {
        self.bound
    }

    fn evaluate(&self, n: u64) -> Complex64 {
        self.terms
            .iter()
            .filter(|m| m.starred().len() == m.plain().len())
            .map(|m| {
                let moved = CARMonomial::new(
                    m.scalar,
                    m.factors
                        .iter()
                        .map(|f| f.map(|v| self.unitary.apply_power(v, n)))
                        .collect(),
                );
                normal_ordered_value(&self.symbol, &moved)
            })
            .fold(c(0.0, 0.0), |a, b| a + b)
    }
}

/// `n ↦ ⟨Uⁿ T U*ⁿ ξ, ξ⟩` for diagonal `T` and a cyclic shift `U`.
struct ShiftedDiagonalFlow {
    shift: CyclicShift,
    diag: Vec<f64>,
    xi: usize,
}

impl Flow for ShiftedDiagonalFlow {
    fn label(&self) -> &str {
        "bh_flow"
    }

    fn bound(&self) -> f64 {
        self.diag.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn evaluate(&self, n: u64) -> Complex64 {
        let mut xi = CVector::zeros(self.shift.len);
        xi[self.xi] = c(1.0, 0.0);
        let v = self.shift.adjoint().apply_power(&xi, n);
        let s: f64 = v.iter().zip(&self.diag).map(|(x, t)| t * x.norm_sqr()).sum();
        c(s, 0.0)
    }
}

/// The two flows built on the truncated bilateral shift.
///
/// Both are exact only for `n <= valid_n`; past that the cyclic wraparound
/// brings `μ`-weighted projections back around, so the series methods refuse.
pub struct CounterexampleFlows {
    /// `⟨UⁿTU*ⁿξ₀, ξ₀⟩ = μ(n)`.
    pub bh_flow: Box<dyn Flow>,
    /// `φ_{(T+I)/2}(α_{U*}ⁿ(a(ξ₀)*a(ξ₀))) = ½(μ(n) + 1)`.
    pub car_flow: QuasiFreeFlow,
    pub valid_n: u64,
}

impl CounterexampleFlows {
    fn check(&self, checkpoints: &[u64]) -> Result<()> {
        match checkpoints.iter().max() {
            Some(&top) if top > self.valid_n => Err(range(format!(
                "checkpoint {top} lies past the truncation window L = {}",
                self.valid_n
            ))),
            _ => Ok(()),
        }
    }

    pub fn bh_series(&self, table: &MoebiusTable, checkpoints: &[u64], workers: usize) -> Result<AverageSeries> {
        self.check(checkpoints)?;
        average_series(&self.bh_flow, table, checkpoints, workers)
    }

    pub fn car_series(&self, table: &MoebiusTable, checkpoints: &[u64], workers: usize) -> Result<AverageSeries> {
        self.check(checkpoints)?;
        average_series(&self.car_flow, table, checkpoints, workers)
    }
}

/// Truncated shift on `ℂ^{2L+1}` with basis `ξ_{−L}, …, ξ_L` stored at
/// positions `0, …, 2L`, `T = Σ_{k=1}^{L} μ(k) P_{−k}` and `ξ = ξ₀`.
///
/// The quasi-free flow uses `U*`, which moves `ξ₀` onto the support of
/// `T`; the forward shift would carry it to `ξ_n` with `n > 0`, where
/// `(T + I)/2` is constantly `½`.
pub fn counterexample_flow(l: u64, table: &MoebiusTable) -> Result<CounterexampleFlows> {
    if l == 0 {
        return Err(invalid("window L must be at least 1"));
    }
    let dim = 2 * l as usize + 1;
    if dim > MAX_SHIFT_DIM {
        return Err(invalid(format!(
            "2L + 1 = {dim} exceeds the dimension cap {MAX_SHIFT_DIM}"
        )));
    }
    if l > table.n_max() {
        return Err(range(format!("L = {l} exceeds table n_max = {}", table.n_max())));
    }
    let centre = l as usize;
    let mut diag = vec![0.0; dim];
    for k in 1..=l {
        diag[centre - k as usize] = table.mu(k) as f64;
    }
    let shift = CyclicShift::forward(dim);
    let half: Vec<f64> = diag.iter().map(|t| (t + 1.0) / 2.0).collect();
    let mut xi = CVector::zeros(dim);
    xi[centre] = c(1.0, 0.0);
    let number = &CARPolynomial::annihilate(xi.clone()) * &CARPolynomial::create(xi);
    let car_flow = QuasiFreeFlow::new("car_flow", Box::new(shift.adjoint()), Symbol::diagonal(half)?, &number)?;
    Ok(CounterexampleFlows {
        bh_flow: Box::new(ShiftedDiagonalFlow {
            shift,
            diag,
            xi: centre,
        }),
        car_flow,
        valid_n: l,
    })
}

/// `n ↦ φ_T(α_Uⁿ(A))` for `U = diag(e(θ_k))`.
pub fn pure_point_flow(angles: &[f64], a: &CARPolynomial, t: Symbol) -> Result<QuasiFreeFlow> {
    if angles.is_empty() {
        return Err(invalid("at least one angle is required"));
    }
    QuasiFreeFlow::new(
        "pure_point",
        Box::new(DiagonalPhases {
            angles: angles.to_vec(),
        }),
        t,
        a,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::car_fock::{bogoliubov_apply, quasifree_eval};
    use crate::linalg::{inner, seeded_rng};
    use crate::moebius::{unit_phase, MoebiusTable};
    use rand::Rng;

    fn e(d: usize, k: usize) -> CVector {
        let mut v = CVector::zeros(d);
        v[k] = c(1.0, 0.0);
        v
    }

    #[test]
    fn values_inside_window() {
        let table = MoebiusTable::build(2000).unwrap();
        let flows = counterexample_flow(500, &table).unwrap();
        for n in 1..=500 {
            let mu = table.mu(n) as f64;
            assert_eq!(flows.bh_flow.evaluate(n), c(mu, 0.0), "n = {n}");
            assert_eq!(flows.car_flow.evaluate(n), c((mu + 1.0) / 2.0, 0.0), "n = {n}");
        }
    }

    #[test]
    fn bh_series_is_squarefree_density() {
        let table = MoebiusTable::build(3000).unwrap();
        let flows = counterexample_flow(3000, &table).unwrap();
        let s = flows.bh_series(&table, &[100, 1000, 3000], 1).unwrap();
        for (i, &n) in [100u64, 1000, 3000].iter().enumerate() {
            let q = table.squarefree_count(n).unwrap();
            assert_eq!(s.values[i], c(q as f64 / n as f64, 0.0));
        }
    }

    #[test]
    fn series_past_window_is_refused() {
        let table = MoebiusTable::build(1000).unwrap();
        let flows = counterexample_flow(100, &table).unwrap();
        assert!(matches!(
            flows.car_series(&table, &[50, 101], 1),
            Err(crate::Error::Range(_))
        ));
        assert!(counterexample_flow(0, &table).is_err());
        assert!(counterexample_flow(1001, &table).is_err());
    }

    #[test]
    fn quasifree_flow_matches_generic_evaluation() {
        let mut rng = seeded_rng(9);
        let d = 5;
        let angles: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let t = Symbol::random(d, &mut rng);
        let a = CARPolynomial::from_monomial(CARMonomial::random(d, 4, &mut rng));
        let flow = pure_point_flow(&angles, &a, t.clone()).unwrap();
        let u = DiagonalPhases { angles };
        for n in [0u64, 1, 7, 1000, 123_457] {
            let direct = quasifree_eval(&t, &bogoliubov_apply(&u, &a, n).unwrap()).unwrap();
            assert!((flow.evaluate(n) - direct).norm() < 1e-12, "n = {n}");
            assert!(flow.evaluate(n).norm() <= flow.bound() + 1e-12);
        }
    }

    #[test]
    fn pure_point_two_point_values() {
        let mut rng = seeded_rng(10);
        let d = 4;
        let angles: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let t = Symbol::random(d, &mut rng);
        let tm = t.matrix();
        let diag = pure_point_flow(
            &angles,
            &(&CARPolynomial::annihilate(e(d, 2)) * &CARPolynomial::create(e(d, 2))),
            t.clone(),
        )
        .unwrap();
        let (j, k) = (0, 3);
        let off = pure_point_flow(
            &angles,
            &(&CARPolynomial::annihilate(e(d, j)) * &CARPolynomial::create(e(d, k))),
            t.clone(),
        )
        .unwrap();
        let t_jk = inner(&tm.apply(&e(d, k)), &e(d, j));
        for n in [1u64, 2, 50, 9999] {
            assert!((diag.evaluate(n) - tm.get(2, 2)).norm() < 1e-14);
            let phase = unit_phase(crate::moebius::frac_times_int(angles[k] - angles[j], n, n as f64));
            assert!((off.evaluate(n) - phase * t_jk).norm() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn dimension_mismatch() {
        let a = CARPolynomial::create(e(3, 0));
        assert!(pure_point_flow(&[0.1, 0.2], &a, Symbol::diagonal(vec![0.5; 2]).unwrap()).is_err());
        assert!(pure_point_flow(&[0.1, 0.2, 0.3], &a, Symbol::diagonal(vec![0.5; 2]).unwrap()).is_err());
    }
}
