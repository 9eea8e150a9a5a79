//! Flows on finite-dimensional C*-algebras: inner automorphisms `Ad(U)`,
//! polynomial-exponent trace sums, rank-one projection flows and spectral
//! quantization of unitaries.

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::Zero;

use crate::error::{invalid, Error, Result};
use crate::flows::{average_at, Flow};
use crate::linalg::{
    c, eig_unitary, inner, polar_correct, CMatrix, CVector, DensityState, SpectralDecomp, UnitaryMatrix,
};
use crate::moebius::{frac_times_int, unit_phase, MoebiusTable, PolynomialPhase};
use crate::summation::block_prefix_sum;

/// Steps between polar re-unitarizations of an incrementally built power.
pub const REUNITARIZE_EVERY: u64 = 10_000;

/// `⊕_i M_{k_i}(ℂ)` realized as block-diagonal matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FdAlgebra {
    block_dims: Vec<usize>,
}

impl FdAlgebra {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() || block_dims.contains(&0) {
            return Err(invalid("block dimensions must be a nonempty list of positive sizes"));
        }
        Ok(Self { block_dims })
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    /// Vector-space dimension `Σ k_i²`.
    pub fn total_dim(&self) -> usize {
        self.block_dims.iter().map(|k| k * k).sum()
    }

    /// Size of the matrices realizing the algebra, `Σ k_i`.
    pub fn matrix_size(&self) -> usize {
        self.block_dims.iter().sum()
    }

    fn offset(&self, block: usize) -> usize {
        self.block_dims[..block].iter().sum()
    }

    /// Place `x` in block `block`, zeros elsewhere.
    pub fn embed(&self, block: usize, x: &CMatrix) -> Result<CMatrix> {
        let k = *self
            .block_dims
            .get(block)
            .ok_or_else(|| invalid(format!("no block {block}")))?;
        if x.rows() != k || x.cols() != k {
            return Err(invalid(format!("block {block} holds {k}x{k} matrices")));
        }
        let size = self.matrix_size();
        let off = self.offset(block);
        let mut m = CMatrix::zeros(size, size);
        for i in 0..k {
            for j in 0..k {
                m.set(off + i, off + j, x.get(i, j));
            }
        }
        Ok(m)
    }

    /// Block-diagonal matrix from one matrix per block.
    pub fn block_diag(&self, blocks: &[CMatrix]) -> Result<CMatrix> {
        if blocks.len() != self.block_dims.len() {
            return Err(invalid("one matrix per block is required"));
        }
        let mut acc = CMatrix::zeros(self.matrix_size(), self.matrix_size());
        for (b, x) in blocks.iter().enumerate() {
            acc = &acc + &self.embed(b, x)?;
        }
        Ok(acc)
    }

    /// True when `m` vanishes off the diagonal blocks.
    pub fn contains(&self, m: &CMatrix) -> bool {
        let size = self.matrix_size();
        if m.rows() != size || m.cols() != size {
            return false;
        }
        let mut owner = Vec::with_capacity(size);
        for (b, &k) in self.block_dims.iter().enumerate() {
            owner.extend(std::iter::repeat_n(b, k));
        }
        (0..size).all(|i| (0..size).all(|j| owner[i] == owner[j] || m.get(i, j) == c(0.0, 0.0)))
    }
}

/// `n ↦ tr(ρ Uⁿ A U*ⁿ)`.
pub struct AdFlow {
    label: String,
    bound: f64,
    unitary: UnitaryMatrix,
    observable: CMatrix,
    state: DensityState,
    diffs: Vec<f64>,
    coeffs: Vec<Complex64>,
    spectral: SpectralDecomp,
}

/// The inner-automorphism flow of `U` for observable `A` in state `ρ`.
pub fn ad_flow(u: &UnitaryMatrix, a: &CMatrix, rho: &DensityState) -> Result<AdFlow> {
    let k = u.dim();
    if a.rows() != k || a.cols() != k || rho.dim() != k {
        return Err(invalid(format!(
            "U is {k}x{k} but A is {}x{} and ρ is {}x{}",
            a.rows(),
            a.cols(),
            rho.dim(),
            rho.dim()
        )));
    }
    let spectral = eig_unitary(u)?;
    let mut diffs = Vec::new();
    let mut coeffs = Vec::new();
    for (tk, pk) in spectral.angles.iter().zip(&spectral.projections) {
        let pa = pk * a;
        for (tl, pl) in spectral.angles.iter().zip(&spectral.projections) {
            let w = rho.expect(&(&pa * pl));
            if w.norm() > 0.0 {
                diffs.push(tk - tl);
                coeffs.push(w);
            }
        }
    }
    Ok(AdFlow {
        label: format!("ad(dim={k})"),
        bound: a.op_norm(),
        unitary: u.clone(),
        observable: a.clone(),
        state: rho.clone(),
        diffs,
        coeffs,
        spectral,
    })
}

impl AdFlow {
    pub fn spectral(&self) -> &SpectralDecomp {
        &self.spectral
    }

    fn value_with_power(&self, power: &CMatrix) -> Complex64 {
        let x = &(power * &self.observable) * &power.adjoint();
        self.state.expect(&x)
    }
}

impl Flow for AdFlow {
    fn label(&self) -> &str {
        &self.label
    }

    fn bound(&self) -> f64 {
        self.bound
    }

    /// Spectral evaluation `Σ_{k,l} e(n(θ_k − θ_l)) tr(ρ P_k A P_l)`.
    fn evaluate(&self, n: u64) -> Complex64 {
        let nf = n as f64;
        self.diffs
            .iter()
            .zip(&self.coeffs)
            .map(|(d, w)| w * unit_phase(frac_times_int(*d, n, nf)))
            .fold(c(0.0, 0.0), |a, b| a + b)
    }

    /// Incremental powers `U^{n+1} = U^n U` from a spectral start, with a
    /// polar correction every [`REUNITARIZE_EVERY`] steps.
    fn evaluate_block(&self, start: u64, _weights: &[i8], out: &mut [Complex64]) {
        let mut power = self.spectral.power(start);
        for (i, slot) in out.iter_mut().enumerate() {
            if i > 0 {
                power = &power * self.unitary.matrix();
                if (i as u64).is_multiple_of(REUNITARIZE_EVERY) {
                    power = polar_correct(&power);
                }
            }
            *slot = self.value_with_power(&power);
        }
    }
}

/// Integer-valued polynomial with rational coefficients; `coeffs[j]`
/// multiplies `n^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerPhase {
    coeffs: Vec<Ratio<i64>>,
}

impl IntegerPhase {
    pub fn new(coeffs: Vec<Ratio<i64>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("phase polynomial needs at least a constant term"));
        }
        Ok(Self { coeffs })
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self {
            coeffs: coeffs.iter().map(|&a| Ratio::from_integer(a)).collect(),
        }
    }

    /// `φ(n) = n`.
    pub fn identity() -> Self {
        Self::from_integers(&[0, 1])
    }

    /// Exact value at `n`; fails when it is not an integer.
    pub fn value(&self, n: u64) -> Result<i128> {
        let n = Ratio::from_integer(n as i128);
        let mut acc = Ratio::<i128>::zero();
        for a in self.coeffs.iter().rev() {
            let a = Ratio::new(*a.numer() as i128, *a.denom() as i128);
            acc = acc * n + a;
        }
        if !acc.is_integer() {
            return Err(invalid(format!("phase polynomial takes non-integer value {acc}")));
        }
        Ok(acc.to_integer())
    }
}

/// Data of `tr_k(U₁^{φ₁(n)} A₁ ⋯ U_d^{φ_d(n)} A_d)` restricted to `n ≡ l (mod p)`.
#[derive(Debug, Clone)]
pub struct TraceProductSpec {
    pub unitaries: Vec<UnitaryMatrix>,
    pub contractions: Vec<CMatrix>,
    pub phases: Vec<IntegerPhase>,
    pub modulus: u64,
    pub residue: u64,
}

impl TraceProductSpec {
    pub fn new(
        unitaries: Vec<UnitaryMatrix>,
        contractions: Vec<CMatrix>,
        phases: Vec<IntegerPhase>,
        modulus: u64,
        residue: u64,
    ) -> Result<Self> {
        let d = unitaries.len();
        if d == 0 {
            return Err(invalid("need at least one factor"));
        }
        if contractions.len() != d || phases.len() != d {
            return Err(invalid("unitaries, contractions and phases must have equal length"));
        }
        let k = unitaries[0].dim();
        for (u, a) in unitaries.iter().zip(&contractions) {
            if u.dim() != k || a.rows() != k || a.cols() != k {
                return Err(invalid("all matrices must be k x k"));
            }
            if a.op_norm() > 1.0 + 1e-10 {
                return Err(invalid(format!("A_j has norm {} > 1", a.op_norm())));
            }
        }
        if modulus == 0 || residue >= modulus {
            return Err(invalid("need 0 <= l < p"));
        }
        Ok(Self {
            unitaries,
            contractions,
            phases,
            modulus,
            residue,
        })
    }

    /// Seeded instance: Haar unitaries, contractions of norm 1, linear phases.
    pub fn random_linear(k: usize, d: usize, seed: u64) -> Self {
        let mut rng = crate::linalg::seeded_rng(seed);
        let unitaries = (0..d).map(|_| UnitaryMatrix::haar(k, &mut rng)).collect();
        let contractions = (0..d).map(|_| CMatrix::random_with_norm(k, 1.0, &mut rng)).collect();
        let phases = (0..d).map(|_| IntegerPhase::identity()).collect();
        Self::new(unitaries, contractions, phases, 1, 0).expect("consistent random spec")
    }

    pub fn k(&self) -> usize {
        self.unitaries[0].dim()
    }

    pub fn d(&self) -> usize {
        self.unitaries.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceProductResult {
    /// Direct matrix-product evaluation.
    pub value: Complex64,
    /// Eigen-expansion evaluation, when requested.
    pub eigen_value: Option<Complex64>,
    /// Largest per-`n` disagreement between the two paths.
    pub max_term_gap: f64,
}

/// Agreement required between the two evaluation paths.
pub const TWO_PATH_TOL: f64 = 1e-9;

fn signed_power(u: &UnitaryMatrix, e: i128) -> CMatrix {
    let p = u.pow(e.unsigned_abs() as u64);
    if e >= 0 {
        p
    } else {
        p.adjoint()
    }
}

/// `frac(θ·e)` for a signed integer exponent.
fn signed_frac(theta: f64, e: i128) -> f64 {
    let m = e.unsigned_abs();
    let f = frac_times_int(theta, m as u64, m as f64);
    if e < 0 && f != 0.0 {
        1.0 - f
    } else {
        f
    }
}

struct EigenExpansion {
    angles: Vec<Vec<f64>>,
    // weights indexed by the mixed-radix tuple (t_1, …, t_d)
    weights: Vec<Complex64>,
}

impl EigenExpansion {
    fn new(spec: &TraceProductSpec) -> Result<Self> {
        let decomps: Vec<SpectralDecomp> = spec.unitaries.iter().map(eig_unitary).collect::<Result<_>>()?;
        let k = spec.k();
        let sizes: Vec<usize> = decomps.iter().map(|d| d.len()).collect();
        let total: usize = sizes.iter().product();
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; sizes.len()];
        for _ in 0..total {
            let mut prod = CMatrix::identity(k);
            for (j, &t) in idx.iter().enumerate() {
                prod = &(&prod * &decomps[j].projections[t]) * &spec.contractions[j];
            }
            weights.push(prod.trace() / k as f64);
            for j in (0..idx.len()).rev() {
                idx[j] += 1;
                if idx[j] < sizes[j] {
                    break;
                }
                idx[j] = 0;
            }
        }
        Ok(Self {
            angles: decomps.into_iter().map(|d| d.angles).collect(),
            weights,
        })
    }

    fn term(&self, exps: &[i128]) -> Complex64 {
        let fracs: Vec<Vec<f64>> = self
            .angles
            .iter()
            .zip(exps)
            .map(|(a, &e)| a.iter().map(|&t| signed_frac(t, e)).collect())
            .collect();
        let sizes: Vec<usize> = self.angles.iter().map(|a| a.len()).collect();
        let mut idx = vec![0usize; sizes.len()];
        let mut acc = c(0.0, 0.0);
        for w in &self.weights {
            let mut phase = 0.0;
            for (j, &t) in idx.iter().enumerate() {
                phase += fracs[j][t];
            }
            acc += w * unit_phase(phase.rem_euclid(1.0));
            for j in (0..idx.len()).rev() {
                idx[j] += 1;
                if idx[j] < sizes[j] {
                    break;
                }
                idx[j] = 0;
            }
        }
        acc
    }
}

fn direct_term(spec: &TraceProductSpec, exps: &[i128]) -> Complex64 {
    let k = spec.k();
    let mut prod = CMatrix::identity(k);
    for ((u, a), &e) in spec.unitaries.iter().zip(&spec.contractions).zip(exps) {
        prod = &(&prod * &signed_power(u, e)) * a;
    }
    prod.trace() / k as f64
}

/// `(1/N) Σ_{n<=N, n≡l (p)} μ(n) tr_k(∏_j U_j^{φ_j(n)} A_j)`.
///
/// With `two_path` the sum is also computed by expanding every `U_j` in its
/// eigenbasis; a disagreement above [`TWO_PATH_TOL`] is an error.
pub fn trace_product_sum(
    spec: &TraceProductSpec,
    table: &MoebiusTable,
    n: u64,
    two_path: bool,
) -> Result<TraceProductResult> {
    if n == 0 || n > table.n_max() {
        return Err(crate::error::range(format!("N = {n} outside 1..={}", table.n_max())));
    }
    let expansion = if two_path {
        Some(EigenExpansion::new(spec)?)
    } else {
        None
    };
    let mut direct = vec![c(0.0, 0.0); n as usize];
    let mut eigen = vec![c(0.0, 0.0); n as usize];
    let mut gap: f64 = 0.0;
    for m in 1..=n {
        let mu = table.mu(m);
        if mu == 0 || m % spec.modulus != spec.residue {
            continue;
        }
        let exps: Vec<i128> = spec.phases.iter().map(|p| p.value(m)).collect::<Result<_>>()?;
        let d = direct_term(spec, &exps);
        direct[(m - 1) as usize] = d * mu as f64;
        if let Some(ex) = &expansion {
            let e = ex.term(&exps);
            gap = gap.max((d - e).norm());
            eigen[(m - 1) as usize] = e * mu as f64;
        }
    }
    let value = block_prefix_sum(&direct) / n as f64;
    let eigen_value = expansion.map(|_| block_prefix_sum(&eigen) / n as f64);
    if let Some(e) = eigen_value {
        if gap > TWO_PATH_TOL || (e - value).norm() > TWO_PATH_TOL {
            return Err(Error::Numerical(format!(
                "trace product paths disagree: per-term gap {gap:.3e}, sums {value} vs {e}"
            )));
        }
    }
    Ok(TraceProductResult {
        value,
        eigen_value,
        max_term_gap: gap,
    })
}

/// `n ↦ ⟨U*ⁿ P_ξ Uⁿ η, η⟩ = |⟨Uⁿη, ξ⟩|²`.
pub struct RankOneFlow {
    unitary: UnitaryMatrix,
    xi: CVector,
    eta: CVector,
    angles: Vec<f64>,
    // ⟨P_k η, ξ⟩
    overlaps: Vec<Complex64>,
}

pub fn rank_one_flow(u: &UnitaryMatrix, xi: &CVector, eta: &CVector) -> Result<RankOneFlow> {
    let k = u.dim();
    if xi.len() != k || eta.len() != k {
        return Err(invalid("vectors must match the unitary's dimension"));
    }
    for (name, v) in [("ξ", xi), ("η", eta)] {
        if (v.norm() - 1.0).abs() > 1e-10 {
            return Err(invalid(format!("{name} must be a unit vector (norm {})", v.norm())));
        }
    }
    let spec = eig_unitary(u)?;
    let overlaps = spec.projections.iter().map(|p| inner(&p.apply(eta), xi)).collect();
    Ok(RankOneFlow {
        unitary: u.clone(),
        xi: xi.clone(),
        eta: eta.clone(),
        angles: spec.angles,
        overlaps,
    })
}

impl RankOneFlow {
    /// `⟨Uⁿη, ξ⟩` from the spectral expansion.
    pub fn amplitude(&self, n: u64) -> Complex64 {
        self.angles
            .iter()
            .zip(&self.overlaps)
            .map(|(t, w)| w * unit_phase(frac_times_int(*t, n, n as f64)))
            .fold(c(0.0, 0.0), |a, b| a + b)
    }

    /// `⟨(Uⁿ ⊗ U*ⁿ) η⊗ξ, ξ⊗η⟩` computed on the tensor product space.
    pub fn tensor_value(&self, n: u64) -> Complex64 {
        let un = self.unitary.pow(n);
        let big = un.tensor(&un.adjoint());
        let eta_xi = self.eta.kronecker(&self.xi);
        let xi_eta = self.xi.kronecker(&self.eta);
        inner(&big.apply(&eta_xi), &xi_eta)
    }

    /// `⟨Uⁿη, ξ⟩ ⟨U*ⁿξ, η⟩` with explicit powers.
    pub fn product_value(&self, n: u64) -> Complex64 {
        let un = self.unitary.pow(n);
        inner(&un.apply(&self.eta), &self.xi) * inner(&un.adjoint().apply(&self.xi), &self.eta)
    }
}

impl Flow for RankOneFlow {
    fn label(&self) -> &str {
        "rank-one"
    }
    fn bound(&self) -> f64 {
        1.0
    }
    fn evaluate(&self, n: u64) -> Complex64 {
        c(self.amplitude(n).norm_sqr(), 0.0)
    }
}

/// Default cap on the quantization grid size.
pub const DEFAULT_GRID_CAP: u64 = 1 << 40;

/// Unitary `V` with eigenphases on the grid `{j/m}` and its decomposition.
#[derive(Debug, Clone)]
pub struct Quantized {
    pub v: UnitaryMatrix,
    pub spectral: SpectralDecomp,
    pub grid: u64,
    pub epsilon: f64,
    pub horizon: u64,
    /// `‖U − V‖`.
    pub step_error: f64,
    /// `(n, ‖Uⁿ − Vⁿ‖)` at the sampled `n`.
    pub sampled: Vec<(u64, f64)>,
}

/// Round the eigenphases of `U` to a grid of `m = ⌈2πN/ε⌉` points so that
/// `‖Uⁿ − Vⁿ‖ <= n‖U − V‖ <= ε` for `n <= N`.
pub fn quantize_unitary(u: &UnitaryMatrix, epsilon: f64, horizon: u64, grid_cap: u64) -> Result<Quantized> {
    if epsilon.is_nan() || epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(invalid("ε must be positive"));
    }
    if horizon == 0 {
        return Err(invalid("horizon N must be at least 1"));
    }
    let m_real = (std::f64::consts::TAU * horizon as f64 / epsilon).ceil();
    if m_real > grid_cap as f64 {
        return Err(invalid(format!("grid needs m = {m_real:.0} points, cap is {grid_cap}")));
    }
    let m = m_real as u64;
    let spec = eig_unitary(u)?;
    let rounded: Vec<f64> = spec
        .angles
        .iter()
        .map(|&t| ((t * m as f64).round() as u64 % m) as f64 / m as f64)
        .collect();
    let on_grid = spec.angles.iter().zip(&rounded).all(|(a, b)| (a - b).abs() <= 1e-15);
    let (v, spectral) = if on_grid {
        (u.clone(), spec)
    } else {
        let vs = SpectralDecomp {
            angles: rounded,
            projections: spec.projections,
        };
        (UnitaryMatrix::new(vs.reconstruct())?, vs)
    };

    let step_error = (u.matrix() - v.matrix()).op_norm();
    let mut samples = vec![1, horizon / 2, horizon];
    samples.retain(|&n| n >= 1);
    samples.dedup();
    let mut sampled = Vec::new();
    for n in samples {
        let err = (&u.pow(n) - &spectral.power(n)).op_norm();
        if err > epsilon || err > n as f64 * step_error + 1e-12 {
            return Err(Error::Numerical(format!(
                "‖Uⁿ − Vⁿ‖ = {err:.3e} at n = {n} breaks the bound (ε = {epsilon}, n‖U−V‖ = {:.3e})",
                n as f64 * step_error
            )));
        }
        sampled.push((n, err));
    }
    Ok(Quantized {
        v,
        spectral,
        grid: m,
        epsilon,
        horizon,
        step_error,
        sampled,
    })
}

/// Direct average and the quantized bound chain for the `Ad(U)` flow of
/// `T` in the state `X ↦ tr_k(X AA*) / tr_k(AA*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VnBoundReport {
    /// `s_N` for `Ad(U)`.
    pub s_n: Complex64,
    /// `s_N` for `Ad(V)`.
    pub s_n_quantized: Complex64,
    /// `Σ_{k,l} exp_sum(θ_k − θ_l) tr_k(P_k T P_l AA*) / tr_k(AA*)`.
    pub expanded: Complex64,
    /// `2ε + |expanded|`.
    pub bound: f64,
    /// `Σ_{k,l} |tr_k(P_k T P_l AA*)|`.
    pub block_trace_sum: f64,
    /// `‖T‖₂ ‖AA*‖₂`.
    pub cauchy_schwarz: f64,
    /// `2ε + max_{k,l} |exp_sum(θ_k − θ_l)| · ‖T‖₂ ‖AA*‖₂ / tr_k(AA*)`.
    pub cs_bound: f64,
}

pub fn finite_vn_average_bound(
    u: &UnitaryMatrix,
    quantized: &Quantized,
    t: &CMatrix,
    a: &CMatrix,
    table: &MoebiusTable,
    n: u64,
) -> Result<VnBoundReport> {
    let k = u.dim();
    if t.rows() != k || a.rows() != k || quantized.v.dim() != k {
        return Err(invalid("U, V, T and A must share one dimension"));
    }
    let t_norm = t.op_norm();
    if t_norm > 1.0 + 1e-10 {
        return Err(invalid(format!("‖T‖ = {t_norm} exceeds 1")));
    }
    let aa = a * &a.adjoint();
    let tr_aa = aa.normalized_trace()?.re;
    if tr_aa <= 0.0 {
        return Err(invalid("A must be nonzero"));
    }
    let rho = DensityState::new(aa.scale(c(1.0 / aa.trace().re, 0.0)))?;
    let eps = quantized.epsilon;

    let s_n = average_at(&ad_flow(u, t, &rho)?, table, n)?;
    let s_n_quantized = average_at(&ad_flow(&quantized.v, t, &rho)?, table, n)?;

    let sp = &quantized.spectral;
    let mut expanded = c(0.0, 0.0);
    let mut block_trace_sum = 0.0;
    let mut max_coeff: f64 = 0.0;
    for (tk, pk) in sp.angles.iter().zip(&sp.projections) {
        let pt = pk * t;
        for (tl, pl) in sp.angles.iter().zip(&sp.projections) {
            let w = (&(&pt * pl) * &aa).normalized_trace()?;
            let coeff = table.exp_sum(&PolynomialPhase::linear(tk - tl), n)?;
            expanded += coeff * w;
            block_trace_sum += w.norm();
            max_coeff = max_coeff.max(coeff.norm());
        }
    }
    expanded /= tr_aa;

    let drift = (s_n - s_n_quantized).norm();
    if drift > 2.0 * eps * t_norm + 1e-12 {
        return Err(Error::Numerical(format!(
            "|s_N(U) − s_N(V)| = {drift:.3e} exceeds 2ε‖T‖ = {:.3e}",
            2.0 * eps * t_norm
        )));
    }
    if (expanded - s_n_quantized).norm() > 1e-9 {
        return Err(Error::Numerical(format!(
            "spectral expansion {expanded} disagrees with direct V average {s_n_quantized}"
        )));
    }
    let cauchy_schwarz = t.hs_norm() * aa.hs_norm();
    Ok(VnBoundReport {
        s_n,
        s_n_quantized,
        expanded,
        bound: 2.0 * eps + expanded.norm(),
        block_trace_sum,
        cauchy_schwarz,
        cs_bound: 2.0 * eps + max_coeff * cauchy_schwarz / tr_aa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::average_series;
    use crate::linalg::{random_unit_vector, seeded_rng};

    fn table() -> MoebiusTable {
        MoebiusTable::build(20_000).unwrap()
    }

    #[test]
    fn identity_observable_gives_mertens() {
        let t = table();
        let mut rng = seeded_rng(1);
        let u = UnitaryMatrix::haar(4, &mut rng);
        let rho = DensityState::random(4, &mut rng);
        let f = ad_flow(&u, &CMatrix::identity(4), &rho).unwrap();
        let s = average_at(&f, &t, 10_000).unwrap();
        assert!((s.re - t.mertens(10_000).unwrap() as f64 / 1e4).abs() < 1e-12);
        assert!(s.im.abs() < 1e-12);
    }

    #[test]
    fn diagonal_unitary_reduces_to_rotation() {
        let angles = [0.1, 0.37, 0.8];
        let u = UnitaryMatrix::diagonal_phases(&angles);
        let mut rng = seeded_rng(2);
        let psi = random_unit_vector(3, &mut rng);
        let rho = DensityState::pure(&psi).unwrap();
        let f = ad_flow(&u, &CMatrix::unit(3, 0, 2), &rho).unwrap();
        for n in [1u64, 2, 17, 1000, 99_991] {
            let rot = |t: f64| unit_phase(frac_times_int(t, n, n as f64));
            let want = rot(angles[0]) * rot(angles[2]).conj() * psi[2] * psi[0].conj();
            assert!(
                (f.evaluate(n) - want).norm() < 1e-13 * (n as f64 + 10.0),
                "n = {n}: {}",
                (f.evaluate(n) - want).norm()
            );
        }
    }

    #[test]
    fn incremental_block_matches_spectral() {
        let mut rng = seeded_rng(3);
        let u = UnitaryMatrix::haar(8, &mut rng);
        let a = CMatrix::random_with_norm(8, 1.0, &mut rng);
        let rho = DensityState::random(8, &mut rng);
        let f = ad_flow(&u, &a, &rho).unwrap();
        let len = 20_500;
        let mut out = vec![c(0.0, 0.0); len];
        f.evaluate_block(5, &vec![1; len], &mut out);
        for (i, v) in out.iter().enumerate().step_by(97) {
            assert!((v - f.evaluate(5 + i as u64)).norm() < 1e-10, "offset {i}");
        }
    }

    #[test]
    fn ad_flow_dimension_mismatch() {
        let u = UnitaryMatrix::identity(3);
        let rho = DensityState::new(CMatrix::identity(2).scale(c(0.5, 0.0))).unwrap();
        assert!(ad_flow(&u, &CMatrix::identity(3), &rho).is_err());
    }

    #[test]
    fn trace_product_trivial_and_scalar() {
        let t = table();
        let spec = TraceProductSpec::new(
            vec![UnitaryMatrix::identity(3), UnitaryMatrix::identity(3)],
            vec![CMatrix::identity(3), CMatrix::identity(3)],
            vec![IntegerPhase::identity(), IntegerPhase::from_integers(&[1, 2, 3])],
            1,
            0,
        )
        .unwrap();
        let r = trace_product_sum(&spec, &t, 2000, true).unwrap();
        assert!((r.value.re - t.mertens(2000).unwrap() as f64 / 2000.0).abs() < 1e-13);

        let theta = 0.2718281828;
        let a1 = c(0.6, -0.3);
        let spec = TraceProductSpec::new(
            vec![UnitaryMatrix::diagonal_phases(&[theta])],
            vec![CMatrix::from_diagonal(&[a1])],
            vec![IntegerPhase::identity()],
            1,
            0,
        )
        .unwrap();
        let r = trace_product_sum(&spec, &t, 3000, true).unwrap();
        let e = t.exp_sum(&PolynomialPhase::linear(theta), 3000).unwrap() * a1;
        assert!((r.value - e).norm() < 1e-12);
    }

    #[test]
    fn trace_product_two_paths_random() {
        let t = table();
        for seed in 0..3 {
            let spec = TraceProductSpec::random_linear(4, 2, seed);
            let r = trace_product_sum(&spec, &t, 1000, true).unwrap();
            assert!(r.max_term_gap < 1e-9);
        }
    }

    #[test]
    fn trace_product_rejects_non_integer_phase() {
        let t = table();
        let half = IntegerPhase::new(vec![Ratio::new(0, 1), Ratio::new(1, 2)]).unwrap();
        let spec = TraceProductSpec::new(
            vec![UnitaryMatrix::identity(2)],
            vec![CMatrix::identity(2)],
            vec![half],
            1,
            0,
        )
        .unwrap();
        assert!(matches!(
            trace_product_sum(&spec, &t, 10, false),
            Err(Error::InvalidArgument(_))
        ));
        // n(n+1)/2 is integer-valued despite rational coefficients
        let tri = IntegerPhase::new(vec![Ratio::new(0, 1), Ratio::new(1, 2), Ratio::new(1, 2)]).unwrap();
        assert_eq!(tri.value(4).unwrap(), 10);
    }

    #[test]
    fn rank_one_eigenvector_is_constant() {
        let t = table();
        let u = UnitaryMatrix::diagonal_phases(&[0.1, 0.4, 0.77]);
        let e1 = CVector::from_row_slice(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let f = rank_one_flow(&u, &e1, &e1).unwrap();
        for n in [1, 5, 1000] {
            assert!((f.evaluate(n) - c(1.0, 0.0)).norm() < 1e-14);
        }
        let s = average_series(&f, &t, &[5000], 1).unwrap();
        assert!((s.values[0].re - t.mertens(5000).unwrap() as f64 / 5000.0).abs() < 1e-12);
        // ξ orthogonal to the orbit of η
        let e0 = CVector::from_row_slice(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let g = rank_one_flow(&u, &e0, &e1).unwrap();
        for n in [1, 5, 1000] {
            assert_eq!(g.evaluate(n), c(0.0, 0.0));
        }
        let long = CVector::from_row_slice(&[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(rank_one_flow(&u, &long, &e1).is_err());
    }

    #[test]
    fn quantize_grid_arithmetic() {
        let theta = 0.1234567;
        let u = UnitaryMatrix::diagonal_phases(&[theta]);
        let q = quantize_unitary(&u, 0.01, 10, DEFAULT_GRID_CAP).unwrap();
        assert_eq!(q.grid, (std::f64::consts::TAU * 10.0 / 0.01).ceil() as u64);
        assert!((q.spectral.angles[0] - theta).abs() <= 0.01 / (std::f64::consts::TAU * 10.0));
    }

    #[test]
    fn quantize_on_grid_is_identity() {
        let u = UnitaryMatrix::diagonal_phases(&[0.25, 0.5]);
        // m = ⌈2π·1/(π/2)⌉ = 4 points
        let q = quantize_unitary(&u, std::f64::consts::FRAC_PI_2, 1, DEFAULT_GRID_CAP).unwrap();
        assert_eq!(q.grid, 4);
        assert_eq!(&q.v, &u);
    }

    #[test]
    fn quantize_grid_cap() {
        let u = UnitaryMatrix::haar_seeded(3, 1);
        match quantize_unitary(&u, 1e-9, 1_000_000, DEFAULT_GRID_CAP) {
            Err(Error::InvalidArgument(msg)) => assert!(msg.contains("m = ")),
            other => panic!("expected grid-cap error, got {other:?}"),
        }
    }

    #[test]
    fn vn_bound_identity_observable() {
        let t = table();
        let mut rng = seeded_rng(9);
        let u = UnitaryMatrix::haar(4, &mut rng);
        let a = CMatrix::random(4, 4, &mut rng);
        let q = quantize_unitary(&u, 0.05, 100, DEFAULT_GRID_CAP).unwrap();
        let r = finite_vn_average_bound(&u, &q, &CMatrix::identity(4), &a, &t, 5000).unwrap();
        let m = t.mertens(5000).unwrap() as f64 / 5000.0;
        assert!((r.s_n.re - m).abs() < 1e-12);
        assert!((r.expanded.re - m).abs() < 1e-12);
    }

    #[test]
    fn fd_algebra_embedding() {
        let alg = FdAlgebra::new(vec![2, 3]).unwrap();
        assert_eq!(alg.total_dim(), 13);
        assert_eq!(alg.matrix_size(), 5);
        let x = alg.embed(1, &CMatrix::identity(3)).unwrap();
        assert!(alg.contains(&x));
        assert!(!alg.contains(&CMatrix::random(5, 5, &mut seeded_rng(0))));
        assert!(FdAlgebra::new(vec![]).is_err());
        assert!(alg.embed(0, &CMatrix::identity(3)).is_err());
    }
}
