//! The averaging engine: flows `n ↦ ρ(αⁿ(A))`, Möbius-weighted average
//! series, decay fits, and the bilinear (Bourgain–Sarnak–Ziegler) criterion.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{invalid, range, Error, Result};
use crate::linalg::{c, CMatrix, DensityState, UnitaryMatrix, UNITARY_TOL};
use crate::moebius::{unit_phase, MoebiusTable};
use crate::summation::{pairwise, BlockSums, BLOCK_LEN};

/// A bounded sequence `n ↦ ρ(αⁿ(A))`.
///
/// Implementations must be pure: the value at `n` may not depend on which
/// other indices were evaluated before, or on which thread asks.
pub trait Flow: Send + Sync {
    fn label(&self) -> &str;

    /// `B` with `|evaluate(n)| <= B` for every `n`.
    fn bound(&self) -> f64;

    fn evaluate(&self, n: u64) -> Complex64;

    /// Values for `n = start, start + 1, …`. Slots where `weights[i] == 0`
    /// are never read by the engine and may be left untouched.
    fn evaluate_block(&self, start: u64, weights: &[i8], out: &mut [Complex64]) {
        for (i, (w, slot)) in weights.iter().zip(out.iter_mut()).enumerate() {
            if *w != 0 {
                *slot = self.evaluate(start + i as u64);
            }
        }
    }
}

impl<F: Flow + ?Sized> Flow for Box<F> {
    fn label(&self) -> &str {
        (**self).label()
    }
    fn bound(&self) -> f64 {
        (**self).bound()
    }
    fn evaluate(&self, n: u64) -> Complex64 {
        (**self).evaluate(n)
    }
    fn evaluate_block(&self, start: u64, weights: &[i8], out: &mut [Complex64]) {
        (**self).evaluate_block(start, weights, out)
    }
}

/// Flow backed by a closure.
pub struct FnFlow<F> {
    label: String,
    bound: f64,
    f: F,
}

impl<F> FnFlow<F>
where
    F: Fn(u64) -> Complex64 + Send + Sync,
{
    pub fn new(label: impl Into<String>, bound: f64, f: F) -> Self {
        Self {
            label: label.into(),
            bound,
            f,
        }
    }
}

impl<F> Flow for FnFlow<F>
where
    F: Fn(u64) -> Complex64 + Send + Sync,
{
    fn label(&self) -> &str {
        &self.label
    }
    fn bound(&self) -> f64 {
        self.bound
    }
    fn evaluate(&self, n: u64) -> Complex64 {
        (self.f)(n)
    }
}

/// Scalar rotation `n ↦ e(θn)`.
pub fn rotation_flow(theta: f64) -> impl Flow {
    let phase = crate::moebius::PolynomialPhase::linear(theta);
    FnFlow::new(format!("rotation({theta})"), 1.0, move |n| {
        unit_phase(phase.reduced_value(n))
    })
}

/// Constant flow `n ↦ value`.
pub fn constant_flow(value: Complex64) -> impl Flow {
    FnFlow::new(format!("constant({value})"), value.norm(), move |_| value)
}

/// Linear combination `Σ c_i f_i` of flows evaluated pointwise.
pub struct LinearCombination<'a> {
    label: String,
    terms: Vec<(Complex64, &'a dyn Flow)>,
}

impl<'a> LinearCombination<'a> {
    pub fn new(terms: Vec<(Complex64, &'a dyn Flow)>) -> Self {
        let label = terms
            .iter()
            .map(|(c, f)| format!("{c}·{}", f.label()))
            .collect::<Vec<_>>()
            .join(" + ");
        Self { label, terms }
    }
}

impl Flow for LinearCombination<'_> {
    fn label(&self) -> &str {
        &self.label
    }
    fn bound(&self) -> f64 {
        self.terms.iter().map(|(c, f)| c.norm() * f.bound()).sum()
    }
    fn evaluate(&self, n: u64) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, f)| c * f.evaluate(n))
            .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
    }
}

/// `s_N = (1/N) Σ_{n<=N} μ(n) f(n)` at a set of checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageSeries {
    pub label: String,
    pub bound: f64,
    pub checkpoints: Vec<u64>,
    pub values: Vec<Complex64>,
    /// `B · (1/N) Σ_{n<=N} |μ(n)|`, the trivial bound on `|s_N|`.
    pub running_bound: Vec<f64>,
}

impl AverageSeries {
    pub fn value_at(&self, n: u64) -> Option<Complex64> {
        self.checkpoints.iter().position(|&k| k == n).map(|i| self.values[i])
    }

    pub fn last(&self) -> Complex64 {
        *self.values.last().expect("series has at least one checkpoint")
    }

    /// CSV with columns `N,re,im,abs,running_bound`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "N,re,im,abs,running_bound")?;
        for ((n, v), rb) in self.checkpoints.iter().zip(&self.values).zip(&self.running_bound) {
            writeln!(
                w,
                "{n},{},{},{},{}",
                sig17(v.re),
                sig17(v.im),
                sig17(v.norm()),
                sig17(*rb)
            )?;
        }
        Ok(())
    }
}

/// Decimal with 17 significant digits; round-trips any f64.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Geometric checkpoint grid `10^a, 10^{a+step}, …, 10^b`, rounded.
pub fn geometric_checkpoints(lo_exp: f64, hi_exp: f64, step: f64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut e = lo_exp;
    while e <= hi_exp + 1e-9 {
        out.push(10f64.powf(e).round() as u64);
        e += step;
    }
    out.dedup();
    out
}

/// `{10³, 10^3.5, …, 10⁶}`.
pub fn default_checkpoints() -> Vec<u64> {
    geometric_checkpoints(3.0, 6.0, 0.5)
}

struct BlockResult {
    sum: Option<Complex64>,
    partials: Vec<(usize, Complex64)>,
}

fn run_block(flow: &dyn Flow, mu: &[i8], block: usize, n_top: u64, checkpoints: &[u64]) -> Result<BlockResult> {
    let start = (block * BLOCK_LEN) as u64 + 1;
    let end = ((block + 1) * BLOCK_LEN) as u64;
    let stop = end.min(n_top);
    let len = (stop - start + 1) as usize;
    let weights = &mu[start as usize..=stop as usize];
    let mut vals = vec![Complex64::new(0.0, 0.0); len];
    flow.evaluate_block(start, weights, &mut vals);

    let bound = flow.bound();
    let slack = bound * (1.0 + 1e-9) + 1e-12;
    let mut terms = vec![Complex64::new(0.0, 0.0); len];
    for i in 0..len {
        let w = weights[i];
        if w == 0 {
            continue;
        }
        let v = vals[i];
        let n = start + i as u64;
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFinite {
                label: flow.label().to_string(),
                n,
            });
        }
        if v.norm() > slack {
            return Err(Error::BoundViolated {
                label: flow.label().to_string(),
                n,
                bound,
                value: v.norm(),
            });
        }
        terms[i] = v * w as f64;
    }

    let sum = (stop == end).then(|| pairwise(&terms));
    let partials = checkpoints
        .iter()
        .enumerate()
        .filter(|(_, &cp)| cp >= start && cp < end)
        .map(|(idx, &cp)| (idx, pairwise(&terms[..(cp - start + 1) as usize])))
        .collect();
    Ok(BlockResult { sum, partials })
}

/// Möbius-weighted averages of `flow` at every checkpoint, in one pass.
///
/// `workers > 1` splits the blocks across threads; the result is bit-for-bit
/// identical to the serial run.
pub fn average_series(
    flow: &dyn Flow,
    table: &MoebiusTable,
    checkpoints: &[u64],
    workers: usize,
) -> Result<AverageSeries> {
    if checkpoints.is_empty() {
        return Err(invalid("at least one checkpoint is required"));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("checkpoints must be strictly ascending"));
    }
    if checkpoints[0] == 0 {
        return Err(invalid("checkpoints start at N = 1"));
    }
    let n_top = *checkpoints.last().unwrap();
    if n_top > table.n_max() {
        return Err(range(format!(
            "checkpoint {n_top} exceeds table n_max = {}",
            table.n_max()
        )));
    }
    let mu = table.mu_slice();
    let n_blocks = (n_top as usize).div_ceil(BLOCK_LEN);
    let workers = workers.max(1).min(n_blocks);

    let mut results: Vec<Option<Result<BlockResult>>> = (0..n_blocks).map(|_| None).collect();
    if workers == 1 {
        for (b, slot) in results.iter_mut().enumerate() {
            *slot = Some(run_block(flow, mu, b, n_top, checkpoints));
        }
    } else {
        let per_worker: Vec<Vec<(usize, Result<BlockResult>)>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    s.spawn(move || {
                        (w..n_blocks)
                            .step_by(workers)
                            .map(|b| (b, run_block(flow, mu, b, n_top, checkpoints)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("averaging worker panicked"))
                .collect()
        });
        for (b, r) in per_worker.into_iter().flatten() {
            results[b] = Some(r);
        }
    }

    let mut sums = BlockSums::default();
    let mut partials = vec![Complex64::new(0.0, 0.0); checkpoints.len()];
    for r in results {
        let r = r.expect("every block is assigned")?;
        if let Some(s) = r.sum {
            sums.blocks.push(s);
        }
        for (idx, p) in r.partials {
            partials[idx] = p;
        }
    }

    let bound = flow.bound();
    let mut values = Vec::with_capacity(checkpoints.len());
    let mut running_bound = Vec::with_capacity(checkpoints.len());
    for (i, &n) in checkpoints.iter().enumerate() {
        values.push(sums.prefix(n, partials[i]) / n as f64);
        running_bound.push(bound * table.squarefree_density(n)?);
    }
    Ok(AverageSeries {
        label: flow.label().to_string(),
        bound,
        checkpoints: checkpoints.to_vec(),
        values,
        running_bound,
    })
}

/// Single-checkpoint average recomputed from scratch.
pub fn average_at(flow: &dyn Flow, table: &MoebiusTable, n: u64) -> Result<Complex64> {
    Ok(average_series(flow, table, &[n], 1)?.values[0])
}

/// Least-squares fit `|s_N| ≈ C (log N)^{-h}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub c: f64,
    pub h: f64,
    pub r_squared: f64,
    pub points_used: usize,
    pub zeros_dropped: usize,
    /// Every value was exactly zero; `h` is `+∞`.
    pub exact_zero: bool,
}

pub fn decay_fit(series: &AverageSeries) -> Result<DecayFit> {
    if series.checkpoints.len() < 3 {
        return Err(invalid("decay fit needs at least 3 checkpoints"));
    }
    if series.checkpoints.iter().any(|&n| n < 3) {
        return Err(invalid("decay fit needs every checkpoint N >= 3"));
    }
    let pts: Vec<(f64, f64)> = series
        .checkpoints
        .iter()
        .zip(&series.values)
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(&n, v)| ((n as f64).ln().ln(), v.norm().ln()))
        .collect();
    let zeros = series.values.len() - pts.len();
    if pts.is_empty() {
        return Ok(DecayFit {
            c: 0.0,
            h: f64::INFINITY,
            r_squared: 1.0,
            points_used: 0,
            zeros_dropped: zeros,
            exact_zero: true,
        });
    }
    if pts.len() < 3 {
        return Err(invalid(format!(
            "only {} nonzero checkpoints; decay fit needs 3",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("decay fit needs distinct checkpoints"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(DecayFit {
        c: intercept.exp(),
        h: -slope,
        r_squared,
        points_used: pts.len(),
        zeros_dropped: zeros,
        exact_zero: false,
    })
}

/// Default cap on the primes tested by [`bsz_check`].
pub const DEFAULT_BSZ_PRIME_CAP: u64 = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BszParams {
    pub epsilon: f64,
    /// Correlation length.
    pub m: u64,
    /// Length of the Möbius sum.
    pub n: u64,
    pub prime_cap: u64,
}

impl BszParams {
    pub fn new(epsilon: f64, m: u64, n: u64) -> Self {
        Self {
            epsilon,
            m,
            n,
            prime_cap: DEFAULT_BSZ_PRIME_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BszReport {
    pub epsilon: f64,
    pub m: u64,
    pub n: u64,
    /// Largest prime considered, `min(e^{1/ε}, prime_cap, n_max / M)`.
    pub prime_limit: u64,
    /// True when the limit fell below `e^{1/ε}`: only part of the
    /// hypothesis was checked.
    pub partial: bool,
    pub primes_checked: usize,
    pub prime_pairs_checked: usize,
    pub hypothesis_holds: bool,
    /// `max |Σ_{m<=M} f(p₁m) conj f(p₂m)| / M` over the checked pairs.
    pub max_correlation_ratio: f64,
    pub worst_pair: Option<(u64, u64)>,
    /// `|Σ_{n<=N} μ(n) f(n)|`.
    pub mobius_sum_abs: f64,
    /// `2 √(ε log(1/ε)) N`.
    pub criterion_bound: f64,
    pub within_bound: bool,
}

/// Check the bilinear hypothesis `|Σ_{m<=M} f(p₁m) conj f(p₂m)| <= εM` over
/// distinct prime pairs and compare the Möbius sum with `2√(ε log 1/ε) N`.
pub fn bsz_check(flow: &dyn Flow, table: &MoebiusTable, params: BszParams) -> Result<BszReport> {
    let BszParams {
        epsilon,
        m,
        n,
        prime_cap,
    } = params;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("ε = {epsilon} must lie in (0, 1)")));
    }
    if m == 0 || n == 0 {
        return Err(invalid("M and N must be positive"));
    }
    if flow.bound() > 1.0 + 1e-12 {
        return Err(invalid(format!(
            "bilinear criterion needs |f| <= 1, flow declares {}",
            flow.bound()
        )));
    }
    let exp_limit = (1.0 / epsilon).exp();
    let exp_limit_int = if exp_limit >= u64::MAX as f64 {
        u64::MAX
    } else {
        exp_limit.floor() as u64
    };
    let prime_limit = exp_limit_int.min(prime_cap).min(table.n_max() / m);
    let partial = prime_limit < exp_limit_int;

    let primes: Vec<u64> = table
        .primes()
        .iter()
        .map(|&p| p as u64)
        .take_while(|&p| p <= prime_limit)
        .collect();
    let samples: Vec<Vec<Complex64>> = primes
        .iter()
        .map(|&p| (1..=m).map(|k| flow.evaluate(p * k)).collect())
        .collect();

    let mut pairs = 0usize;
    let mut worst = 0.0f64;
    let mut worst_pair = None;
    let mut terms = vec![Complex64::new(0.0, 0.0); m as usize];
    for i in 0..primes.len() {
        for j in (i + 1)..primes.len() {
            for (t, (a, b)) in terms.iter_mut().zip(samples[i].iter().zip(&samples[j])) {
                *t = a * b.conj();
            }
            let ratio = pairwise(&terms).norm() / m as f64;
            pairs += 1;
            if ratio > worst || worst_pair.is_none() {
                worst = worst.max(ratio);
                worst_pair = Some((primes[i], primes[j]));
            }
        }
    }
    let hypothesis_holds = worst <= epsilon;
    let mobius_sum_abs = average_at(flow, table, n)?.norm() * n as f64;
    let criterion_bound = 2.0 * (epsilon * (1.0 / epsilon).ln()).sqrt() * n as f64;
    Ok(BszReport {
        epsilon,
        m,
        n,
        prime_limit,
        partial,
        primes_checked: primes.len(),
        prime_pairs_checked: pairs,
        hypothesis_holds,
        max_correlation_ratio: worst,
        worst_pair,
        mobius_sum_abs,
        criterion_bound,
        within_bound: mobius_sum_abs <= criterion_bound,
    })
}

/// Flow of a periodic inner automorphism `n ↦ tr(ρ U*ⁿ A Uⁿ)` with `U^q = I`.
pub struct PeriodicFlow {
    label: String,
    bound: f64,
    values: Vec<Complex64>,
}

impl PeriodicFlow {
    pub fn period(&self) -> usize {
        self.values.len()
    }

    /// Values over one period, starting at `n = 0`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

impl Flow for PeriodicFlow {
    fn label(&self) -> &str {
        &self.label
    }
    fn bound(&self) -> f64 {
        self.bound
    }
    fn evaluate(&self, n: u64) -> Complex64 {
        self.values[(n % self.values.len() as u64) as usize]
    }
}

/// Build a [`PeriodicFlow`], finding the least `q <= max_period` with
/// `‖U^q − I‖ <= 10⁻¹⁰`.
pub fn periodic_flow(u: &UnitaryMatrix, rho: &DensityState, a: &CMatrix, max_period: usize) -> Result<PeriodicFlow> {
    let k = u.dim();
    if rho.dim() != k || a.rows() != k || a.cols() != k {
        return Err(invalid("U, ρ and A must share one dimension"));
    }
    let id = CMatrix::identity(k);
    let mut power = u.matrix().clone();
    let mut period = None;
    for q in 1..=max_period {
        if power.max_abs_diff(&id) <= UNITARY_TOL {
            period = Some(q);
            break;
        }
        power = &power * u.matrix();
    }
    let q = period.ok_or_else(|| invalid(format!("no period q <= {max_period} with U^q = I")))?;
    let ud = u.matrix().adjoint();
    let mut values = Vec::with_capacity(q);
    let mut x = a.clone();
    for _ in 0..q {
        values.push(rho.expect(&x));
        x = &(&ud * &x) * u.matrix();
    }
    Ok(PeriodicFlow {
        label: format!("periodic(q={q})"),
        bound: a.op_norm(),
        values,
    })
}

/// `Σ_{l<q} c_l · (1/N) Σ_{n<=N, n≡l (q)} μ(n)`: the regrouped form of a
/// `q`-periodic average.
pub fn regrouped_periodic_average(values: &[Complex64], table: &MoebiusTable, n: u64) -> Result<Complex64> {
    let q = values.len() as u64;
    let mut acc = c(0.0, 0.0);
    for (l, v) in values.iter().enumerate() {
        let phase = crate::moebius::PolynomialPhase::new(vec![0.0], q, l as u64)?;
        acc += v * table.exp_sum(&phase, n)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::PolynomialPhase;

    fn table() -> MoebiusTable {
        MoebiusTable::build(20_000).unwrap()
    }

    #[test]
    fn rotation_flow_matches_exp_sum() {
        let t = table();
        let theta = (5f64.sqrt() - 1.0) / 2.0;
        let s = average_series(&rotation_flow(theta), &t, &[10_000], 1).unwrap();
        let e = t.exp_sum(&PolynomialPhase::linear(theta), 10_000).unwrap();
        assert!((s.values[0] - e).norm() < 1e-12);
    }

    #[test]
    fn constant_flow_scales_mertens() {
        let t = table();
        let z = c(0.3, -0.7);
        let s = average_series(&constant_flow(z), &t, &[1, 2, 1000, 1024, 1025, 5000], 1).unwrap();
        for (n, v) in s.checkpoints.iter().zip(&s.values) {
            let m = t.mertens(*n).unwrap() as f64 / *n as f64;
            assert!((v - z * m).norm() < 1e-15, "N = {n}");
        }
    }

    #[test]
    fn parallel_equals_serial_bitwise() {
        let t = table();
        let f = rotation_flow(0.1234567);
        let cps = [100, 1024, 3000, 17_777, 20_000];
        let a = average_series(&f, &t, &cps, 1).unwrap();
        let b = average_series(&f, &t, &cps, 4).unwrap();
        assert_eq!(a, b);
        for (n, v) in cps.iter().zip(&a.values) {
            assert_eq!(average_at(&f, &t, *n).unwrap(), *v);
        }
    }

    #[test]
    fn engine_rejects_bad_input() {
        let t = table();
        let f = rotation_flow(0.1);
        assert!(average_series(&f, &t, &[], 1).is_err());
        assert!(average_series(&f, &t, &[10, 5], 1).is_err());
        assert!(matches!(average_series(&f, &t, &[30_000], 1), Err(Error::Range(_))));
        let nan = FnFlow::new("nan", 1.0, |n| if n == 7 { c(f64::NAN, 0.0) } else { c(1.0, 0.0) });
        match average_series(&nan, &t, &[100], 1) {
            Err(Error::NonFinite { label, n }) => {
                assert_eq!(label, "nan");
                assert_eq!(n, 7);
            }
            other => panic!("expected non-finite error, got {other:?}"),
        }
        let liar = FnFlow::new("liar", 0.5, |_| c(1.0, 0.0));
        assert!(matches!(
            average_series(&liar, &t, &[100], 1),
            Err(Error::BoundViolated { .. })
        ));
    }

    fn synthetic(values: impl Fn(f64) -> f64) -> AverageSeries {
        let checkpoints = default_checkpoints();
        let values: Vec<Complex64> = checkpoints.iter().map(|&n| c(values(n as f64), 0.0)).collect();
        AverageSeries {
            label: "synthetic".into(),
            bound: 1.0,
            running_bound: vec![1.0; checkpoints.len()],
            checkpoints,
            values,
        }
    }

    #[test]
    fn decay_fit_exact_models() {
        let fit = decay_fit(&synthetic(|n| n.ln().powi(-2))).unwrap();
        assert!((fit.h - 2.0).abs() < 1e-6);
        assert!((fit.c - 1.0).abs() < 1e-6);
        let fit = decay_fit(&synthetic(|_| 0.5)).unwrap();
        assert!(fit.h.abs() < 1e-6);
        assert!((fit.c - 0.5).abs() < 1e-6);
    }

    #[test]
    fn decay_fit_zero_handling() {
        let fit = decay_fit(&synthetic(|_| 0.0)).unwrap();
        assert!(fit.exact_zero);
        assert_eq!(fit.h, f64::INFINITY);
        let mut s = synthetic(|n| 1.0 / n.ln());
        s.values[0] = c(0.0, 0.0);
        let fit = decay_fit(&s).unwrap();
        assert_eq!(fit.zeros_dropped, 1);
        assert!((fit.h - 1.0).abs() < 1e-9);
        s.checkpoints[0] = 2;
        assert!(decay_fit(&s).is_err());
    }

    #[test]
    fn bsz_rejects_bad_epsilon() {
        let t = table();
        let f = rotation_flow(0.3);
        for eps in [0.0, 1.0, -0.1, 1.5] {
            assert!(bsz_check(&f, &t, BszParams::new(eps, 100, 100)).is_err());
        }
    }

    #[test]
    fn bsz_constant_and_zero_flows() {
        let t = table();
        let r = bsz_check(&constant_flow(c(1.0, 0.0)), &t, BszParams::new(0.25, 100, 10_000)).unwrap();
        assert!(!r.hypothesis_holds);
        assert!((r.max_correlation_ratio - 1.0).abs() < 1e-12);
        let r = bsz_check(&constant_flow(c(0.0, 0.0)), &t, BszParams::new(0.25, 100, 10_000)).unwrap();
        assert!(r.hypothesis_holds);
        assert_eq!(r.mobius_sum_abs, 0.0);
        assert!(r.within_bound);
    }

    #[test]
    fn periodic_flow_swap() {
        let t = table();
        let swap = UnitaryMatrix::new(
            CMatrix::from_row_major(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap(),
        )
        .unwrap();
        let e0 = crate::linalg::CVector::from_row_slice(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let rho = DensityState::pure(&e0).unwrap();
        let f = periodic_flow(&swap, &rho, &CMatrix::unit(2, 0, 0), 8).unwrap();
        assert_eq!(f.period(), 2);
        assert_eq!(f.evaluate(0), c(1.0, 0.0));
        assert_eq!(f.evaluate(1), c(0.0, 0.0));
        assert_eq!(f.evaluate(2), c(1.0, 0.0));
        let s = average_at(&f, &t, 10_000).unwrap();
        let even = PolynomialPhase::new(vec![0.0], 2, 0).unwrap();
        assert!((s - t.exp_sum(&even, 10_000).unwrap()).norm() < 1e-12);
        let r = regrouped_periodic_average(f.values(), &t, 10_000).unwrap();
        assert!((s - r).norm() < 1e-12);
    }

    #[test]
    fn periodic_flow_requires_period() {
        let u = UnitaryMatrix::diagonal_phases(&[0.0, 0.1234567]);
        let rho = DensityState::new(CMatrix::identity(2).scale(c(0.5, 0.0))).unwrap();
        assert!(periodic_flow(&u, &rho, &CMatrix::identity(2), 50).is_err());
    }
}
