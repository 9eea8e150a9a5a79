//! Möbius sieve, Mertens sums and Möbius-twisted exponential sums.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{invalid, range, Result};
use crate::summation::{block_prefix_sum, pairwise_real};

/// Largest table a caller may build unless they raise the cap explicitly.
pub const DEFAULT_HARD_CAP: u64 = 500_000_000;

/// Default sieve length used by experiments.
pub const DEFAULT_N_MAX: u64 = 1_000_000;

const CACHE_MAGIC: &[u8; 4] = b"NCF1";

/// `e(x) = exp(2πix)`; `turns` should already be reduced mod 1.
#[inline]
pub fn unit_phase(turns: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * turns).sin_cos();
    Complex64::new(c, s)
}

/// Fractional part of `a · m`, in `[0, 1)`.
///
/// `m_wrapped` is `m mod 2^64` and `m_float` is `m` rounded to f64. The
/// product is exact whenever `a = mant · 2^-k` with `k <= 64` (every
/// coefficient at least 2^-11 in magnitude), because then only `m mod 2^k`
/// matters. Smaller coefficients split off their low bits and multiply
/// those in floating point, which is accurate while `m < 2^64`.
pub fn frac_times_int(a: f64, m_wrapped: u64, m_float: f64) -> f64 {
    if a == 0.0 || m_float == 0.0 {
        return 0.0;
    }
    let neg = a < 0.0;
    let bits = a.abs().to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac_bits = bits & ((1u64 << 52) - 1);
    let (mant, k) = if exp == 0 {
        (frac_bits, 1074i64)
    } else {
        (frac_bits | (1u64 << 52), 1075 - exp)
    };
    if k <= 0 {
        return 0.0;
    }
    let r = if k <= 64 {
        let prod = (mant as u128) * (m_wrapped as u128);
        let rem = prod & ((1u128 << k) - 1);
        (rem as f64) * pow2_neg(k)
    } else {
        let shift = k - 64;
        let hi = if shift >= 64 { 0 } else { mant >> shift };
        let hi_part = ((hi as u128 * m_wrapped as u128) & (u64::MAX as u128)) as f64 * pow2_neg(64);
        let a_lo = a.abs() - (hi as f64) * pow2_neg(64);
        let lo_part = (a_lo * m_float).fract();
        (hi_part + lo_part).fract()
    };
    let r = if r >= 1.0 { 0.0 } else { r };
    if neg && r != 0.0 {
        let s = 1.0 - r;
        if s >= 1.0 {
            0.0
        } else {
            s
        }
    } else {
        r
    }
}

fn pow2_neg(k: i64) -> f64 {
    debug_assert!((0..=1074).contains(&k));
    if k <= 1022 {
        f64::from_bits(((1023 - k) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (1074 - k))
    }
}

/// Sieve of μ(n) and the primes up to `n_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoebiusTable {
    n_max: u64,
    // mu[0] is unused and stored as 0
    mu: Vec<i8>,
    primes: Vec<u32>,
}

impl MoebiusTable {
    /// Linear sieve up to `n_max` with the default hard cap.
    pub fn build(n_max: u64) -> Result<Self> {
        Self::build_with_cap(n_max, DEFAULT_HARD_CAP)
    }

    pub fn build_with_cap(n_max: u64, hard_cap: u64) -> Result<Self> {
        if n_max == 0 {
            return Err(invalid("n_max must be at least 1"));
        }
        if n_max > hard_cap {
            return Err(invalid(format!("n_max = {n_max} exceeds the hard cap {hard_cap}")));
        }
        if n_max > u32::MAX as u64 {
            return Err(invalid("n_max must fit in 32 bits"));
        }
        let n = n_max as usize;
        // smallest prime factor; 0 means not yet reached
        let mut spf = vec![0u32; n + 1];
        let mut mu = vec![0i8; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        mu[1] = 1;
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                mu[i] = -1;
                primes.push(i as u32);
            }
            let lpf = spf[i];
            for &p in &primes {
                let ip = i * p as usize;
                if p > lpf || ip > n {
                    break;
                }
                spf[ip] = p;
                mu[ip] = if p == lpf { 0 } else { -mu[i] };
            }
        }
        Ok(Self { n_max, mu, primes })
    }

    /// Reassemble a table from stored μ values (index 0 ignored).
    pub(crate) fn from_mu(mu: Vec<i8>) -> Result<Self> {
        if mu.len() < 2 {
            return Err(invalid("table needs at least μ(1)"));
        }
        if mu[1] != 1 || mu.iter().any(|m| !(-1..=1).contains(m)) {
            return Err(invalid("stored values are not a Möbius table"));
        }
        // primality is not recoverable from μ alone (μ(30) = μ(2) = −1)
        let len = mu.len();
        let mut composite = vec![false; len];
        let mut primes = Vec::new();
        for i in 2..len {
            if composite[i] {
                continue;
            }
            primes.push(i as u32);
            let mut j = i * i;
            while j < len {
                composite[j] = true;
                j += i;
            }
        }
        Ok(Self {
            n_max: (len - 1) as u64,
            mu,
            primes,
        })
    }

    /// Binary cache: magic `NCF1`, `n_max` as little-endian u64, then μ(1..=n_max)
    /// packed four per byte from the low bits, coded 0 → 0, 1 → 1, −1 → 2.
    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&self.n_max.to_le_bytes())?;
        let mut packed = vec![0u8; (self.n_max as usize).div_ceil(4)];
        for (i, &m) in self.mu[1..].iter().enumerate() {
            let code = match m {
                0 => 0u8,
                1 => 1,
                _ => 2,
            };
            packed[i / 4] |= code << (2 * (i % 4));
        }
        w.write_all(&packed)?;
        Ok(())
    }

    pub fn read_cache<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(invalid("not a sieve cache file (bad magic)"));
        }
        let mut len = [0u8; 8];
        r.read_exact(&mut len)?;
        let n_max = u64::from_le_bytes(len);
        if n_max == 0 || n_max > DEFAULT_HARD_CAP {
            return Err(invalid(format!("cached n_max = {n_max} is out of range")));
        }
        let mut packed = vec![0u8; (n_max as usize).div_ceil(4)];
        r.read_exact(&mut packed)?;
        let mut mu = Vec::with_capacity(n_max as usize + 1);
        mu.push(0i8);
        for i in 0..n_max as usize {
            mu.push(match (packed[i / 4] >> (2 * (i % 4))) & 3 {
                0 => 0,
                1 => 1,
                2 => -1,
                _ => return Err(invalid("invalid μ code in sieve cache")),
            });
        }
        Self::from_mu(mu)
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// μ(n) for `1 <= n <= n_max`. Panics outside that range.
    #[inline]
    pub fn mu(&self, n: u64) -> i8 {
        assert!(n >= 1 && n <= self.n_max, "n = {n} outside 1..={}", self.n_max);
        self.mu[n as usize]
    }

    /// μ values indexed by n (slot 0 is unused).
    pub fn mu_slice(&self) -> &[i8] {
        &self.mu
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    fn check(&self, n: u64, what: &str) -> Result<()> {
        if n > self.n_max {
            return Err(range(format!("{what} N = {n} exceeds table n_max = {}", self.n_max)));
        }
        Ok(())
    }

    /// Exact Mertens sum M(N).
    pub fn mertens(&self, n: u64) -> Result<i64> {
        self.check(n, "mertens")?;
        Ok(self.mu[1..=n as usize].iter().map(|&m| m as i64).sum())
    }

    /// Number of squarefree integers in `1..=N`.
    pub fn squarefree_count(&self, n: u64) -> Result<u64> {
        self.check(n, "squarefree count")?;
        Ok(self.mu[1..=n as usize].iter().filter(|&&m| m != 0).count() as u64)
    }

    /// `(N, M(N)/N)` for each checkpoint, in the order given.
    pub fn mertens_series(&self, checkpoints: &[u64]) -> Result<Vec<(u64, f64)>> {
        for &n in checkpoints {
            self.check(n, "checkpoint")?;
            if n == 0 {
                return Err(invalid("checkpoint N must be at least 1"));
            }
        }
        let top = checkpoints.iter().copied().max().unwrap_or(0) as usize;
        let mut prefix = Vec::with_capacity(top + 1);
        prefix.push(0i64);
        let mut acc = 0i64;
        for n in 1..=top {
            acc += self.mu[n] as i64;
            prefix.push(acc);
        }
        Ok(checkpoints
            .iter()
            .map(|&n| (n, prefix[n as usize] as f64 / n as f64))
            .collect())
    }

    /// `(1/N) Σ_{n<=N} |μ(n)|`.
    pub fn squarefree_density(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(invalid("N must be at least 1"));
        }
        Ok(self.squarefree_count(n)? as f64 / n as f64)
    }

    /// `(1/N) Σ_{n<=N} μ(n) f(n)` under the block-pairwise summation order.
    ///
    /// `f` is only called where μ(n) ≠ 0.
    pub fn weighted_average<F>(&self, n: u64, f: F) -> Result<Complex64>
    where
        F: Fn(u64) -> Complex64,
    {
        self.check(n, "weighted average")?;
        if n == 0 {
            return Err(invalid("N must be at least 1"));
        }
        let terms: Vec<Complex64> = (1..=n)
            .map(|k| match self.mu[k as usize] {
                0 => Complex64::new(0.0, 0.0),
                m => f(k) * m as f64,
            })
            .collect();
        Ok(block_prefix_sum(&terms) / n as f64)
    }

    /// `(1/N) Σ_{n<=N, n≡l (mod p)} μ(n) e(a_d n^d + ... + a_0)`.
    pub fn exp_sum(&self, phase: &PolynomialPhase, n: u64) -> Result<Complex64> {
        let p = phase.modulus;
        let l = phase.residue;
        self.weighted_average(n, |k| {
            if k % p == l {
                unit_phase(phase.reduced_value(k))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Real-valued `(1/N) Σ μ(n) g(n)` with pairwise summation; used where
    /// the caller wants a real result without complex rounding.
    pub fn weighted_average_real<F>(&self, n: u64, g: F) -> Result<f64>
    where
        F: Fn(u64) -> f64,
    {
        self.check(n, "weighted average")?;
        if n == 0 {
            return Err(invalid("N must be at least 1"));
        }
        let terms: Vec<f64> = (1..=n).map(|k| self.mu[k as usize] as f64 * g(k)).collect();
        Ok(pairwise_real(&terms) / n as f64)
    }
}

#[cfg(test)]
fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Real polynomial phase `a_d n^d + ... + a_0` restricted to `n ≡ l (mod p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPhase {
    coeffs: Vec<f64>,
    modulus: u64,
    residue: u64,
}

impl PolynomialPhase {
    /// `coeffs[j]` is the coefficient of `n^j`.
    pub fn new(coeffs: Vec<f64>, modulus: u64, residue: u64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("phase polynomial needs at least a constant term"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("phase coefficients must be finite"));
        }
        if modulus == 0 {
            return Err(invalid("modulus p must be at least 1"));
        }
        if residue >= modulus {
            return Err(invalid(format!("residue l = {residue} must lie in 0..{modulus}")));
        }
        Ok(Self {
            coeffs,
            modulus,
            residue,
        })
    }

    /// The linear phase `θ n` over all of ℕ.
    pub fn linear(theta: f64) -> Self {
        Self::new(vec![0.0, theta], 1, 0).expect("finite θ")
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Polynomial value at `n`, reduced mod 1 term by term.
    pub fn reduced_value(&self, n: u64) -> f64 {
        let mut wrapped: u64 = 1;
        let mut float: f64 = 1.0;
        let mut acc = 0.0f64;
        for (j, &a) in self.coeffs.iter().enumerate() {
            if j > 0 {
                wrapped = wrapped.wrapping_mul(n);
                float *= n as f64;
            }
            acc += frac_times_int(a, wrapped, float);
            if acc >= 1.0 {
                acc -= 1.0;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_mu(mut n: u64) -> i8 {
        let mut sign = 1i8;
        let mut d = 2;
        while d * d <= n {
            if n.is_multiple_of(d) {
                n /= d;
                if n.is_multiple_of(d) {
                    return 0;
                }
                sign = -sign;
            }
            d += 1;
        }
        if n > 1 {
            sign = -sign;
        }
        sign
    }

    #[test]
    fn small_values() {
        assert_eq!(MoebiusTable::build(30).unwrap().mu(30), -1);
        assert_eq!(MoebiusTable::build(12).unwrap().mu(12), 0);
        assert_eq!(MoebiusTable::build(1).unwrap().mu(1), 1);
    }

    #[test]
    fn zero_is_rejected() {
        assert!(matches!(MoebiusTable::build(0), Err(crate::Error::InvalidArgument(_))));
        assert!(MoebiusTable::build_with_cap(11, 10).is_err());
    }

    #[test]
    fn sieve_matches_trial_division() {
        let t = MoebiusTable::build(10_000).unwrap();
        for n in 1..=10_000 {
            assert_eq!(t.mu(n), trial_mu(n), "n = {n}");
        }
        let expected: Vec<u32> = (2..=10_000u32).filter(|&n| is_prime_trial(n as u64)).collect();
        assert_eq!(t.primes(), &expected[..]);
    }

    #[test]
    fn mertens_small_checkpoints() {
        let t = MoebiusTable::build(100).unwrap();
        let s = t.mertens_series(&[1, 2]).unwrap();
        assert_eq!(s, vec![(1, 1.0), (2, 0.0)]);
        assert!(matches!(t.mertens_series(&[101]), Err(crate::Error::Range(_))));
    }

    #[test]
    fn squarefree_small() {
        let t = MoebiusTable::build(100).unwrap();
        assert_eq!(t.squarefree_density(10).unwrap(), 0.7);
        assert_eq!(t.squarefree_density(1).unwrap(), 1.0);
        assert!(t.squarefree_density(0).is_err());
    }

    #[test]
    fn exp_sum_four_terms_at_half() {
        let t = MoebiusTable::build(10).unwrap();
        let v = t.exp_sum(&PolynomialPhase::linear(0.5), 4).unwrap();
        assert!((v.re + 0.25).abs() < 1e-15, "{v}");
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn exp_sum_at_zero_is_mertens() {
        let t = MoebiusTable::build(5000).unwrap();
        let v = t.exp_sum(&PolynomialPhase::linear(0.0), 5000).unwrap();
        assert_eq!(v.re, t.mertens(5000).unwrap() as f64 / 5000.0);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn phase_rejects_bad_residue() {
        assert!(PolynomialPhase::new(vec![0.0, 0.1], 3, 3).is_err());
        assert!(PolynomialPhase::new(vec![0.0, 0.1], 0, 0).is_err());
        assert!(PolynomialPhase::new(vec![], 1, 0).is_err());
    }

    #[test]
    fn frac_times_int_exact_cases() {
        assert_eq!(frac_times_int(0.5, 3, 3.0), 0.5);
        assert_eq!(frac_times_int(0.25, 6, 6.0), 0.5);
        assert_eq!(frac_times_int(-0.25, 1, 1.0), 0.75);
        assert_eq!(frac_times_int(3.0, 7, 7.0), 0.0);
        // 2^-70 · 2^70 mod 1 = 0 but m = 2^70 overflows; 2^-70 · 2^20 is tiny
        let tiny = frac_times_int(2f64.powi(-70), 1 << 20, (1u64 << 20) as f64);
        assert_eq!(tiny, 2f64.powi(-50));
    }

    #[test]
    fn reduced_value_matches_high_precision_quadratic() {
        // θ n² mod 1 for θ = 0.1234567 (as f64) at n = 999_983 computed with
        // exact integer arithmetic on the f64 mantissa.
        let theta = 0.1234567f64;
        let n: u64 = 999_983;
        let phase = PolynomialPhase::new(vec![0.0, 0.0, theta], 1, 0).unwrap();
        let bits = theta.to_bits();
        let mant = (bits & ((1 << 52) - 1)) | (1 << 52);
        let k = 1075 - ((bits >> 52) & 0x7ff) as u32;
        let prod = mant as u128 * (n as u128 * n as u128);
        let rem = prod % (1u128 << k);
        let expect = rem as f64 / (1u128 << k) as f64;
        assert!((phase.reduced_value(n) - expect).abs() < 1e-15);
    }

    #[test]
    fn cache_round_trip() {
        let t = MoebiusTable::build(10_003).unwrap();
        let mut bytes = Vec::new();
        t.write_cache(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"NCF1");
        assert_eq!(u64::from_le_bytes(bytes[4..12].try_into().unwrap()), 10_003);
        assert_eq!(bytes.len(), 12 + 10_003usize.div_ceil(4));
        // μ(1) = 1, μ(2) = −1, μ(3) = −1, μ(4) = 0 → codes 1, 2, 2, 0
        assert_eq!(bytes[12], 0b00_10_10_01);
        let back = MoebiusTable::read_cache(bytes.as_slice()).unwrap();
        assert_eq!(back.mu_slice(), t.mu_slice());
        assert_eq!(back.primes(), t.primes());
        bytes[0] = b'X';
        assert!(MoebiusTable::read_cache(bytes.as_slice()).is_err());
    }
}
