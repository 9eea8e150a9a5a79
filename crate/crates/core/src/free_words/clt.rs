use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::nc::{cumulants_to_moments, moments_to_cumulants};
use super::words::{GroupElementSum, ReducedWord};
use crate::error::{invalid, Error, Result};
use crate::moebius::MoebiusTable;

/// Largest moment order handled by the central-limit routines.
pub const MAX_CLT_ORDER: usize = 12;

/// Default cap on the number of word products an exact expansion may form.
pub const DEFAULT_WORD_BUDGET: u128 = 50_000_000;

fn binomial(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Moments of `(u + u*)/2` for a Haar unitary `u`: `m_{2k} = C(2k, k)/4^k`,
/// odd moments zero.
pub fn arcsine_moments(p_max: usize) -> Vec<BigRational> {
    (1..=p_max)
        .map(|p| {
            if p % 2 == 1 {
                BigRational::zero()
            } else {
                let k = p as u64 / 2;
                BigRational::new(binomial(2 * k, k), BigInt::from(4).pow(k as u32))
            }
        })
        .collect()
}

/// Moments of the centred semicircle with variance `σ²`:
/// `m_{2k} = Catalan_k σ^{2k}`.
pub fn semicircle_moments(variance: &BigRational, p_max: usize) -> Vec<BigRational> {
    (1..=p_max)
        .map(|p| {
            if p % 2 == 1 {
                BigRational::zero()
            } else {
                let k = p as u64 / 2;
                let catalan = binomial(2 * k, k) / (k + 1);
                BigRational::from_integer(catalan) * variance.pow(k as i32)
            }
        })
        .collect()
}

fn check_order(p_max: usize) -> Result<()> {
    if p_max == 0 || p_max > MAX_CLT_ORDER {
        return Err(invalid(format!(
            "moment order must lie in 1..={MAX_CLT_ORDER}, got {p_max}"
        )));
    }
    Ok(())
}

/// Moments `m₁…m_{p_max}` of `s_q = (x₁ + ⋯ + x_q)/√q` for free copies `x_i`
/// of `(u + u*)/2`, through cumulants: `κ_n(s_q) = q^{1−n/2} κ_n(x)`.
///
/// Odd cumulants of `x` vanish, so every scaling factor is rational and the
/// result is exact.
pub fn free_clt_moments(q: u64, p_max: usize) -> Result<Vec<BigRational>> {
    check_order(p_max)?;
    if q == 0 {
        return Err(invalid("q must be positive"));
    }
    let x = moments_to_cumulants(&arcsine_moments(p_max))?;
    let mut kappa = Vec::with_capacity(p_max);
    for (i, k) in x.kappa.iter().enumerate() {
        let n = i + 1;
        if n % 2 == 1 {
            if !k.is_zero() {
                return Err(Error::Numerical(format!("odd cumulant κ_{n} = {k} is nonzero")));
            }
            kappa.push(BigRational::zero());
        } else {
            let scale = BigRational::new(BigInt::one(), BigInt::from(q).pow(n as u32 / 2 - 1));
            kappa.push(k * scale);
        }
    }
    Ok(cumulants_to_moments(&kappa)?.moments)
}

/// The same moments by brute force: `τ(s_q^p)` is `2^{−p} q^{−p/2}` times the
/// number of length-`p` words in `g₁^{±1}, …, g_q^{±1}` that reduce to `e`.
/// Odd orders have no closed words.
pub fn word_expansion_moments(q: u64, p_max: usize, budget: u128) -> Result<Vec<BigRational>> {
    check_order(p_max)?;
    if q == 0 {
        return Err(invalid("q must be positive"));
    }
    let letters = 2 * q as u128;
    let estimate: u128 = (1..=p_max as u32).map(|p| letters.pow(p)).sum();
    if estimate > budget {
        return Err(Error::Budget {
            what: format!("word expansion for q = {q}, p <= {p_max}"),
            estimate,
            limit: budget,
        });
    }
    (1..=p_max)
        .map(|p| {
            if p % 2 == 1 {
                return Ok(BigRational::zero());
            }
            let closed = count_closed_words(q as i64, p);
            let denom = BigInt::from(2).pow(p as u32) * BigInt::from(q).pow(p as u32 / 2);
            Ok(BigRational::new(BigInt::from(closed), denom))
        })
        .collect()
}

// depth-first over all (2q)^p letter sequences with an incremental
// reduction stack
fn count_closed_words(q: i64, p: usize) -> u64 {
    fn walk(stack: &mut Vec<(i64, i8)>, q: i64, left: usize) -> u64 {
        if left == 0 {
            return stack.is_empty() as u64;
        }
        // a word that cannot shrink back to e in time contributes nothing
        if stack.len() > left {
            return 0;
        }
        let mut total = 0;
        for g in 1..=q {
            for e in [1i8, -1] {
                let cancels = stack.last() == Some(&(g, -e));
                if cancels {
                    let top = stack.pop().unwrap();
                    total += walk(stack, q, left - 1);
                    stack.push(top);
                } else {
                    stack.push((g, e));
                    total += walk(stack, q, left - 1);
                    stack.pop();
                }
            }
        }
        total
    }
    walk(&mut Vec::with_capacity(p), q, p)
}

/// `μ(j(2l+1) + k)` for `j = 0, …, q−1`.
pub fn bkn_coefficients(table: &MoebiusTable, l: u64, k: u64, q: u64) -> Result<Vec<i64>> {
    let step = 2 * l + 1;
    if k == 0 {
        return Err(invalid("offset k must be at least 1"));
    }
    let top = (q.saturating_sub(1)) * step + k;
    if top > table.n_max() {
        return Err(crate::error::range(format!(
            "index {top} exceeds table n_max = {}",
            table.n_max()
        )));
    }
    Ok((0..q).map(|j| table.mu(j * step + k) as i64).collect())
}

/// Exact `p`-th trace moment of `B/q` with
/// `B = Σ_j c_j α^{j(2l+1)+k}(g_m̂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BknEstimate {
    pub q: u64,
    pub p: u32,
    pub coefficients: Vec<i64>,
    /// `τ((B*B)^{p/2})`, exact.
    pub trace_power: BigRational,
    /// `τ((B*B/q²)^{p/2})`.
    pub normalized_moment: BigRational,
    /// `τ((B*B/q²)^{p/2})^{1/p}`; a lower bound for `‖B/q‖`.
    pub norm_estimate: f64,
}

/// `p`-norm proxy for `‖B/q‖` by exact expansion in the group algebra.
///
/// The generators of `g_m̂` must lie in `[−l, l]`, so consecutive translates
/// by `2l+1` use disjoint generators and are free.
pub fn bkn_moment_norm(
    l: u64,
    word: &ReducedWord,
    k: u64,
    coefficients: &[i64],
    p: u32,
    budget: u128,
) -> Result<BknEstimate> {
    if p == 0 || p % 2 == 1 {
        return Err(invalid(format!("order p must be even and positive, got {p}")));
    }
    if coefficients.is_empty() {
        return Err(invalid("at least one summand is required"));
    }
    if word.max_abs_index() > l {
        return Err(invalid(format!("word {word} uses generators outside [−{l}, {l}]")));
    }
    let q = coefficients.len() as u64;
    let support = coefficients.iter().filter(|c| **c != 0).count() as u128;
    // products formed in (B*B)^{p/2}, times the letters reduced per product
    let estimate = support
        .saturating_pow(p)
        .saturating_mul((p as u128) * (word.len() as u128).max(1));
    if estimate > budget {
        return Err(Error::Budget {
            what: format!("B expansion with q = {q}, |m̂| = {}, p = {p}", word.len()),
            estimate,
            limit: budget,
        });
    }
    let step = (2 * l + 1) as i64;
    let b = GroupElementSum::from_terms(coefficients.iter().enumerate().map(|(j, &c)| {
        (
            word.shift(j as i64 * step + k as i64),
            BigRational::from_integer(c.into()),
        )
    }));
    let bb = &b.adjoint() * &b;
    let trace_power = bb.pow(p / 2).trace();
    let normalized_moment = &trace_power / BigRational::from_integer(BigInt::from(q).pow(p));
    let norm_estimate = if normalized_moment.is_positive() {
        normalized_moment.to_f64().unwrap_or(f64::NAN).powf(1.0 / p as f64)
    } else {
        0.0
    };
    Ok(BknEstimate {
        q,
        p,
        coefficients: coefficients.to_vec(),
        trace_power,
        normalized_moment,
        norm_estimate,
    })
}
