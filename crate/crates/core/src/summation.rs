//! Deterministic pairwise summation.
//!
//! Every Möbius-weighted average in the crate goes through [`BlockSums`]:
//! the index range `1..=N` is cut into fixed blocks of [`BLOCK_LEN`] terms,
//! each block is reduced by a pairwise tree, and a prefix sum is the
//! pairwise reduction of the completed block sums plus the pairwise sum of
//! the partial block. The tree depends only on `N`, never on how the work
//! was scheduled, so serial and multi-threaded runs agree bit for bit.

use num_complex::Complex64;

/// Number of terms per summation block.
pub const BLOCK_LEN: usize = 1024;

const LEAF: usize = 8;

/// Pairwise (cascade) sum with a fixed split at `len / 2`.
pub fn pairwise(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= LEAF {
        let mut acc = Complex64::new(0.0, 0.0);
        for x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise(&xs[..mid]) + pairwise(&xs[mid..])
}

/// Real-valued counterpart of [`pairwise`].
pub fn pairwise_real(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_real(&xs[..mid]) + pairwise_real(&xs[mid..])
}

/// Sum of `terms[0..len]` under the block-pairwise contract, where `terms`
/// holds the terms for `n = 1..=len` in order.
pub fn block_prefix_sum(terms: &[Complex64]) -> Complex64 {
    let full = terms.len() / BLOCK_LEN;
    let blocks: Vec<Complex64> = terms[..full * BLOCK_LEN].chunks(BLOCK_LEN).map(pairwise).collect();
    pairwise(&blocks) + pairwise(&terms[full * BLOCK_LEN..])
}

/// Completed block sums plus partial sums requested at checkpoints.
#[derive(Debug, Clone, Default)]
pub struct BlockSums {
    pub blocks: Vec<Complex64>,
}

impl BlockSums {
    /// Prefix sum up to `n` given the pairwise sum of the partial block that
    /// contains `n` (zero when `n` is a multiple of the block length).
    pub fn prefix(&self, n: u64, partial: Complex64) -> Complex64 {
        let full = (n as usize) / BLOCK_LEN;
        pairwise(&self.blocks[..full]) + partial
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<Complex64> = (0..5000).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let s = pairwise(&xs);
        assert_eq!(s.re, 4999.0 * 5000.0 / 2.0);
        assert_eq!(s.im, -4999.0 * 5000.0 / 2.0);
    }

    #[test]
    fn block_prefix_agrees_with_block_sums() {
        let xs: Vec<Complex64> = (1..=3000)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64).cos()))
            .collect();
        for &n in &[1usize, 1023, 1024, 1025, 2048, 3000] {
            let mut bs = BlockSums::default();
            for chunk in xs[..(n / BLOCK_LEN) * BLOCK_LEN].chunks(BLOCK_LEN) {
                bs.blocks.push(pairwise(chunk));
            }
            let partial = pairwise(&xs[(n / BLOCK_LEN) * BLOCK_LEN..n]);
            assert_eq!(bs.prefix(n as u64, partial), block_prefix_sum(&xs[..n]));
        }
    }
}
