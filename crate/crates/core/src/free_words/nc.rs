use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use num_traits::{FromPrimitive, One, Zero};

use crate::error::{invalid, Result};

/// Largest `n` for which `NC(n)` is enumerated (`|NC(14)| = 2 674 440`).
pub const MAX_NC_ORDER: usize = 14;

/// Non-crossing partition of `{1, …, n}`, stored as a restricted growth
/// string: `labels[i]` is the block of element `i + 1`, blocks numbered in
/// order of their smallest element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NonCrossingPartition {
    labels: Vec<u8>,
}

impl NonCrossingPartition {
    /// Validates `blocks` (1-based elements) as a non-crossing partition of
    /// `{1, …, n}`.
    pub fn new(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut owner = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(invalid("partition blocks must be non-empty"));
            }
            for &x in block {
                if x == 0 || x > n || owner[x - 1] != usize::MAX {
                    return Err(invalid(format!("{x} is out of range or repeated")));
                }
                owner[x - 1] = b;
            }
        }
        if owner.contains(&usize::MAX) {
            return Err(invalid("blocks do not cover {1, …, n}"));
        }
        if !is_non_crossing(blocks) {
            return Err(invalid("blocks cross"));
        }
        // relabel by first occurrence
        let mut map = vec![u8::MAX; blocks.len()];
        let mut next = 0u8;
        let labels = owner
            .iter()
            .map(|&b| {
                if map[b] == u8::MAX {
                    map[b] = next;
                    next += 1;
                }
                map[b]
            })
            .collect();
        Ok(Self { labels })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0)
    }

    /// Blocks as ascending 1-based element lists, ordered by first element.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_blocks()];
        for (i, &l) in self.labels.iter().enumerate() {
            blocks[l as usize].push(i + 1);
        }
        blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_blocks()];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }
}

/// True when no `a < b < c < d` has `a, c` in one block and `b, d` in another.
pub fn is_non_crossing(blocks: &[Vec<usize>]) -> bool {
    for (i, p) in blocks.iter().enumerate() {
        for q in &blocks[i + 1..] {
            for &a in p {
                for &c in p {
                    if c <= a {
                        continue;
                    }
                    let inside = q.iter().any(|&x| a < x && x < c);
                    let outside = q.iter().any(|&x| x < a || x > c);
                    if inside && outside {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Calls `visit` with the block-label string of every partition in `NC(n)`,
/// in lexicographic order of the labels.
///
/// Adding element `i` to block `b` creates a crossing exactly when some
/// element between the current last element of `b` and `i` belongs to a
/// block that started before that last element.
pub fn for_each_nc_partition(n: usize, mut visit: impl FnMut(&[u8])) -> Result<()> {
    if n > MAX_NC_ORDER {
        return Err(invalid(format!("NC(n) is enumerated for n <= {MAX_NC_ORDER}, got {n}")));
    }
    if n == 0 {
        visit(&[]);
        return Ok(());
    }
    let mut labels = vec![0u8; n];
    let mut first = Vec::with_capacity(n);
    let mut last = Vec::with_capacity(n);
    first.push(0usize);
    last.push(0usize);
    extend(1, n, &mut labels, &mut first, &mut last, &mut visit);
    Ok(())
}

fn extend(
    i: usize,
    n: usize,
    labels: &mut [u8],
    first: &mut Vec<usize>,
    last: &mut Vec<usize>,
    visit: &mut impl FnMut(&[u8]),
) {
    if i == n {
        visit(labels);
        return;
    }
    for b in 0..first.len() {
        let lb = last[b];
        let blocked = (lb + 1..i).any(|j| first[labels[j] as usize] < lb);
        if blocked {
            continue;
        }
        labels[i] = b as u8;
        last[b] = i;
        extend(i + 1, n, labels, first, last, visit);
        last[b] = lb;
    }
    labels[i] = first.len() as u8;
    first.push(i);
    last.push(i);
    extend(i + 1, n, labels, first, last, visit);
    first.pop();
    last.pop();
}

/// All of `NC(n)`, in a fixed order.
pub fn nc_partitions(n: usize) -> Result<Vec<NonCrossingPartition>> {
    let mut out = Vec::new();
    for_each_nc_partition(n, |l| out.push(NonCrossingPartition { labels: l.to_vec() }))?;
    Ok(out)
}

/// Scalars for the moment–cumulant relation.
pub trait MomentScalar:
    Clone + Zero + One + FromPrimitive + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
}

impl<T> MomentScalar for T where
    T: Clone + Zero + One + FromPrimitive + Add<Output = T> + Sub<Output = T> + Mul<Output = T>
{
}

/// Free cumulants `κ₁…κ_n` and moments `m₁…m_n` (index 0 holds order 1),
/// related by `m_k = Σ_{π∈NC(k)} ∏_{V∈π} κ_{|V|}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantTable<T> {
    pub kappa: Vec<T>,
    pub moments: Vec<T>,
}

impl<T: MomentScalar> CumulantTable<T> {
    pub fn order(&self) -> usize {
        self.kappa.len()
    }

    pub fn kappa(&self, k: usize) -> &T {
        &self.kappa[k - 1]
    }

    pub fn moment(&self, k: usize) -> &T {
        &self.moments[k - 1]
    }
}

/// Block-size types of `NC(k)` with their multiplicities: each entry is a
/// sorted list of block sizes and the number of partitions of that type.
pub fn nc_block_types(k: usize) -> Result<Vec<(Vec<usize>, u64)>> {
    let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    let mut sizes = vec![0usize; k];
    for_each_nc_partition(k, |labels| {
        let blocks = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        sizes[..blocks].iter_mut().for_each(|s| *s = 0);
        for &l in labels {
            sizes[l as usize] += 1;
        }
        let mut key = sizes[..blocks].to_vec();
        key.sort_unstable();
        *counts.entry(key).or_insert(0) += 1;
    })?;
    Ok(counts.into_iter().collect())
}

// Σ over NC(k) of ∏ κ_{|V|}, skipping the one-block partition when asked.
// Partitions are grouped by type first so the scalar sum has few terms.
fn partition_sum<T: MomentScalar>(k: usize, kappa: &[T], skip_full: bool) -> Result<T> {
    let mut total = T::zero();
    for (sizes, count) in nc_block_types(k)? {
        if skip_full && sizes.len() == 1 {
            continue;
        }
        let product = sizes.iter().fold(T::one(), |acc, &s| acc * kappa[s - 1].clone());
        let count = T::from_u64(count).expect("partition counts are representable");
        total = total + count * product;
    }
    Ok(total)
}

/// Moments from cumulants by summing over `NC(k)`.
pub fn cumulants_to_moments<T: MomentScalar>(kappa: &[T]) -> Result<CumulantTable<T>> {
    let moments = (1..=kappa.len())
        .map(|k| partition_sum(k, kappa, false))
        .collect::<Result<Vec<_>>>()?;
    Ok(CumulantTable {
        kappa: kappa.to_vec(),
        moments,
    })
}

/// Cumulants from moments: `κ_k = m_k − Σ_{π∈NC(k), π≠1_k} ∏ κ_{|V|}`,
/// solved in increasing `k`.
pub fn moments_to_cumulants<T: MomentScalar>(moments: &[T]) -> Result<CumulantTable<T>> {
    if moments.len() > MAX_NC_ORDER {
        return Err(invalid(format!(
            "moment–cumulant conversion is limited to order {MAX_NC_ORDER}"
        )));
    }
    let mut kappa: Vec<T> = Vec::with_capacity(moments.len());
    for k in 1..=moments.len() {
        // the one-block partition is skipped, so κ_k itself is never read
        kappa.push(T::zero());
        let rest = partition_sum(k, &kappa, true)?;
        kappa[k - 1] = moments[k - 1].clone() - rest;
    }
    Ok(CumulantTable {
        kappa,
        moments: moments.to_vec(),
    })
}
