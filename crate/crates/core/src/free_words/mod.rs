//! Free group on `ℤ`-indexed generators: reduced words, the group algebra
//! with its canonical trace and shift, non-crossing partitions and the free
//! moment–cumulant relation, and the free central limit for sums of shifted
//! Haar unitaries.

mod clt;
mod nc;
mod words;

pub use clt::{
    arcsine_moments, bkn_coefficients, bkn_moment_norm, free_clt_moments, semicircle_moments, word_expansion_moments,
    BknEstimate, DEFAULT_WORD_BUDGET, MAX_CLT_ORDER,
};
pub use nc::{
    cumulants_to_moments, for_each_nc_partition, is_non_crossing, moments_to_cumulants, nc_block_types, nc_partitions,
    CumulantTable, MomentScalar, NonCrossingPartition, MAX_NC_ORDER,
};
pub use words::{free_shift_flow, shift, trace, Coefficient, FreeShiftFlow, GroupElementSum, ReducedWord};
