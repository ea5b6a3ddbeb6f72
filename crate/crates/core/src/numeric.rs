//! Order-independent reductions.
//!
//! Global sums over vertices go through [`canonical_sum`] so that a report does
//! not depend on how vertices happen to be labelled.

use alloc::vec::Vec;

/// Sums the values after sorting them, with Neumaier compensation.
///
/// The result is a function of the multiset of inputs only, so any permutation
/// of `values` gives a bit-identical answer.
pub fn canonical_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if num_traits::Float::abs(sum) >= num_traits::Float::abs(v) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Maximum of a sequence, `0.0` for an empty one.
pub fn sup(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}
