//! Worst-case query budget of binary search tolerating `C` lies:
//! the least `Q'` with `2^(Q' - C) > n * sum_{i <= C} binom(Q' - C, i)`.

use num_bigint::BigUint;
use num_traits::One;

/// `sum_{i=0}^{c} binom(m, i)`, multiplicative formula.
fn binomial_prefix_sum(m: u64, c: u64) -> BigUint {
    let mut term = BigUint::one();
    let mut sum = BigUint::one();
    for i in 1..=c.min(m) {
        term = term * (m - i + 1) / i;
        sum += &term;
    }
    sum
}

fn satisfied(n: u64, c: u64, m: u64) -> bool {
    (BigUint::one() << m) > binomial_prefix_sum(m, c) * n
}

/// Smallest `Q'` satisfying the counting inequality.
///
/// With `m = Q' - C` the predicate is monotone in `m`: false while `m <= C`
/// (the prefix sum is all of `2^m`), and `2^m / sum` never decreases after,
/// so galloping followed by bisection finds the threshold.
pub fn rivest_query_budget(n: u64, c: u64) -> u64 {
    assert!(n >= 2, "need at least two candidates");
    let mut lo = c; // predicate false here
    let mut hi = c.max(1);
    while !satisfied(n, c, hi) {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if satisfied(n, c, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi + c
}

/// `C + ceil(16 (ceil(log2 n) + C))`, the explicit choice that satisfies the
/// inequality and so caps [`rivest_query_budget`].
pub fn coarse_query_bound(n: u64, c: u64) -> u64 {
    assert!(n >= 2);
    let log_n = 64 - (n - 1).leading_zeros() as u64;
    c + 16 * (log_n + c)
}
