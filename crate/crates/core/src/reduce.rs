//! Deterministic summation.
//!
//! Every expectation in the crate is reduced through [`tree_sum`]: terms are
//! combined along a fixed binary tree whose shape depends only on the number
//! of terms. Subtrees above [`PAR_THRESHOLD`] are evaluated with
//! `rayon::join`, which changes scheduling but never the association order,
//! so results are bit-identical for every thread count.

/// Leaves below this length are summed left to right.
const LEAF: usize = 16;
/// Subtrees at least this long are split across the rayon pool.
const PAR_THRESHOLD: usize = 1 << 14;

/// Pairwise sum of `term(0) + ... + term(n - 1)`.
pub fn tree_sum<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    sum_range(0, n, &term)
}

fn sum_range<F>(lo: usize, hi: usize, term: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let len = hi - lo;
    if len <= LEAF {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += term(i);
        }
        return acc;
    }
    let mid = lo + len / 2;
    if len >= PAR_THRESHOLD {
        let (a, b) = rayon::join(|| sum_range(lo, mid, term), || sum_range(mid, hi, term));
        a + b
    } else {
        sum_range(lo, mid, term) + sum_range(mid, hi, term)
    }
}

/// Pairwise sum of a materialized slice, same tree as [`tree_sum`].
pub fn slice_sum(values: &[f64]) -> f64 {
    tree_sum(values.len(), |i| values[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sums_are_exact() {
        assert_eq!(tree_sum(0, |_| 1.0), 0.0);
        assert_eq!(tree_sum(5, |i| i as f64), 10.0);
        assert_eq!(slice_sum(&[0.5, 0.25, 0.25]), 1.0);
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let n = 100_003;
        let term = |i: usize| ((i as f64) * 0.7).sin() / (1.0 + i as f64);
        let reference = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| tree_sum(n, term));
        for threads in [2, 4, 8] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let got = pool.install(|| tree_sum(n, term));
            assert_eq!(got.to_bits(), reference.to_bits());
        }
    }
}
