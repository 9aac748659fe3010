//! Order-fixed reductions.
//!
//! Every norm and energy in the crate is reduced through [`pairwise_sum`], so a
//! given input always produces the same bits regardless of how the values were
//! computed. [`exact_sum`] is used where cancellation has to be exact.

use alloc::vec::Vec;

const LEAF: usize = 16;

/// Pairwise (tree) summation with a fixed split point.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Correctly rounded sum of finite values (Shewchuk's partials algorithm).
///
/// The running partials are non-overlapping and represent the exact sum, so
/// a multiset of terms that cancels exactly sums to exactly zero.
pub fn exact_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in xs {
        let mut kept = 0;
        for i in 0..partials.len() {
            let mut y = partials[i];
            if libm::fabs(x) < libm::fabs(y) {
                core::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        partials.truncate(kept);
        partials.push(x);
    }

    // Round the partials, most significant first.
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    // Half-way correction.
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn exact_sum_cancels() {
        let xs = vec![1e100, 1.0, -1e100, 1e-30, -1.0, -1e-30];
        assert_eq!(exact_sum(xs), 0.0);
        assert_eq!(exact_sum(vec![0.1; 10]), 1.0);
        assert_eq!(exact_sum(vec![1.0, 1e-16, 1e-16]), 1.0000000000000002);
    }
}
