// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Otsu threshold over a `bins`-bin histogram spanning `[min, max]`.
///
/// The returned value is the bin edge `min + k * (max - min) / bins` whose
/// split (bins `< k` against bins `>= k`) maximizes the between-class
/// variance. Candidates are compared exactly in integer arithmetic, and the
/// lowest edge wins a tie.
pub fn otsu_threshold<T: Scalar>(values: &[T], bins: usize) -> Result<T> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if bins < 2 {
        return Err(Error::Config(format!("otsu needs at least 2 bins, got {bins}")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidValue("non-finite value in otsu input".into()));
    }
    let (min, max) = min_max(values);
    if !(max > min) {
        return Err(Error::NoSeparation);
    }

    let histogram = histogram(values, bins, min, max);
    let total_count: u128 = histogram.iter().map(|&c| u128::from(c)).sum();
    let total_level_sum: u128 = histogram
        .iter()
        .enumerate()
        .map(|(i, &c)| i as u128 * u128::from(c))
        .sum();

    // Between-class variance for a split with n0 / n1 samples and level sums
    // s0 / s1 is proportional to (s0 * n1 - s1 * n0)^2 / (n0 * n1).
    let mut best: Option<(usize, u128, u128)> = None;
    let (mut n0, mut s0) = (0u128, 0u128);
    for k in 1..bins {
        n0 += u128::from(histogram[k - 1]);
        s0 += (k as u128 - 1) * u128::from(histogram[k - 1]);
        let n1 = total_count - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let s1 = total_level_sum - s0;
        let (a, b) = (s0 * n1, s1 * n0);
        let spread = a.abs_diff(b);
        let den = n0 * n1;
        let better = match best {
            None => true,
            Some((_, best_spread, best_den)) => {
                compare_ratio(spread, den, best_spread, best_den) == Ordering::Greater
            }
        };
        if better {
            best = Some((k, spread, den));
        }
    }

    // Both end bins are occupied (they hold min and max), so k = 1 is always
    // a valid split.
    let (k, _, _) = best.expect("at least one two-sided split");
    let width = (max - min) / T::from_count(bins);
    Ok(min + T::from_count(k) * width)
}

fn min_max<T: Scalar>(values: &[T]) -> (T, T) {
    values
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Bin index of `v` in a `bins`-bin histogram over `[min, max]`; the top
/// edge folds into the last bin.
pub(crate) fn bin_index<T: Scalar>(v: T, bins: usize, min: T, max: T) -> usize {
    let pos = (v - min) / (max - min) * T::from_count(bins);
    pos.floor().to_usize().unwrap_or(0).min(bins - 1)
}

fn histogram<T: Scalar>(values: &[T], bins: usize, min: T, max: T) -> Vec<u64> {
    let mut h = vec![0u64; bins];
    for &v in values {
        h[bin_index(v, bins, min, max)] += 1;
    }
    h
}

/// Compares `a_spread^2 / a_den` against `b_spread^2 / b_den` exactly.
fn compare_ratio(a_spread: u128, a_den: u128, b_spread: u128, b_den: u128) -> Ordering {
    let fast = a_spread
        .checked_mul(a_spread)
        .and_then(|sq| sq.checked_mul(b_den))
        .zip(
            b_spread
                .checked_mul(b_spread)
                .and_then(|sq| sq.checked_mul(a_den)),
        );
    match fast {
        Some((lhs, rhs)) => lhs.cmp(&rhs),
        None => {
            let lhs = BigUint::from(a_spread).pow(2) * BigUint::from(b_den);
            let rhs = BigUint::from(b_spread).pow(2) * BigUint::from(a_den);
            lhs.cmp(&rhs)
        }
    }
}
