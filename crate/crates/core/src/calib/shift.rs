// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;

use super::{BinaryCounts, CalibrationTable};
use crate::error::Result;
use crate::matrix::{LabelMatrix, LogitMatrix};
use crate::numeric::sigmoid;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LogitShiftFit<T> {
    pub table: CalibrationTable<T>,
    /// Best per-class F1 reachable by any probability threshold.
    pub best_f1: Vec<T>,
    /// Classes without a single positive label; their shift is left at 0.
    pub classes_without_positives: Vec<usize>,
}

/// Fits one logit offset per class so that casting `sigmoid(logit + shift)`
/// at 0.5 gives the best F1 any probability threshold could reach.
///
/// Every distinct probability split is scored, which is exhaustive because
/// F1 is constant between consecutive distinct probabilities. When the
/// unshifted 0.5 cut is already optimal the shift is 0; otherwise the
/// optimal split nearest to logit 0 is used and the shift lands halfway
/// between the two logits on either side of it.
pub fn fit_logit_shift<T: Scalar>(logits: &LogitMatrix<T>, labels: &LabelMatrix) -> Result<LogitShiftFit<T>> {
    labels.check_matches(logits)?;
    let classes = logits.classes();
    let mut shifts = Vec::with_capacity(classes);
    let mut best_f1 = Vec::with_capacity(classes);
    let mut without_positives = Vec::new();
    for c in 0..classes {
        let column = logits.column(c);
        let truth = labels.column(c);
        if !truth.iter().any(|&t| t) {
            without_positives.push(c);
            shifts.push(T::zero());
            best_f1.push(BinaryCounts::from_pairs(&vec![false; truth.len()], &truth)?.f1());
            continue;
        }
        let (shift, f1) = fit_class(&column, &truth);
        shifts.push(shift);
        best_f1.push(f1);
    }
    Ok(LogitShiftFit {
        table: CalibrationTable::new(shifts)?,
        best_f1,
        classes_without_positives: without_positives,
    })
}

struct Split<T> {
    counts: BinaryCounts,
    /// Largest logit predicted negative.
    below: Option<T>,
    /// Smallest logit predicted positive.
    above: Option<T>,
}

fn fit_class<T: Scalar>(logits: &[T], truth: &[bool]) -> (T, T) {
    let mut order: Vec<usize> = (0..logits.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (sigmoid(logits[a]), sigmoid(logits[b]));
        pa.partial_cmp(&pb)
            .unwrap_or(Ordering::Equal)
            .then(logits[a].partial_cmp(&logits[b]).unwrap_or(Ordering::Equal))
    });
    let positives = truth.iter().filter(|&&t| t).count();
    let negatives = truth.len() - positives;

    // Walk the split point upward from "everything positive", stopping only
    // between distinct probabilities.
    let mut splits = Vec::new();
    let mut counts = BinaryCounts {
        tp: positives,
        fp: negatives,
        fn_: 0,
    };
    let mut i = 0;
    splits.push(Split {
        counts,
        below: None,
        above: order.first().map(|&k| logits[k]),
    });
    while i < order.len() {
        let p = sigmoid(logits[order[i]]);
        let mut j = i;
        while j < order.len() && sigmoid(logits[order[j]]) == p {
            if truth[order[j]] {
                counts.tp -= 1;
                counts.fn_ += 1;
            } else {
                counts.fp -= 1;
            }
            j += 1;
        }
        splits.push(Split {
            counts,
            below: Some(logits[order[j - 1]]),
            above: order.get(j).map(|&k| logits[k]),
        });
        i = j;
    }

    let best = splits
        .iter()
        .max_by(|a, b| compare_f1(&a.counts, &b.counts))
        .map(|s| s.counts)
        .expect("at least one split");

    let plain: Vec<bool> = logits.iter().map(|&l| sigmoid(l) > T::lit(0.5)).collect();
    let plain_counts = BinaryCounts::from_pairs(&plain, truth).expect("equal lengths");
    if compare_f1(&plain_counts, &best) == Ordering::Equal {
        return (T::zero(), best.f1());
    }

    let chosen = splits
        .iter()
        .filter(|s| compare_f1(&s.counts, &best) == Ordering::Equal)
        .min_by(|a, b| {
            let (ma, mb) = (split_center(a).abs(), split_center(b).abs());
            ma.partial_cmp(&mb).unwrap_or(Ordering::Equal)
        })
        .expect("best split exists");
    (separating_shift(chosen.below, chosen.above), best.f1())
}

/// Exact comparison of `2a/(2a+b)` style F1 ratios.
fn compare_f1(a: &BinaryCounts, b: &BinaryCounts) -> Ordering {
    let (na, da) = (2 * a.tp as u128, (2 * a.tp + a.fp + a.fn_) as u128);
    let (nb, db) = (2 * b.tp as u128, (2 * b.tp + b.fp + b.fn_) as u128);
    match (da, db) {
        (0, 0) => Ordering::Equal,
        (0, _) => (db).cmp(&nb),
        (_, 0) => na.cmp(&da),
        _ => (na * db).cmp(&(nb * da)),
    }
}

fn split_center<T: Scalar>(s: &Split<T>) -> T {
    match (s.below, s.above) {
        (Some(lo), Some(hi)) => lo / T::lit(2.0) + hi / T::lit(2.0),
        (None, Some(hi)) => hi - T::one(),
        (Some(lo), None) => lo + T::one(),
        (None, None) => T::zero(),
    }
}

/// A shift placing every logit `<= below` at or under probability 0.5 and
/// every logit `>= above` strictly over it.
fn separating_shift<T: Scalar>(below: Option<T>, above: Option<T>) -> T {
    let half = T::lit(0.5);
    let ok = |d: T| {
        below.is_none_or(|lo| !(sigmoid(lo + d) > half)) && above.is_none_or(|hi| sigmoid(hi + d) > half)
    };
    let center = split_center(&Split {
        counts: BinaryCounts::default(),
        below,
        above,
    });
    let guess = -center;
    if ok(guess) {
        return guess;
    }
    // Logits closer together than rounding allows at the midpoint: bisect
    // inside [-above, -below] for a shift that still separates them.
    if let (Some(lo), Some(hi)) = (below, above) {
        let (mut a, mut b) = (-hi, -lo);
        for _ in 0..200 {
            let mid = a / T::lit(2.0) + b / T::lit(2.0);
            if ok(mid) {
                return mid;
            }
            if sigmoid(hi + mid) > half {
                b = mid;
            } else {
                a = mid;
            }
        }
        if ok(-lo) {
            return -lo;
        }
    }
    guess
}
