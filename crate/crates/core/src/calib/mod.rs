// SPDX-License-Identifier: Apache-2.0

//! Multi-label probability calibration and loss kernels.

mod asl;
mod shift;

pub use asl::{asl_gradient, asl_loss, AslLoss, AslParams, PROB_CLAMP};
pub use shift::{fit_logit_shift, LogitShiftFit};

use crate::error::{Error, Result};
use crate::matrix::{LogitMatrix, ProbMatrix};
use crate::numeric::sigmoid;
use crate::scalar::Scalar;

/// Per-class additive logit offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable<T> {
    shifts: Vec<T>,
}

impl<T: Scalar> CalibrationTable<T> {
    pub fn new(shifts: Vec<T>) -> Result<Self> {
        if let Some(c) = shifts.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidValue(format!("shift for class {c} is not finite")));
        }
        Ok(Self { shifts })
    }

    pub fn zeros(classes: usize) -> Self {
        Self {
            shifts: vec![T::zero(); classes],
        }
    }

    pub fn shifts(&self) -> &[T] {
        &self.shifts
    }

    pub fn classes(&self) -> usize {
        self.shifts.len()
    }
}

/// `out[k] = probs[k] > threshold`
pub fn cast_presence<T: Scalar>(probs: &[T], threshold: T) -> Vec<bool> {
    probs.iter().map(|&p| p > threshold).collect()
}

/// Confusion counts of a binary prediction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BinaryCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl BinaryCounts {
    pub fn from_pairs(pred: &[bool], truth: &[bool]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::Shape(format!(
                "{} predictions against {} labels",
                pred.len(),
                truth.len()
            )));
        }
        let mut c = Self::default();
        for (&p, &t) in pred.iter().zip(truth) {
            match (p, t) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => {}
            }
        }
        Ok(c)
    }

    /// `2 tp / (2 tp + fp + fn)`, or 1 when there is nothing to find and
    /// nothing was predicted.
    pub fn f1<T: Scalar>(&self) -> T {
        let den = 2 * self.tp + self.fp + self.fn_;
        if den == 0 {
            T::one()
        } else {
            T::from_count(2 * self.tp) / T::from_count(den)
        }
    }
}

pub fn f1_binary<T: Scalar>(pred: &[bool], truth: &[bool]) -> Result<T> {
    Ok(BinaryCounts::from_pairs(pred, truth)?.f1())
}

/// `p[n][c] = sigmoid(logit[n][c] + shift[c])`
pub fn apply_calibration<T: Scalar>(
    logits: &LogitMatrix<T>,
    table: &CalibrationTable<T>,
) -> Result<ProbMatrix<T>> {
    if logits.classes() != table.classes() {
        return Err(Error::Shape(format!(
            "{} logit classes against {} shifts",
            logits.classes(),
            table.classes()
        )));
    }
    Ok(logits.map(|_, c, v| sigmoid(v + table.shifts[c])))
}

/// Elementwise mean of equally shaped probability matrices.
pub fn ensemble_mean<T: Scalar>(mats: &[ProbMatrix<T>]) -> Result<ProbMatrix<T>> {
    let first = mats.first().ok_or(Error::EmptyInput)?;
    if let Some(bad) = mats.iter().find(|m| !m.same_shape(first)) {
        return Err(Error::Shape(format!(
            "matrix {}x{} differs from {}x{}",
            bad.samples(),
            bad.classes(),
            first.samples(),
            first.classes()
        )));
    }
    let n = T::from_count(mats.len());
    let mut sum = first.data().to_vec();
    for m in &mats[1..] {
        for (acc, &v) in sum.iter_mut().zip(m.data()) {
            *acc = *acc + v;
        }
    }
    ProbMatrix::new(
        first.samples(),
        first.classes(),
        sum.into_iter().map(|v| v / n).collect(),
    )
}

/// Median-frequency class weights, `w[c] = median(f) / f[c]`.
pub fn median_freq_weights<T: Scalar>(frequencies: &[T]) -> Result<Vec<T>> {
    if frequencies.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(c) = frequencies
        .iter()
        .position(|&f| !(f > T::zero() && f.is_finite()))
    {
        return Err(Error::DegenerateClass(c));
    }
    let mut sorted = frequencies.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / T::lit(2.0)
    };
    Ok(frequencies.iter().map(|&f| median / f).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cast_is_strict() {
        assert_eq!(cast_presence(&[0.6, 0.4, 0.5], 0.5), vec![true, false, false]);
        assert_eq!(cast_presence(&[0.0; 3], 0.5), vec![false; 3]);
    }

    #[test]
    fn f1_examples() {
        let t = [true, false, true, false];
        assert_eq!(f1_binary::<f64>(&t, &t).unwrap(), 1.0);
        assert_eq!(f1_binary::<f64>(&[false; 4], &t).unwrap(), 0.0);
        // tp = 1, fp = 1, fn = 1
        let f = f1_binary::<f64>(&[true, true, false], &[true, false, true]).unwrap();
        assert_eq!(f, 0.5);
        assert_eq!(f1_binary::<f64>(&[false; 3], &[false; 3]).unwrap(), 1.0);
        assert!(matches!(f1_binary::<f64>(&[true], &[]), Err(Error::Shape(_))));
    }

    #[test]
    fn calibration_examples() {
        let logits = LogitMatrix::new(1, 1, vec![0.0f64]).unwrap();
        let table = CalibrationTable::new(vec![3.0f64.ln()]).unwrap();
        let p = apply_calibration(&logits, &table).unwrap();
        assert!((p.get(0, 0) - 0.75).abs() < 1e-15);
        let plain = apply_calibration(&logits, &CalibrationTable::zeros(1)).unwrap();
        assert_eq!(plain.get(0, 0), 0.5);
        assert!(apply_calibration(&logits, &CalibrationTable::zeros(2)).is_err());
        assert!(CalibrationTable::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn ensemble_examples() {
        let p = ProbMatrix::new(2, 2, vec![0.1f64, 0.7, 0.25, 1.0]).unwrap();
        assert_eq!(ensemble_mean(&[p.clone(), p.clone()]).unwrap(), p);
        let q = p.map(|_, _, v| 1.0 - v);
        let m = ensemble_mean(&[p.clone(), q]).unwrap();
        assert!(m.data().iter().all(|&v| v == 0.5));
        assert_eq!(ensemble_mean::<f64>(&[]), Err(Error::EmptyInput));
        let r = ProbMatrix::new(1, 2, vec![0.0f64, 0.0]).unwrap();
        assert!(matches!(ensemble_mean(&[p, r]), Err(Error::Shape(_))));
    }

    #[test]
    fn median_weights() {
        assert_eq!(
            median_freq_weights(&[10.0f64, 20.0, 40.0]).unwrap(),
            vec![2.0, 1.0, 0.5]
        );
        assert_eq!(median_freq_weights(&[5.0f64; 4]).unwrap(), vec![1.0; 4]);
        assert_eq!(median_freq_weights(&[4.0f64, 2.0]).unwrap(), vec![0.75, 1.5]);
        assert_eq!(
            median_freq_weights(&[1.0f64, 0.0]),
            Err(Error::DegenerateClass(1))
        );
        assert_eq!(median_freq_weights::<f64>(&[]), Err(Error::EmptyInput));
    }

    proptest! {
        #[test]
        fn cast_matches_elementwise(probs in prop::collection::vec(0.0f64..=1.0, 0..40), t in 0.0f64..1.0) {
            let out = cast_presence(&probs, t);
            for (i, &p) in probs.iter().enumerate() {
                prop_assert_eq!(out[i], p > t);
            }
        }

        #[test]
        fn median_class_has_unit_weight(f in prop::collection::vec(1.0f64..1e3, 1..8), scale in 0.01f64..100.0) {
            let mut f = f;
            if f.len() % 2 == 0 { f.pop(); }
            if f.is_empty() { return Ok(()); }
            let w = median_freq_weights(&f).unwrap();
            let mut sorted = f.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median_idx = f.iter().position(|&v| v == sorted[f.len() / 2]).unwrap();
            prop_assert_eq!(w[median_idx], 1.0);
            let scaled: Vec<f64> = f.iter().map(|v| v * scale).collect();
            let ws = median_freq_weights(&scaled).unwrap();
            for (a, b) in w.iter().zip(&ws) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }

        #[test]
        fn calibration_preserves_ranking(
            logits in prop::collection::vec(-8.0f64..8.0, 2..30),
            shift in -10.0f64..10.0,
        ) {
            let m = LogitMatrix::new(logits.len(), 1, logits.clone()).unwrap();
            let p = apply_calibration(&m, &CalibrationTable::new(vec![shift]).unwrap()).unwrap();
            for i in 0..logits.len() {
                for j in 0..logits.len() {
                    if logits[i] < logits[j] {
                        prop_assert!(p.get(i, 0) <= p.get(j, 0));
                    }
                }
            }
        }

        #[test]
        fn ensemble_stays_in_unit_interval(
            a in prop::collection::vec(0.0f64..=1.0, 6),
            b in prop::collection::vec(0.0f64..=1.0, 6),
            c in prop::collection::vec(0.0f64..=1.0, 6),
        ) {
            let mats: Vec<_> = [a, b, c].into_iter().map(|v| ProbMatrix::new(2, 3, v).unwrap()).collect();
            let m = ensemble_mean(&mats).unwrap();
            for (i, &v) in m.data().iter().enumerate() {
                prop_assert!((0.0..=1.0).contains(&v));
                let oracle = (mats[0].data()[i] + mats[1].data()[i] + mats[2].data()[i]) / 3.0;
                prop_assert_eq!(v, oracle);
            }
        }
    }
}
