// SPDX-License-Identifier: Apache-2.0

//! Asymmetric focal loss for multi-label classification.
//!
//! Positives contribute `-(1 - p)^g+ * ln(p)`. Negatives are first shifted
//! by the probability margin, `p_m = max(p - m, 0)`, and contribute
//! `-(p_m)^g- * ln(1 - p_m)`, so negatives with `p <= m` cost nothing.

use crate::error::{Error, Result};
use crate::matrix::{LabelMatrix, ProbMatrix};
use crate::scalar::Scalar;

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` before logs.
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AslParams<T> {
    pub gamma_pos: T,
    pub gamma_neg: T,
    pub margin: T,
}

impl<T: Scalar> Default for AslParams<T> {
    /// `gamma+ = 1`, `gamma- = 4`, `m = 0.05`.
    fn default() -> Self {
        Self {
            gamma_pos: T::one(),
            gamma_neg: T::lit(4.0),
            margin: T::lit(0.05),
        }
    }
}

impl<T: Scalar> AslParams<T> {
    pub fn new(gamma_pos: T, gamma_neg: T, margin: T) -> Result<Self> {
        let p = Self {
            gamma_pos,
            gamma_neg,
            margin,
        };
        p.validate()?;
        Ok(p)
    }

    /// Margin-free variant with `gamma+ = 0`, `gamma- = 1`.
    pub fn simplified() -> Self {
        Self {
            gamma_pos: T::zero(),
            gamma_neg: T::one(),
            margin: T::zero(),
        }
    }

    /// Plain binary cross-entropy.
    pub fn binary_cross_entropy() -> Self {
        Self {
            gamma_pos: T::zero(),
            gamma_neg: T::zero(),
            margin: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_pos >= T::zero() && self.gamma_pos.is_finite()) {
            return Err(Error::Config(format!("gamma+ {} must be >= 0", self.gamma_pos)));
        }
        if !(self.gamma_neg >= T::zero() && self.gamma_neg.is_finite()) {
            return Err(Error::Config(format!("gamma- {} must be >= 0", self.gamma_neg)));
        }
        if !(self.margin >= T::zero() && self.margin < T::one()) {
            return Err(Error::Config(format!("margin {} outside [0, 1)", self.margin)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AslLoss<T> {
    pub total: T,
    pub per_element: ProbMatrix<T>,
}

fn clamp<T: Scalar>(p: T) -> T {
    let eps = T::lit(PROB_CLAMP);
    p.max(eps).min(T::one() - eps)
}

fn element_loss<T: Scalar>(p: T, positive: bool, params: &AslParams<T>) -> T {
    let p = clamp(p);
    if positive {
        -(T::one() - p).powf(params.gamma_pos) * p.ln()
    } else {
        let pm = (p - params.margin).max(T::zero());
        if pm == T::zero() {
            return T::zero();
        }
        -pm.powf(params.gamma_neg) * (T::one() - pm).ln()
    }
}

fn element_gradient<T: Scalar>(p: T, positive: bool, params: &AslParams<T>) -> T {
    let eps = T::lit(PROB_CLAMP);
    if p < eps || p > T::one() - eps {
        return T::zero();
    }
    let one = T::one();
    if positive {
        let g = params.gamma_pos;
        let focus = (one - p).powf(g);
        let focus_slope = if g == T::zero() {
            T::zero()
        } else {
            g * (one - p).powf(g - one)
        };
        focus_slope * p.ln() - focus / p
    } else {
        let q = p - params.margin;
        if q <= T::zero() {
            return T::zero();
        }
        let g = params.gamma_neg;
        let focus = q.powf(g);
        let focus_slope = if g == T::zero() {
            T::zero()
        } else {
            g * q.powf(g - one)
        };
        -focus_slope * (one - q).ln() + focus / (one - q)
    }
}

/// Summed loss plus the per-element contributions.
pub fn asl_loss<T: Scalar>(
    probs: &ProbMatrix<T>,
    labels: &LabelMatrix,
    params: &AslParams<T>,
) -> Result<AslLoss<T>> {
    labels.check_matches(probs)?;
    params.validate()?;
    let per_element = probs.map(|n, c, p| element_loss(p, labels.get(n, c), params));
    let total = per_element.data().iter().copied().sum();
    Ok(AslLoss { total, per_element })
}

/// Elementwise derivative of the loss with respect to each probability.
///
/// Zero in the discarded negative region `p <= m` (the kink itself included)
/// and outside the clamp range.
pub fn asl_gradient<T: Scalar>(
    probs: &ProbMatrix<T>,
    labels: &LabelMatrix,
    params: &AslParams<T>,
) -> Result<ProbMatrix<T>> {
    labels.check_matches(probs)?;
    params.validate()?;
    Ok(probs.map(|n, c, p| element_gradient(p, labels.get(n, c), params)))
}
