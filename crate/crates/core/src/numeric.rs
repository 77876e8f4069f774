// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Logistic function, evaluated without overflow for large `|x|`.
#[inline]
pub fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Inverse of [`sigmoid`].
#[inline]
pub fn logit<T: Scalar>(p: T) -> T {
    (p / (T::one() - p)).ln()
}

/// One 8-bit intensity level on a `[0, 1]` scale.
pub const BLANK_EPSILON: f64 = 1.0 / 255.0;

/// A frame is blank when its brightest pixel stays below `epsilon`.
pub fn is_blank_frame<T: Scalar>(pixels: &[T], epsilon: T) -> Result<bool> {
    if pixels.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(epsilon >= T::zero()) {
        return Err(Error::InvalidValue(format!("epsilon {epsilon} must be >= 0")));
    }
    let max = pixels.iter().copied().fold(T::neg_infinity(), T::max);
    Ok(max < epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0f64), 0.5);
        // 1 / (1 + e^-2) evaluated at extended precision
        assert!((sigmoid(2.0f64) - 0.880_797_077_977_882_3).abs() < 1e-15);
        assert_eq!(sigmoid(-1000.0f64), 0.0);
        assert_eq!(sigmoid(1000.0f64), 1.0);
        assert!((logit(sigmoid(1.25f64)) - 1.25).abs() < 1e-12);
        assert!((sigmoid(0.5f32) - 0.622_459_3).abs() < 1e-6);
    }

    #[test]
    fn blank_frames() {
        let eps = BLANK_EPSILON;
        assert!(is_blank_frame(&[0.0f64; 16], eps).unwrap());
        let mut one_bright = vec![0.0f64; 16];
        one_bright[5] = 1.0;
        assert!(!is_blank_frame(&one_bright, eps).unwrap());
        let mut dim = vec![0.0f64; 16];
        dim[3] = 0.003;
        assert!(is_blank_frame(&dim, eps).unwrap());
        assert_eq!(is_blank_frame::<f64>(&[], eps), Err(Error::EmptyInput));
        assert!(is_blank_frame(&[0.0f64], -1.0).is_err());
    }

    proptest! {
        #[test]
        fn sigmoid_symmetry(x in -40.0f64..40.0) {
            prop_assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() <= 1e-15);
        }

        #[test]
        fn sigmoid_increasing(x in -30.0f64..30.0, d in 1e-3f64..5.0) {
            prop_assert!(sigmoid(x + d) > sigmoid(x));
        }

        #[test]
        fn blank_is_monotone_in_epsilon(
            pixels in prop::collection::vec(0.0f64..0.02, 1..64),
            eps in 0.0f64..0.03,
            bump in 0.0f64..0.03,
        ) {
            if is_blank_frame(&pixels, eps).unwrap() {
                prop_assert!(is_blank_frame(&pixels, eps + bump).unwrap());
            }
        }
    }
}
