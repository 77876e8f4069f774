// SPDX-License-Identifier: Apache-2.0

//! Sample-by-class matrices for multi-label classification.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major `samples x classes` matrix of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix<T> {
    samples: usize,
    classes: usize,
    data: Vec<T>,
}

/// Raw per-class scores before the sigmoid.
pub type LogitMatrix<T> = RealMatrix<T>;
/// Per-class probabilities in `[0, 1]`.
pub type ProbMatrix<T> = RealMatrix<T>;

impl<T: Scalar> RealMatrix<T> {
    pub fn new(samples: usize, classes: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != samples * classes {
            return Err(Error::Shape(format!(
                "{} values for a {samples}x{classes} matrix",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(format!("non-finite value at index {i}")));
        }
        Ok(Self {
            samples,
            classes,
            data,
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let classes = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != classes) {
            return Err(Error::Shape(format!("row {bad} has a different length")));
        }
        Self::new(rows.len(), classes, rows.concat())
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, sample: usize, class: usize) -> T {
        self.data[sample * self.classes + class]
    }

    pub fn row(&self, sample: usize) -> &[T] {
        &self.data[sample * self.classes..(sample + 1) * self.classes]
    }

    pub fn column(&self, class: usize) -> Vec<T> {
        (0..self.samples).map(|s| self.get(s, class)).collect()
    }

    pub fn map(&self, f: impl Fn(usize, usize, T) -> T) -> Self {
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, &v)| f(i / self.classes.max(1), i % self.classes.max(1), v))
            .collect();
        Self {
            samples: self.samples,
            classes: self.classes,
            data,
        }
    }

    pub fn same_shape<U>(&self, other: &RealMatrix<U>) -> bool {
        self.samples == other.samples && self.classes == other.classes
    }
}

/// Binary `samples x classes` matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatrix {
    samples: usize,
    classes: usize,
    data: Vec<bool>,
}

impl LabelMatrix {
    pub fn new(samples: usize, classes: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != samples * classes {
            return Err(Error::Shape(format!(
                "{} labels for a {samples}x{classes} matrix",
                data.len()
            )));
        }
        Ok(Self {
            samples,
            classes,
            data,
        })
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let classes = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != classes) {
            return Err(Error::Shape(format!("row {bad} has a different length")));
        }
        Self::new(rows.len(), classes, rows.concat())
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, sample: usize, class: usize) -> bool {
        self.data[sample * self.classes + class]
    }

    pub fn row(&self, sample: usize) -> &[bool] {
        &self.data[sample * self.classes..(sample + 1) * self.classes]
    }

    pub fn column(&self, class: usize) -> Vec<bool> {
        (0..self.samples).map(|s| self.get(s, class)).collect()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.samples, self.classes)
    }

    pub(crate) fn check_matches<T>(&self, m: &RealMatrix<T>) -> Result<()> {
        if self.samples != m.samples || self.classes != m.classes {
            return Err(Error::Shape(format!(
                "labels are {}x{}, values are {}x{}",
                self.samples, self.classes, m.samples, m.classes
            )));
        }
        Ok(())
    }
}
