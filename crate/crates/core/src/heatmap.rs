// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-frame class activation maps, `frames x classes x height x width`,
/// stored frame-major, then class-major, then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapStack<T> {
    frames: usize,
    classes: usize,
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> HeatmapStack<T> {
    pub fn new(frames: usize, classes: usize, height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if frames == 0 || classes == 0 || height == 0 || width == 0 {
            return Err(Error::Shape(format!(
                "heatmap dimensions must be positive, got {frames}x{classes}x{height}x{width}"
            )));
        }
        let expected = frames
            .checked_mul(classes)
            .and_then(|v| v.checked_mul(height))
            .and_then(|v| v.checked_mul(width))
            .ok_or_else(|| Error::Shape("heatmap dimensions overflow".into()))?;
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "heatmap payload has {} values, expected {expected}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "non-finite heatmap value at index {i}"
            )));
        }
        Ok(Self {
            frames,
            classes,
            height,
            width,
            data,
        })
    }

    pub fn zeros(frames: usize, classes: usize, height: usize, width: usize) -> Result<Self> {
        Self::new(
            frames,
            classes,
            height,
            width,
            vec![T::zero(); frames * classes * height * width],
        )
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `(frames, classes, height, width)`
    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.frames, self.classes, self.height, self.width)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn frame(&self, index: usize) -> HeatmapFrame<'_, T> {
        let len = self.classes * self.height * self.width;
        HeatmapFrame {
            classes: self.classes,
            height: self.height,
            width: self.width,
            data: &self.data[index * len..(index + 1) * len],
        }
    }

    pub fn iter_frames(&self) -> impl Iterator<Item = HeatmapFrame<'_, T>> + '_ {
        (0..self.frames).map(move |f| self.frame(f))
    }

    pub fn cast<U: Scalar>(&self) -> HeatmapStack<U> {
        HeatmapStack {
            frames: self.frames,
            classes: self.classes,
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .map(|v| U::from_f64(v.to_f64().unwrap_or(0.0)).unwrap_or_else(U::zero))
                .collect(),
        }
    }
}

/// Borrowed view of one frame: `classes x height x width`.
#[derive(Debug, Clone, Copy)]
pub struct HeatmapFrame<'a, T> {
    pub classes: usize,
    pub height: usize,
    pub width: usize,
    pub data: &'a [T],
}

impl<'a, T: Scalar> HeatmapFrame<'a, T> {
    pub fn new(classes: usize, height: usize, width: usize, data: &'a [T]) -> Result<Self> {
        if classes == 0 || height == 0 || width == 0 || data.len() != classes * height * width {
            return Err(Error::Shape(format!(
                "frame of {} values does not match {classes}x{height}x{width}",
                data.len()
            )));
        }
        Ok(Self {
            classes,
            height,
            width,
            data,
        })
    }

    /// Row-major `height x width` map of one class.
    pub fn class_map(&self, class: usize) -> &'a [T] {
        let len = self.height * self.width;
        &self.data[class * len..(class + 1) * len]
    }
}
