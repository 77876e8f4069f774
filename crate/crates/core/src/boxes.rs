// SPDX-License-Identifier: Apache-2.0

//! Axis-aligned boxes and scored detections.
//!
//! Boxes are half-open: a box covers `[x_min, x_max) x [y_min, y_max)`, so a
//! box built from integer pixel bounds has an area equal to its pixel count.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox<T> {
    x_min: T,
    y_min: T,
    x_max: T,
    y_max: T,
}

impl<T: Scalar> BoundingBox<T> {
    pub fn new(x_min: T, y_min: T, x_max: T, y_max: T) -> Result<Self> {
        let coords = [x_min, y_min, x_max, y_max];
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "non-finite box coordinate in {coords:?}"
            )));
        }
        if x_min < T::zero() || y_min < T::zero() {
            return Err(Error::InvalidValue(format!(
                "negative box coordinate in {coords:?}"
            )));
        }
        if !(x_min < x_max && y_min < y_max) {
            return Err(Error::InvalidValue(format!("empty box {coords:?}")));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// Builds a box from its center and size.
    pub fn from_center(cx: T, cy: T, width: T, height: T) -> Result<Self> {
        let two = T::lit(2.0);
        Self::new(
            cx - width / two,
            cy - height / two,
            cx + width / two,
            cy + height / two,
        )
    }

    /// Like [`BoundingBox::from_center`] but clips the box to the
    /// non-negative quadrant. Returns `None` when nothing is left.
    pub fn from_center_clipped(cx: T, cy: T, width: T, height: T) -> Option<Self> {
        let two = T::lit(2.0);
        let x_min = (cx - width / two).max(T::zero());
        let y_min = (cy - height / two).max(T::zero());
        Self::new(x_min, y_min, cx + width / two, cy + height / two).ok()
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn y_min(&self) -> T {
        self.y_min
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    pub fn y_max(&self) -> T {
        self.y_max
    }

    pub fn width(&self) -> T {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> T {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn center(&self) -> (T, T) {
        let two = T::lit(2.0);
        ((self.x_min + self.x_max) / two, (self.y_min + self.y_max) / two)
    }

    /// `(cx, cy, w, h)`
    pub fn to_cxcywh(&self) -> [T; 4] {
        let (cx, cy) = self.center();
        [cx, cy, self.width(), self.height()]
    }

    pub fn intersection_area(&self, other: &Self) -> T {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w <= T::zero() || h <= T::zero() {
            T::zero()
        } else {
            w * h
        }
    }

    pub fn iou(&self, other: &Self) -> T {
        let inter = self.intersection_area(other);
        if inter == T::zero() {
            return T::zero();
        }
        let union = self.area() + other.area() - inter;
        (inter / union).min(T::one())
    }

    /// Scales x coordinates by `sx` and y coordinates by `sy`.
    pub fn scaled(&self, sx: T, sy: T) -> Result<Self> {
        Self::new(self.x_min * sx, self.y_min * sy, self.x_max * sx, self.y_max * sy)
    }

    pub fn coords(&self) -> [T; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }

    /// Lexicographic order on `(x_min, y_min, x_max, y_max)`.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.coords().iter().zip(other.coords().iter()) {
            match a.partial_cmp(b).unwrap_or(Ordering::Equal) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }

    pub fn cast<U: Scalar>(&self) -> BoundingBox<U> {
        let c = |v: T| U::from_f64(v.to_f64().unwrap_or(0.0)).unwrap_or_else(U::zero);
        BoundingBox {
            x_min: c(self.x_min),
            y_min: c(self.y_min),
            x_max: c(self.x_max),
            y_max: c(self.y_max),
        }
    }
}

/// Intersection over union of two boxes, in `[0, 1]`.
pub fn iou<T: Scalar>(a: &BoundingBox<T>, b: &BoundingBox<T>) -> T {
    a.iou(b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection<T> {
    pub bbox: BoundingBox<T>,
    pub class_id: usize,
    pub score: T,
    /// Set when the box was produced by a tracker coasting through a missed
    /// detection rather than by the detector itself.
    pub from_track: bool,
}

impl<T: Scalar> Detection<T> {
    pub fn new(bbox: BoundingBox<T>, class_id: usize, score: T) -> Result<Self> {
        if !(score >= T::zero() && score <= T::one()) {
            return Err(Error::InvalidValue(format!(
                "detection score {score} outside [0, 1]"
            )));
        }
        Ok(Self {
            bbox,
            class_id,
            score,
            from_track: false,
        })
    }

    /// Descending score, then ascending class id, then lexicographic box.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .partial_cmp(&self.score)
            .unwrap_or(Ordering::Equal)
            .then(self.class_id.cmp(&other.class_id))
            .then_with(|| self.bbox.lex_cmp(&other.bbox))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameDetections<T> {
    pub frame_id: u64,
    pub detections: Vec<Detection<T>>,
}

impl<T> FrameDetections<T> {
    pub fn new(frame_id: u64, detections: Vec<Detection<T>>) -> Self {
        Self { frame_id, detections }
    }

    pub fn empty(frame_id: u64) -> Self {
        Self::new(frame_id, Vec::new())
    }
}
