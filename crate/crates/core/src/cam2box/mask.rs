// SPDX-License-Identifier: Apache-2.0

use std::collections::VecDeque;

use crate::boxes::BoundingBox;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != height * width {
            return Err(Error::Shape(format!(
                "{} mask bits for a {height}x{width} mask",
                bits.len()
            )));
        }
        Ok(Self { height, width, bits })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Sets every pixel strictly above `threshold`.
pub fn binarize<T: Scalar>(map: &[T], height: usize, width: usize, threshold: T) -> Result<BinaryMask> {
    if !threshold.is_finite() {
        return Err(Error::InvalidValue(format!(
            "threshold {threshold} is not finite"
        )));
    }
    BinaryMask::new(height, width, map.iter().map(|&v| v > threshold).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
        const EIGHT: [(isize, isize); 8] = [
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

/// One connected region of set pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Flat `row * width + col` indices in raster order.
    pub pixels: Vec<usize>,
    pub col_min: usize,
    pub row_min: usize,
    /// Exclusive.
    pub col_max: usize,
    /// Exclusive.
    pub row_max: usize,
}

impl Component {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    pub fn bbox<T: Scalar>(&self) -> BoundingBox<T> {
        BoundingBox::new(
            T::from_count(self.col_min),
            T::from_count(self.row_min),
            T::from_count(self.col_max),
            T::from_count(self.row_max),
        )
        .expect("component box is non-empty")
    }
}

/// Labels connected regions of the mask, in raster order of each region's
/// first pixel.
pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> Vec<Component> {
    let (h, w) = (mask.height, mask.width);
    let mut visited = vec![false; h * w];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..h * w {
        if !mask.bits[start] || visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        let mut pixels = Vec::new();
        while let Some(idx) = queue.pop_front() {
            pixels.push(idx);
            let (r, c) = ((idx / w) as isize, (idx % w) as isize);
            for &(dr, dc) in connectivity.offsets() {
                let (nr, nc) = (r + dr, c + dc);
                if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                    continue;
                }
                let n = nr as usize * w + nc as usize;
                if mask.bits[n] && !visited[n] {
                    visited[n] = true;
                    queue.push_back(n);
                }
            }
        }
        pixels.sort_unstable();
        let (mut row_min, mut col_min, mut row_max, mut col_max) = (usize::MAX, usize::MAX, 0, 0);
        for &p in &pixels {
            let (r, c) = (p / w, p % w);
            row_min = row_min.min(r);
            col_min = col_min.min(c);
            row_max = row_max.max(r + 1);
            col_max = col_max.max(c + 1);
        }
        components.push(Component {
            pixels,
            col_min,
            row_min,
            col_max,
            row_max,
        });
    }
    components
}
