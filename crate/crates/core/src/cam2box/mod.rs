// SPDX-License-Identifier: Apache-2.0

//! Class activation heatmaps to scored boxes.
//!
//! Each class map is pooled into a presence probability; maps of present
//! classes are min-max normalized, thresholded (Otsu or a fixed level), split
//! into connected components, and the components become detections that are
//! finally de-duplicated across classes.

mod dedup;
mod localize;
mod mask;
mod otsu;

pub use dedup::dedup_boxes;
pub use localize::{
    localize_frame, localize_stack, LocalizeConfig, LocalizeWarning, LocalizedFrame, ThresholdMode,
};
pub use mask::{binarize, connected_components, BinaryMask, Component, Connectivity};
pub use otsu::otsu_threshold;

use crate::error::{Error, Result};
use crate::heatmap::HeatmapStack;
use crate::scalar::Scalar;

/// Elementwise mean of equally shaped heatmap stacks.
pub fn average_maps<T: Scalar>(maps: &[HeatmapStack<T>]) -> Result<HeatmapStack<T>> {
    let first = maps.first().ok_or(Error::EmptyInput)?;
    if let Some(bad) = maps.iter().find(|m| m.shape() != first.shape()) {
        return Err(Error::Shape(format!(
            "heatmap shape {:?} differs from {:?}",
            bad.shape(),
            first.shape()
        )));
    }
    let mut sum = first.data().to_vec();
    for m in &maps[1..] {
        for (acc, &v) in sum.iter_mut().zip(m.data()) {
            *acc = *acc + v;
        }
    }
    let n = T::from_count(maps.len());
    for v in &mut sum {
        *v = *v / n;
    }
    let (f, c, h, w) = first.shape();
    HeatmapStack::new(f, c, h, w, sum)
}
