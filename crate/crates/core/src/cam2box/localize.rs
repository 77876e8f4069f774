// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;

use super::dedup::dedup_boxes;
use super::mask::{binarize, connected_components, Connectivity};
use super::otsu::otsu_threshold;
use crate::boxes::{Detection, FrameDetections};
use crate::error::{Error, Result};
use crate::heatmap::{HeatmapFrame, HeatmapStack};
use crate::numeric::sigmoid;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode<T> {
    Otsu,
    /// Fixed level applied to the min-max normalized map.
    Fixed(T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizeConfig<T> {
    pub threshold_mode: ThresholdMode<T>,
    /// A class is localized when its pooled probability is strictly above this.
    pub presence_threshold: T,
    pub min_component_area: usize,
    pub dedup_iou: T,
    pub connectivity: Connectivity,
    pub histogram_bins: usize,
    /// `(sx, sy)` applied to boxes, e.g. `(frame_w / W', frame_h / H')`.
    pub box_scale: Option<(T, T)>,
}

impl<T: Scalar> Default for LocalizeConfig<T> {
    fn default() -> Self {
        Self {
            threshold_mode: ThresholdMode::Otsu,
            presence_threshold: T::lit(0.5),
            min_component_area: 4,
            dedup_iou: T::lit(0.5),
            connectivity: Connectivity::Eight,
            histogram_bins: 256,
            box_scale: None,
        }
    }
}

impl<T: Scalar> LocalizeConfig<T> {
    pub fn fixed(sigma: T) -> Self {
        Self {
            threshold_mode: ThresholdMode::Fixed(sigma),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (zero, one) = (T::zero(), T::one());
        if !(self.presence_threshold > zero && self.presence_threshold < one) {
            return Err(Error::Config(format!(
                "presence threshold {} outside (0, 1)",
                self.presence_threshold
            )));
        }
        if !(self.dedup_iou >= zero && self.dedup_iou <= one) {
            return Err(Error::Config(format!(
                "dedup IoU {} outside [0, 1]",
                self.dedup_iou
            )));
        }
        if self.min_component_area == 0 {
            return Err(Error::Config("minimum component area must be >= 1".into()));
        }
        if self.histogram_bins < 2 {
            return Err(Error::Config("histogram needs at least 2 bins".into()));
        }
        if let ThresholdMode::Fixed(t) = self.threshold_mode {
            if !t.is_finite() {
                return Err(Error::Config(format!("fixed threshold {t} is not finite")));
            }
        }
        if let Some((sx, sy)) = self.box_scale {
            if !(sx > zero && sy > zero && sx.is_finite() && sy.is_finite()) {
                return Err(Error::Config("box scale factors must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Non-fatal conditions met while localizing a frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalizeWarning {
    /// The class map was constant, so no threshold could separate it.
    NoSeparation { frame_id: u64, class_id: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedFrame<T> {
    pub detections: FrameDetections<T>,
    pub warnings: Vec<LocalizeWarning>,
}

/// Localizes the classes present in one `classes x H' x W'` frame.
pub fn localize_frame<T: Scalar>(
    frame_id: u64,
    frame: HeatmapFrame<'_, T>,
    cfg: &LocalizeConfig<T>,
) -> Result<LocalizedFrame<T>> {
    cfg.validate()?;
    let (h, w) = (frame.height, frame.width);

    let mut present: Vec<(usize, T)> = (0..frame.classes)
        .map(|c| {
            let map = frame.class_map(c);
            let mean = map.iter().copied().sum::<T>() / T::from_count(map.len());
            (c, sigmoid(mean))
        })
        .filter(|&(_, p)| p > cfg.presence_threshold)
        .collect();
    present.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });

    let mut candidates = Vec::new();
    let mut warnings = Vec::new();
    for (class_id, presence) in present {
        let Some(normalized) = min_max_normalize(frame.class_map(class_id)) else {
            warnings.push(LocalizeWarning::NoSeparation { frame_id, class_id });
            continue;
        };
        let threshold = match cfg.threshold_mode {
            ThresholdMode::Fixed(t) => t,
            ThresholdMode::Otsu => match otsu_threshold(&normalized, cfg.histogram_bins) {
                Ok(t) => t,
                Err(Error::NoSeparation) => {
                    warnings.push(LocalizeWarning::NoSeparation { frame_id, class_id });
                    continue;
                }
                Err(e) => return Err(e),
            },
        };
        let mask = binarize(&normalized, h, w, threshold)?;
        for comp in connected_components(&mask, cfg.connectivity) {
            if comp.area() < cfg.min_component_area {
                continue;
            }
            let peak = comp.pixels.iter().map(|&i| normalized[i]).fold(T::zero(), T::max);
            let mut bbox = comp.bbox::<T>();
            if let Some((sx, sy)) = cfg.box_scale {
                bbox = bbox.scaled(sx, sy)?;
            }
            candidates.push(Detection::new(bbox, class_id, presence * peak)?);
        }
    }

    Ok(LocalizedFrame {
        detections: FrameDetections::new(frame_id, dedup_boxes(&candidates, cfg.dedup_iou)),
        warnings,
    })
}

/// Localizes every frame of a stack, using the frame index as its id.
pub fn localize_stack<T: Scalar>(
    stack: &HeatmapStack<T>,
    cfg: &LocalizeConfig<T>,
) -> Result<Vec<LocalizedFrame<T>>> {
    stack
        .iter_frames()
        .enumerate()
        .map(|(i, f)| localize_frame(i as u64, f, cfg))
        .collect()
}

/// Maps `[min, max]` onto `[0, 1]`; `None` for a constant map.
fn min_max_normalize<T: Scalar>(map: &[T]) -> Option<Vec<T>> {
    let (lo, hi) = map
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !(hi > lo) {
        return None;
    }
    let range = hi - lo;
    Some(map.iter().map(|&v| (v - lo) / range).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_map(h: usize, w: usize, cx: f64, cy: f64, sigma: f64) -> Vec<f64> {
        let mut m = vec![0.0; h * w];
        for r in 0..h {
            for c in 0..w {
                let (dx, dy) = (c as f64 + 0.5 - cx, r as f64 + 0.5 - cy);
                m[r * w + c] = (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp();
            }
        }
        m
    }

    #[test]
    fn zero_frame_has_no_detections() {
        let data = vec![0.0f64; 3 * 16 * 16];
        let frame = HeatmapFrame::new(3, 16, 16, &data).unwrap();
        let out = localize_frame(0, frame, &LocalizeConfig::default()).unwrap();
        assert!(out.detections.detections.is_empty());
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn single_blob_yields_one_box_around_peak() {
        let (h, w) = (48, 48);
        let (cx, cy, sigma) = (20.5, 30.0, 4.0);
        let mut data = vec![0.0f64; 2 * h * w];
        data[h * w..].copy_from_slice(&gaussian_map(h, w, cx, cy, sigma));
        let frame = HeatmapFrame::new(2, h, w, &data).unwrap();
        let out = localize_frame(7, frame, &LocalizeConfig::default()).unwrap();
        let dets = &out.detections.detections;
        assert_eq!(out.detections.frame_id, 7);
        assert_eq!(dets.len(), 1);
        let d = dets[0];
        assert_eq!(d.class_id, 1);
        let b = d.bbox;
        assert!(b.x_min() <= cx && cx < b.x_max() && b.y_min() <= cy && cy < b.y_max());
        let support = crate::BoundingBox::new(
            cx - 2.0 * sigma,
            cy - 2.0 * sigma,
            cx + 2.0 * sigma,
            cy + 2.0 * sigma,
        )
        .unwrap();
        assert!(b.iou(&support) > 0.5, "iou {}", b.iou(&support));
        assert!(d.score > 0.5 && d.score <= 1.0);
    }

    #[test]
    fn fixed_threshold_and_box_scale() {
        let (h, w) = (32, 32);
        let data = gaussian_map(h, w, 16.0, 16.0, 3.0);
        let frame = HeatmapFrame::new(1, h, w, &data).unwrap();
        let mut cfg = LocalizeConfig::fixed(0.5);
        let plain = localize_frame(0, frame, &cfg).unwrap().detections.detections;
        cfg.box_scale = Some((2.0, 4.0));
        let scaled = localize_frame(0, frame, &cfg).unwrap().detections.detections;
        assert_eq!(plain.len(), 1);
        let (p, s) = (plain[0].bbox, scaled[0].bbox);
        assert_eq!(
            s.coords(),
            [p.x_min() * 2.0, p.y_min() * 4.0, p.x_max() * 2.0, p.y_max() * 4.0]
        );
    }

    #[test]
    fn constant_present_map_warns() {
        let data = vec![1.0f64; 8 * 8];
        let frame = HeatmapFrame::new(1, 8, 8, &data).unwrap();
        let out = localize_frame(3, frame, &LocalizeConfig::default()).unwrap();
        assert!(out.detections.detections.is_empty());
        assert_eq!(
            out.warnings,
            vec![LocalizeWarning::NoSeparation {
                frame_id: 3,
                class_id: 0
            }]
        );
    }

    #[test]
    fn small_components_are_dropped() {
        let mut data = vec![0.0f64; 10 * 10];
        data[0] = 1.0;
        data[55] = 1.0;
        data[56] = 1.0;
        let frame = HeatmapFrame::new(1, 10, 10, &data).unwrap();
        let mut cfg = LocalizeConfig::default();
        assert!(localize_frame(0, frame, &cfg)
            .unwrap()
            .detections
            .detections
            .is_empty());
        cfg.min_component_area = 1;
        assert_eq!(
            localize_frame(0, frame, &cfg)
                .unwrap()
                .detections
                .detections
                .len(),
            2
        );
    }

    #[test]
    fn rejects_bad_config() {
        let data = vec![0.0f64; 4];
        let frame = HeatmapFrame::new(1, 2, 2, &data).unwrap();
        let cfg = LocalizeConfig {
            presence_threshold: 1.0,
            ..LocalizeConfig::default()
        };
        assert!(matches!(localize_frame(0, frame, &cfg), Err(Error::Config(_))));
        let cfg = LocalizeConfig {
            min_component_area: 0,
            ..LocalizeConfig::<f64>::default()
        };
        assert!(localize_frame(0, frame, &cfg).is_err());
    }
}
