// SPDX-License-Identifier: Apache-2.0

//! Post-model algorithms for weakly-supervised tool localization.
//!
//! The crate turns class-activation heatmaps into scored boxes, calibrates
//! multi-label logits so that a fixed 0.5 cut maximizes per-class F1,
//! evaluates the asymmetric focal loss and its gradient, stabilizes
//! detections over time with a constant-velocity Kalman tracker, gates
//! pseudo-labels, and scores predictions with F1 and mAP.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`). The
//! `*F64` aliases below are what most callers want.

// `!(a > b)` is used on purpose so NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod boxes;
pub mod calib;
pub mod cam2box;
pub mod error;
pub mod heatmap;
pub mod matrix;
pub mod metrics;
pub mod numeric;
pub mod scalar;
pub mod trackfuse;

pub use boxes::{iou, BoundingBox, Detection, FrameDetections};
pub use error::{Error, Result};
pub use heatmap::{HeatmapFrame, HeatmapStack};
pub use matrix::{LabelMatrix, LogitMatrix, ProbMatrix, RealMatrix};
pub use numeric::{is_blank_frame, logit, sigmoid};
pub use scalar::Scalar;

pub type BoundingBoxF64 = BoundingBox<f64>;
pub type DetectionF64 = Detection<f64>;
pub type FrameDetectionsF64 = FrameDetections<f64>;
pub type HeatmapStackF32 = HeatmapStack<f32>;
pub type HeatmapStackF64 = HeatmapStack<f64>;
pub type RealMatrixF64 = RealMatrix<f64>;
pub type LocalizeConfigF64 = cam2box::LocalizeConfig<f64>;
pub type CalibrationTableF64 = calib::CalibrationTable<f64>;
pub type AslParamsF64 = calib::AslParams<f64>;
pub type FuseConfigF64 = trackfuse::FuseConfig<f64>;
pub type TrackStateF64 = trackfuse::TrackState<f64>;
pub type EvalReportF64 = metrics::EvalReport<f64>;
