// SPDX-License-Identifier: Apache-2.0

//! Gates for machine-generated labels: a score floor and an IoU check
//! against an independent reference source.

use std::collections::BTreeMap;

use crate::boxes::{Detection, FrameDetections};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLabelSplit<T> {
    pub accepted: FrameDetections<T>,
    pub rejected: FrameDetections<T>,
}

fn check_unit<T: Scalar>(name: &str, v: T) -> Result<()> {
    if v >= T::zero() && v <= T::one() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} {v} outside [0, 1]")))
    }
}

/// Best IoU of `cand` against same-class references, 0 when there are none.
fn best_reference_iou<T: Scalar>(cand: &Detection<T>, references: &[Detection<T>]) -> T {
    references
        .iter()
        .filter(|r| r.class_id == cand.class_id)
        .map(|r| r.bbox.iou(&cand.bbox))
        .fold(T::zero(), T::max)
}

/// Rejects candidates whose best same-class reference IoU is below `iou_min`.
pub fn filter_pseudo_labels<T: Scalar>(
    candidates: &FrameDetections<T>,
    references: &FrameDetections<T>,
    iou_min: T,
) -> Result<PseudoLabelSplit<T>> {
    check_unit("IoU floor", iou_min)?;
    let (accepted, rejected): (Vec<_>, Vec<_>) = candidates
        .detections
        .iter()
        .partition(|c| best_reference_iou(c, &references.detections) >= iou_min);
    Ok(PseudoLabelSplit {
        accepted: FrameDetections::new(candidates.frame_id, accepted),
        rejected: FrameDetections::new(candidates.frame_id, rejected),
    })
}

/// Keeps detections scoring at least `score_min`.
pub fn filter_by_score<T: Scalar>(dets: &FrameDetections<T>, score_min: T) -> Result<FrameDetections<T>> {
    check_unit("score floor", score_min)?;
    Ok(FrameDetections::new(
        dets.frame_id,
        dets.detections
            .iter()
            .copied()
            .filter(|d| d.score >= score_min)
            .collect(),
    ))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassGateStats {
    pub candidates: usize,
    pub passed_score: usize,
    pub accepted: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapRound<T> {
    pub accepted: Vec<FrameDetections<T>>,
    /// Keyed by class id.
    pub stats: BTreeMap<usize, ClassGateStats>,
}

/// One pseudo-label round: score gate, then reference IoU gate, per frame.
///
/// References are matched to candidate frames by `frame_id`; a frame with no
/// reference entry rejects everything that reaches the IoU gate.
pub fn bootstrap_round<T: Scalar>(
    detections: &[FrameDetections<T>],
    references: &[FrameDetections<T>],
    iou_min: T,
    score_min: T,
) -> Result<BootstrapRound<T>> {
    check_unit("IoU floor", iou_min)?;
    check_unit("score floor", score_min)?;
    let refs: BTreeMap<u64, &FrameDetections<T>> = references.iter().map(|f| (f.frame_id, f)).collect();
    let mut stats: BTreeMap<usize, ClassGateStats> = BTreeMap::new();
    let mut accepted = Vec::with_capacity(detections.len());
    for frame in detections {
        for d in &frame.detections {
            stats.entry(d.class_id).or_default().candidates += 1;
        }
        let scored = filter_by_score(frame, score_min)?;
        for d in &scored.detections {
            stats.entry(d.class_id).or_default().passed_score += 1;
        }
        let empty = FrameDetections::empty(frame.frame_id);
        let reference = refs.get(&frame.frame_id).copied().unwrap_or(&empty);
        let split = filter_pseudo_labels(&scored, reference, iou_min)?;
        for d in &split.accepted.detections {
            stats.entry(d.class_id).or_default().accepted += 1;
        }
        accepted.push(split.accepted);
    }
    Ok(BootstrapRound { accepted, stats })
}
