// SPDX-License-Identifier: Apache-2.0

//! Presence F1 and localization AP / mAP.
//!
//! AP uses greedy per-frame matching: predictions are ranked globally by
//! descending score (ties: lower frame id, then lexicographic box) and each
//! takes the unmatched same-frame ground truth with the highest IoU at or
//! above the match threshold. AP is the exact area under the precision
//! envelope (all-point interpolation).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::boxes::{BoundingBox, Detection, FrameDetections};
use crate::calib::BinaryCounts;
use crate::error::{Error, Result};
use crate::matrix::LabelMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig<T> {
    pub iou_match: T,
    /// Whether boxes a tracker emitted without a detection are scored.
    pub include_track_boxes: bool,
    /// Number of classes; inferred from the largest class id when `None`.
    pub num_classes: Option<usize>,
}

impl<T: Scalar> Default for EvalConfig<T> {
    fn default() -> Self {
        Self {
            iou_match: T::lit(0.5),
            include_track_boxes: true,
            num_classes: None,
        }
    }
}

impl<T: Scalar> EvalConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.iou_match > T::zero() && self.iou_match <= T::one()) {
            return Err(Error::Config(format!(
                "match IoU {} outside (0, 1]",
                self.iou_match
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultilabelF1<T> {
    /// `None` for classes with neither true nor predicted positives.
    pub per_class: Vec<Option<T>>,
    /// Mean over the defined classes; `None` when no class is defined.
    pub macro_f1: Option<T>,
    pub counts: Vec<BinaryCounts>,
}

/// Per-class F1 over samples with the macro mean.
///
/// A class without true positives is skipped in the mean unless something
/// was predicted for it, in which case it scores 0.
pub fn multilabel_f1<T: Scalar>(pred: &LabelMatrix, truth: &LabelMatrix) -> Result<MultilabelF1<T>> {
    if pred.shape() != truth.shape() {
        return Err(Error::Shape(format!(
            "predictions are {:?}, labels are {:?}",
            pred.shape(),
            truth.shape()
        )));
    }
    let counts: Vec<BinaryCounts> = (0..truth.classes())
        .map(|c| BinaryCounts::from_pairs(&pred.column(c), &truth.column(c)))
        .collect::<Result<_>>()?;
    let per_class: Vec<Option<T>> = counts
        .iter()
        .map(|c| (c.tp + c.fn_ + c.fp > 0).then(|| c.f1()))
        .collect();
    Ok(MultilabelF1 {
        macro_f1: mean_defined(&per_class),
        per_class,
        counts,
    })
}

fn mean_defined<T: Scalar>(values: &[Option<T>]) -> Option<T> {
    let defined: Vec<T> = values.iter().flatten().copied().collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().copied().sum::<T>() / T::from_count(defined.len()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApResult<T> {
    /// `None` when the class has no ground truth.
    pub ap: Option<T>,
    pub counts: BinaryCounts,
}

/// Average precision of one class.
///
/// `preds` and `gts` pair each box with its frame id.
pub fn average_precision<T: Scalar>(
    preds: &[(u64, Detection<T>)],
    gts: &[(u64, BoundingBox<T>)],
    iou_match: T,
) -> ApResult<T> {
    let mut by_frame: BTreeMap<u64, Vec<(BoundingBox<T>, bool)>> = BTreeMap::new();
    for (frame, b) in gts {
        by_frame.entry(*frame).or_default().push((*b, false));
    }

    let mut ranked: Vec<&(u64, Detection<T>)> = preds.iter().collect();
    ranked.sort_by(|a, b| {
        b.1.score
            .partial_cmp(&a.1.score)
            .unwrap_or(Ordering::Equal)
            .then(a.0.cmp(&b.0))
            .then_with(|| a.1.bbox.lex_cmp(&b.1.bbox))
    });

    let mut hits = Vec::with_capacity(ranked.len());
    for (frame, det) in ranked {
        let mut best: Option<(usize, T)> = None;
        if let Some(cands) = by_frame.get(frame) {
            for (i, (g, used)) in cands.iter().enumerate() {
                if *used {
                    continue;
                }
                let v = g.iou(&det.bbox);
                if v >= iou_match && best.is_none_or(|(_, bv)| v > bv) {
                    best = Some((i, v));
                }
            }
        }
        if let Some((i, _)) = best {
            by_frame.get_mut(frame).expect("frame present")[i].1 = true;
        }
        hits.push(best.is_some());
    }

    let tp = hits.iter().filter(|&&h| h).count();
    let counts = BinaryCounts {
        tp,
        fp: hits.len() - tp,
        fn_: gts.len() - tp,
    };
    if gts.is_empty() {
        return ApResult { ap: None, counts };
    }

    // precision after each ranked prediction, then its running max from the
    // right; each true positive adds one recall step of 1 / n_gt.
    let mut cum_tp = 0usize;
    let mut precision: Vec<T> = hits
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            cum_tp += usize::from(h);
            T::from_count(cum_tp) / T::from_count(i + 1)
        })
        .collect();
    for i in (0..precision.len().saturating_sub(1)).rev() {
        precision[i] = precision[i].max(precision[i + 1]);
    }
    let area: T = hits
        .iter()
        .zip(&precision)
        .filter(|(&h, _)| h)
        .map(|(_, &p)| p)
        .sum();
    ApResult {
        ap: Some(area / T::from_count(gts.len())),
        counts,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport<T> {
    /// Frame-level presence F1 per class (a class is present in a frame when
    /// it has at least one box).
    pub per_class_f1: Vec<Option<T>>,
    pub mean_f1: Option<T>,
    pub per_class_ap: Vec<Option<T>>,
    pub mean_ap: T,
    /// Box-level matching counts per class.
    pub counts: Vec<BinaryCounts>,
}

impl<T: Scalar> EvalReport<T> {
    /// Fraction of ground-truth boxes matched by some prediction.
    pub fn recall(&self) -> T {
        let tp: usize = self.counts.iter().map(|c| c.tp).sum();
        let gt: usize = self.counts.iter().map(|c| c.tp + c.fn_).sum();
        if gt == 0 {
            T::zero()
        } else {
            T::from_count(tp) / T::from_count(gt)
        }
    }
}

/// Scores predicted boxes against ground truth, frame ids aligned. Frames
/// missing from either side count as empty.
pub fn mean_ap<T: Scalar>(
    pred: &[FrameDetections<T>],
    gt: &[FrameDetections<T>],
    cfg: &EvalConfig<T>,
) -> Result<EvalReport<T>> {
    cfg.validate()?;
    let keep = |d: &Detection<T>| cfg.include_track_boxes || !d.from_track;

    let max_class = pred
        .iter()
        .flat_map(|f| f.detections.iter().filter(|d| keep(d)))
        .chain(gt.iter().flat_map(|f| f.detections.iter()))
        .map(|d| d.class_id + 1)
        .max()
        .unwrap_or(0);
    let classes = cfg.num_classes.unwrap_or(0).max(max_class);

    let mut class_preds: Vec<Vec<(u64, Detection<T>)>> = vec![Vec::new(); classes];
    let mut class_gts: Vec<Vec<(u64, BoundingBox<T>)>> = vec![Vec::new(); classes];
    let mut frames = BTreeSet::new();
    for f in pred {
        frames.insert(f.frame_id);
        for d in f.detections.iter().filter(|d| keep(d)) {
            class_preds[d.class_id].push((f.frame_id, *d));
        }
    }
    for f in gt {
        frames.insert(f.frame_id);
        for d in &f.detections {
            class_gts[d.class_id].push((f.frame_id, d.bbox));
        }
    }
    if class_gts.iter().all(Vec::is_empty) {
        return Err(Error::EmptyGroundTruth);
    }

    let results: Vec<ApResult<T>> = (0..classes)
        .map(|c| average_precision(&class_preds[c], &class_gts[c], cfg.iou_match))
        .collect();
    let per_class_ap: Vec<Option<T>> = results.iter().map(|r| r.ap).collect();
    let defined: Vec<T> = per_class_ap.iter().flatten().copied().collect();
    let mean_ap = defined.iter().copied().sum::<T>() / T::from_count(defined.len());

    let frame_index: BTreeMap<u64, usize> = frames.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let presence = |class_boxes: &dyn Fn(usize) -> Vec<u64>| -> Result<LabelMatrix> {
        let mut bits = vec![false; frames.len() * classes];
        for c in 0..classes {
            for f in class_boxes(c) {
                bits[frame_index[&f] * classes + c] = true;
            }
        }
        LabelMatrix::new(frames.len(), classes, bits)
    };
    let pred_presence = presence(&|c| class_preds[c].iter().map(|p| p.0).collect())?;
    let gt_presence = presence(&|c| class_gts[c].iter().map(|g| g.0).collect())?;
    let f1 = multilabel_f1::<T>(&pred_presence, &gt_presence)?;

    Ok(EvalReport {
        per_class_f1: f1.per_class,
        mean_f1: f1.macro_f1,
        per_class_ap,
        mean_ap,
        counts: results.into_iter().map(|r| r.counts).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> BoundingBox<f64> {
        BoundingBox::new(x0, y0, x1, y1).unwrap()
    }

    fn det(b: BoundingBox<f64>, class_id: usize, score: f64) -> Detection<f64> {
        Detection::new(b, class_id, score).unwrap()
    }

    #[test]
    fn multilabel_examples() {
        let truth =
            LabelMatrix::from_rows(&[vec![true, false], vec![false, true], vec![true, true]]).unwrap();
        let r = multilabel_f1::<f64>(&truth, &truth).unwrap();
        assert_eq!(r.per_class, vec![Some(1.0), Some(1.0)]);
        assert_eq!(r.macro_f1, Some(1.0));

        let flipped = LabelMatrix::new(3, 2, truth.data().iter().map(|b| !b).collect()).unwrap();
        let r = multilabel_f1::<f64>(&flipped, &truth).unwrap();
        assert_eq!(r.per_class, vec![Some(0.0), Some(0.0)]);

        let none = LabelMatrix::new(2, 2, vec![false; 4]).unwrap();
        let r = multilabel_f1::<f64>(&none, &none).unwrap();
        assert_eq!((r.per_class, r.macro_f1), (vec![None, None], None));

        let pred_only = LabelMatrix::new(2, 2, vec![true, false, false, false]).unwrap();
        let truth = LabelMatrix::new(2, 2, vec![false, false, false, true]).unwrap();
        let r = multilabel_f1::<f64>(&pred_only, &truth).unwrap();
        assert_eq!(r.per_class, vec![Some(0.0), Some(0.0)]);
        assert!(multilabel_f1::<f64>(&none, &LabelMatrix::new(1, 2, vec![false; 2]).unwrap()).is_err());
    }

    #[test]
    fn ap_examples() {
        let g1 = bx(0.0, 0.0, 10.0, 10.0);
        let g2 = bx(20.0, 20.0, 30.0, 30.0);
        let perfect = average_precision(
            &[(0, det(g1, 0, 0.9)), (1, det(g2, 0, 0.8))],
            &[(0, g1), (1, g2)],
            0.5,
        );
        assert_eq!(perfect.ap, Some(1.0));
        assert_eq!(average_precision::<f64>(&[], &[(0, g1)], 0.5).ap, Some(0.0));
        // one TP then one FP with two GT: precision (1, 0.5), recall (0.5, 0.5)
        let r = average_precision(
            &[(0, det(g1, 0, 0.9)), (0, det(bx(50.0, 50.0, 60.0, 60.0), 0, 0.4))],
            &[(0, g1), (1, g2)],
            0.5,
        );
        assert_eq!(r.ap, Some(0.5));
        assert_eq!(r.counts, BinaryCounts { tp: 1, fp: 1, fn_: 1 });
        assert_eq!(average_precision(&[(0, det(g1, 0, 0.9))], &[], 0.5).ap, None);
    }

    #[test]
    fn ap_envelope_uses_later_precision() {
        let g: Vec<_> = (0..3)
            .map(|i| bx(20.0 * i as f64, 0.0, 20.0 * i as f64 + 10.0, 10.0))
            .collect();
        let fp = bx(100.0, 100.0, 110.0, 110.0);
        // ranks: TP, FP, TP, TP -> precisions 1, 1/2, 2/3, 3/4
        let preds = vec![
            (0, det(g[0], 0, 0.9)),
            (0, det(fp, 0, 0.8)),
            (0, det(g[1], 0, 0.7)),
            (0, det(g[2], 0, 0.6)),
        ];
        let gts: Vec<_> = g.iter().map(|&b| (0, b)).collect();
        let ap = average_precision(&preds, &gts, 0.5).ap.unwrap();
        assert!((ap - (1.0 + 0.75 + 0.75) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn mean_ap_examples() {
        let gt = vec![
            FrameDetections::new(0, vec![det(bx(0.0, 0.0, 10.0, 10.0), 0, 1.0)]),
            FrameDetections::new(1, vec![det(bx(5.0, 5.0, 15.0, 15.0), 1, 1.0)]),
        ];
        let report = mean_ap(&gt, &gt, &EvalConfig::default()).unwrap();
        assert_eq!(report.mean_ap, 1.0);
        assert_eq!(report.mean_f1, Some(1.0));
        assert_eq!(report.recall(), 1.0);

        let empty: Vec<FrameDetections<f64>> = vec![];
        let report = mean_ap(&empty, &gt, &EvalConfig::default()).unwrap();
        assert_eq!(report.mean_ap, 0.0);
        assert_eq!(report.mean_f1, Some(0.0));

        assert_eq!(
            mean_ap(&gt, &empty, &EvalConfig::default()),
            Err(Error::EmptyGroundTruth)
        );
    }

    #[test]
    fn track_boxes_can_be_excluded() {
        let b = bx(0.0, 0.0, 10.0, 10.0);
        let gt = vec![FrameDetections::new(0, vec![det(b, 0, 1.0)])];
        let mut coasted = det(b, 0, 0.8);
        coasted.from_track = true;
        let pred = vec![FrameDetections::new(0, vec![coasted])];
        let with = mean_ap(&pred, &gt, &EvalConfig::default()).unwrap();
        assert_eq!(with.mean_ap, 1.0);
        let cfg = EvalConfig {
            include_track_boxes: false,
            ..EvalConfig::default()
        };
        assert_eq!(mean_ap(&pred, &gt, &cfg).unwrap().mean_ap, 0.0);
    }
}
