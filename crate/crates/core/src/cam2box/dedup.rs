// SPDX-License-Identifier: Apache-2.0

use crate::boxes::Detection;
use crate::scalar::Scalar;

/// Greedy suppression across all classes.
///
/// Candidates are visited by [`Detection::rank_cmp`] (descending score) and a
/// candidate is kept iff its IoU with every box kept so far is strictly below
/// `dedup_iou`. Output is in visiting order.
pub fn dedup_boxes<T: Scalar>(dets: &[Detection<T>], dedup_iou: T) -> Vec<Detection<T>> {
    let mut ordered: Vec<&Detection<T>> = dets.iter().collect();
    ordered.sort_by(|a, b| a.rank_cmp(b));
    let mut kept: Vec<Detection<T>> = Vec::with_capacity(ordered.len());
    for cand in ordered {
        if kept.iter().all(|k| k.bbox.iou(&cand.bbox) < dedup_iou) {
            kept.push(*cand);
        }
    }
    kept
}
