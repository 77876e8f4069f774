// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;

use super::kalman::{kalman_predict, kalman_update, FuseConfig, TrackState};
use crate::boxes::{BoundingBox, Detection, FrameDetections};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Association {
    /// `(track index, detection index)`
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_dets: Vec<usize>,
}

/// Greedy same-class matching of track boxes to detections.
///
/// Overlapping pairs with IoU `>= match_iou` are taken in order of
/// descending IoU (ties by track index, then detection index); each side is
/// used at most once. Tracks whose box has left the image never match.
pub fn associate<T: Scalar>(tracks: &[TrackState<T>], dets: &[Detection<T>], match_iou: T) -> Association {
    let mut candidates: Vec<(T, usize, usize)> = Vec::new();
    for (ti, track) in tracks.iter().enumerate() {
        let Some(tbox) = track.bbox() else { continue };
        for (di, det) in dets.iter().enumerate() {
            if det.class_id != track.class_id {
                continue;
            }
            let v = tbox.iou(&det.bbox);
            if v >= match_iou && v > T::zero() {
                candidates.push((v, ti, di));
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut track_used = vec![false; tracks.len()];
    let mut det_used = vec![false; dets.len()];
    let mut pairs = Vec::new();
    for (_, ti, di) in candidates {
        if !track_used[ti] && !det_used[di] {
            track_used[ti] = true;
            det_used[di] = true;
            pairs.push((ti, di));
        }
    }
    Association {
        pairs,
        unmatched_tracks: (0..tracks.len()).filter(|&i| !track_used[i]).collect(),
        unmatched_dets: (0..dets.len()).filter(|&i| !det_used[i]).collect(),
    }
}

/// Blends center and size: `weight * det + (1 - weight) * track`.
pub fn fuse_box<T: Scalar>(det: &BoundingBox<T>, track: &BoundingBox<T>, weight: T) -> BoundingBox<T> {
    let (d, t) = (det.to_cxcywh(), track.to_cxcywh());
    let mix = |i: usize| weight * d[i] + (T::one() - weight) * t[i];
    // A convex blend of two boxes in the non-negative quadrant stays there up
    // to rounding; the clipped constructor absorbs that.
    BoundingBox::from_center_clipped(mix(0), mix(1), mix(2), mix(3)).unwrap_or(*det)
}

/// Frame-by-frame detection/track fusion for one video.
#[derive(Debug, Clone)]
pub struct Tracker<T> {
    cfg: FuseConfig<T>,
    tracks: Vec<TrackState<T>>,
    next_id: u64,
    last_frame: Option<u64>,
}

impl<T: Scalar> Tracker<T> {
    pub fn new(cfg: FuseConfig<T>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            tracks: Vec::new(),
            next_id: 0,
            last_frame: None,
        })
    }

    pub fn tracks(&self) -> &[TrackState<T>] {
        &self.tracks
    }

    /// Consumes one frame of detections and returns the fused frame.
    ///
    /// Matched detections are blended with their track's prediction and keep
    /// the detection score; unmatched detections spawn tracks and pass
    /// through unchanged; tracks that miss are emitted at their prediction
    /// (flagged `from_track`, score decayed per miss) until they exceed
    /// `max_misses`.
    pub fn step(&mut self, frame: &FrameDetections<T>) -> Result<FrameDetections<T>> {
        let steps = match self.last_frame {
            Some(prev) if frame.frame_id <= prev => {
                return Err(Error::Order {
                    previous: prev,
                    found: frame.frame_id,
                })
            }
            Some(prev) => frame.frame_id - prev,
            None => 0,
        };
        self.last_frame = Some(frame.frame_id);

        for track in &mut self.tracks {
            for _ in 0..steps {
                *track = kalman_predict(track, &self.cfg);
            }
        }

        let dets = &frame.detections;
        let assoc = associate(&self.tracks, dets, self.cfg.match_iou);
        let mut out = Vec::with_capacity(dets.len() + assoc.unmatched_tracks.len());

        let mut pairs = assoc.pairs.clone();
        pairs.sort_by_key(|&(_, di)| di);
        for (ti, di) in pairs {
            let det = dets[di];
            let predicted = self.tracks[ti].bbox().expect("matched track has a box");
            let mut updated = kalman_update(&self.tracks[ti], &det.bbox, &self.cfg)?;
            updated.score = det.score;
            self.tracks[ti] = updated;
            out.push(Detection {
                bbox: fuse_box(&det.bbox, &predicted, self.cfg.det_weight),
                ..det
            });
        }

        for &ti in &assoc.unmatched_tracks {
            let track = &mut self.tracks[ti];
            track.misses += 1;
            if track.misses > self.cfg.max_misses {
                continue;
            }
            if let Some(bbox) = track.bbox() {
                let decay = self.cfg.miss_decay.powi(track.misses as i32);
                out.push(Detection {
                    bbox,
                    class_id: track.class_id,
                    score: (track.score * decay).min(T::one()).max(T::zero()),
                    from_track: true,
                });
            }
        }
        let max_misses = self.cfg.max_misses;
        self.tracks
            .retain(|t| t.misses <= max_misses && t.bbox().is_some());

        for &di in &assoc.unmatched_dets {
            let det = dets[di];
            out.push(det);
            self.tracks.push(TrackState::spawn(
                &det.bbox,
                det.class_id,
                det.score,
                self.next_id,
                &self.cfg,
            ));
            self.next_id += 1;
        }

        Ok(FrameDetections::new(frame.frame_id, out))
    }
}

/// Runs a [`Tracker`] over frames in temporal order.
pub fn track_sequence<T: Scalar>(
    frames: &[FrameDetections<T>],
    cfg: &FuseConfig<T>,
) -> Result<Vec<FrameDetections<T>>> {
    let mut tracker = Tracker::new(cfg.clone())?;
    frames.iter().map(|f| tracker.step(f)).collect()
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
    fn fuse_examples() {
        let d = BoundingBox::<f64>::from_center(10.0, 10.0, 6.0, 6.0).unwrap();
        let t = BoundingBox::from_center(20.0, 20.0, 6.0, 6.0).unwrap();
        assert_eq!(fuse_box(&d, &t, 1.0), d);
        let same = fuse_box(&d, &d, 0.3);
        for (a, b) in same.coords().iter().zip(d.coords()) {
            assert!((a - b).abs() < 1e-12);
        }
        let f = fuse_box(&d, &t, 0.7);
        let (cx, cy) = f.center();
        assert!((cx - 13.0).abs() < 1e-12 && (cy - 13.0).abs() < 1e-12);
    }

    #[test]
    fn association_basics() {
        let cfg = FuseConfig::default();
        let b = bx(10.0, 10.0, 20.0, 20.0);
        let track = TrackState::spawn(&b, 0, 0.9, 0, &cfg);
        let a = associate(std::slice::from_ref(&track), &[det(b, 0, 0.9)], 0.3);
        assert_eq!(a.pairs, vec![(0, 0)]);
        let far = associate(
            std::slice::from_ref(&track),
            &[det(bx(50.0, 50.0, 60.0, 60.0), 0, 0.9)],
            0.3,
        );
        assert!(far.pairs.is_empty());
        assert_eq!((far.unmatched_tracks, far.unmatched_dets), (vec![0], vec![0]));
        let other_class = associate(&[track], &[det(b, 1, 0.9)], 0.3);
        assert!(other_class.pairs.is_empty());
    }

    #[test]
    fn empty_sequence() {
        let out = track_sequence::<f64>(&[], &FuseConfig::default()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn out_of_order_frames_are_rejected() {
        let frames = vec![FrameDetections::<f64>::empty(3), FrameDetections::empty(3)];
        assert_eq!(
            track_sequence(&frames, &FuseConfig::default()),
            Err(Error::Order {
                previous: 3,
                found: 3
            })
        );
    }

    #[test]
    fn stationary_detections_pass_through() {
        let b = bx(10.0, 12.0, 30.0, 28.0);
        let frames: Vec<_> = (0..8)
            .map(|i| FrameDetections::new(i, vec![det(b, 2, 0.8)]))
            .collect();
        let out = track_sequence(&frames, &FuseConfig::default()).unwrap();
        for f in &out {
            assert_eq!(f.detections.len(), 1);
            let d = f.detections[0];
            assert!(!d.from_track);
            assert_eq!(d.score, 0.8);
            for (a, e) in d.bbox.coords().iter().zip(b.coords()) {
                assert!((a - e).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn coasts_through_a_missed_frame() {
        let frames: Vec<_> = (0..10u64)
            .map(|i| {
                let b = BoundingBox::from_center(20.0 + 2.0 * i as f64, 30.0, 12.0, 12.0).unwrap();
                let dets = if i == 6 { vec![] } else { vec![det(b, 0, 0.9)] };
                FrameDetections::new(i, dets)
            })
            .collect();
        let out = track_sequence(&frames, &FuseConfig::default()).unwrap();
        let coasted = &out[6].detections;
        assert_eq!(coasted.len(), 1);
        assert!(coasted[0].from_track);
        assert!((coasted[0].score - 0.81).abs() < 1e-12);
        let truth = BoundingBox::from_center(32.0, 30.0, 12.0, 12.0).unwrap();
        assert!(coasted[0].bbox.iou(&truth) > 0.7);
    }

    #[test]
    fn tracks_expire_after_max_misses() {
        let b = bx(10.0, 10.0, 20.0, 20.0);
        let mut frames = vec![FrameDetections::new(0, vec![det(b, 0, 1.0)])];
        frames.extend((1..10).map(FrameDetections::empty));
        let cfg = FuseConfig {
            max_misses: 2,
            ..FuseConfig::default()
        };
        let out = track_sequence(&frames, &cfg).unwrap();
        let counts: Vec<usize> = out.iter().map(|f| f.detections.len()).collect();
        assert_eq!(counts, vec![1, 1, 1, 0, 0, 0, 0, 0, 0, 0]);
    }
}
