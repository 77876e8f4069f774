// SPDX-License-Identifier: Apache-2.0

//! JSON detection files.

use std::path::Path;

use camloc_core::{BoundingBox, Detection, FrameDetections};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionsFile {
    pub classes: Vec<String>,
    pub frames: Vec<FrameRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame_id: u64,
    pub boxes: Vec<BoxRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxRecord {
    pub class_id: usize,
    pub score: f64,
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub from_track: bool,
}

pub fn class_names(count: usize) -> Vec<String> {
    (0..count).map(|c| format!("class_{c}")).collect()
}

impl DetectionsFile {
    pub fn from_frames(classes: Vec<String>, frames: &[FrameDetections<f64>]) -> Self {
        let frames = frames
            .iter()
            .map(|f| FrameRecord {
                frame_id: f.frame_id,
                boxes: f
                    .detections
                    .iter()
                    .map(|d| BoxRecord {
                        class_id: d.class_id,
                        score: d.score,
                        x_min: d.bbox.x_min(),
                        y_min: d.bbox.y_min(),
                        x_max: d.bbox.x_max(),
                        y_max: d.bbox.y_max(),
                        from_track: d.from_track,
                    })
                    .collect(),
            })
            .collect();
        Self { classes, frames }
    }

    /// Validated core frames: ids strictly increasing, class ids inside the
    /// class list (when one is given), boxes and scores well formed.
    pub fn to_frames(&self) -> Result<Vec<FrameDetections<f64>>, CliError> {
        let mut out: Vec<FrameDetections<f64>> = Vec::with_capacity(self.frames.len());
        for frame in &self.frames {
            if let Some(prev) = out.last() {
                if frame.frame_id <= prev.frame_id {
                    return Err(CliError::Input(format!(
                        "frame ids must increase: {} follows {}",
                        frame.frame_id, prev.frame_id
                    )));
                }
            }
            let mut dets = Vec::with_capacity(frame.boxes.len());
            for (i, b) in frame.boxes.iter().enumerate() {
                let context =
                    |e: camloc_core::Error| CliError::Input(format!("frame {} box {i}: {e}", frame.frame_id));
                if !self.classes.is_empty() && b.class_id >= self.classes.len() {
                    return Err(CliError::Input(format!(
                        "frame {} box {i}: class {} outside {} classes",
                        frame.frame_id,
                        b.class_id,
                        self.classes.len()
                    )));
                }
                let bbox = BoundingBox::new(b.x_min, b.y_min, b.x_max, b.y_max).map_err(context)?;
                let mut det = Detection::new(bbox, b.class_id, b.score).map_err(context)?;
                det.from_track = b.from_track;
                dets.push(det);
            }
            out.push(FrameDetections::new(frame.frame_id, dets));
        }
        Ok(out)
    }

    pub fn num_classes(&self) -> usize {
        let seen = self
            .frames
            .iter()
            .flat_map(|f| f.boxes.iter().map(|b| b.class_id + 1))
            .max()
            .unwrap_or(0);
        seen.max(self.classes.len())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: malformed detections file: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("detections serialize");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json()).map_err(|e| CliError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_validate() {
        let text = r#"{"classes":["a","b"],"frames":[
            {"frame_id":0,"boxes":[{"class_id":1,"score":0.5,"x_min":0,"y_min":0,"x_max":4,"y_max":4}]},
            {"frame_id":2,"boxes":[]}]}"#;
        let file: DetectionsFile = serde_json::from_str(text).unwrap();
        let frames = file.to_frames().unwrap();
        assert_eq!(frames.len(), 2);
        assert!(!frames[0].detections[0].from_track);
        let back = DetectionsFile::from_frames(file.classes.clone(), &frames);
        assert_eq!(back, file);
        assert!(!back.to_json().contains("from_track"));
    }

    #[test]
    fn rejects_bad_content() {
        let bad = [
            r#"{"classes":[],"frames":[{"frame_id":3,"boxes":[]},{"frame_id":3,"boxes":[]}]}"#,
            r#"{"classes":["a"],"frames":[{"frame_id":0,"boxes":[{"class_id":1,"score":0.5,"x_min":0,"y_min":0,"x_max":4,"y_max":4}]}]}"#,
            r#"{"classes":[],"frames":[{"frame_id":0,"boxes":[{"class_id":0,"score":1.5,"x_min":0,"y_min":0,"x_max":4,"y_max":4}]}]}"#,
            r#"{"classes":[],"frames":[{"frame_id":0,"boxes":[{"class_id":0,"score":0.5,"x_min":5,"y_min":0,"x_max":4,"y_max":4}]}]}"#,
        ];
        for text in bad {
            let file: DetectionsFile = serde_json::from_str(text).unwrap();
            assert!(matches!(file.to_frames(), Err(CliError::Input(_))), "{text}");
        }
    }
}
