// SPDX-License-Identifier: Apache-2.0

//! Synthetic heatmap videos with known boxes.
//!
//! Each of the `blobs_per_frame` tools owns one class and one horizontal lane
//! and drifts along it from frame to frame, so consecutive frames are
//! related the way real video is. A tool renders as an isotropic Gaussian
//! bump of peak 1 in its class map; every map gets additive Gaussian noise
//! and is clipped to `[0, 1]`. The ground-truth box spans two sigmas around
//! the center, clipped to the image.

use camloc_core::{BoundingBox, Detection, FrameDetections, HeatmapStack};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::CliError;

pub const MAX_BLOBS: usize = 3;
const MAX_VALUES: u64 = 1 << 30;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub frames: usize,
    pub classes: usize,
    pub blobs_per_frame: usize,
    pub blob_sigma: f64,
    pub noise_std: f64,
    /// Chance that a tool is missing from a frame, in both heatmap and truth.
    pub drop_rate: f64,
    pub seed: u64,
    pub height: usize,
    pub width: usize,
    /// Chance that a ground-truth box is given a wrong class.
    pub label_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            frames: 200,
            classes: 3,
            blobs_per_frame: 3,
            blob_sigma: 6.0,
            noise_std: 0.05,
            drop_rate: 0.0,
            seed: 0,
            height: 96,
            width: 96,
            label_noise: 0.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Input(format!("synth: {msg}")));
        if self.frames == 0 || self.classes == 0 || self.height == 0 || self.width == 0 {
            return bad("frames, classes, height and width must be positive".into());
        }
        if self.blobs_per_frame > MAX_BLOBS {
            return bad(format!("at most {MAX_BLOBS} blobs per frame"));
        }
        if self.blobs_per_frame > self.classes {
            return bad(format!(
                "{} blobs need as many distinct classes, only {} available",
                self.blobs_per_frame, self.classes
            ));
        }
        if !(self.blob_sigma > 0.0 && self.blob_sigma.is_finite()) {
            return bad(format!("blob sigma {} must be positive", self.blob_sigma));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad(format!("noise std {} must be >= 0", self.noise_std));
        }
        if !(0.0..1.0).contains(&self.drop_rate) {
            return bad(format!("drop rate {} outside [0, 1)", self.drop_rate));
        }
        if !(0.0..=1.0).contains(&self.label_noise) {
            return bad(format!("label noise {} outside [0, 1]", self.label_noise));
        }
        let total = [self.frames, self.classes, self.height, self.width]
            .iter()
            .try_fold(1u64, |acc, &d| acc.checked_mul(d as u64));
        if !total.is_some_and(|t| t <= MAX_VALUES) {
            return bad("tensor too large".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthScene {
    pub heatmaps: HeatmapStack<f32>,
    pub truth: Vec<FrameDetections<f64>>,
}

struct Tool {
    class_id: usize,
    lane_center: f64,
    x: f64,
    y: f64,
    vx: f64,
}

pub fn synth_scenes(cfg: &SynthConfig) -> Result<SynthScene, CliError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_std).map_err(|e| CliError::Input(format!("synth: {e}")))?;
    let (h, w, sigma) = (cfg.height as f64, cfg.width as f64, cfg.blob_sigma);
    let lane = h / cfg.blobs_per_frame.max(1) as f64;
    let (x_lo, x_hi) = (sigma.min(w / 2.0), (w - sigma).max(w / 2.0));

    let classes = sample(&mut rng, cfg.classes, cfg.blobs_per_frame).into_vec();
    let mut tools: Vec<Tool> = classes
        .into_iter()
        .enumerate()
        .map(|(j, class_id)| {
            let lane_center = (j as f64 + 0.5) * lane;
            let speed = rng.random_range(0.5..2.0);
            Tool {
                class_id,
                lane_center,
                x: rng.random_range(x_lo..=x_hi),
                y: lane_center,
                vx: if rng.random_bool(0.5) { speed } else { -speed },
            }
        })
        .collect();

    let plane = cfg.height * cfg.width;
    let mut data = vec![0f32; cfg.frames * cfg.classes * plane];
    let mut truth = Vec::with_capacity(cfg.frames);
    let two_sigma_sq = 2.0 * sigma * sigma;
    for f in 0..cfg.frames {
        let mut maps = vec![0f64; cfg.classes * plane];
        let mut boxes = Vec::new();
        for tool in &mut tools {
            tool.x += tool.vx;
            if tool.x < x_lo || tool.x > x_hi {
                tool.vx = -tool.vx;
                tool.x = tool.x.clamp(x_lo, x_hi);
            }
            tool.y =
                (tool.y + rng.random_range(-1.0..=1.0)).clamp(tool.lane_center - 3.0, tool.lane_center + 3.0);
            if rng.random_bool(cfg.drop_rate) {
                continue;
            }
            let map = &mut maps[tool.class_id * plane..(tool.class_id + 1) * plane];
            for r in 0..cfg.height {
                let dy = r as f64 + 0.5 - tool.y;
                for c in 0..cfg.width {
                    let dx = c as f64 + 0.5 - tool.x;
                    let v = (-(dx * dx + dy * dy) / two_sigma_sq).exp();
                    let cell = &mut map[r * cfg.width + c];
                    *cell = cell.max(v);
                }
            }
            let class_id = if cfg.classes > 1 && rng.random_bool(cfg.label_noise) {
                (tool.class_id + rng.random_range(1..cfg.classes)) % cfg.classes
            } else {
                tool.class_id
            };
            let r = 2.0 * sigma;
            let bbox = BoundingBox::new(
                (tool.x - r).max(0.0),
                (tool.y - r).max(0.0),
                (tool.x + r).min(w),
                (tool.y + r).min(h),
            )?;
            boxes.push(Detection::new(bbox, class_id, 1.0)?);
        }
        let out = &mut data[f * cfg.classes * plane..(f + 1) * cfg.classes * plane];
        for (dst, &v) in out.iter_mut().zip(&maps) {
            let n = if cfg.noise_std > 0.0 {
                noise.sample(&mut rng)
            } else {
                0.0
            };
            *dst = (v + n).clamp(0.0, 1.0) as f32;
        }
        truth.push(FrameDetections::new(f as u64, boxes));
    }
    let heatmaps = HeatmapStack::new(cfg.frames, cfg.classes, cfg.height, cfg.width, data)?;
    Ok(SynthScene { heatmaps, truth })
}
