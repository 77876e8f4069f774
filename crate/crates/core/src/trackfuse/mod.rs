// SPDX-License-Identifier: Apache-2.0

//! Temporal stabilization of detections and pseudo-label gating.

mod kalman;
mod pseudo;
mod tracker;

pub use kalman::{
    kalman_predict, kalman_update, Covariance, FuseConfig, StateVector, TrackState, OBS_DIM, STATE_DIM,
};
pub use pseudo::{
    bootstrap_round, filter_by_score, filter_pseudo_labels, BootstrapRound, ClassGateStats, PseudoLabelSplit,
};
pub use tracker::{associate, fuse_box, track_sequence, Association, Tracker};
