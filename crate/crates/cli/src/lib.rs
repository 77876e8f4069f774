// SPDX-License-Identifier: Apache-2.0

//! File formats, synthetic scenes and subcommands behind the `camloc` binary.

pub mod camt;
pub mod commands;
pub mod detections;
pub mod error;
pub mod synth;
pub mod tables;

pub use error::CliError;
