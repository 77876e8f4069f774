// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use thiserror::Error;

use crate::camt::CamtError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Camt(#[from] CamtError),
    #[error("{0}")]
    Core(#[from] camloc_core::Error),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }

    /// 3 for an evaluation without ground truth, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(camloc_core::Error::EmptyGroundTruth) => 3,
            _ => 2,
        }
    }
}
