// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("no separation: all values are equal")]
    NoSeparation,
    #[error("degenerate class {0}")]
    DegenerateClass(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("frame {found} does not follow frame {previous}")]
    Order { previous: u64, found: u64 },
    #[error("no ground-truth boxes")]
    EmptyGroundTruth,
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
