// SPDX-License-Identifier: Apache-2.0

//! Binary heatmap container.
//!
//! A 24-byte little-endian header (`"CAMT"`, version `u16 = 1`, reserved
//! `u16 = 0`, then `u32` frames, classes, height, width) followed by the
//! `f32` payload in frame, class, row, column order.

use std::io::Write;
use std::path::Path;

use camloc_core::HeatmapStack;
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"CAMT";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 24;

#[derive(Debug, Error)]
pub enum CamtError {
    #[error("invalid CAMT header: {0}")]
    Header(String),
    #[error("CAMT payload holds {found} bytes, header promises {expected}")]
    Truncated { expected: u64, found: u64 },
    #[error("CAMT payload value {index} is not finite")]
    NonFinite { index: usize },
    #[error("CAMT tensor: {0}")]
    Tensor(#[from] camloc_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn u16_at(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<HeatmapStack<f32>, CamtError> {
    if bytes.len() < HEADER_LEN {
        return Err(CamtError::Header(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(CamtError::Header("bad magic".into()));
    }
    let version = u16_at(bytes, 4);
    if version != VERSION {
        return Err(CamtError::Header(format!("unsupported version {version}")));
    }
    let reserved = u16_at(bytes, 6);
    if reserved != 0 {
        return Err(CamtError::Header(format!("reserved field is {reserved}")));
    }
    let dims: [usize; 4] = std::array::from_fn(|i| u32_at(bytes, 8 + 4 * i) as usize);
    if dims.contains(&0) {
        return Err(CamtError::Header(format!("zero dimension in {dims:?}")));
    }
    let payload = &bytes[HEADER_LEN..];
    let expected = dims
        .iter()
        .try_fold(4u64, |acc, &d| acc.checked_mul(d as u64))
        .ok_or_else(|| CamtError::Header(format!("dimensions {dims:?} overflow")))?;
    if payload.len() as u64 != expected {
        return Err(CamtError::Truncated {
            expected,
            found: payload.len() as u64,
        });
    }
    let mut data = Vec::with_capacity(payload.len() / 4);
    for (index, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().expect("4 bytes"));
        if !v.is_finite() {
            return Err(CamtError::NonFinite { index });
        }
        data.push(v);
    }
    let [f, c, h, w] = dims;
    Ok(HeatmapStack::new(f, c, h, w, data)?)
}

pub fn encode(stack: &HeatmapStack<f32>) -> Result<Vec<u8>, CamtError> {
    let (f, c, h, w) = stack.shape();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * stack.data().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    for d in [f, c, h, w] {
        let d = u32::try_from(d).map_err(|_| CamtError::Header(format!("dimension {d} exceeds u32")))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    for v in stack.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn read(path: &Path) -> Result<HeatmapStack<f32>, CamtError> {
    let bytes = std::fs::read(path).map_err(|source| CamtError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode(&bytes)
}

pub fn write(path: &Path, stack: &HeatmapStack<f32>) -> Result<(), CamtError> {
    let bytes = encode(stack)?;
    let io = |source| CamtError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = std::fs::File::create(path).map_err(io)?;
    file.write_all(&bytes).map_err(io)
}
