//! LVM1 mask-stack files.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "LVM1"
//!      4     2  version (u16 LE, currently 1)
//!      6     4  width (u32 LE)
//!     10     4  height (u32 LE)
//!     14     4  n_frames (u32 LE)
//!     18     4  fps (f32 LE)
//!     22     …  n_frames × height × width bytes, each 0 or 1
//! ```

use crate::geometry::BinaryMask;
use std::path::Path;
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"LVM1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 22;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad magic {found:?} at byte 0, expected \"LVM1\"")]
    BadMagic { found: Vec<u8> },
    #[error("corrupt header at byte {offset}: {reason}")]
    CorruptHeader { offset: usize, reason: String },
    #[error("truncated payload at byte {offset}: expected {expected} payload bytes, found {actual}")]
    TruncatedPayload { offset: usize, expected: usize, actual: usize },
    #[error("{extra} unexpected bytes after the payload at byte {offset}")]
    TrailingBytes { offset: usize, extra: usize },
    #[error("invalid pixel value {value} at byte {offset}")]
    InvalidPixelValue { offset: usize, value: u8 },
    #[error("cannot write stack: {0}")]
    InvalidStack(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskStack {
    pub masks: Vec<BinaryMask>,
    pub fps: f32,
    pub width: usize,
    pub height: usize,
}

fn u32_at(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("4-byte slice"))
}

pub fn decode_mask_stack(bytes: &[u8]) -> Result<MaskStack, FormatError> {
    if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
        return Err(FormatError::BadMagic {
            found: bytes[..bytes.len().min(4)].to_vec(),
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::CorruptHeader {
            offset: bytes.len(),
            reason: format!("header needs {HEADER_LEN} bytes, file has {}", bytes.len()),
        });
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(FormatError::CorruptHeader {
            offset: 4,
            reason: format!("unsupported version {version}"),
        });
    }
    let (width, height, n_frames) = (u32_at(bytes, 6) as usize, u32_at(bytes, 10) as usize, u32_at(bytes, 14) as usize);
    let fps = f32::from_le_bytes(bytes[18..22].try_into().expect("4-byte slice"));
    if !(fps.is_finite() && fps > 0.0) {
        return Err(FormatError::CorruptHeader {
            offset: 18,
            reason: format!("fps must be positive and finite, got {fps}"),
        });
    }
    if n_frames > 0 && (width == 0 || height == 0) {
        return Err(FormatError::CorruptHeader {
            offset: 6,
            reason: format!("frame size {width}x{height}"),
        });
    }
    let frame_len = width.checked_mul(height);
    let expected = frame_len.and_then(|f| f.checked_mul(n_frames)).ok_or_else(|| FormatError::CorruptHeader {
        offset: 6,
        reason: format!("{n_frames} frames of {width}x{height} overflow"),
    })?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() < expected {
        return Err(FormatError::TruncatedPayload {
            offset: bytes.len(),
            expected,
            actual: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(FormatError::TrailingBytes {
            offset: HEADER_LEN + expected,
            extra: payload.len() - expected,
        });
    }
    if let Some(i) = payload.iter().position(|&b| b > 1) {
        return Err(FormatError::InvalidPixelValue {
            offset: HEADER_LEN + i,
            value: payload[i],
        });
    }
    let masks = if n_frames == 0 {
        Vec::new()
    } else {
        payload
            .chunks_exact(width * height)
            .map(|c| BinaryMask::from_vec(width, height, c.to_vec()).expect("validated dimensions and pixels"))
            .collect()
    };
    Ok(MaskStack {
        masks,
        fps,
        width,
        height,
    })
}

pub fn encode_mask_stack(masks: &[BinaryMask], fps: f32) -> Result<Vec<u8>, FormatError> {
    let (width, height) = masks.first().map_or((0, 0), |m| (m.width(), m.height()));
    if let Some(i) = masks.iter().position(|m| m.width() != width || m.height() != height) {
        return Err(FormatError::InvalidStack(format!(
            "frame {i} is {}x{}, frame 0 is {width}x{height}",
            masks[i].width(),
            masks[i].height()
        )));
    }
    if !(fps.is_finite() && fps > 0.0) {
        return Err(FormatError::InvalidStack(format!("fps must be positive and finite, got {fps}")));
    }
    let dim = |v: usize, what: &str| u32::try_from(v).map_err(|_| FormatError::InvalidStack(format!("{what} {v} exceeds u32")));
    let mut out = Vec::with_capacity(HEADER_LEN + masks.len() * width * height);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&dim(width, "width")?.to_le_bytes());
    out.extend_from_slice(&dim(height, "height")?.to_le_bytes());
    out.extend_from_slice(&dim(masks.len(), "frame count")?.to_le_bytes());
    out.extend_from_slice(&fps.to_le_bytes());
    for m in masks {
        out.extend_from_slice(m.as_bytes());
    }
    Ok(out)
}

pub fn read_mask_stack(path: impl AsRef<Path>) -> Result<MaskStack, FormatError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode_mask_stack(&bytes)
}

pub fn write_mask_stack(path: impl AsRef<Path>, masks: &[BinaryMask], fps: f32) -> Result<(), FormatError> {
    let path = path.as_ref();
    let bytes = encode_mask_stack(masks, fps)?;
    std::fs::write(path, bytes).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}
