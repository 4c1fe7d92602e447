//! Binary feature-map messages and raw-vs-feature bandwidth accounting.
//!
//! Message layout, all little-endian:
//!
//! | offset | size | field |
//! |---|---|---|
//! | 0 | 4 | magic `CFF1` |
//! | 4 | 24 | sender pose: x, y, heading (f64) |
//! | 28 | 48 | grid: x_min, x_max, y_min, y_max, voxel_x, voxel_y (f64) |
//! | 76 | 8 | grid cells_x, cells_y (u32) |
//! | 84 | 12 | C, H, W (u32) |
//! | 96 | 4·C·H·W | payload, f32, channel-major then row-major |
//! | end−4 | 4 | CRC-32 (IEEE) of every preceding byte |
//!
//! The z range is not carried; decoded maps get the default `[-3, 1]` m.

use thiserror::Error;

use crate::grid::{FeatureMap, GridSpec, Pose2D};

pub const MAGIC: [u8; 4] = *b"CFF1";
pub const HEADER_LEN: usize = 96;
pub const CRC_LEN: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("message truncated: need {expected} bytes, have {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("{extra} unexpected trailing bytes")]
    TrailingBytes { extra: usize },
    #[error("CRC mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    CrcMismatch { stored: u32, computed: u32 },
    #[error("dimensions {channels}x{height}x{width} overflow or disagree with the grid")]
    DimensionOverflow { channels: u32, height: u32, width: u32 },
    #[error("invalid header: {0}")]
    InvalidHeader(String),
}

/// Exact encoded size of a `channels x height x width` map.
pub fn message_len(channels: usize, height: usize, width: usize) -> usize {
    HEADER_LEN + 4 * channels * height * width + CRC_LEN
}

pub fn encode(map: &FeatureMap, pose: Pose2D) -> Vec<u8> {
    let spec = map.spec();
    let mut out = Vec::with_capacity(message_len(map.channels(), map.height(), map.width()));
    out.extend_from_slice(&MAGIC);
    for v in [pose.x, pose.y, pose.heading] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let (x0, x1) = spec.x_range();
    let (y0, y1) = spec.y_range();
    for v in [x0, x1, y0, y1, spec.voxel_x(), spec.voxel_y()] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in [spec.cells_x(), spec.cells_y(), map.channels(), map.height(), map.width()] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for v in map.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn f64_at(bytes: &[u8], offset: usize) -> f64 {
    f64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap())
}

fn u32_at(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap())
}

/// Parses and validates a message. The returned map carries the decoded pose.
pub fn decode(bytes: &[u8]) -> Result<(FeatureMap, Pose2D), CodecError> {
    let min = HEADER_LEN + CRC_LEN;
    if bytes.len() < min {
        return Err(CodecError::Truncated {
            expected: min,
            actual: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(CodecError::BadMagic(magic));
    }
    let (channels, height, width) = (u32_at(bytes, 84), u32_at(bytes, 88), u32_at(bytes, 92));
    let overflow = CodecError::DimensionOverflow {
        channels,
        height,
        width,
    };
    let payload_len = (channels as usize)
        .checked_mul(height as usize)
        .and_then(|n| n.checked_mul(width as usize))
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| overflow.clone())?;
    let expected = payload_len
        .checked_add(min)
        .ok_or_else(|| overflow.clone())?;
    if bytes.len() < expected {
        return Err(CodecError::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(CodecError::TrailingBytes {
            extra: bytes.len() - expected,
        });
    }
    let body = &bytes[..expected - CRC_LEN];
    let stored = u32_at(bytes, expected - CRC_LEN);
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(CodecError::CrcMismatch { stored, computed });
    }

    let heading = f64_at(bytes, 20);
    if !(-std::f64::consts::PI..=std::f64::consts::PI).contains(&heading) {
        return Err(CodecError::InvalidHeader(format!("heading {heading} not normalized")));
    }
    let pose = Pose2D::new(f64_at(bytes, 4), f64_at(bytes, 12), heading);
    let spec = GridSpec::new(
        (f64_at(bytes, 28), f64_at(bytes, 36)),
        (f64_at(bytes, 44), f64_at(bytes, 52)),
        GridSpec::DEFAULT_Z_RANGE,
        f64_at(bytes, 60),
        f64_at(bytes, 68),
    )
    .map_err(|e| CodecError::InvalidHeader(e.to_string()))?;
    let (cells_x, cells_y) = (u32_at(bytes, 76) as usize, u32_at(bytes, 80) as usize);
    if cells_x != spec.cells_x() || cells_y != spec.cells_y() {
        return Err(CodecError::InvalidHeader(format!(
            "cell counts {cells_x}x{cells_y} disagree with grid {}x{}",
            spec.cells_x(),
            spec.cells_y()
        )));
    }
    if width as usize != cells_x || height as usize != cells_y || channels == 0 {
        return Err(overflow);
    }
    let values = body[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let map = FeatureMap::from_values(spec, channels as usize, values, pose)
        .map_err(|e| CodecError::InvalidHeader(e.to_string()))?;
    Ok((map, pose))
}

/// Bytes per raw point: x, y, z as f32.
pub const RAW_POINT_BYTES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BandwidthReport {
    pub points: usize,
    pub raw_bytes: usize,
    pub feature_bytes: usize,
    /// raw / feature; 0 when the feature message is empty.
    pub ratio: f64,
    pub frame_rate: f64,
    pub link_rate_bps: f64,
    pub raw_throughput_bps: f64,
    pub feature_throughput_bps: f64,
    pub raw_transfer_s: f64,
    pub feature_transfer_s: f64,
}

impl BandwidthReport {
    /// Whether the link sustains the raw stream at the frame rate.
    pub fn raw_fits(&self) -> bool {
        self.raw_throughput_bps <= self.link_rate_bps
    }

    pub fn feature_fits(&self) -> bool {
        self.feature_throughput_bps <= self.link_rate_bps
    }
}

/// Compares streaming a raw cloud of `points` points against a feature
/// message of `msg_bytes` bytes, per frame and per second.
pub fn bandwidth_report(points: usize, msg_bytes: usize, frame_rate: f64, link_rate_bps: f64) -> Result<BandwidthReport, CodecError> {
    if !(frame_rate > 0.0 && link_rate_bps > 0.0 && frame_rate.is_finite() && link_rate_bps.is_finite()) {
        return Err(CodecError::InvalidHeader(format!(
            "rates must be positive (frame_rate {frame_rate}, link_rate {link_rate_bps})"
        )));
    }
    let raw_bytes = RAW_POINT_BYTES * points;
    let bits = |bytes: usize| bytes as f64 * 8.0;
    Ok(BandwidthReport {
        points,
        raw_bytes,
        feature_bytes: msg_bytes,
        ratio: if msg_bytes == 0 { 0.0 } else { raw_bytes as f64 / msg_bytes as f64 },
        frame_rate,
        link_rate_bps,
        raw_throughput_bps: bits(raw_bytes) * frame_rate,
        feature_throughput_bps: bits(msg_bytes) * frame_rate,
        raw_transfer_s: bits(raw_bytes) / link_rate_bps,
        feature_transfer_s: bits(msg_bytes) / link_rate_bps,
    })
}
