use serde::{Deserialize, Serialize};

use crate::grid::{world_to_cell, FeatureMap, GridSpec, Point, Pose2D};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractorConfig {
    /// Point count at which a cell's base value reaches 1.
    pub n_sat: u32,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        Self { n_sat: 20 }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fixed per-channel, per-cell modulation in [0.5, 1].
pub(crate) fn modulation(channel: usize, cell: usize) -> f32 {
    let h = splitmix64(((channel as u64) << 32) ^ cell as u64);
    let unit = (h >> 40) as f32 / (1u64 << 24) as f32;
    0.5 + 0.5 * unit
}

/// ln(1 + n) / ln(1 + n_sat), clamped to 1.
pub(crate) fn base_value(n: u32, n_sat: u32) -> f32 {
    if n == 0 {
        return 0.0;
    }
    let v = (1.0 + n as f64).ln() / (1.0 + n_sat.max(1) as f64).ln();
    v.min(1.0) as f32
}

/// Density stand-in for a learned BEV backbone. Points outside the grid are
/// dropped; empty cells are exactly zero in every channel.
///
/// # Panics
/// If `channels` is zero.
pub fn extract_features(cloud: &[Point], spec: &GridSpec, channels: usize, cfg: &ExtractorConfig) -> FeatureMap {
    assert!(channels >= 1, "extract_features needs at least one channel");
    let cells = spec.cell_count();
    let mut counts = vec![0u32; cells];
    for &p in cloud {
        if let Some(cell) = world_to_cell(spec, p) {
            counts[spec.flat(cell)] += 1;
        }
    }
    let mut map = FeatureMap::zeros(spec.clone(), channels, Pose2D::default()).expect("channels checked above");
    let values = map.values_mut();
    for (cell, &n) in counts.iter().enumerate().filter(|(_, &n)| n > 0) {
        let b = base_value(n, cfg.n_sat);
        for c in 0..channels {
            values[c * cells + cell] = b * modulation(c, cell);
        }
    }
    map
}
