use serde::{Deserialize, Serialize};

use super::{EvalConfig, MetricsError};
use crate::grid::{Aabb, FeatureMap, Point};

/// Axis-aligned detection in the map owner's frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: Aabb,
    pub confidence: f64,
    /// Mean channel-max activation over the cluster.
    pub mean_activation: f64,
    pub cells: usize,
}

impl Detection {
    pub fn new(bbox: Aabb, confidence: f64) -> Result<Self, MetricsError> {
        if !(bbox.area() > 0.0) {
            return Err(MetricsError::EmptyBox);
        }
        if !(0.0..=1.0).contains(&confidence) {
            return Err(MetricsError::Confidence(confidence));
        }
        Ok(Self {
            bbox,
            confidence,
            mean_activation: f64::NAN,
            cells: 0,
        })
    }
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// 4-connected components of `active` on a `width`-wide row-major grid.
/// Components come out in order of their first cell in scan order, each
/// listing its cells ascending.
pub fn connected_components(active: &[bool], width: usize) -> Vec<Vec<usize>> {
    let height = active.len().checked_div(width).unwrap_or(0);
    let mut seen = vec![false; active.len()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..active.len() {
        if !active[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut comp = Vec::new();
        while let Some(i) = stack.pop() {
            comp.push(i);
            let (r, c) = (i / width, i % width);
            let mut visit = |j: usize| {
                if active[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if c > 0 {
                visit(i - 1);
            }
            if c + 1 < width {
                visit(i + 1);
            }
            if r > 0 {
                visit(i - width);
            }
            if r + 1 < height {
                visit(i + width);
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Every cluster above the activation threshold with its confidence, before
/// any confidence cut. Order is deterministic (scan order of first cell).
pub fn detect_candidates(map: &FeatureMap, cfg: &EvalConfig) -> Vec<Detection> {
    let activation = map.channel_max();
    let tau = cfg.activation_threshold as f32;
    let active: Vec<bool> = activation.iter().map(|&a| a >= tau).collect();
    let spec = map.spec();
    let (x0, _) = spec.x_range();
    let (y0, _) = spec.y_range();
    let (vx, vy) = (spec.voxel_x(), spec.voxel_y());
    connected_components(&active, map.width())
        .into_iter()
        .map(|cells| {
            let (mut r0, mut r1, mut c0, mut c1) = (usize::MAX, 0, usize::MAX, 0);
            let mut sum = 0.0f64;
            for &i in &cells {
                let cell = spec.unflat(i);
                r0 = r0.min(cell.row);
                r1 = r1.max(cell.row);
                c0 = c0.min(cell.col);
                c1 = c1.max(cell.col);
                sum += activation[i] as f64;
            }
            let mean = sum / cells.len() as f64;
            let bbox = Aabb::new(
                Point::new(x0 + c0 as f64 * vx, y0 + r0 as f64 * vy),
                Point::new(x0 + (c1 + 1) as f64 * vx, y0 + (r1 + 1) as f64 * vy),
            );
            Detection {
                bbox,
                confidence: logistic(cfg.logistic_k * (mean - cfg.logistic_m0)),
                mean_activation: mean,
                cells: cells.len(),
            }
        })
        .collect()
}

/// Threshold-and-cluster detector: channel max, activation cut, 4-connected
/// clusters, logistic confidence from the cluster mean, confidence cut.
pub fn detect(map: &FeatureMap, cfg: &EvalConfig) -> Vec<Detection> {
    filter_confident(detect_candidates(map, cfg), cfg.confidence_threshold)
}

pub fn filter_confident(dets: Vec<Detection>, threshold: f64) -> Vec<Detection> {
    dets.into_iter().filter(|d| d.confidence >= threshold).collect()
}
