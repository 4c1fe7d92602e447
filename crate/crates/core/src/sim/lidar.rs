use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GroundTruthBox, SceneError};
use crate::grid::{Point, Pose2D};

/// Beam count that yields one BEV point per azimuth hit.
pub const REFERENCE_BEAMS: u32 = 16;

/// Planar spinning LiDAR. Beam count scales point density; there are no
/// elevation rings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LidarModel {
    pub beams: u32,
    pub azimuth_step_deg: f64,
    pub max_range: f64,
    /// When false every hit within range is kept.
    pub dropout: bool,
    /// Floor of the distance-decaying hit probability.
    pub min_hit_probability: f64,
}

impl Default for LidarModel {
    fn default() -> Self {
        Self {
            beams: 16,
            azimuth_step_deg: 0.2,
            max_range: 100.0,
            dropout: true,
            min_hit_probability: 0.05,
        }
    }
}

impl LidarModel {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.beams == 0 {
            return Err(SceneError::InvalidLidar("beams must be >= 1".into()));
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(SceneError::InvalidLidar(format!("max_range {}", self.max_range)));
        }
        if !(self.azimuth_step_deg > 0.0 && self.azimuth_step_deg <= 90.0) {
            return Err(SceneError::InvalidLidar(format!(
                "azimuth_step_deg {}",
                self.azimuth_step_deg
            )));
        }
        if !(0.0..=1.0).contains(&self.min_hit_probability) {
            return Err(SceneError::InvalidLidar(format!(
                "min_hit_probability {}",
                self.min_hit_probability
            )));
        }
        Ok(())
    }

    /// p(d) = clamp(1 - d / max_range, floor, 1), or 1 without dropout.
    pub fn hit_probability(&self, distance: f64) -> f64 {
        if !self.dropout {
            return 1.0;
        }
        (1.0 - distance / self.max_range).clamp(self.min_hit_probability, 1.0)
    }

    /// Independent point draws per azimuth hit.
    pub fn draws_per_hit(&self) -> u32 {
        self.beams.div_ceil(REFERENCE_BEAMS)
    }

    pub fn ray_count(&self) -> usize {
        (360.0 / self.azimuth_step_deg).round() as usize
    }

    /// Local-frame azimuth of ray `k`, starting at -pi.
    pub fn azimuth(&self, k: usize) -> f64 {
        -std::f64::consts::PI + k as f64 * self.azimuth_step_deg.to_radians()
    }
}

/// Entry distance of a ray into a box, if the ray starts outside and hits it.
pub(crate) fn ray_box_entry(origin: Point, dir: (f64, f64), b: &GroundTruthBox) -> Option<f64> {
    let (s, c) = b.heading.sin_cos();
    let (dx, dy) = (origin.x - b.center.x, origin.y - b.center.y);
    let o = [c * dx + s * dy, -s * dx + c * dy];
    let d = [c * dir.0 + s * dir.1, -s * dir.0 + c * dir.1];
    let half = [b.length / 2.0, b.width / 2.0];
    let (mut t_near, mut t_far) = (f64::NEG_INFINITY, f64::INFINITY);
    for axis in 0..2 {
        if d[axis].abs() < 1e-12 {
            if o[axis].abs() > half[axis] {
                return None;
            }
            continue;
        }
        let t1 = (-half[axis] - o[axis]) / d[axis];
        let t2 = (half[axis] - o[axis]) / d[axis];
        t_near = t_near.max(t1.min(t2));
        t_far = t_far.min(t1.max(t2));
    }
    (t_far >= t_near && t_near > 0.0).then_some(t_near)
}

/// Ray-casts `objects` from `pose`. Each ray keeps only its nearest hit;
/// each hit yields up to [`LidarModel::draws_per_hit`] points, each kept with
/// probability p(d). Returned points are in the vehicle's local frame, paired
/// with the index of the object they landed on.
///
/// Randomness is drawn per ray from its own stream, so a ray's outcome does
/// not depend on what other rays hit.
pub fn cast_rays_labeled(objects: &[GroundTruthBox], pose: &Pose2D, lidar: &LidarModel, seed: u64) -> Vec<(Point, usize)> {
    let origin = pose.position();
    let draws = lidar.draws_per_hit();
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for k in 0..lidar.ray_count() {
        let theta = lidar.azimuth(k);
        let (s, c) = (pose.heading + theta).sin_cos();
        let nearest = objects
            .iter()
            .enumerate()
            .filter_map(|(i, b)| ray_box_entry(origin, (c, s), b).map(|t| (t, i)))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        let Some((t, object)) = nearest else { continue };
        if t > lidar.max_range {
            continue;
        }
        let p = lidar.hit_probability(t);
        let mut rng = base.clone();
        rng.set_stream(k as u64);
        let (ls, lc) = theta.sin_cos();
        let local = Point::new(t * lc, t * ls);
        for _ in 0..draws {
            if p >= 1.0 || rng.gen::<f64>() < p {
                out.push((local, object));
            }
        }
    }
    out
}

/// [`cast_rays_labeled`] without the object labels.
pub fn cast_rays(objects: &[GroundTruthBox], pose: &Pose2D, lidar: &LidarModel, seed: u64) -> Vec<Point> {
    cast_rays_labeled(objects, pose, lidar, seed)
        .into_iter()
        .map(|(p, _)| p)
        .collect()
}
