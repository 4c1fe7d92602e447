//! Synthetic multi-vehicle scenes: ground-truth boxes, ray-cast BEV LiDAR
//! with occlusion and distance-dependent dropout, and a density-based
//! stand-in for a learned feature extractor.

mod features;
mod lidar;
mod scenario;

pub use features::{extract_features, ExtractorConfig};
pub use lidar::{cast_rays, cast_rays_labeled, LidarModel};
pub use scenario::{
    build_scenario, build_scenario_with, footprint_gap, occluded_far_object, point_gap, Template, SPARSE_AZIMUTH_STEP_DEG,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Aabb, FeatureMap, GridSpec, Point, Pose2D};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("unknown scenario template {0:?} (expected intersection, multilane or parking_lot)")]
    UnknownTemplate(String),
    #[error("object {id} has non-positive size {length} x {width}")]
    InvalidBox { id: u32, length: f64, width: f64 },
    #[error("objects {a} and {b} overlap (IoU {iou:.3})")]
    Overlap { a: u32, b: u32, iou: f64 },
    #[error("vehicle {0} is outside the scene bounds")]
    VehicleOutOfBounds(usize),
    #[error("vehicle {0} sits inside an object")]
    VehicleInsideObject(usize),
    #[error("vehicle index {0} out of range")]
    NoSuchVehicle(usize),
    #[error("invalid lidar model: {0}")]
    InvalidLidar(String),
}

/// Ground-truth object footprint. `length` runs along `heading`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthBox {
    pub id: u32,
    pub center: Point,
    pub length: f64,
    pub width: f64,
    pub heading: f64,
}

impl GroundTruthBox {
    pub fn new(id: u32, center: Point, length: f64, width: f64, heading: f64) -> Self {
        Self {
            id,
            center,
            length,
            width,
            heading,
        }
    }

    pub fn corners(&self) -> [Point; 4] {
        let (s, c) = self.heading.sin_cos();
        let (hl, hw) = (self.length / 2.0, self.width / 2.0);
        [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)].map(|(u, v)| {
            Point::new(self.center.x + c * u - s * v, self.center.y + s * u + c * v)
        })
    }

    /// Axis-aligned envelope in this box's frame.
    pub fn envelope(&self) -> Aabb {
        Aabb::enclosing(self.corners())
    }

    /// The same box expressed in `pose`'s local frame.
    pub fn in_frame(&self, pose: &Pose2D) -> GroundTruthBox {
        GroundTruthBox {
            center: pose.to_local(self.center),
            heading: crate::grid::normalize_angle(self.heading - pose.heading),
            ..*self
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        let (s, c) = self.heading.sin_cos();
        let (dx, dy) = (p.x - self.center.x, p.y - self.center.y);
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        u.abs() <= self.length / 2.0 && v.abs() <= self.width / 2.0
    }
}

/// One vehicle in a scene. Clouds and maps are in the vehicle's local frame
/// and stay empty until [`Scene::sense`] runs.
#[derive(Debug, Clone)]
pub struct VehicleNode {
    pub pose: Pose2D,
    pub lidar: LidarModel,
    pub point_cloud: Vec<Point>,
    pub feature_map: Option<FeatureMap>,
}

impl VehicleNode {
    pub fn new(pose: Pose2D, lidar: LidarModel) -> Self {
        Self {
            pose,
            lidar,
            point_cloud: Vec::new(),
            feature_map: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub objects: Vec<GroundTruthBox>,
    /// Index 0 is the receiver; the rest are senders.
    pub vehicles: Vec<VehicleNode>,
    pub seed: u64,
    pub bounds: Aabb,
}

/// Scenes reject object pairs whose envelopes overlap by this IoU or more.
pub const MAX_OBJECT_IOU: f64 = 0.05;

impl Scene {
    /// Builds a scene and checks its invariants.
    pub fn new(objects: Vec<GroundTruthBox>, vehicles: Vec<VehicleNode>, seed: u64, bounds: Aabb) -> Result<Self, SceneError> {
        let scene = Self {
            objects,
            vehicles,
            seed,
            bounds,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        for o in &self.objects {
            if !(o.length > 0.0 && o.width > 0.0) {
                return Err(SceneError::InvalidBox {
                    id: o.id,
                    length: o.length,
                    width: o.width,
                });
            }
        }
        for (i, a) in self.objects.iter().enumerate() {
            for b in &self.objects[i + 1..] {
                let iou = a.envelope().iou(&b.envelope());
                if iou >= MAX_OBJECT_IOU {
                    return Err(SceneError::Overlap { a: a.id, b: b.id, iou });
                }
            }
        }
        for (i, v) in self.vehicles.iter().enumerate() {
            let p = v.pose.position();
            if p.x < self.bounds.min.x || p.x > self.bounds.max.x || p.y < self.bounds.min.y || p.y > self.bounds.max.y {
                return Err(SceneError::VehicleOutOfBounds(i));
            }
            if self.objects.iter().any(|o| o.contains(p)) {
                return Err(SceneError::VehicleInsideObject(i));
            }
            v.lidar.validate()?;
        }
        Ok(())
    }

    pub fn receiver(&self) -> &VehicleNode {
        &self.vehicles[0]
    }

    pub fn senders(&self) -> &[VehicleNode] {
        &self.vehicles[1..]
    }

    /// Per-vehicle ray-cast seed derived from the scene seed.
    pub fn vehicle_seed(&self, index: usize) -> u64 {
        self.seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(index as u64 + 1)
    }

    /// Ray-casts every vehicle's cloud and extracts its feature map.
    pub fn sense(&mut self, spec: &GridSpec, channels: usize, extractor: &ExtractorConfig) {
        for i in 0..self.vehicles.len() {
            let seed = self.vehicle_seed(i);
            let v = &self.vehicles[i];
            let cloud = cast_rays(&self.objects, &v.pose, &v.lidar, seed);
            let map = extract_features(&cloud, spec, channels, extractor).with_pose(v.pose);
            let v = &mut self.vehicles[i];
            v.point_cloud = cloud;
            v.feature_map = Some(map);
        }
    }

    /// Number of points vehicle `index` puts on each object, in object order.
    pub fn points_per_object(&self, index: usize) -> Result<Vec<usize>, SceneError> {
        let v = self.vehicles.get(index).ok_or(SceneError::NoSuchVehicle(index))?;
        let mut counts = vec![0; self.objects.len()];
        for (_, object) in cast_rays_labeled(&self.objects, &v.pose, &v.lidar, self.vehicle_seed(index)) {
            counts[object] += 1;
        }
        Ok(counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_geometry() {
        let b = GroundTruthBox::new(1, Point::new(10.0, 5.0), 4.0, 2.0, std::f64::consts::FRAC_PI_2);
        let env = b.envelope();
        assert!((env.width() - 2.0).abs() < 1e-9 && (env.height() - 4.0).abs() < 1e-9);
        assert!(b.contains(Point::new(10.5, 6.9)));
        assert!(!b.contains(Point::new(11.5, 5.0)));
        let local = b.in_frame(&Pose2D::new(10.0, 0.0, std::f64::consts::FRAC_PI_2));
        assert!((local.center.x - 5.0).abs() < 1e-9 && local.center.y.abs() < 1e-9);
        assert!(local.heading.abs() < 1e-12);
    }

    #[test]
    fn scene_invariants() {
        let bounds = Aabb::new(Point::new(-10.0, -10.0), Point::new(10.0, 10.0));
        let a = GroundTruthBox::new(0, Point::new(5.0, 0.0), 4.0, 2.0, 0.0);
        let b = GroundTruthBox::new(1, Point::new(5.5, 0.0), 4.0, 2.0, 0.0);
        let v = VehicleNode::new(Pose2D::default(), LidarModel::default());
        assert!(matches!(
            Scene::new(vec![a, b], vec![v.clone()], 0, bounds),
            Err(SceneError::Overlap { .. })
        ));
        let far = VehicleNode::new(Pose2D::new(50.0, 0.0, 0.0), LidarModel::default());
        assert_eq!(
            Scene::new(vec![a], vec![far], 0, bounds).unwrap_err(),
            SceneError::VehicleOutOfBounds(0)
        );
        let inside = VehicleNode::new(Pose2D::new(5.0, 0.0, 0.0), LidarModel::default());
        assert_eq!(
            Scene::new(vec![a], vec![inside], 0, bounds).unwrap_err(),
            SceneError::VehicleInsideObject(0)
        );
        assert!(Scene::new(vec![a], vec![v], 0, bounds).is_ok());
    }
}
