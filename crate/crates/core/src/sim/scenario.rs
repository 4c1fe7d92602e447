use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GroundTruthBox, LidarModel, Scene, SceneError, VehicleNode};
use crate::grid::{Aabb, Point, Pose2D};

pub const CAR_LENGTH: f64 = 4.5;
pub const CAR_WIDTH: f64 = 1.8;
/// Minimum free space between two object footprints.
pub const MIN_OBJECT_GAP: f64 = 1.0;
/// Minimum free space between an object footprint and a vehicle's sensor.
pub const MIN_VEHICLE_CLEARANCE: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    Intersection,
    Multilane,
    ParkingLot,
}

impl Template {
    pub const ALL: [Template; 3] = [Template::Intersection, Template::Multilane, Template::ParkingLot];

    pub fn name(self) -> &'static str {
        match self {
            Template::Intersection => "intersection",
            Template::Multilane => "multilane",
            Template::ParkingLot => "parking_lot",
        }
    }

    /// Inclusive object-count range.
    pub fn object_range(self) -> (usize, usize) {
        match self {
            Template::Intersection => (8, 14),
            Template::Multilane => (6, 12),
            Template::ParkingLot => (14, 24),
        }
    }

    fn tag(self) -> u64 {
        match self {
            Template::Intersection => 0x1A7E_85EC,
            Template::Multilane => 0x3A1E_5000,
            Template::ParkingLot => 0x9A2C_1077,
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Template {
    type Err = SceneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Template::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| SceneError::UnknownTemplate(s.to_string()))
    }
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    };
    p.distance_to(Point::new(a.x + t * dx, a.y + t * dy))
}

fn edges(b: &GroundTruthBox) -> [(Point, Point); 4] {
    let c = b.corners();
    [(c[0], c[1]), (c[1], c[2]), (c[2], c[3]), (c[3], c[0])]
}

fn segments_cross(a: (Point, Point), b: (Point, Point)) -> bool {
    let orient = |p: Point, q: Point, r: Point| (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    let d1 = orient(b.0, b.1, a.0);
    let d2 = orient(b.0, b.1, a.1);
    let d3 = orient(a.0, a.1, b.0);
    let d4 = orient(a.0, a.1, b.1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Free space between two footprints; zero when they touch or overlap.
pub fn footprint_gap(a: &GroundTruthBox, b: &GroundTruthBox) -> f64 {
    if a.corners().iter().any(|&p| b.contains(p)) || b.corners().iter().any(|&p| a.contains(p)) {
        return 0.0;
    }
    let mut gap = f64::INFINITY;
    for ea in edges(a) {
        for eb in edges(b) {
            if segments_cross(ea, eb) {
                return 0.0;
            }
            gap = gap
                .min(segment_distance(ea.0, eb.0, eb.1))
                .min(segment_distance(ea.1, eb.0, eb.1))
                .min(segment_distance(eb.0, ea.0, ea.1))
                .min(segment_distance(eb.1, ea.0, ea.1));
        }
    }
    gap
}

/// Distance from `p` to the footprint; zero inside.
pub fn point_gap(b: &GroundTruthBox, p: Point) -> f64 {
    if b.contains(p) {
        return 0.0;
    }
    edges(b)
        .into_iter()
        .map(|(s, e)| segment_distance(p, s, e))
        .fold(f64::INFINITY, f64::min)
}

struct Placer {
    objects: Vec<GroundTruthBox>,
    vehicles: Vec<Point>,
}

impl Placer {
    fn new(vehicles: &[Pose2D]) -> Self {
        Self {
            objects: Vec::new(),
            vehicles: vehicles.iter().map(|p| p.position()).collect(),
        }
    }

    fn try_place(&mut self, center: Point, heading: f64) -> bool {
        let b = GroundTruthBox::new(self.objects.len() as u32, center, CAR_LENGTH, CAR_WIDTH, heading);
        let clear = self.objects.iter().all(|o| footprint_gap(o, &b) >= MIN_OBJECT_GAP)
            && self.vehicles.iter().all(|&v| point_gap(&b, v) >= MIN_VEHICLE_CLEARANCE);
        if clear {
            self.objects.push(b);
        }
        clear
    }
}

fn bounds() -> Aabb {
    Aabb::new(Point::new(-60.0, -80.0), Point::new(140.0, 80.0))
}

fn rng_for(template: Template, seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ template.tag().rotate_left(32))
}

/// Builds the named template with the default LiDAR on every vehicle.
pub fn build_scenario(template: Template, seed: u64) -> Result<Scene, SceneError> {
    build_scenario_with(template, seed, &LidarModel::default())
}

/// Builds a scene: vehicle 0 is the receiver at the origin facing +x, vehicle
/// 1 the sender. Deterministic in `(template, seed)`.
pub fn build_scenario_with(template: Template, seed: u64, lidar: &LidarModel) -> Result<Scene, SceneError> {
    lidar.validate()?;
    let mut rng = rng_for(template, seed);
    let (lo, hi) = template.object_range();
    let target = rng.gen_range(lo..=hi);
    let (poses, objects) = match template {
        Template::Intersection => intersection(&mut rng, target),
        Template::Multilane => multilane(&mut rng, target),
        Template::ParkingLot => parking_lot(&mut rng, target),
    };
    let vehicles = poses.into_iter().map(|p| VehicleNode::new(p, *lidar)).collect();
    Scene::new(objects, vehicles, seed, bounds())
}

/// Azimuth step of the sparse scanner used by [`occluded_far_object`].
pub const SPARSE_AZIMUTH_STEP_DEG: f64 = 1.0;

/// Scripted scene. Object 0 sits 45 m ahead of the receiver behind object 1,
/// a car 15 m ahead, and about 8 m from the sender. Both vehicles carry a
/// sparse 16-beam scanner so the sender's view of object 0 is Weak.
pub fn occluded_far_object() -> Scene {
    let lidar = LidarModel {
        azimuth_step_deg: SPARSE_AZIMUTH_STEP_DEG,
        ..LidarModel::default()
    };
    let target = GroundTruthBox::new(0, Point::new(45.0, 0.0), CAR_LENGTH, CAR_WIDTH, 0.0);
    let occluder = GroundTruthBox::new(1, Point::new(15.0, 0.0), CAR_LENGTH, CAR_WIDTH, 0.0);
    let vehicles = vec![
        VehicleNode::new(Pose2D::new(0.0, 0.0, 0.0), lidar),
        VehicleNode::new(Pose2D::new(38.0, -4.0, 0.0), lidar),
    ];
    Scene::new(vec![target, occluder], vehicles, 7, bounds()).expect("scripted scene is valid")
}

/// Fills slots in order until `target` objects are placed.
fn fill(placer: &mut Placer, slots: &[(Point, f64)], target: usize) {
    for &(c, h) in slots {
        if placer.objects.len() >= target {
            break;
        }
        placer.try_place(c, h);
    }
}

/// Receiver heads toward a crossing; the sender approaches it on the cross road.
fn intersection(rng: &mut ChaCha8Rng, target: usize) -> (Vec<Pose2D>, Vec<GroundTruthBox>) {
    let cx = rng.gen_range(28.0..36.0);
    let lane = 1.75;
    let receiver = Pose2D::new(0.0, -lane, 0.0);
    let sender_dy = rng.gen_range(12.0..20.0);
    let sender = Pose2D::new(cx + lane, -sender_dy, FRAC_PI_2);
    let mut placer = Placer::new(&[receiver, sender]);
    let mut slots = Vec::new();
    for _ in 0..400 {
        let jitter = rng.gen_range(-0.05..0.05);
        let slot = match rng.gen_range(0..4) {
            // through road, both directions
            0 => {
                let y = if rng.gen_bool(0.5) { lane } else { -lane };
                let x = rng.gen_range(-10.0..68.0);
                if (x - cx).abs() < 6.0 {
                    continue;
                }
                (Point::new(x, y), jitter)
            }
            // cross road
            1 => {
                let x = if rng.gen_bool(0.5) { cx + lane } else { cx - lane };
                let y: f64 = rng.gen_range(-38.0..38.0);
                if y.abs() < 6.0 {
                    continue;
                }
                (Point::new(x, y), FRAC_PI_2 + jitter)
            }
            // kerbside parking along the through road
            2 => {
                let y = if rng.gen_bool(0.5) { 5.6 } else { -5.6 };
                let x = rng.gen_range(-10.0..68.0);
                if (x - cx).abs() < 8.0 {
                    continue;
                }
                (Point::new(x, y), jitter)
            }
            // kerbside parking along the cross road
            _ => {
                let x = if rng.gen_bool(0.5) { cx + 5.6 } else { cx - 5.6 };
                let y: f64 = rng.gen_range(-38.0..38.0);
                if y.abs() < 8.0 {
                    continue;
                }
                (Point::new(x, y), FRAC_PI_2 + jitter)
            }
        };
        slots.push(slot);
    }
    fill(&mut placer, &slots, target);
    (vec![receiver, sender], placer.objects)
}

/// Three-lane road; the sender drives 20-40 m ahead of the receiver.
fn multilane(rng: &mut ChaCha8Rng, target: usize) -> (Vec<Pose2D>, Vec<GroundTruthBox>) {
    let lanes = [-3.5, 0.0, 3.5];
    let receiver = Pose2D::new(0.0, 0.0, 0.0);
    let sender = Pose2D::new(rng.gen_range(20.0..=40.0), *lanes.choose(rng).unwrap(), 0.0);
    let mut placer = Placer::new(&[receiver, sender]);
    let slots: Vec<(Point, f64)> = (0..400)
        .map(|_| {
            let y = *lanes.choose(rng).unwrap();
            (Point::new(rng.gen_range(-10.0..68.0), y), rng.gen_range(-0.05..0.05))
        })
        .collect();
    fill(&mut placer, &slots, target);
    (vec![receiver, sender], placer.objects)
}

/// Parking lot entered along a straight aisle, cars parked parallel to it.
/// The aisle rows run the length of the lot with empty bays scattered along
/// them. Deeper rows fill a block behind the entrance bays, which are always
/// taken, so the entrance cars screen most of that block from the aisle.
fn parking_lot(rng: &mut ChaCha8Rng, target: usize) -> (Vec<Pose2D>, Vec<GroundTruthBox>) {
    const FIRST_ROW: f64 = 5.0;
    const ROW_PITCH: f64 = 4.5;
    const ROWS: usize = 6;
    const FIRST_BAY: f64 = 4.0;
    const BAY_PITCH: f64 = 6.5;
    const BAYS: usize = 10;
    const AISLE_SHARE: f64 = 0.4;
    let receiver = Pose2D::new(0.0, 0.0, 0.0);
    let sender = Pose2D::new(rng.gen_range(14.0..22.0), 0.0, 0.0);
    let mut placer = Placer::new(&[receiver, sender]);
    let bay = |r: usize, k: usize, side: f64| {
        let y = side * (FIRST_ROW + ROW_PITCH * r as f64);
        (Point::new(FIRST_BAY + BAY_PITCH * k as f64, y), 0.0)
    };
    let entrance = [bay(0, 0, 1.0), bay(0, 0, -1.0)];
    let mut aisle: Vec<(Point, f64)> = (1..BAYS).flat_map(|k| [bay(0, k, 1.0), bay(0, k, -1.0)]).collect();
    // Row r reaches r bays in, which keeps it inside the entrance cars' shadow.
    let mut deep: Vec<(Point, f64)> = (1..ROWS)
        .flat_map(|r| (1..=r).flat_map(move |k| [bay(r, k, 1.0), bay(r, k, -1.0)]))
        .collect();
    aisle.shuffle(rng);
    deep.shuffle(rng);
    fill(&mut placer, &entrance, target);
    fill(&mut placer, &aisle, (target as f64 * AISLE_SHARE).round() as usize);
    fill(&mut placer, &deep, target);
    (vec![receiver, sender], placer.objects)
}
