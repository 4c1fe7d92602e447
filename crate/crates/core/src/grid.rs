//! Bird's-eye-view discretization and the feature-map container.
//!
//! A [`GridSpec`] describes a rectangle in a vehicle's local frame (x forward,
//! y left) cut into `cells_y` rows by `cells_x` columns. A [`FeatureMap`] holds
//! `C x H x W` nonnegative values laid out channel-major, then row-major, with
//! row = y index and column = x index.

use std::f64::consts::PI;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("range {name} must satisfy max > min (got [{min}, {max}])")]
    InvalidRange { name: &'static str, min: f64, max: f64 },
    #[error("voxel size {name} must be positive and finite (got {value})")]
    InvalidVoxel { name: &'static str, value: f64 },
    #[error("feature map needs {expected} values, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("feature values must be finite and nonnegative (index {index}: {value})")]
    InvalidValue { index: usize, value: f32 },
    #[error("feature map needs at least one channel")]
    NoChannels,
    #[error("patch is empty")]
    EmptyPatch,
    #[error("window rows {rows:?} cols {cols:?} exceeds a {height}x{width} map")]
    WindowOutOfBounds {
        rows: Range<usize>,
        cols: Range<usize>,
        height: usize,
        width: usize,
    },
}

/// A point in meters on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Axis-aligned rectangle on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    /// Tight box around a set of points. Panics on an empty iterator.
    pub fn enclosing(points: impl IntoIterator<Item = Point>) -> Self {
        let mut it = points.into_iter();
        let first = it.next().expect("at least one point");
        it.fold(Self::new(first, first), |b, p| {
            Self::new(
                Point::new(b.min.x.min(p.x), b.min.y.min(p.y)),
                Point::new(b.max.x.max(p.x), b.max.y.max(p.y)),
            )
        })
    }

    pub fn width(&self) -> f64 {
        (self.max.x - self.min.x).max(0.0)
    }

    pub fn height(&self) -> f64 {
        (self.max.y - self.min.y).max(0.0)
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new((self.min.x + self.max.x) / 2.0, (self.min.y + self.max.y) / 2.0)
    }

    pub fn intersection_area(&self, other: &Aabb) -> f64 {
        let w = self.max.x.min(other.max.x) - self.min.x.max(other.min.x);
        let h = self.max.y.min(other.max.y) - self.min.y.max(other.min.y);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// Intersection over union; 0 when both boxes are degenerate.
    pub fn iou(&self, other: &Aabb) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(theta: f64) -> f64 {
    let mut a = theta.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Planar vehicle pose in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "RawPose")]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    /// Radians in (-pi, pi].
    pub heading: f64,
}

#[derive(Deserialize)]
struct RawPose {
    x: f64,
    y: f64,
    heading: f64,
}

impl From<RawPose> for Pose2D {
    fn from(raw: RawPose) -> Self {
        Pose2D::new(raw.x, raw.y, raw.heading)
    }
}

impl Pose2D {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    /// Maps a point from this pose's local frame into the world frame.
    pub fn to_world(&self, local: Point) -> Point {
        let (s, c) = self.heading.sin_cos();
        Point::new(
            self.x + c * local.x - s * local.y,
            self.y + s * local.x + c * local.y,
        )
    }

    /// Maps a world point into this pose's local frame.
    pub fn to_local(&self, world: Point) -> Point {
        let (s, c) = self.heading.sin_cos();
        let dx = world.x - self.x;
        let dy = world.y - self.y;
        Point::new(c * dx + s * dy, -s * dx + c * dy)
    }

    pub fn distance_to(&self, other: &Pose2D) -> f64 {
        self.position().distance_to(other.position())
    }
}

/// Row/column address of one BEV cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub row: usize,
    pub col: usize,
}

impl CellIndex {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Spatial extent and voxel size of a BEV grid, in the owning vehicle's frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridSpec", into = "RawGridSpec")]
pub struct GridSpec {
    x_range: (f64, f64),
    y_range: (f64, f64),
    z_range: (f64, f64),
    voxel_x: f64,
    voxel_y: f64,
    cells_x: usize,
    cells_y: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGridSpec {
    x_range: (f64, f64),
    y_range: (f64, f64),
    #[serde(default = "default_z_range")]
    z_range: (f64, f64),
    voxel_x: f64,
    voxel_y: f64,
}

fn default_z_range() -> (f64, f64) {
    GridSpec::DEFAULT_Z_RANGE
}

impl TryFrom<RawGridSpec> for GridSpec {
    type Error = GridError;

    fn try_from(raw: RawGridSpec) -> Result<Self, Self::Error> {
        GridSpec::new(raw.x_range, raw.y_range, raw.z_range, raw.voxel_x, raw.voxel_y)
    }
}

impl From<GridSpec> for RawGridSpec {
    fn from(spec: GridSpec) -> Self {
        RawGridSpec {
            x_range: spec.x_range,
            y_range: spec.y_range,
            z_range: spec.z_range,
            voxel_x: spec.voxel_x,
            voxel_y: spec.voxel_y,
        }
    }
}

impl Default for GridSpec {
    /// 176 x 200 cells covering [0, 70.4] x [-40, 40] x [-3, 1] m at 0.4 m voxels.
    fn default() -> Self {
        GridSpec::new(
            Self::DEFAULT_X_RANGE,
            Self::DEFAULT_Y_RANGE,
            Self::DEFAULT_Z_RANGE,
            Self::DEFAULT_VOXEL,
            Self::DEFAULT_VOXEL,
        )
        .expect("default grid is valid")
    }
}

fn cell_count(span: f64, voxel: f64) -> usize {
    // 70.4 / 0.4 is 176.00000000000003 in binary; shave the rounding noise
    // before taking the ceiling.
    let n = (span / voxel - 1e-9).ceil();
    (n as usize).max(1)
}

impl GridSpec {
    pub const DEFAULT_X_RANGE: (f64, f64) = (0.0, 70.4);
    pub const DEFAULT_Y_RANGE: (f64, f64) = (-40.0, 40.0);
    pub const DEFAULT_Z_RANGE: (f64, f64) = (-3.0, 1.0);
    pub const DEFAULT_VOXEL: f64 = 0.4;

    pub fn new(
        x_range: (f64, f64),
        y_range: (f64, f64),
        z_range: (f64, f64),
        voxel_x: f64,
        voxel_y: f64,
    ) -> Result<Self, GridError> {
        for (name, (min, max)) in [("x", x_range), ("y", y_range), ("z", z_range)] {
            if !(min.is_finite() && max.is_finite() && max > min) {
                return Err(GridError::InvalidRange { name, min, max });
            }
        }
        for (name, value) in [("voxel_x", voxel_x), ("voxel_y", voxel_y)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(GridError::InvalidVoxel { name, value });
            }
        }
        Ok(Self {
            x_range,
            y_range,
            z_range,
            voxel_x,
            voxel_y,
            cells_x: cell_count(x_range.1 - x_range.0, voxel_x),
            cells_y: cell_count(y_range.1 - y_range.0, voxel_y),
        })
    }

    /// Default ranges with a custom (square) voxel size.
    pub fn with_voxel(voxel: f64) -> Result<Self, GridError> {
        Self::new(
            Self::DEFAULT_X_RANGE,
            Self::DEFAULT_Y_RANGE,
            Self::DEFAULT_Z_RANGE,
            voxel,
            voxel,
        )
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.x_range
    }

    pub fn y_range(&self) -> (f64, f64) {
        self.y_range
    }

    pub fn z_range(&self) -> (f64, f64) {
        self.z_range
    }

    pub fn voxel_x(&self) -> f64 {
        self.voxel_x
    }

    pub fn voxel_y(&self) -> f64 {
        self.voxel_y
    }

    /// Number of columns (W).
    pub fn cells_x(&self) -> usize {
        self.cells_x
    }

    /// Number of rows (H).
    pub fn cells_y(&self) -> usize {
        self.cells_y
    }

    pub fn cell_count(&self) -> usize {
        self.cells_x * self.cells_y
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_range.0 && p.x <= self.x_range.1 && p.y >= self.y_range.0 && p.y <= self.y_range.1
    }

    /// Center of a cell in the grid's local frame.
    pub fn cell_center(&self, cell: CellIndex) -> Point {
        Point::new(
            self.x_range.0 + (cell.col as f64 + 0.5) * self.voxel_x,
            self.y_range.0 + (cell.row as f64 + 0.5) * self.voxel_y,
        )
    }

    /// Flat row-major index of a cell.
    pub fn flat(&self, cell: CellIndex) -> usize {
        cell.row * self.cells_x + cell.col
    }

    pub fn unflat(&self, index: usize) -> CellIndex {
        CellIndex::new(index / self.cells_x, index % self.cells_x)
    }
}

/// Cell enclosing `point`, or `None` outside the grid. Points on the upper
/// boundary belong to the last row/column.
pub fn world_to_cell(spec: &GridSpec, point: Point) -> Option<CellIndex> {
    if !spec.contains(point) {
        return None;
    }
    let col = ((point.x - spec.x_range.0) / spec.voxel_x).floor() as usize;
    let row = ((point.y - spec.y_range.0) / spec.voxel_y).floor() as usize;
    Some(CellIndex::new(
        row.min(spec.cells_y - 1),
        col.min(spec.cells_x - 1),
    ))
}

/// `C x H x W` grid of nonnegative features tied to the vehicle that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    spec: GridSpec,
    channels: usize,
    values: Vec<f32>,
    origin_pose: Pose2D,
}

impl FeatureMap {
    pub const DEFAULT_CHANNELS: usize = 128;

    pub fn zeros(spec: GridSpec, channels: usize, origin_pose: Pose2D) -> Result<Self, GridError> {
        if channels == 0 {
            return Err(GridError::NoChannels);
        }
        let len = channels * spec.cell_count();
        Ok(Self {
            spec,
            channels,
            values: vec![0.0; len],
            origin_pose,
        })
    }

    pub fn from_values(
        spec: GridSpec,
        channels: usize,
        values: Vec<f32>,
        origin_pose: Pose2D,
    ) -> Result<Self, GridError> {
        if channels == 0 {
            return Err(GridError::NoChannels);
        }
        let expected = channels * spec.cell_count();
        if values.len() != expected {
            return Err(GridError::DimensionMismatch {
                expected,
                actual: values.len(),
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(GridError::InvalidValue { index, value });
        }
        Ok(Self {
            spec,
            channels,
            values,
            origin_pose,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// H.
    pub fn height(&self) -> usize {
        self.spec.cells_y
    }

    /// W.
    pub fn width(&self) -> usize {
        self.spec.cells_x
    }

    pub fn cells(&self) -> usize {
        self.spec.cell_count()
    }

    pub fn origin_pose(&self) -> Pose2D {
        self.origin_pose
    }

    pub fn with_pose(mut self, pose: Pose2D) -> Self {
        self.origin_pose = pose;
        self
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let n = self.cells();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn get(&self, c: usize, cell: CellIndex) -> f32 {
        self.values[c * self.cells() + self.spec.flat(cell)]
    }

    /// Sets one value; rejects negative or non-finite input.
    pub fn set(&mut self, c: usize, cell: CellIndex, value: f32) -> Result<(), GridError> {
        let index = c * self.cells() + self.spec.flat(cell);
        if !(value.is_finite() && value >= 0.0) {
            return Err(GridError::InvalidValue { index, value });
        }
        self.values[index] = value;
        Ok(())
    }

    /// Per-cell maximum across channels, row-major.
    pub fn channel_max(&self) -> Vec<f32> {
        let n = self.cells();
        let mut out = self.channel(0).to_vec();
        for c in 1..self.channels {
            for (o, &v) in out.iter_mut().zip(&self.values[c * n..(c + 1) * n]) {
                if v > *o {
                    *o = v;
                }
            }
        }
        out
    }

    /// Sum of every value, accumulated in f64.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().map(|&v| v as f64).sum()
    }

    /// All channels' values inside a rectangular window, channel-major.
    pub fn window(&self, rows: Range<usize>, cols: Range<usize>) -> Result<Vec<f32>, GridError> {
        if rows.end > self.height() || cols.end > self.width() || rows.is_empty() || cols.is_empty() {
            return Err(GridError::WindowOutOfBounds {
                rows,
                cols,
                height: self.height(),
                width: self.width(),
            });
        }
        let mut out = Vec::with_capacity(self.channels * rows.len() * cols.len());
        for c in 0..self.channels {
            let plane = self.channel(c);
            for r in rows.clone() {
                let start = r * self.width();
                out.extend_from_slice(&plane[start + cols.start..start + cols.end]);
            }
        }
        Ok(out)
    }
}

/// Strong / weak / background taxonomy of a feature patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureClass {
    Strong,
    Weak,
    Background,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub strong_threshold: f32,
    pub strong_fraction: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            strong_threshold: 0.5,
            strong_fraction: 0.5,
        }
    }
}

/// Background iff every value is zero; Strong iff at least `strong_fraction`
/// of the values reach `strong_threshold`; Weak otherwise.
pub fn classify_feature(patch: &[f32], cfg: &ClassifyConfig) -> Result<FeatureClass, GridError> {
    if patch.is_empty() {
        return Err(GridError::EmptyPatch);
    }
    if patch.iter().all(|&v| v == 0.0) {
        return Ok(FeatureClass::Background);
    }
    let strong = patch.iter().filter(|&&v| v >= cfg.strong_threshold).count();
    if strong as f64 >= cfg.strong_fraction * patch.len() as f64 {
        Ok(FeatureClass::Strong)
    } else {
        Ok(FeatureClass::Weak)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_spec_matches_expected_shape() {
        let spec = GridSpec::default();
        assert_eq!(spec.cells_x(), 176);
        assert_eq!(spec.cells_y(), 200);
        assert_eq!(spec.x_range(), (0.0, 70.4));
        assert_eq!(spec.y_range(), (-40.0, 40.0));
        assert_eq!(spec.z_range(), (-3.0, 1.0));
    }

    #[test]
    fn aabb_iou() {
        let a = Aabb::new(Point::new(0.0, 0.0), Point::new(2.0, 2.0));
        let b = Aabb::new(Point::new(1.0, 0.0), Point::new(3.0, 2.0));
        assert_eq!(a.iou(&a), 1.0);
        assert!((a.iou(&b) - 2.0 / 6.0).abs() < 1e-12);
        assert_eq!(a.iou(&Aabb::new(Point::new(5.0, 5.0), Point::new(6.0, 6.0))), 0.0);
        let e = Aabb::enclosing([Point::new(1.0, -1.0), Point::new(-2.0, 3.0)]);
        assert_eq!(e, Aabb::new(Point::new(-2.0, -1.0), Point::new(1.0, 3.0)));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(matches!(
            GridSpec::new((1.0, 1.0), (0.0, 1.0), (0.0, 1.0), 0.1, 0.1),
            Err(GridError::InvalidRange { name: "x", .. })
        ));
        assert!(matches!(
            GridSpec::new((0.0, 1.0), (0.0, 1.0), (0.0, 1.0), 0.0, 0.1),
            Err(GridError::InvalidVoxel { name: "voxel_x", .. })
        ));
        assert!(GridSpec::new((0.0, 1.0), (0.0, 1.0), (2.0, 1.0), 0.1, 0.1).is_err());
    }

    #[test]
    fn world_to_cell_examples() {
        let spec = GridSpec::default();
        assert_eq!(world_to_cell(&spec, Point::new(0.0, -40.0)), Some(CellIndex::new(0, 0)));
        assert_eq!(world_to_cell(&spec, Point::new(80.0, 0.0)), None);
        // (0.30 - 0) / 0.2 = 1.5 -> col 1; (-39.90 + 40) / 0.2 = 0.5 -> row 0
        let fine = GridSpec::with_voxel(0.2).unwrap();
        assert_eq!(world_to_cell(&fine, Point::new(0.30, -39.90)), Some(CellIndex::new(0, 1)));
    }

    #[test]
    fn upper_boundary_clamps_into_last_cell() {
        let spec = GridSpec::default();
        assert_eq!(
            world_to_cell(&spec, Point::new(70.4, 40.0)),
            Some(CellIndex::new(199, 175))
        );
        assert_eq!(world_to_cell(&spec, Point::new(70.4 + 1e-9, 0.0)), None);
        assert_eq!(world_to_cell(&spec, Point::new(-1e-9, 0.0)), None);
    }

    #[test]
    fn pose_round_trip_and_normalization() {
        let pose = Pose2D::new(3.0, -2.0, 3.0 * PI);
        assert!((pose.heading - PI).abs() < 1e-12);
        assert!((Pose2D::new(0.0, 0.0, -PI).heading - PI).abs() < 1e-12);
        let p = Point::new(1.5, 7.25);
        let back = pose.to_local(pose.to_world(p));
        assert!((back.x - p.x).abs() < 1e-12 && (back.y - p.y).abs() < 1e-12);
    }

    #[test]
    fn feature_map_rejects_negative_and_bad_length() {
        let spec = GridSpec::new((0.0, 1.0), (0.0, 1.0), (0.0, 1.0), 0.5, 0.5).unwrap();
        assert!(matches!(
            FeatureMap::from_values(spec.clone(), 1, vec![0.0; 3], Pose2D::default()),
            Err(GridError::DimensionMismatch { expected: 4, actual: 3 })
        ));
        assert!(matches!(
            FeatureMap::from_values(spec.clone(), 1, vec![0.0, -1.0, 0.0, 0.0], Pose2D::default()),
            Err(GridError::InvalidValue { index: 1, .. })
        ));
        assert!(FeatureMap::zeros(spec, 0, Pose2D::default()).is_err());
    }

    #[test]
    fn window_extracts_channel_major() {
        let spec = GridSpec::new((0.0, 3.0), (0.0, 2.0), (0.0, 1.0), 1.0, 1.0).unwrap();
        let values: Vec<f32> = (0..12).map(|v| v as f32).collect();
        let map = FeatureMap::from_values(spec, 2, values, Pose2D::default()).unwrap();
        assert_eq!(map.window(1..2, 1..3).unwrap(), vec![4.0, 5.0, 10.0, 11.0]);
        assert!(map.window(0..3, 0..1).is_err());
        assert_eq!(map.channel_max(), vec![6.0, 7.0, 8.0, 9.0, 10.0, 11.0]);
    }

    #[test]
    fn classify_examples() {
        let cfg = ClassifyConfig::default();
        assert_eq!(classify_feature(&[0.0; 9], &cfg), Ok(FeatureClass::Background));
        assert_eq!(classify_feature(&[0.9, 0.8, 0.7, 0.9], &cfg), Ok(FeatureClass::Strong));
        // one of four values reaches 0.5: 0.25 < 0.5
        assert_eq!(classify_feature(&[0.9, 0.0, 0.0, 0.0], &cfg), Ok(FeatureClass::Weak));
        assert_eq!(classify_feature(&[], &cfg), Err(GridError::EmptyPatch));
    }

    proptest! {
        #[test]
        fn every_in_range_point_has_a_cell_near_its_center(
            x in 0.0f64..=70.4, y in -40.0f64..=40.0,
        ) {
            let spec = GridSpec::default();
            let cell = world_to_cell(&spec, Point::new(x, y)).expect("in range");
            let c = spec.cell_center(cell);
            prop_assert!((c.x - x).abs() <= spec.voxel_x() / 2.0 + 1e-9);
            prop_assert!((c.y - y).abs() <= spec.voxel_y() / 2.0 + 1e-9);
        }

        #[test]
        fn background_iff_max_is_zero(values in proptest::collection::vec(
            prop_oneof![Just(0.0f32), 0.0f32..2.0], 1..40)
        ) {
            let class = classify_feature(&values, &ClassifyConfig::default()).unwrap();
            let max = values.iter().cloned().fold(0.0f32, f32::max);
            prop_assert_eq!(class == FeatureClass::Background, max == 0.0);
        }
    }
}
