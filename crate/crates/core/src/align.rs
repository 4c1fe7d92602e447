//! Resampling a sender's map onto the receiver's grid and splitting the
//! result into the overlap / receiver-only regions that fusion consumes.

use thiserror::Error;

use crate::grid::{world_to_cell, CellIndex, FeatureMap, GridError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlignError {
    #[error("channel mismatch: receiver has {receiver}, sender has {sender}")]
    ChannelMismatch { receiver: usize, sender: usize },
    #[error("co-located maps disagree on voxel size ({receiver:?} vs {sender:?})")]
    VoxelMismatch {
        receiver: (f64, f64),
        sender: (f64, f64),
    },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Receiver cells also covered by the sender's footprint.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapRegion {
    mask: Vec<bool>,
    width: usize,
    area_overlap: usize,
    /// Tight bounding rectangle of the mask as (row range, col range).
    bounds: Option<(std::ops::Range<usize>, std::ops::Range<usize>)>,
}

impl OverlapRegion {
    pub fn from_mask(mask: Vec<bool>, width: usize) -> Self {
        assert!(width > 0 && mask.len().is_multiple_of(width), "mask is not a whole grid");
        let mut area_overlap = 0;
        let (mut r0, mut r1, mut c0, mut c1) = (usize::MAX, 0, usize::MAX, 0);
        for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
            area_overlap += 1;
            let (r, c) = (i / width, i % width);
            r0 = r0.min(r);
            r1 = r1.max(r);
            c0 = c0.min(c);
            c1 = c1.max(c);
        }
        let bounds = (area_overlap > 0).then(|| (r0..r1 + 1, c0..c1 + 1));
        Self {
            mask,
            width,
            area_overlap,
            bounds,
        }
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, cell: CellIndex) -> bool {
        self.mask[cell.row * self.width + cell.col]
    }

    /// A_o, in cells.
    pub fn area_overlap(&self) -> usize {
        self.area_overlap
    }

    /// A, the receiver map's cell count.
    pub fn area_total(&self) -> usize {
        self.mask.len()
    }

    pub fn ratio(&self) -> f64 {
        self.area_overlap as f64 / self.area_total() as f64
    }

    /// W_o: width of the tight bounding rectangle, 0 when empty.
    pub fn bound_width(&self) -> usize {
        self.bounds.as_ref().map_or(0, |(_, c)| c.len())
    }

    /// H_o: height of the tight bounding rectangle, 0 when empty.
    pub fn bound_height(&self) -> usize {
        self.bounds.as_ref().map_or(0, |(r, _)| r.len())
    }

    pub fn overlap_cells(&self) -> Vec<usize> {
        self.cells_where(true)
    }

    pub fn receiver_only_cells(&self) -> Vec<usize> {
        self.cells_where(false)
    }

    fn cells_where(&self, flag: bool) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m == flag)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Receiver map plus the sender resampled onto the receiver's grid.
#[derive(Debug, Clone)]
pub struct AlignedPair<'a> {
    pub receiver: &'a FeatureMap,
    /// Same shape as the receiver. Cells outside `overlap` hold 0 but are
    /// undefined and must not be read as sender evidence.
    pub sender_resampled: FeatureMap,
    pub overlap: OverlapRegion,
}

/// Resamples `sender` onto `receiver`'s grid by nearest-cell lookup of each
/// receiver cell center under the relative rigid transform of the two poses.
pub fn align<'a>(receiver: &'a FeatureMap, sender: &FeatureMap) -> Result<AlignedPair<'a>, AlignError> {
    if receiver.channels() != sender.channels() {
        return Err(AlignError::ChannelMismatch {
            receiver: receiver.channels(),
            sender: sender.channels(),
        });
    }
    let (rs, ss) = (receiver.spec(), sender.spec());
    let rv = (rs.voxel_x(), rs.voxel_y());
    let sv = (ss.voxel_x(), ss.voxel_y());
    if receiver.origin_pose() == sender.origin_pose() && rv != sv {
        return Err(AlignError::VoxelMismatch {
            receiver: rv,
            sender: sv,
        });
    }

    let (rpose, spose) = (receiver.origin_pose(), sender.origin_pose());
    let cells = rs.cell_count();
    let lookup: Vec<Option<usize>> = (0..cells)
        .map(|i| {
            let center = rs.cell_center(rs.unflat(i));
            let in_sender = spose.to_local(rpose.to_world(center));
            world_to_cell(ss, in_sender).map(|c| ss.flat(c))
        })
        .collect();

    let mut values = vec![0.0f32; receiver.values().len()];
    let sender_cells = ss.cell_count();
    for c in 0..receiver.channels() {
        let src = &sender.values()[c * sender_cells..(c + 1) * sender_cells];
        let dst = &mut values[c * cells..(c + 1) * cells];
        for (d, l) in dst.iter_mut().zip(&lookup) {
            if let Some(j) = l {
                *d = src[*j];
            }
        }
    }

    let mask = lookup.iter().map(Option::is_some).collect();
    let sender_resampled = FeatureMap::from_values(rs.clone(), receiver.channels(), values, spose)?;
    Ok(AlignedPair {
        receiver,
        sender_resampled,
        overlap: OverlapRegion::from_mask(mask, rs.cells_x()),
    })
}

/// Values of a map restricted to a cell subset, channel-major:
/// `values[c * cells.len() + k]` is channel `c` of `cells[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    channels: usize,
    cells: Vec<usize>,
    values: Vec<f32>,
}

impl Patch {
    /// Builds a patch directly. Panics if the value count is not `channels * cells.len()`.
    pub fn new(channels: usize, cells: Vec<usize>, values: Vec<f32>) -> Self {
        assert_eq!(values.len(), channels * cells.len(), "patch shape");
        Self {
            channels,
            cells,
            values,
        }
    }

    pub fn gather(map: &FeatureMap, cells: &[usize]) -> Self {
        let n = map.cells();
        let mut values = Vec::with_capacity(map.channels() * cells.len());
        for c in 0..map.channels() {
            let plane = &map.values()[c * n..(c + 1) * n];
            values.extend(cells.iter().map(|&i| plane[i]));
        }
        Self {
            channels: map.channels(),
            cells: cells.to_vec(),
            values,
        }
    }

    /// Writes this patch's values into `map` at its cells.
    pub fn scatter_into(&self, map: &mut FeatureMap) {
        let n = map.cells();
        let k = self.cells.len();
        let dst = map.values_mut();
        for c in 0..self.channels {
            for (i, &cell) in self.cells.iter().enumerate() {
                dst[c * n + cell] = self.values[c * k + i];
            }
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub(crate) fn with_values(&self, values: Vec<f32>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self {
            channels: self.channels,
            cells: self.cells.clone(),
            values,
        }
    }
}

/// F1 / F2 / F3 of the composed fusion.
#[derive(Debug, Clone)]
pub struct Regions {
    /// F1: receiver values on the overlap.
    pub receiver_overlap: Patch,
    /// F2: resampled sender values on the overlap.
    pub sender_overlap: Patch,
    /// F3: receiver values outside the overlap.
    pub receiver_only: Patch,
}

pub fn split_regions(pair: &AlignedPair<'_>) -> Regions {
    let overlap = pair.overlap.overlap_cells();
    let rest = pair.overlap.receiver_only_cells();
    Regions {
        receiver_overlap: Patch::gather(pair.receiver, &overlap),
        sender_overlap: Patch::gather(&pair.sender_resampled, &overlap),
        receiver_only: Patch::gather(pair.receiver, &rest),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, Pose2D};
    use proptest::prelude::*;

    fn ramp(spec: &GridSpec, channels: usize, pose: Pose2D) -> FeatureMap {
        let n = spec.cell_count() * channels;
        let values = (0..n).map(|i| (i % 97) as f32 * 0.01).collect();
        FeatureMap::from_values(spec.clone(), channels, values, pose).unwrap()
    }

    /// Brute-force count of receiver cell centers that fall inside the sender's
    /// rectangle, for translation-only poses.
    fn brute_overlap(spec: &GridSpec, dx: f64, dy: f64) -> usize {
        let (x0, x1) = spec.x_range();
        let (y0, y1) = spec.y_range();
        let mut count = 0;
        for r in 0..spec.cells_y() {
            for c in 0..spec.cells_x() {
                let cx = x0 + (c as f64 + 0.5) * spec.voxel_x() - dx;
                let cy = y0 + (r as f64 + 0.5) * spec.voxel_y() - dy;
                if cx >= x0 && cx <= x1 && cy >= y0 && cy <= y1 {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn identity_alignment() {
        let spec = GridSpec::default();
        let m = ramp(&spec, 2, Pose2D::new(3.7, -1.1, 0.0));
        let pair = align(&m, &m).unwrap();
        assert_eq!(pair.overlap.area_overlap(), pair.overlap.area_total());
        assert_eq!(pair.sender_resampled.values(), m.values());
        let regions = split_regions(&pair);
        assert!(regions.receiver_only.is_empty());
        assert_eq!(regions.receiver_overlap.len(), spec.cell_count());
    }

    #[test]
    fn half_overlap_when_sender_is_half_a_range_ahead() {
        let spec = GridSpec::default();
        let r = ramp(&spec, 1, Pose2D::new(0.0, 0.0, 0.0));
        let s = ramp(&spec, 1, Pose2D::new(35.2, 0.0, 0.0));
        let pair = align(&r, &s).unwrap();
        let expected = brute_overlap(&spec, 35.2, 0.0);
        assert_eq!(expected, 88 * 200);
        assert_eq!(pair.overlap.area_overlap(), expected);
        assert_eq!(pair.overlap.ratio(), 0.5);
        assert_eq!(pair.overlap.bound_width(), 88);
        assert_eq!(pair.overlap.bound_height(), 200);
        let regions = split_regions(&pair);
        assert_eq!(
            regions.receiver_overlap.len() + regions.receiver_only.len(),
            spec.cell_count()
        );
        // sender cell (row, col) sits under receiver cell (row, col + 88)
        let cell = CellIndex::new(17, 100);
        assert_eq!(
            pair.sender_resampled.get(0, cell),
            s.get(0, CellIndex::new(17, 12))
        );
    }

    #[test]
    fn disjoint_footprints() {
        let spec = GridSpec::default();
        let r = ramp(&spec, 1, Pose2D::new(0.0, 0.0, 0.0));
        let s = ramp(&spec, 1, Pose2D::new(200.0, 0.0, 0.0));
        let pair = align(&r, &s).unwrap();
        assert_eq!(pair.overlap.area_overlap(), 0);
        assert_eq!(pair.overlap.bound_width(), 0);
        let regions = split_regions(&pair);
        assert!(regions.receiver_overlap.is_empty() && regions.sender_overlap.is_empty());
        assert_eq!(regions.receiver_only.values(), r.values());
    }

    #[test]
    fn rotated_sender_facing_back() {
        // Sender 70.4 m ahead facing the receiver: footprints coincide exactly.
        let spec = GridSpec::default();
        let r = ramp(&spec, 1, Pose2D::new(0.0, 0.0, 0.0));
        let s = ramp(&spec, 1, Pose2D::new(70.4, 0.0, std::f64::consts::PI));
        let pair = align(&r, &s).unwrap();
        assert_eq!(pair.overlap.area_overlap(), spec.cell_count());
        // receiver (row, col) <-> sender (199 - row, 175 - col)
        assert_eq!(
            pair.sender_resampled.get(0, CellIndex::new(3, 5)),
            s.get(0, CellIndex::new(196, 170))
        );
    }

    #[test]
    fn alignment_errors() {
        let spec = GridSpec::default();
        let a = FeatureMap::zeros(spec.clone(), 2, Pose2D::default()).unwrap();
        let b = FeatureMap::zeros(spec, 3, Pose2D::default()).unwrap();
        assert!(matches!(align(&a, &b), Err(AlignError::ChannelMismatch { .. })));

        let coarse = FeatureMap::zeros(GridSpec::with_voxel(0.8).unwrap(), 2, Pose2D::default()).unwrap();
        assert!(matches!(align(&a, &coarse), Err(AlignError::VoxelMismatch { .. })));
        let moved = coarse.with_pose(Pose2D::new(1.0, 0.0, 0.0));
        assert!(align(&a, &moved).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn translation_overlap_is_symmetric_and_partitions(
            dx in -80i32..80, dy in -110i32..110,
        ) {
            let spec = GridSpec::with_voxel(0.8).unwrap();
            let (dx, dy) = (dx as f64 * 0.8, dy as f64 * 0.8);
            let r = FeatureMap::zeros(spec.clone(), 1, Pose2D::new(1.0, 2.0, 0.0)).unwrap();
            let s = FeatureMap::zeros(spec.clone(), 1, Pose2D::new(1.0 + dx, 2.0 + dy, 0.0)).unwrap();
            let fwd = align(&r, &s).unwrap();
            let back = align(&s, &r).unwrap();
            prop_assert_eq!(fwd.overlap.area_overlap(), back.overlap.area_overlap());
            prop_assert_eq!(fwd.overlap.area_overlap(), brute_overlap(&spec, dx, dy));
            let regions = split_regions(&fwd);
            let mut seen = vec![0u8; spec.cell_count()];
            for &c in regions.receiver_overlap.cells() { seen[c] += 1; }
            for &c in regions.receiver_only.cells() { seen[c] += 1; }
            prop_assert!(seen.iter().all(|&n| n == 1));
            prop_assert_eq!(regions.sender_overlap.cells(), regions.receiver_overlap.cells());
            prop_assert!(fwd.overlap.bound_width() * fwd.overlap.bound_height() >= fwd.overlap.area_overlap());
        }
    }
}
