//! Information-weighted maxout fusion with feature enhancement, and the
//! plain elementwise-maxout baseline it is compared against.
//!
//! The composed operation on an aligned pair is
//!
//! ```text
//! fused = ( F3  ∪  max(F1, X · F2) ) · Y
//! ```
//!
//! where F1/F2 are the receiver/sender values on the overlap, F3 the
//! receiver-only remainder, X the information weight derived from the
//! normalized L2 distance S between F1 and F2, and Y the enhancement factor.
//! One scalar S and one scalar X are computed over all channels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{align, split_regions, AlignError, AlignedPair, Patch};
use crate::grid::FeatureMap;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("similarity is undefined on an empty overlap")]
    EmptyOverlap,
    #[error("overlap area is zero; the overlap ratio is undefined")]
    ZeroOverlapArea,
    #[error("overlap area {a_o} exceeds map area {a}")]
    InvalidArea { a_o: usize, a: usize },
    #[error("similarity must be finite and nonnegative, got {0}")]
    InvalidSimilarity(f64),
    #[error("patches differ in shape")]
    ShapeMismatch,
    #[error("weight must be finite and positive, got {0}")]
    InvalidWeight(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Align(#[from] AlignError),
}

/// Constants of the piecewise information weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightConfig {
    pub s_low: f64,
    pub s_high: f64,
    pub c_low: f64,
    pub c_mid: f64,
    pub x_cap: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            s_low: 0.15,
            s_high: 0.3,
            c_low: 1.2,
            c_mid: 1.5,
            x_cap: 1.8,
        }
    }
}

impl WeightConfig {
    pub fn validate(&self) -> Result<(), FusionError> {
        let all = [self.s_low, self.s_high, self.c_low, self.c_mid, self.x_cap];
        if all.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(FusionError::Config(format!(
                "weight constants must be finite and positive: {self:?}"
            )));
        }
        if self.s_low >= self.s_high {
            return Err(FusionError::Config(format!(
                "s_low ({}) must be below s_high ({})",
                self.s_low, self.s_high
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnhanceConfig {
    pub y: f64,
    pub y_max: f64,
}

impl Default for EnhanceConfig {
    fn default() -> Self {
        Self { y: 2.0, y_max: 5.0 }
    }
}

impl EnhanceConfig {
    pub fn new(y: f64) -> Result<Self, FusionError> {
        let cfg = Self {
            y,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Y = 1: fusion without enhancement.
    pub fn identity() -> Self {
        Self {
            y: 1.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), FusionError> {
        if !(self.y.is_finite() && self.y >= 1.0 && self.y <= self.y_max) {
            return Err(FusionError::Config(format!(
                "enhancement factor {} outside [1, {}]",
                self.y, self.y_max
            )));
        }
        Ok(())
    }
}

/// Which piece of the weight function produced X.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightBranch {
    /// S < s_low: X = S / (A_o/A) + c_low
    Low,
    /// s_low <= S < s_high: X = S / (A_o/A) + c_mid
    Mid,
    /// S >= s_high: X = x_cap
    Capped,
}

impl WeightBranch {
    pub fn of(s: f64, cfg: &WeightConfig) -> Self {
        if s < cfg.s_low {
            WeightBranch::Low
        } else if s < cfg.s_high {
            WeightBranch::Mid
        } else {
            WeightBranch::Capped
        }
    }

    /// 1-based position in the piecewise definition.
    pub fn ordinal(self) -> u8 {
        match self {
            WeightBranch::Low => 1,
            WeightBranch::Mid => 2,
            WeightBranch::Capped => 3,
        }
    }
}

/// Normalized L2 distance between two congruent overlap patches:
/// `sqrt(sum (f1 - f2)^2) / (w_o * h_o)`, summed over every channel and cell.
pub fn similarity(f1: &Patch, f2: &Patch, w_o: usize, h_o: usize) -> Result<f64, FusionError> {
    if f1.cells() != f2.cells() || f1.channels() != f2.channels() {
        return Err(FusionError::ShapeMismatch);
    }
    if f1.is_empty() || w_o * h_o == 0 {
        return Err(FusionError::EmptyOverlap);
    }
    // Sequential f64 accumulation keeps the sum independent of thread count.
    let sum: f64 = f1
        .values()
        .iter()
        .zip(f2.values())
        .map(|(&a, &b)| {
            let d = a as f64 - b as f64;
            d * d
        })
        .sum();
    Ok(sum.sqrt() / (w_o * h_o) as f64)
}

/// Piecewise information weight X from similarity and overlap ratio.
pub fn weight(s: f64, a_o: usize, a: usize, cfg: &WeightConfig) -> Result<f64, FusionError> {
    if a_o == 0 {
        return Err(FusionError::ZeroOverlapArea);
    }
    if a_o > a {
        return Err(FusionError::InvalidArea { a_o, a });
    }
    if !(s.is_finite() && s >= 0.0) {
        return Err(FusionError::InvalidSimilarity(s));
    }
    let ratio = a_o as f64 / a as f64;
    Ok(match WeightBranch::of(s, cfg) {
        WeightBranch::Low => s / ratio + cfg.c_low,
        WeightBranch::Mid => s / ratio + cfg.c_mid,
        WeightBranch::Capped => cfg.x_cap,
    })
}

/// Elementwise `max(f1, x * f2)` over every channel.
pub fn weighted_maxout(f1: &Patch, f2: &Patch, x: f64) -> Result<Patch, FusionError> {
    if f1.cells() != f2.cells() || f1.channels() != f2.channels() {
        return Err(FusionError::ShapeMismatch);
    }
    if !(x.is_finite() && x > 0.0) {
        return Err(FusionError::InvalidWeight(x));
    }
    let xf = x as f32;
    let chunk = f1.len().max(1);
    let mut out = vec![0.0f32; f1.values().len()];
    out.par_chunks_mut(chunk)
        .zip(f1.values().par_chunks(chunk))
        .zip(f2.values().par_chunks(chunk))
        .for_each(|((o, a), b)| {
            for ((o, &a), &b) in o.iter_mut().zip(a).zip(b) {
                *o = a.max(b * xf);
            }
        });
    Ok(f1.with_values(out))
}

/// Plain elementwise maximum of two congruent patches.
pub fn maxout_baseline(f1: &Patch, f2: &Patch) -> Result<Patch, FusionError> {
    if f1.cells() != f2.cells() || f1.channels() != f2.channels() {
        return Err(FusionError::ShapeMismatch);
    }
    let out = f1
        .values()
        .iter()
        .zip(f2.values())
        .map(|(&a, &b)| a.max(b))
        .collect();
    Ok(f1.with_values(out))
}

fn scale_in_place(values: &mut [f32], y: f32) {
    values.par_chunks_mut(1 << 16).for_each(|chunk| {
        for v in chunk {
            *v *= y;
        }
    });
}

/// Multiplies every value by Y. Zeros stay exactly zero.
pub fn enhance(map: &FeatureMap, cfg: &EnhanceConfig) -> Result<FeatureMap, FusionError> {
    cfg.validate()?;
    let mut out = map.clone();
    scale_in_place(out.values_mut(), cfg.y as f32);
    Ok(out)
}

pub fn enhance_patch(patch: &Patch, cfg: &EnhanceConfig) -> Result<Patch, FusionError> {
    cfg.validate()?;
    let mut values = patch.values().to_vec();
    scale_in_place(&mut values, cfg.y as f32);
    Ok(patch.with_values(values))
}

/// Statistics of one receiver/sender fusion step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FusionStep {
    /// `None` when the overlap was empty.
    pub similarity: Option<f64>,
    pub weight: Option<f64>,
    pub branch: Option<WeightBranch>,
    pub area_overlap: usize,
    pub area_total: usize,
}

impl FusionStep {
    pub fn is_degenerate(&self) -> bool {
        self.area_overlap == 0
    }

    pub fn overlap_ratio(&self) -> f64 {
        self.area_overlap as f64 / self.area_total as f64
    }
}

#[derive(Debug, Clone)]
pub struct FusionReport {
    /// One entry per sender, in fold order.
    pub steps: Vec<FusionStep>,
    pub y: f64,
    pub fused: FeatureMap,
}

impl FusionReport {
    /// S of the first fusion step.
    pub fn similarity(&self) -> Option<f64> {
        self.steps.first().and_then(|s| s.similarity)
    }

    /// X of the first fusion step.
    pub fn weight(&self) -> Option<f64> {
        self.steps.first().and_then(|s| s.weight)
    }

    /// A_o of the first fusion step.
    pub fn area_overlap(&self) -> usize {
        self.steps.first().map_or(0, |s| s.area_overlap)
    }

    pub fn is_degenerate(&self) -> bool {
        self.steps.iter().all(FusionStep::is_degenerate)
    }
}

/// Weighted maxout of one aligned pair without enhancement.
fn fuse_unenhanced(pair: &AlignedPair<'_>, wcfg: &WeightConfig) -> Result<(FeatureMap, FusionStep), FusionError> {
    let area_overlap = pair.overlap.area_overlap();
    let area_total = pair.overlap.area_total();
    if area_overlap == 0 {
        let step = FusionStep {
            similarity: None,
            weight: None,
            branch: None,
            area_overlap,
            area_total,
        };
        return Ok((pair.receiver.clone(), step));
    }
    let regions = split_regions(pair);
    let s = similarity(
        &regions.receiver_overlap,
        &regions.sender_overlap,
        pair.overlap.bound_width(),
        pair.overlap.bound_height(),
    )?;
    let x = weight(s, area_overlap, area_total, wcfg)?;
    let fused_overlap = weighted_maxout(&regions.receiver_overlap, &regions.sender_overlap, x)?;
    let mut out = pair.receiver.clone();
    fused_overlap.scatter_into(&mut out);
    let step = FusionStep {
        similarity: Some(s),
        weight: Some(x),
        branch: Some(WeightBranch::of(s, wcfg)),
        area_overlap,
        area_total,
    };
    Ok((out, step))
}

/// Composed fusion of an aligned pair. An empty overlap degrades to
/// enhancing the receiver map alone, with S and X left unset.
pub fn coff_fuse(
    pair: &AlignedPair<'_>,
    wcfg: &WeightConfig,
    ecfg: &EnhanceConfig,
) -> Result<FusionReport, FusionError> {
    wcfg.validate()?;
    ecfg.validate()?;
    let (mut fused, step) = fuse_unenhanced(pair, wcfg)?;
    scale_in_place(fused.values_mut(), ecfg.y as f32);
    Ok(FusionReport {
        steps: vec![step],
        y: ecfg.y,
        fused,
    })
}

fn by_distance<'s>(receiver: &FeatureMap, senders: &'s [FeatureMap]) -> Vec<&'s FeatureMap> {
    let origin = receiver.origin_pose();
    let mut ordered: Vec<&FeatureMap> = senders.iter().collect();
    ordered.sort_by(|a, b| {
        let da = origin.distance_to(&a.origin_pose());
        let db = origin.distance_to(&b.origin_pose());
        da.total_cmp(&db)
    });
    ordered
}

/// Folds senders into the receiver nearest-first, weighting each against the
/// running map, then enhances once at the end. Senders are stably sorted by
/// distance from the receiver before folding.
pub fn coff_fuse_multi(
    receiver: &FeatureMap,
    senders: &[FeatureMap],
    wcfg: &WeightConfig,
    ecfg: &EnhanceConfig,
) -> Result<FusionReport, FusionError> {
    wcfg.validate()?;
    ecfg.validate()?;
    let mut running = receiver.clone();
    let mut steps = Vec::with_capacity(senders.len());
    for sender in by_distance(receiver, senders) {
        let pair = align(&running, sender)?;
        let (next, step) = fuse_unenhanced(&pair, wcfg)?;
        steps.push(step);
        running = next;
    }
    scale_in_place(running.values_mut(), ecfg.y as f32);
    Ok(FusionReport {
        steps,
        y: ecfg.y,
        fused: running,
    })
}

/// Plain maxout of an aligned pair: overlap cells take the elementwise
/// maximum, receiver-only cells pass through.
pub fn maxout_fuse(pair: &AlignedPair<'_>) -> Result<FeatureMap, FusionError> {
    let mut out = pair.receiver.clone();
    if pair.overlap.area_overlap() > 0 {
        let regions = split_regions(pair);
        maxout_baseline(&regions.receiver_overlap, &regions.sender_overlap)?.scatter_into(&mut out);
    }
    Ok(out)
}

/// Plain maxout folded over several senders, nearest first.
pub fn maxout_fuse_multi(receiver: &FeatureMap, senders: &[FeatureMap]) -> Result<FeatureMap, FusionError> {
    let mut running = receiver.clone();
    for sender in by_distance(receiver, senders) {
        let pair = align(&running, sender)?;
        running = maxout_fuse(&pair)?;
    }
    Ok(running)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, Pose2D};

    fn patch(values: &[f32]) -> Patch {
        Patch::new(1, (0..values.len()).collect(), values.to_vec())
    }

    fn small_spec(w: usize, h: usize) -> GridSpec {
        GridSpec::new((0.0, w as f64), (0.0, h as f64), (-3.0, 1.0), 1.0, 1.0).unwrap()
    }

    #[test]
    fn similarity_examples() {
        let a = patch(&[0.3, 0.0, 1.7]);
        assert_eq!(similarity(&a, &a, 3, 1), Ok(0.0));
        assert_eq!(similarity(&patch(&[3.0]), &patch(&[1.0]), 1, 1), Ok(2.0));
        let empty = Patch::new(4, vec![], vec![]);
        assert_eq!(similarity(&empty, &empty, 1, 1), Err(FusionError::EmptyOverlap));
        assert_eq!(
            similarity(&patch(&[1.0]), &patch(&[1.0, 2.0]), 1, 1),
            Err(FusionError::ShapeMismatch)
        );
    }

    #[test]
    fn weight_examples() {
        let cfg = WeightConfig::default();
        assert_eq!(weight(0.0, 7, 10, &cfg), Ok(1.2));
        assert_eq!(weight(0.3, 9, 10, &cfg), Ok(1.8));
        let x = weight(0.2, 5, 10, &cfg).unwrap();
        assert!((x - 1.9).abs() < 1e-12, "{x}");
        assert_eq!(weight(0.1, 0, 10, &cfg), Err(FusionError::ZeroOverlapArea));
        assert_eq!(weight(0.1, 11, 10, &cfg), Err(FusionError::InvalidArea { a_o: 11, a: 10 }));
        assert!(weight(-0.1, 1, 10, &cfg).is_err());
    }

    #[test]
    fn weight_branch_boundaries() {
        let cfg = WeightConfig::default();
        let below = 0.15f64.next_down_compat();
        assert_eq!(WeightBranch::of(below, &cfg), WeightBranch::Low);
        assert_eq!(WeightBranch::of(0.15, &cfg), WeightBranch::Mid);
        assert_eq!(WeightBranch::of(0.3, &cfg), WeightBranch::Capped);
        let jump = weight(0.15, 1, 1, &cfg).unwrap() - weight(below, 1, 1, &cfg).unwrap();
        assert!((jump - 0.3).abs() < 1e-12);
    }

    trait NextDown {
        fn next_down_compat(self) -> Self;
    }

    impl NextDown for f64 {
        fn next_down_compat(self) -> Self {
            f64::from_bits(self.to_bits() - 1)
        }
    }

    #[test]
    fn weighted_maxout_examples() {
        let f1 = patch(&[1.0, 5.0]);
        assert_eq!(weighted_maxout(&f1, &patch(&[0.0, 0.0]), 1.7).unwrap(), f1);
        assert_eq!(
            weighted_maxout(&f1, &patch(&[2.0, 2.0]), 1.5).unwrap().values(),
            &[3.0, 5.0]
        );
        assert_eq!(weighted_maxout(&f1, &patch(&[1.0]), 1.5), Err(FusionError::ShapeMismatch));
        assert_eq!(weighted_maxout(&f1, &f1, 0.0), Err(FusionError::InvalidWeight(0.0)));
    }

    #[test]
    fn maxout_examples() {
        let f1 = patch(&[1.0, 5.0]);
        assert_eq!(maxout_baseline(&f1, &patch(&[2.0, 2.0])).unwrap().values(), &[2.0, 5.0]);
        assert_eq!(maxout_baseline(&f1, &f1).unwrap(), f1);
    }

    #[test]
    fn enhance_examples() {
        let spec = small_spec(2, 2);
        let zero = FeatureMap::zeros(spec.clone(), 3, Pose2D::default()).unwrap();
        assert_eq!(enhance(&zero, &EnhanceConfig::new(4.5).unwrap()).unwrap(), zero);
        let m = FeatureMap::from_values(spec, 1, vec![0.5, 0.0, 0.25, 2.0], Pose2D::default()).unwrap();
        assert_eq!(enhance(&m, &EnhanceConfig::identity()).unwrap(), m);
        assert_eq!(
            enhance(&m, &EnhanceConfig::new(3.0).unwrap()).unwrap().values(),
            &[1.5, 0.0, 0.75, 6.0]
        );
        assert!(EnhanceConfig::new(0.9).is_err());
        assert!(EnhanceConfig::new(5.5).is_err());
        assert_eq!(
            enhance_patch(&patch(&[0.5]), &EnhanceConfig::new(3.0).unwrap()).unwrap().values(),
            &[1.5]
        );
    }

    #[test]
    fn identical_maps_fuse_to_2_4x() {
        let spec = small_spec(3, 2);
        let m = FeatureMap::from_values(spec, 2, (0..12).map(|v| v as f32 * 0.5).collect(), Pose2D::default())
            .unwrap();
        let pair = align(&m, &m).unwrap();
        let report = coff_fuse(&pair, &WeightConfig::default(), &EnhanceConfig::default()).unwrap();
        assert_eq!(report.similarity(), Some(0.0));
        assert_eq!(report.weight(), Some(1.2));
        assert_eq!(report.area_overlap(), 6);
        for (f, v) in report.fused.values().iter().zip(m.values()) {
            assert!((f - 2.4 * v).abs() <= 1e-6 * v.max(1.0), "{f} vs {v}");
        }
    }

    #[test]
    fn zero_sender_with_unit_enhancement_returns_receiver() {
        let spec = small_spec(3, 3);
        let r = FeatureMap::from_values(spec.clone(), 1, (0..9).map(|v| v as f32).collect(), Pose2D::default())
            .unwrap();
        let s = FeatureMap::zeros(spec, 1, Pose2D::default()).unwrap();
        let pair = align(&r, &s).unwrap();
        let report = coff_fuse(&pair, &WeightConfig::default(), &EnhanceConfig::identity()).unwrap();
        assert_eq!(report.fused, r);
    }

    #[test]
    fn disjoint_maps_degrade_to_self_enhancement() {
        let spec = small_spec(3, 3);
        let r = FeatureMap::from_values(spec.clone(), 1, vec![1.0; 9], Pose2D::default()).unwrap();
        let s = FeatureMap::from_values(spec, 1, vec![5.0; 9], Pose2D::new(100.0, 0.0, 0.0)).unwrap();
        let pair = align(&r, &s).unwrap();
        let report = coff_fuse(&pair, &WeightConfig::default(), &EnhanceConfig::default()).unwrap();
        assert!(report.is_degenerate());
        assert_eq!(report.similarity(), None);
        assert_eq!(report.weight(), None);
        assert_eq!(report.fused.values(), &[2.0; 9]);
    }

    #[test]
    fn multi_with_no_senders_is_enhancement() {
        let spec = small_spec(2, 2);
        let r = FeatureMap::from_values(spec, 1, vec![0.0, 1.0, 2.0, 3.0], Pose2D::default()).unwrap();
        let report = coff_fuse_multi(&r, &[], &WeightConfig::default(), &EnhanceConfig::default()).unwrap();
        assert!(report.steps.is_empty());
        assert_eq!(report.fused.values(), &[0.0, 2.0, 4.0, 6.0]);
    }

    #[test]
    fn multi_with_one_sender_matches_single() {
        let spec = small_spec(4, 3);
        let r = FeatureMap::from_values(spec.clone(), 2, (0..24).map(|v| (v % 5) as f32 * 0.3).collect(), Pose2D::default())
            .unwrap();
        let s = FeatureMap::from_values(spec, 2, (0..24).map(|v| (v % 7) as f32 * 0.2).collect(), Pose2D::new(1.0, 0.0, 0.0))
            .unwrap();
        let (w, e) = (WeightConfig::default(), EnhanceConfig::default());
        let single = coff_fuse(&align(&r, &s).unwrap(), &w, &e).unwrap();
        let multi = coff_fuse_multi(&r, std::slice::from_ref(&s), &w, &e).unwrap();
        assert_eq!(single.fused, multi.fused);
        assert_eq!(single.steps, multi.steps);
    }

    #[test]
    fn multi_two_identical_senders_matches_hand_fold() {
        // 1 channel, 2x2 maps, all co-located so every cell overlaps.
        let spec = small_spec(2, 2);
        let rv = [0.4f32, 0.0, 0.9, 0.1];
        let sv = [0.2f32, 0.6, 0.0, 0.3];
        let r = FeatureMap::from_values(spec.clone(), 1, rv.to_vec(), Pose2D::default()).unwrap();
        let s = FeatureMap::from_values(spec, 1, sv.to_vec(), Pose2D::default()).unwrap();
        let (w, e) = (WeightConfig::default(), EnhanceConfig::default());

        // Hand fold: S = ||a - b|| / (2*2), A_o/A = 1, piecewise X written out longhand.
        let fold = |a: [f32; 4], b: [f32; 4]| -> ([f32; 4], f64) {
            let s = a
                .iter()
                .zip(&b)
                .map(|(&p, &q)| (p as f64 - q as f64).powi(2))
                .sum::<f64>()
                .sqrt()
                / 4.0;
            let x = if s < 0.15 {
                s + 1.2
            } else if s < 0.3 {
                s + 1.5
            } else {
                1.8
            };
            let mut out = [0.0f32; 4];
            for i in 0..4 {
                out[i] = a[i].max(b[i] * x as f32);
            }
            (out, x)
        };
        let (once, x1) = fold(rv, sv);
        let (twice, x2) = fold(once, sv);
        let expected: Vec<f32> = twice.iter().map(|v| v * 2.0).collect();

        let multi = coff_fuse_multi(&r, &[s.clone(), s.clone()], &w, &e).unwrap();
        assert_eq!(multi.fused.values(), expected.as_slice());
        assert_eq!(multi.steps[0].weight, Some(x1));
        assert_eq!(multi.steps[1].weight, Some(x2));

        let one = coff_fuse_multi(&r, std::slice::from_ref(&s), &w, &e).unwrap();
        if x2 <= x1 {
            assert_eq!(one.fused, multi.fused);
        }
    }

    #[test]
    fn multi_folds_nearest_first() {
        let spec = small_spec(2, 1);
        let r = FeatureMap::from_values(spec.clone(), 1, vec![0.0, 0.0], Pose2D::default()).unwrap();
        // A far sender listed first; both cover only part of the receiver.
        let far = FeatureMap::from_values(spec.clone(), 1, vec![1.0, 1.0], Pose2D::new(1.0, 0.0, 0.0)).unwrap();
        let near = FeatureMap::from_values(spec, 1, vec![0.5, 0.5], Pose2D::new(0.0, 0.0, 0.0)).unwrap();
        let report = coff_fuse_multi(&r, &[far, near], &WeightConfig::default(), &EnhanceConfig::identity()).unwrap();
        assert_eq!(report.steps[0].area_overlap, 2);
        assert_eq!(report.steps[1].area_overlap, 1);
    }

    #[test]
    fn bad_configs_rejected() {
        let spec = small_spec(1, 1);
        let m = FeatureMap::zeros(spec, 1, Pose2D::default()).unwrap();
        let pair = align(&m, &m).unwrap();
        let bad_w = WeightConfig {
            s_low: 0.4,
            ..WeightConfig::default()
        };
        assert!(matches!(
            coff_fuse(&pair, &bad_w, &EnhanceConfig::default()),
            Err(FusionError::Config(_))
        ));
        let bad_e = EnhanceConfig { y: 0.5, y_max: 5.0 };
        assert!(coff_fuse(&pair, &WeightConfig::default(), &bad_e).is_err());
    }

    #[test]
    fn maxout_fuse_passes_receiver_only_cells() {
        let spec = small_spec(2, 1);
        let r = FeatureMap::from_values(spec.clone(), 1, vec![0.1, 0.2], Pose2D::default()).unwrap();
        let s = FeatureMap::from_values(spec, 1, vec![0.9, 0.9], Pose2D::new(1.0, 0.0, 0.0)).unwrap();
        let fused = maxout_fuse(&align(&r, &s).unwrap()).unwrap();
        assert_eq!(fused.values(), &[0.1, 0.9]);
        assert_eq!(maxout_fuse_multi(&r, &[s]).unwrap(), fused);
    }
}
