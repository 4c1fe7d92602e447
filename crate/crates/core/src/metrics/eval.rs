use serde::{Deserialize, Serialize};

use super::{Detection, EvalConfig};
use crate::grid::{Aabb, Pose2D};
use crate::sim::GroundTruthBox;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub detection: usize,
    pub truth: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MatchResult {
    pub matches: Vec<Match>,
    pub unmatched_detections: Vec<usize>,
    pub unmatched_truth: Vec<usize>,
}

impl MatchResult {
    /// Truth index matched to detection `d`, if any.
    pub fn truth_of(&self, d: usize) -> Option<usize> {
        self.matches.iter().find(|m| m.detection == d).map(|m| m.truth)
    }
}

/// Greedy one-to-one matching. Detections are visited by descending
/// confidence (ties by index); each takes the unmatched truth box with the
/// highest IoU, provided it reaches the threshold.
pub fn match_detections(dets: &[Detection], truth: &[Aabb], iou_threshold: f64) -> MatchResult {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].confidence.total_cmp(&dets[a].confidence).then(a.cmp(&b)));
    let mut taken = vec![false; truth.len()];
    let mut result = MatchResult::default();
    for d in order {
        let best = truth
            .iter()
            .enumerate()
            .filter(|(t, _)| !taken[*t])
            .map(|(t, b)| (t, dets[d].bbox.iou(b)))
            .filter(|&(_, iou)| iou >= iou_threshold)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        match best {
            Some((t, iou)) => {
                taken[t] = true;
                result.matches.push(Match {
                    detection: d,
                    truth: t,
                    iou,
                });
            }
            None => result.unmatched_detections.push(d),
        }
    }
    result.unmatched_detections.sort_unstable();
    result.unmatched_truth = (0..truth.len()).filter(|&t| !taken[t]).collect();
    result
}

/// `hits / total`. An empty denominator is vacuous and reads as 1.0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Ratio {
    pub hits: usize,
    pub total: usize,
}

impl Ratio {
    pub fn new(hits: usize, total: usize) -> Self {
        debug_assert!(hits <= total);
        Self { hits, total }
    }

    pub fn is_vacuous(&self) -> bool {
        self.total == 0
    }

    pub fn value(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.hits as f64 / self.total as f64
        }
    }

    pub fn checked(&self) -> Option<f64> {
        (self.total > 0).then(|| self.value())
    }
}

impl std::ops::Add for Ratio {
    type Output = Ratio;

    fn add(self, o: Ratio) -> Ratio {
        Ratio::new(self.hits + o.hits, self.total + o.total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Near,
    Far,
}

impl Category {
    pub fn of(distance: f64, split: f64) -> Self {
        if distance < split {
            Category::Near
        } else {
            Category::Far
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionReport {
    pub near_precision: Ratio,
    pub far_precision: Ratio,
    pub near_recall: Ratio,
    pub far_recall: Ratio,
    /// Matched truth distance per matched detection, in detection order.
    pub ranges: Vec<f64>,
    /// Category of every truth box, in input order.
    pub truth_categories: Vec<Category>,
}

impl PrecisionReport {
    pub fn precision(&self) -> Ratio {
        self.near_precision + self.far_precision
    }

    pub fn recall(&self) -> Ratio {
        self.near_recall + self.far_recall
    }

    /// Farthest matched truth distance.
    pub fn detection_range(&self) -> Option<f64> {
        self.ranges.iter().copied().reduce(f64::max)
    }
}

/// Scores detections (in the receiver frame) against world-frame truth.
/// Truth is near when its center lies within `near_far_split` of the
/// receiver; a detection takes its matched truth's category, or its own
/// center's when unmatched.
pub fn evaluate(dets: &[Detection], truth: &[GroundTruthBox], receiver: &Pose2D, cfg: &EvalConfig) -> PrecisionReport {
    let local: Vec<GroundTruthBox> = truth.iter().map(|t| t.in_frame(receiver)).collect();
    let envelopes: Vec<Aabb> = local.iter().map(|t| t.envelope()).collect();
    let dist: Vec<f64> = local.iter().map(|t| t.center.norm()).collect();
    let truth_categories: Vec<Category> = dist.iter().map(|&d| Category::of(d, cfg.near_far_split)).collect();
    let m = match_detections(dets, &envelopes, cfg.iou_threshold);

    let mut precision = [Ratio::default(); 2];
    let mut ranges = Vec::new();
    for (d, det) in dets.iter().enumerate() {
        let (cat, hit) = match m.truth_of(d) {
            Some(t) => {
                ranges.push(dist[t]);
                (truth_categories[t], 1)
            }
            None => (Category::of(det.bbox.center().norm(), cfg.near_far_split), 0),
        };
        let slot = &mut precision[cat as usize];
        *slot = *slot + Ratio::new(hit, 1);
    }
    let mut recall = [Ratio::default(); 2];
    let matched: std::collections::HashSet<usize> = m.matches.iter().map(|x| x.truth).collect();
    for (t, &cat) in truth_categories.iter().enumerate() {
        let slot = &mut recall[cat as usize];
        *slot = *slot + Ratio::new(matched.contains(&t) as usize, 1);
    }
    PrecisionReport {
        near_precision: precision[0],
        far_precision: precision[1],
        near_recall: recall[0],
        far_recall: recall[1],
        ranges,
        truth_categories,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Point;

    fn aabb(x0: f64, y0: f64, x1: f64, y1: f64) -> Aabb {
        Aabb::new(Point::new(x0, y0), Point::new(x1, y1))
    }

    fn det(b: Aabb, c: f64) -> Detection {
        Detection::new(b, c).unwrap()
    }

    /// Axis-aligned truth box with the given envelope.
    fn truth(id: u32, b: Aabb) -> GroundTruthBox {
        GroundTruthBox::new(id, b.center(), b.width(), b.height(), 0.0)
    }

    #[test]
    fn exact_detections_are_perfect() {
        let boxes = [aabb(5.0, -1.0, 9.0, 1.0), aabb(30.0, 2.0, 34.0, 4.0)];
        let dets: Vec<Detection> = boxes.iter().map(|&b| det(b, 0.9)).collect();
        let truth: Vec<GroundTruthBox> = boxes.iter().enumerate().map(|(i, &b)| truth(i as u32, b)).collect();
        let r = evaluate(&dets, &truth, &Pose2D::default(), &EvalConfig::default());
        assert_eq!(r.precision().value(), 1.0);
        assert_eq!(r.recall().value(), 1.0);
    }

    #[test]
    fn no_detections_is_vacuous_precision() {
        let t = [truth(0, aabb(5.0, -1.0, 9.0, 1.0))];
        let r = evaluate(&[], &t, &Pose2D::default(), &EvalConfig::default());
        assert!(r.precision().is_vacuous());
        assert_eq!(r.precision().value(), 1.0);
        assert_eq!(r.recall().value(), 0.0);
    }

    #[test]
    fn two_detections_one_truth() {
        let t = [aabb(0.0, 0.0, 4.0, 2.0)];
        let dets = [det(aabb(0.0, 0.0, 4.0, 2.2), 0.7), det(aabb(0.2, 0.0, 4.0, 2.0), 0.9)];
        let m = match_detections(&dets, &t, 0.5);
        // exhaustive oracle: of the two feasible assignments, greedy picks the
        // more confident detection
        assert_eq!(m.matches.len(), 1);
        assert_eq!(m.matches[0].detection, 1);
        assert_eq!(m.unmatched_detections, vec![0]);
        assert!(m.unmatched_truth.is_empty());
    }

    #[test]
    fn near_only_scene_flags_far() {
        let b = aabb(3.0, -1.0, 7.0, 1.0);
        let r = evaluate(&[det(b, 0.8)], &[truth(0, b)], &Pose2D::default(), &EvalConfig::default());
        assert_eq!(r.near_precision.value(), 1.0);
        assert!(r.far_precision.is_vacuous() && r.far_recall.is_vacuous());
    }

    #[test]
    fn range_is_matched_truth_distance() {
        let b = aabb(43.0, -1.0, 47.0, 1.0);
        let r = evaluate(&[det(b, 0.8)], &[truth(0, b)], &Pose2D::default(), &EvalConfig::default());
        assert_eq!(r.detection_range(), Some(45.0));
    }

    #[test]
    fn truth_is_moved_into_receiver_frame() {
        // receiver at (100, 50) facing +y; a box 10 m ahead of it
        let pose = Pose2D::new(100.0, 50.0, std::f64::consts::FRAC_PI_2);
        let t = GroundTruthBox::new(0, Point::new(100.0, 60.0), 4.0, 2.0, std::f64::consts::FRAC_PI_2);
        let d = det(aabb(8.0, -1.0, 12.0, 1.0), 0.9);
        let r = evaluate(&[d], &[t], &pose, &EvalConfig::default());
        assert_eq!(r.near_recall, Ratio::new(1, 1));
    }

    #[test]
    fn five_box_fixture_matches_hand_partition() {
        // truth: A 8 m, B 15 m, C 25 m, D 40 m, E 60 m (centers on the x axis)
        let tb = |x: f64| aabb(x - 2.0, -1.0, x + 2.0, 1.0);
        let xs = [8.0, 15.0, 25.0, 40.0, 60.0];
        let truth: Vec<GroundTruthBox> = xs.iter().enumerate().map(|(i, &x)| truth(i as u32, tb(x))).collect();
        let dets = vec![
            det(tb(8.0), 0.9),                       // A hit, near
            det(aabb(13.5, -1.0, 17.0, 1.0), 0.8),   // B hit (IoU 3.5/4 = 0.875), near
            det(aabb(10.0, 5.0, 12.0, 7.0), 0.7),    // FP, center 12.5 m -> near
            det(aabb(39.0, -1.0, 42.0, 1.0), 0.6),   // D hit (IoU 3/4 = 0.75), far
            det(aabb(24.0, 3.0, 26.0, 5.0), 0.55),   // FP, center 25.3 m -> far
            det(aabb(58.0, -1.0, 59.5, 1.0), 0.52),  // E miss (IoU 1.5/4 < 0.5), far FP
        ];
        let r = evaluate(&dets, &truth, &Pose2D::default(), &EvalConfig::default());
        assert_eq!(r.near_precision, Ratio::new(2, 3));
        assert_eq!(r.far_precision, Ratio::new(1, 3));
        assert_eq!(r.near_recall, Ratio::new(2, 2));
        assert_eq!(r.far_recall, Ratio::new(1, 3));
        assert_eq!(r.ranges, vec![8.0, 15.0, 40.0]);
        assert_eq!(
            r.truth_categories,
            vec![Category::Near, Category::Near, Category::Far, Category::Far, Category::Far]
        );
    }

    use proptest::prelude::*;

    fn arb_box() -> impl Strategy<Value = Aabb> {
        (0.0f64..20.0, -5.0f64..5.0, 0.5f64..5.0, 0.5f64..3.0).prop_map(|(x, y, w, h)| aabb(x, y, x + w, y + h))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn matching_is_one_to_one_and_above_threshold(
            d in proptest::collection::vec((arb_box(), 0.0f64..1.0), 0..8),
            t in proptest::collection::vec(arb_box(), 0..8),
        ) {
            let dets: Vec<Detection> = d.iter().map(|&(b, c)| det(b, c)).collect();
            let m = match_detections(&dets, &t, 0.5);
            prop_assert!(m.matches.len() <= dets.len().min(t.len()));
            prop_assert_eq!(m.matches.len() + m.unmatched_detections.len(), dets.len());
            prop_assert_eq!(m.matches.len() + m.unmatched_truth.len(), t.len());
            let mut seen = std::collections::HashSet::new();
            for x in &m.matches {
                prop_assert!(x.iou >= 0.5);
                prop_assert!(seen.insert(x.truth));
            }
        }

        #[test]
        fn every_truth_box_is_near_or_far(xs in proptest::collection::vec((-60.0f64..60.0, -60.0f64..60.0), 0..10)) {
            let truth: Vec<GroundTruthBox> = xs
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| GroundTruthBox::new(i as u32, Point::new(x, y), 4.0, 2.0, 0.0))
                .collect();
            let r = evaluate(&[], &truth, &Pose2D::default(), &EvalConfig::default());
            prop_assert_eq!(r.near_recall.total + r.far_recall.total, truth.len());
            prop_assert_eq!(r.truth_categories.len(), truth.len());
        }
    }
}
