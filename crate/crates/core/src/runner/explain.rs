use std::fmt;

use super::{evaluate_methods, visible_truth, MethodOutcome, RunConfig, RunError};
use crate::codec;
use crate::fusion::{coff_fuse_multi, FusionStep, WeightBranch};
use crate::grid::Pose2D;
use crate::sim::{build_scenario_with, Scene};

/// Fusion trace of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub label: String,
    pub poses: Vec<Pose2D>,
    pub points: Vec<usize>,
    pub message_bytes: Vec<usize>,
    pub steps: Vec<FusionStep>,
    pub y: f64,
    pub truth: usize,
    pub outcomes: Vec<MethodOutcome>,
}

fn branch_text(b: WeightBranch) -> &'static str {
    match b {
        WeightBranch::Low => "1 (S < s_low: X = S/(A_o/A) + c_low)",
        WeightBranch::Mid => "2 (s_low <= S < s_high: X = S/(A_o/A) + c_mid)",
        WeightBranch::Capped => "3 (S >= s_high: X = x_cap)",
    }
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario {}", self.label)?;
        for (i, (p, n)) in self.poses.iter().zip(&self.points).enumerate() {
            let role = if i == 0 { "receiver" } else { "sender" };
            writeln!(
                f,
                "  vehicle {i} ({role}): pose ({:.3}, {:.3}, {:.4} rad), {n} points",
                p.x, p.y, p.heading
            )?;
        }
        for (i, b) in self.message_bytes.iter().enumerate() {
            writeln!(f, "  sender {} message: {b} bytes", i + 1)?;
        }
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "fusion step {}", i + 1)?;
            writeln!(
                f,
                "  A_o = {} cells, A = {} cells, A_o/A = {:.6}",
                s.area_overlap,
                s.area_total,
                s.overlap_ratio()
            )?;
            match (s.similarity, s.weight, s.branch) {
                (Some(sim), Some(x), Some(b)) => {
                    writeln!(f, "  S = {sim:.6}")?;
                    writeln!(f, "  branch {}", branch_text(b))?;
                    writeln!(f, "  X = {x:.6}")?;
                }
                _ => writeln!(f, "  degenerate overlap: no shared cells, sender ignored, S and X undefined")?,
            }
        }
        writeln!(f, "Y = {}", self.y)?;
        writeln!(f, "truth boxes in receiver grid: {}", self.truth)?;
        for o in &self.outcomes {
            let r = &o.primary;
            writeln!(
                f,
                "  {:<16} near: {}/{} dets correct, {}/{} truth found | far: {}/{} dets correct, {}/{} truth found",
                o.method.to_string(),
                r.near_precision.hits,
                r.near_precision.total,
                r.near_recall.hits,
                r.near_recall.total,
                r.far_precision.hits,
                r.far_precision.total,
                r.far_recall.hits,
                r.far_recall.total,
            )?;
        }
        Ok(())
    }
}

/// Senses `scene` (if not already sensed), sends sender maps through the
/// codec, fuses, and scores every configured method.
pub fn explain_scene(mut scene: Scene, label: &str, cfg: &RunConfig) -> Result<Explanation, RunError> {
    if scene.vehicles.iter().any(|v| v.feature_map.is_none()) {
        scene.sense(&cfg.grid, cfg.channels, &cfg.extractor);
    }
    let truth = visible_truth(&scene, &cfg.grid);
    let receiver = scene.vehicles[0].feature_map.as_ref().expect("sensed");
    let mut senders = Vec::new();
    let mut message_bytes = Vec::new();
    for v in scene.senders() {
        let bytes = codec::encode(v.feature_map.as_ref().expect("sensed"), v.pose);
        message_bytes.push(bytes.len());
        senders.push(codec::decode(&bytes)?.0);
    }
    let report = coff_fuse_multi(receiver, &senders, &cfg.weight, &cfg.enhance)?;
    let (outcomes, _) = evaluate_methods(receiver, &senders, &truth, cfg)?;
    Ok(Explanation {
        label: label.to_string(),
        poses: scene.vehicles.iter().map(|v| v.pose).collect(),
        points: scene.vehicles.iter().map(|v| v.point_cloud.len()).collect(),
        message_bytes,
        steps: report.steps,
        y: report.y,
        truth: truth.len(),
        outcomes,
    })
}

pub fn explain(cfg: &RunConfig, seed: u64) -> Result<Explanation, RunError> {
    cfg.validate()?;
    let scene = build_scenario_with(cfg.template, seed, &cfg.lidar)?;
    explain_scene(scene, &format!("{} seed {seed}", cfg.template), cfg)
}
