//! Config-driven scenario runner: scenes in, per-method metrics and CSV
//! tables out.

mod config;
mod explain;
mod output;

pub use config::{BandwidthConfig, Method, RunConfig};
pub use explain::{explain, explain_scene, Explanation};
pub use output::write_outputs;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::align::AlignError;
use crate::codec::{self, bandwidth_report, BandwidthReport, CodecError};
use crate::fusion::{coff_fuse_multi, maxout_fuse_multi, EnhanceConfig, FusionError, FusionStep};
use crate::grid::{FeatureMap, GridSpec};
use crate::metrics::{detect_candidates, evaluate, filter_confident, quantile, EvalConfig, MetricsError, PrecisionReport, Ratio};
use crate::sim::{build_scenario_with, GroundTruthBox, Scene, SceneError};

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "COFF_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error("scene: {0}")]
    Scene(#[from] SceneError),
    #[error("fusion: {0}")]
    Fusion(#[from] FusionError),
    #[error("alignment: {0}")]
    Align(#[from] AlignError),
    #[error("codec: {0}")]
    Codec(#[from] CodecError),
    #[error("metrics: {0}")]
    Metrics(#[from] MetricsError),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl RunError {
    /// 1 for configuration problems, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            _ => 2,
        }
    }
}

/// One method's scores on one scenario at both confidence thresholds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub primary: PrecisionReport,
    pub alternate: PrecisionReport,
}

impl MethodOutcome {
    pub fn at(&self, threshold: Threshold) -> &PrecisionReport {
        match threshold {
            Threshold::Primary => &self.primary,
            Threshold::Alternate => &self.alternate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    Primary,
    Alternate,
}

impl Threshold {
    pub const BOTH: [Threshold; 2] = [Threshold::Primary, Threshold::Alternate];

    pub fn value(self, eval: &EvalConfig) -> f64 {
        match self {
            Threshold::Primary => eval.confidence_threshold,
            Threshold::Alternate => eval.alt_confidence_threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub seed: u64,
    pub outcomes: Vec<MethodOutcome>,
    /// Fusion statistics, present when a fusion method ran.
    pub fusion: Vec<FusionStep>,
    /// Truth boxes whose centers fall inside the receiver grid.
    pub truth: usize,
    /// Point count per vehicle, receiver first.
    pub points: Vec<usize>,
    /// Encoded size of each sender's message.
    pub message_bytes: Vec<usize>,
}

impl ScenarioResult {
    pub fn outcome(&self, method: Method) -> Option<&MethodOutcome> {
        self.outcomes.iter().find(|o| o.method == method)
    }
}

/// Aggregates of one method at one threshold across scenarios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub threshold: Threshold,
    /// Means over scenarios whose ratio is not vacuous; `None` if all are.
    pub near_precision_mean: Option<f64>,
    pub far_precision_mean: Option<f64>,
    pub near_recall_mean: Option<f64>,
    pub far_recall_mean: Option<f64>,
    pub near_precision: Ratio,
    pub far_precision: Ratio,
    pub near_recall: Ratio,
    pub far_recall: Ratio,
    /// 90th-percentile matched range, nearest rank.
    pub range_p90: Option<f64>,
    pub range_max: Option<f64>,
}

impl MethodSummary {
    pub fn precision(&self) -> Ratio {
        self.near_precision + self.far_precision
    }

    pub fn recall(&self) -> Ratio {
        self.near_recall + self.far_recall
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub template: String,
    pub seeds: Vec<u64>,
    pub scenarios: Vec<ScenarioResult>,
    pub methods: Vec<MethodSummary>,
    pub mean_similarity: Option<f64>,
    pub mean_weight: Option<f64>,
    pub bandwidth: BandwidthReport,
}

impl RunSummary {
    pub fn method(&self, method: Method, threshold: Threshold) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == method && m.threshold == threshold)
    }

    /// Matched ranges of `method` at the primary threshold, pooled over scenarios.
    pub fn ranges(&self, method: Method) -> Vec<f64> {
        self.scenarios
            .iter()
            .filter_map(|s| s.outcome(method))
            .flat_map(|o| o.primary.ranges.iter().copied())
            .collect()
    }
}

/// Truth boxes whose centers land inside the receiver's grid.
pub fn visible_truth(scene: &Scene, spec: &GridSpec) -> Vec<GroundTruthBox> {
    let pose = scene.receiver().pose;
    scene
        .objects
        .iter()
        .filter(|o| spec.contains(pose.to_local(o.center)))
        .copied()
        .collect()
}

/// Runs every requested method on one receiver and its (already received)
/// sender maps. Single-vehicle perception reads only the receiver map.
pub fn evaluate_methods(
    receiver: &FeatureMap,
    senders: &[FeatureMap],
    truth: &[GroundTruthBox],
    cfg: &RunConfig,
) -> Result<(Vec<MethodOutcome>, Vec<FusionStep>), RunError> {
    let pose = receiver.origin_pose();
    let score = |map: &FeatureMap, method: Method| {
        let cands = detect_candidates(map, &cfg.eval);
        let primary = filter_confident(cands.clone(), cfg.eval.confidence_threshold);
        let alternate = filter_confident(cands, cfg.eval.alt_confidence_threshold);
        MethodOutcome {
            method,
            primary: evaluate(&primary, truth, &pose, &cfg.eval),
            alternate: evaluate(&alternate, truth, &pose, &cfg.eval),
        }
    };
    let mut outcomes = Vec::with_capacity(cfg.methods.len());
    let mut steps = Vec::new();
    for &method in &cfg.methods {
        let outcome = match method {
            Method::Single => score(receiver, method),
            Method::Maxout => score(&maxout_fuse_multi(receiver, senders)?, method),
            Method::Coff | Method::CoffNoEnhance => {
                let ecfg = if method == Method::Coff {
                    cfg.enhance
                } else {
                    EnhanceConfig::identity()
                };
                let report = coff_fuse_multi(receiver, senders, &cfg.weight, &ecfg)?;
                steps = report.steps.clone();
                score(&report.fused, method)
            }
        };
        outcomes.push(outcome);
    }
    Ok((outcomes, steps))
}

/// Builds, senses and scores one seeded scenario. Sender maps travel through
/// the codec before fusion.
pub fn run_scenario(cfg: &RunConfig, seed: u64) -> Result<ScenarioResult, RunError> {
    let mut scene = build_scenario_with(cfg.template, seed, &cfg.lidar)?;
    scene.sense(&cfg.grid, cfg.channels, &cfg.extractor);
    let truth = visible_truth(&scene, &cfg.grid);
    let receiver = scene.vehicles[0].feature_map.as_ref().expect("sensed above");
    let mut senders = Vec::with_capacity(scene.vehicles.len() - 1);
    let mut message_bytes = Vec::with_capacity(scene.vehicles.len() - 1);
    for v in scene.senders() {
        let bytes = codec::encode(v.feature_map.as_ref().expect("sensed above"), v.pose);
        message_bytes.push(bytes.len());
        let (map, _) = codec::decode(&bytes)?;
        senders.push(map);
    }
    let (outcomes, fusion) = evaluate_methods(receiver, &senders, &truth, cfg)?;
    Ok(ScenarioResult {
        seed,
        outcomes,
        fusion,
        truth: truth.len(),
        points: scene.vehicles.iter().map(|v| v.point_cloud.len()).collect(),
        message_bytes,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn summarize(cfg: &RunConfig, scenarios: &[ScenarioResult]) -> Vec<MethodSummary> {
    let mut out = Vec::new();
    for &method in &cfg.methods {
        for threshold in Threshold::BOTH {
            let reports: Vec<&PrecisionReport> = scenarios
                .iter()
                .filter_map(|s| s.outcome(method))
                .map(|o| o.at(threshold))
                .collect();
            let pooled = |f: fn(&PrecisionReport) -> Ratio| reports.iter().map(|r| f(r)).fold(Ratio::default(), |a, b| a + b);
            let avg = |f: fn(&PrecisionReport) -> Ratio| mean(reports.iter().filter_map(|r| f(r).checked()));
            let ranges: Vec<f64> = reports.iter().flat_map(|r| r.ranges.iter().copied()).collect();
            out.push(MethodSummary {
                method,
                threshold,
                near_precision_mean: avg(|r| r.near_precision),
                far_precision_mean: avg(|r| r.far_precision),
                near_recall_mean: avg(|r| r.near_recall),
                far_recall_mean: avg(|r| r.far_recall),
                near_precision: pooled(|r| r.near_precision),
                far_precision: pooled(|r| r.far_precision),
                near_recall: pooled(|r| r.near_recall),
                far_recall: pooled(|r| r.far_recall),
                range_p90: quantile(&ranges, 0.9),
                range_max: ranges.iter().copied().reduce(f64::max),
            });
        }
    }
    out
}

/// Runs all configured seeds on a pool of `workers` threads (0 = rayon's
/// default) and aggregates. The result does not depend on `workers`.
pub fn run_with_workers(cfg: &RunConfig, workers: usize) -> Result<RunSummary, RunError> {
    cfg.validate()?;
    let seeds = cfg.seed_list();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let mut scenarios: Vec<ScenarioResult> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                log::debug!("scenario {} seed {seed}", cfg.template);
                run_scenario(cfg, seed)
            })
            .collect::<Result<_, _>>()
    })?;
    scenarios.sort_by_key(|s| s.seed);

    let steps: Vec<&FusionStep> = scenarios.iter().filter_map(|s| s.fusion.first()).collect();
    let mean_similarity = mean(steps.iter().filter_map(|s| s.similarity));
    let mean_weight = mean(steps.iter().filter_map(|s| s.weight));
    let points = mean(scenarios.iter().map(|s| s.points[0] as f64)).unwrap_or(0.0).round() as usize;
    let msg = codec::message_len(cfg.channels, cfg.grid.cells_y(), cfg.grid.cells_x());
    let bandwidth = bandwidth_report(points, msg, cfg.bandwidth.frame_rate, cfg.bandwidth.link_rate_bps)?;
    Ok(RunSummary {
        template: cfg.template.to_string(),
        seeds,
        methods: summarize(cfg, &scenarios),
        scenarios,
        mean_similarity,
        mean_weight,
        bandwidth,
    })
}

pub fn run(cfg: &RunConfig) -> Result<RunSummary, RunError> {
    run_with_workers(cfg, 0)
}
