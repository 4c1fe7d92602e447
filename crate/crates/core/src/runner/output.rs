use std::path::{Path, PathBuf};

use super::{Method, RunConfig, RunError, RunSummary, Threshold};
use crate::codec::{bandwidth_report, message_len, BandwidthReport};
use crate::metrics::{improvement_cdf, range_cdf, CdfPoint};

/// Point count of the reference raw frame in the bandwidth table (3 MB).
pub const REFERENCE_POINTS: usize = 250_000;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn writer(dir: &Path, name: &str, written: &mut Vec<PathBuf>) -> Result<csv::Writer<std::fs::File>, RunError> {
    let path = dir.join(name);
    let w = csv::Writer::from_path(&path)?;
    written.push(path);
    Ok(w)
}

fn write_cdf(dir: &Path, name: &str, header: [&str; 2], points: &[CdfPoint], written: &mut Vec<PathBuf>) -> Result<(), RunError> {
    let mut w = writer(dir, name, written)?;
    w.write_record(header)?;
    for p in points {
        w.write_record([p.value.to_string(), p.fraction.to_string()])?;
    }
    w.flush().map_err(|source| RunError::Io {
        path: dir.join(name),
        source,
    })
}

fn bandwidth_row(label: &str, r: &BandwidthReport) -> Vec<String> {
    vec![
        label.to_string(),
        r.points.to_string(),
        r.raw_bytes.to_string(),
        r.feature_bytes.to_string(),
        r.ratio.to_string(),
        r.frame_rate.to_string(),
        r.link_rate_bps.to_string(),
        r.raw_throughput_bps.to_string(),
        r.feature_throughput_bps.to_string(),
        r.raw_transfer_s.to_string(),
        r.feature_transfer_s.to_string(),
        r.raw_fits().to_string(),
        r.feature_fits().to_string(),
    ]
}

/// Baseline for improvement CDFs: maxout when it ran, else single.
pub fn baseline_method(methods: &[Method]) -> Option<Method> {
    [Method::Maxout, Method::Single].into_iter().find(|m| methods.contains(m))
}

/// Writes `summary.csv`, `scenarios.csv`, `bandwidth.csv` and per-method
/// CDF tables into `dir`, creating it if needed. Returns the files written.
pub fn write_outputs(summary: &RunSummary, cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();

    let mut w = writer(dir, "summary.csv", &mut written)?;
    w.write_record([
        "method",
        "threshold",
        "near_precision_mean",
        "far_precision_mean",
        "near_recall_mean",
        "far_recall_mean",
        "near_precision_pooled",
        "far_precision_pooled",
        "near_recall_pooled",
        "far_recall_pooled",
        "precision_pooled",
        "recall_pooled",
        "range_p90_m",
        "range_max_m",
        "mean_similarity",
        "mean_weight",
    ])?;
    for m in &summary.methods {
        w.write_record([
            m.method.to_string(),
            m.threshold.value(&cfg.eval).to_string(),
            opt(m.near_precision_mean),
            opt(m.far_precision_mean),
            opt(m.near_recall_mean),
            opt(m.far_recall_mean),
            m.near_precision.value().to_string(),
            m.far_precision.value().to_string(),
            m.near_recall.value().to_string(),
            m.far_recall.value().to_string(),
            m.precision().value().to_string(),
            m.recall().value().to_string(),
            opt(m.range_p90),
            opt(m.range_max),
            opt(summary.mean_similarity),
            opt(summary.mean_weight),
        ])?;
    }
    w.flush().map_err(|source| RunError::Io {
        path: dir.join("summary.csv"),
        source,
    })?;

    let mut w = writer(dir, "scenarios.csv", &mut written)?;
    w.write_record([
        "seed",
        "method",
        "threshold",
        "near_precision_hits",
        "near_precision_total",
        "far_precision_hits",
        "far_precision_total",
        "near_recall_hits",
        "near_recall_total",
        "far_recall_hits",
        "far_recall_total",
        "detection_range_m",
        "similarity",
        "weight",
        "branch",
        "overlap_ratio",
        "truth",
        "receiver_points",
        "message_bytes",
    ])?;
    for s in &summary.scenarios {
        let step = s.fusion.first();
        for o in &s.outcomes {
            for t in Threshold::BOTH {
                let r = o.at(t);
                w.write_record([
                    s.seed.to_string(),
                    o.method.to_string(),
                    t.value(&cfg.eval).to_string(),
                    r.near_precision.hits.to_string(),
                    r.near_precision.total.to_string(),
                    r.far_precision.hits.to_string(),
                    r.far_precision.total.to_string(),
                    r.near_recall.hits.to_string(),
                    r.near_recall.total.to_string(),
                    r.far_recall.hits.to_string(),
                    r.far_recall.total.to_string(),
                    opt(r.detection_range()),
                    opt(step.and_then(|f| f.similarity)),
                    opt(step.and_then(|f| f.weight)),
                    step.and_then(|f| f.branch).map(|b| b.ordinal().to_string()).unwrap_or_default(),
                    opt(step.map(|f| f.overlap_ratio())),
                    s.truth.to_string(),
                    s.points[0].to_string(),
                    s.message_bytes.first().map(|b| b.to_string()).unwrap_or_default(),
                ])?;
            }
        }
    }
    w.flush().map_err(|source| RunError::Io {
        path: dir.join("scenarios.csv"),
        source,
    })?;

    if let Some(base) = baseline_method(&cfg.methods) {
        for &method in cfg.methods.iter().filter(|&&m| m != base) {
            let records: Vec<(f64, f64)> = summary
                .scenarios
                .iter()
                .filter_map(|s| Some((s.outcome(base)?, s.outcome(method)?)))
                .map(|(b, m)| (b.primary.precision().value(), m.primary.precision().value()))
                .collect();
            let cdf = improvement_cdf(&records);
            if cdf.excluded > 0 {
                log::info!("{method}: {} zero-baseline scenarios left out of the improvement CDF", cdf.excluded);
            }
            write_cdf(
                dir,
                &format!("cdf_improvement_{method}.csv"),
                ["improvement_pct", "cumulative_fraction"],
                &cdf.points,
                &mut written,
            )?;
        }
    }
    for &method in &cfg.methods {
        write_cdf(
            dir,
            &format!("cdf_range_{method}.csv"),
            ["range_m", "cumulative_fraction"],
            &range_cdf(&summary.ranges(method)),
            &mut written,
        )?;
    }

    let mut w = writer(dir, "bandwidth.csv", &mut written)?;
    w.write_record([
        "source",
        "points",
        "raw_bytes",
        "feature_bytes",
        "ratio",
        "frame_rate",
        "link_rate_bps",
        "raw_throughput_bps",
        "feature_throughput_bps",
        "raw_transfer_s",
        "feature_transfer_s",
        "raw_fits",
        "feature_fits",
    ])?;
    w.write_record(bandwidth_row("scenario_mean", &summary.bandwidth))?;
    let reference = bandwidth_report(
        REFERENCE_POINTS,
        message_len(cfg.channels, cfg.grid.cells_y(), cfg.grid.cells_x()),
        cfg.bandwidth.frame_rate,
        cfg.bandwidth.link_rate_bps,
    )?;
    w.write_record(bandwidth_row("reference_frame", &reference))?;
    w.flush().map_err(|source| RunError::Io {
        path: dir.join("bandwidth.csv"),
        source,
    })?;
    Ok(written)
}
