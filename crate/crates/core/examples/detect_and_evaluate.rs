//! Detect vehicles on the receiver map and on the fused map, then score both
//! against ground truth with the near/far protocol.
//!
//!     cargo run --example detect_and_evaluate -- multilane 3

use coff::metrics::{detect, evaluate, EvalConfig};
use coff::runner::visible_truth;
use coff::sim::{build_scenario, ExtractorConfig, Template};
use coff::{coff_fuse_multi, EnhanceConfig, GridSpec, WeightConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let template: Template = args.next().as_deref().unwrap_or("multilane").parse().unwrap();
    let seed: u64 = args.next().map(|s| s.parse().unwrap()).unwrap_or(3);

    let spec = GridSpec::default();
    let mut scene = build_scenario(template, seed).unwrap();
    scene.sense(&spec, 16, &ExtractorConfig::default());
    let truth = visible_truth(&scene, &spec);
    let receiver = scene.vehicles[0].feature_map.clone().unwrap();
    let senders: Vec<_> = scene.senders().iter().map(|v| v.feature_map.clone().unwrap()).collect();
    let fused = coff_fuse_multi(&receiver, &senders, &WeightConfig::default(), &EnhanceConfig::default())
        .unwrap()
        .fused;

    let cfg = EvalConfig::default();
    let pose = receiver.origin_pose();
    for (name, map) in [("single", &receiver), ("coff", &fused)] {
        let dets = detect(map, &cfg);
        let r = evaluate(&dets, &truth, &pose, &cfg);
        println!("{name}: {} detections", dets.len());
        for d in &dets {
            let c = d.bbox.center();
            println!("  ({:6.1}, {:6.1}) {:.1} x {:.1} m, confidence {:.2}", c.x, c.y, d.bbox.width(), d.bbox.height(), d.confidence);
        }
        println!(
            "  precision near {}/{} far {}/{}, recall near {}/{} far {}/{}",
            r.near_precision.hits, r.near_precision.total, r.far_precision.hits, r.far_precision.total,
            r.near_recall.hits, r.near_recall.total, r.far_recall.hits, r.far_recall.total
        );
    }
}
