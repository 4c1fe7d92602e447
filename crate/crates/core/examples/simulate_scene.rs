//! Build a seeded scene, ray-cast every vehicle and report occlusion.
//!
//!     cargo run --example simulate_scene -- parking_lot 7

use coff::sim::{build_scenario, ExtractorConfig, Template};
use coff::{classify_feature, GridSpec};

fn main() {
    let mut args = std::env::args().skip(1);
    let template: Template = args.next().as_deref().unwrap_or("parking_lot").parse().unwrap();
    let seed: u64 = args.next().map(|s| s.parse().unwrap()).unwrap_or(7);

    let mut scene = build_scenario(template, seed).unwrap();
    let receiver = scene.points_per_object(0).unwrap();
    let sender = scene.points_per_object(1).unwrap();
    println!("{template} seed {seed}: {} objects", scene.objects.len());
    println!("{:>4} {:>8} {:>8} {:>9} {:>9}", "id", "x", "y", "rx pts", "tx pts");
    for ((o, r), s) in scene.objects.iter().zip(&receiver).zip(&sender) {
        println!("{:>4} {:>8.1} {:>8.1} {r:>9} {s:>9}", o.id, o.center.x, o.center.y);
    }
    let hidden = receiver.iter().filter(|&&n| n == 0).count();
    println!("hidden from receiver: {hidden}/{}", receiver.len());

    let spec = GridSpec::default();
    scene.sense(&spec, 16, &ExtractorConfig::default());
    for (i, v) in scene.vehicles.iter().enumerate() {
        let map = v.feature_map.as_ref().unwrap();
        let occupied = map.channel_max().iter().filter(|&&a| a > 0.0).count();
        let class = classify_feature(&map.channel_max(), &Default::default()).unwrap();
        println!("vehicle {i}: {} points, {occupied} occupied cells, whole map {class:?}", v.point_cloud.len());
    }
}
