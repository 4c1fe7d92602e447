//! Fuse two small hand-built maps and show S, X and the fused values.
//!
//!     cargo run --example fuse_pair

use coff::{align, coff_fuse, maxout_fuse, CellIndex, EnhanceConfig, FeatureMap, GridSpec, Pose2D, WeightConfig};

fn main() {
    // 4 x 3 cells of 1 m, one channel.
    let spec = GridSpec::new((0.0, 4.0), (0.0, 3.0), GridSpec::DEFAULT_Z_RANGE, 1.0, 1.0).unwrap();
    let mut receiver = FeatureMap::zeros(spec.clone(), 1, Pose2D::new(0.0, 0.0, 0.0)).unwrap();
    receiver.set(0, CellIndex::new(1, 1), 0.9).unwrap();
    receiver.set(0, CellIndex::new(1, 2), 0.2).unwrap();

    // The sender sits two cells ahead, so half of each grid overlaps.
    let mut sender = FeatureMap::zeros(spec, 1, Pose2D::new(2.0, 0.0, 0.0)).unwrap();
    sender.set(0, CellIndex::new(1, 0), 0.3).unwrap();
    sender.set(0, CellIndex::new(1, 1), 0.35).unwrap();

    let pair = align(&receiver, &sender).unwrap();
    let report = coff_fuse(&pair, &WeightConfig::default(), &EnhanceConfig::default()).unwrap();
    let maxout = maxout_fuse(&pair).unwrap();
    let step = report.steps[0];
    println!("overlap {} of {} cells", step.area_overlap, step.area_total);
    println!("S = {:.4}  X = {:.4}  Y = {}", step.similarity.unwrap(), step.weight.unwrap(), report.y);
    for (name, map) in [("receiver", &receiver), ("maxout", &maxout), ("coff", &report.fused)] {
        println!("{name:>8}: {:?}", map.channel(0));
    }
}
