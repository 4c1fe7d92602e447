//! Raw point clouds versus feature messages on a shared link.
//!
//!     cargo run --example bandwidth

use coff::codec::{bandwidth_report, message_len};

fn main() {
    let (fps, link) = (20.0, 27.0e6);
    println!("{:>8} {:>9} {:>12} {:>12} {:>10} {:>10}", "points", "channels", "raw B", "feature B", "raw fits", "feat fits");
    for points in [30_000, 120_000, 250_000] {
        for channels in [1, 8, 128] {
            let r = bandwidth_report(points, message_len(channels, 200, 176), fps, link).unwrap();
            println!(
                "{points:>8} {channels:>9} {:>12} {:>12} {:>10} {:>10}",
                r.raw_bytes,
                r.feature_bytes,
                r.raw_fits(),
                r.feature_fits()
            );
        }
    }
    let r = bandwidth_report(250_000, 0, fps, link).unwrap();
    println!("a 250k-point frame at {fps} fps needs {} Mbit/s", r.raw_throughput_bps / 1e6);
}
