//! Encode a sensed feature map, decode it, and show that a flipped byte is
//! rejected.
//!
//!     cargo run --example codec_roundtrip

use coff::codec::{decode, encode};
use coff::sim::{build_scenario, ExtractorConfig, Template};
use coff::GridSpec;

fn main() {
    let mut scene = build_scenario(Template::Intersection, 1).unwrap();
    scene.sense(&GridSpec::default(), 8, &ExtractorConfig::default());
    let sender = &scene.vehicles[1];
    let map = sender.feature_map.as_ref().unwrap();

    let bytes = encode(map, sender.pose);
    println!("{} x {} x {} map -> {} bytes", map.channels(), map.height(), map.width(), bytes.len());
    let (back, pose) = decode(&bytes).unwrap();
    println!("pose back: {pose:?}; values identical: {}", back.values() == map.values());

    let mut corrupt = bytes.clone();
    corrupt[bytes.len() / 2] ^= 0x10;
    println!("one flipped bit: {}", decode(&corrupt).unwrap_err());
}
