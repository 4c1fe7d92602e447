//! Drive the scenario runner from a TOML config and write the CSV tables.
//!
//!     cargo run --release --example run_scenarios -- configs/multilane.toml out/

use std::path::PathBuf;

use coff::runner::{run, write_outputs, Method, RunConfig, Threshold};
use coff::sim::Template;

fn main() {
    let mut args = std::env::args().skip(1);
    let cfg = match args.next() {
        Some(path) => RunConfig::load(path.as_ref()).unwrap(),
        None => {
            let mut cfg = RunConfig::new(Template::Multilane, 10);
            cfg.channels = 8;
            cfg
        }
    };
    let dir = args.next().map(PathBuf::from).unwrap_or_else(|| cfg.output_dir.clone());
    let summary = run(&cfg).unwrap();
    for m in cfg.methods.iter().copied() {
        let s = summary.method(m, Threshold::Primary).unwrap();
        println!(
            "{:<16} precision {:.3} recall {:.3} p90 range {:?}",
            m.to_string(),
            s.precision().value(),
            s.recall().value(),
            s.range_p90
        );
    }
    if let Some(coff) = summary.method(Method::Coff, Threshold::Primary) {
        println!("coff far recall (pooled) {:.3}", coff.far_recall.value());
    }
    for p in write_outputs(&summary, &cfg, &dir).unwrap() {
        println!("wrote {}", p.display());
    }
}
