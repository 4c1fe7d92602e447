//! Tabulate the weight factor X over similarity S and overlap ratio A_o/A.
//!
//!     cargo run --example weight_table

use coff::{weight, WeightConfig};

fn main() {
    let cfg = WeightConfig::default();
    let ratios = [(1, 4), (1, 2), (9, 10), (1, 1)];
    print!("{:>6}", "S");
    for (a_o, a) in ratios {
        print!("{:>9}", format!("{a_o}/{a}"));
    }
    println!();
    for s in [0.0, 0.05, 0.1, 0.149, 0.15, 0.2, 0.299, 0.3, 1.0] {
        print!("{s:>6}");
        for (a_o, a) in ratios {
            print!("{:>9.4}", weight(s, a_o, a, &cfg).unwrap());
        }
        println!();
    }
}
