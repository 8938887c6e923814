//! A chart of the finite cover containing a given surface, and a Monte Carlo
//! estimate of its volume against the bound.
//!
//! `cargo run --release --example cover_witness`

use ddvol::cover_charts::{self, ChartConfig};
use ddvol::cyclic_cover::build_cover;
use ddvol::fixtures;

fn main() {
    let config = ChartConfig::default();
    let s = fixtures::rectangle_torus(6.0, 1.0 / 6.0);
    let cover = build_cover(&s, 1).unwrap();
    let w = cover_charts::cover_witness(&cover, &config).unwrap();
    println!("k = {}, N = {}, area scale {:.6}", w.family.k(), w.family.n(), w.scale);
    println!("inside U1: {}  ({:?})", w.u1.inside(), w.u1);

    let est = cover_charts::mc_estimate(&w.o, &w.family, 200_000, 7, &config).unwrap();
    println!(
        "volume {:.5} +- {:.5}, bound {:.5} ({} of {} accepted)",
        est.estimate, est.stderr, est.bound, est.accepted, est.samples
    );
}
