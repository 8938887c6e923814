//! Long edges and long cylinders on a thin torus.
//!
//! `cargo run --example cylinders`

use ddvol::cover_charts;
use ddvol::cyclic_cover::build_cover;
use ddvol::delaunay::{self, DelaunayConfig};
use ddvol::fixtures;

fn main() {
    let config = DelaunayConfig::default();
    for t in [2.0, 4.0, 8.0] {
        let s = fixtures::rectangle_torus(t, 1.0 / t);
        let cover = build_cover(&s, 1).unwrap();
        let (o, run) = delaunay::invariant_delaunay(&cover, &config).unwrap();
        let fm = cover_charts::flat(&o).unwrap();
        let a = delaunay::audit(&fm, &config);
        println!("t = {t}: {} flips, {} long edges, {} long cylinders", run.flips.len(), a.long_edges, a.cylinders);
        for c in delaunay::detect_cylinders(&fm, &config) {
            println!(
                "  holonomy ({:.4}, {:.4})  circumference {:.4}  height {:.4}  crosses {} edges",
                c.holonomy.re,
                c.holonomy.im,
                c.circumference,
                c.height,
                c.crossed.len()
            );
        }
    }
}
