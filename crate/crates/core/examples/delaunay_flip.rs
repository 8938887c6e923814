//! Deck-invariant Delaunay triangulation of a sheared cover.
//!
//! `cargo run --example delaunay_flip`

use ddvol::checks;
use ddvol::cyclic_cover::build_cover;
use ddvol::ddiff_surface::GeomConfig;
use ddvol::delaunay::DelaunayConfig;
use ddvol::fixtures;

fn main() {
    let config = GeomConfig::default();
    let s = fixtures::pillowcase().linear_image([[1.0, 3.0], [0.0, 1.0]], &config).unwrap().unwrap();
    let cover = build_cover(&s, 1).unwrap();
    let (o, run, cs) = checks::delaunay_checks(&cover, &DelaunayConfig::default()).unwrap();
    println!("{} flips on the cover ({} deck orbits)", run.flips.len(), run.flips.len() / o.d());
    for c in cs {
        println!("{:<20} {}  {}", c.name, if c.pass { "ok" } else { "FAIL" }, c.detail);
    }
    let q = o.quotient(&config).unwrap();
    println!("quotient: kappa {:?}, area {:.6}", q.kappa(), q.area());
    print!("{}", ddvol::format::write_surface(&q));
}
