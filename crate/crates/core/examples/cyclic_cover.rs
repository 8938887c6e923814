//! Canonical cyclic cover of a pillowcase and of a d = 3 triangle pillow.
//!
//! `cargo run --example cyclic_cover`

use ddvol::checks;
use ddvol::cyclic_cover::build_cover;
use ddvol::fixtures;

fn main() {
    for s in [fixtures::pillowcase(), fixtures::triangle_pillow_d3()] {
        let cover = build_cover(&s, 1).expect("primitive surface");
        println!("d = {}, kappa = {:?}", s.d(), s.kappa());
        println!("  cover genus {}, cover orders {:?}", cover.genus(), cover.cover_kappa());
        println!("  {} darts upstairs, deck order {}", cover.map().num_darts(), cover.deck().order());
        for c in checks::cover_checks(&cover) {
            println!("  {:<20} {}  {}", c.name, if c.pass { "ok" } else { "FAIL" }, c.detail);
        }
    }
}
