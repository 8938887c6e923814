//! Ratio of the Masur-Veech form to the density of the period lattice.
//!
//! `cargo run --example volume_ratio`

use ddvol::cyclic_cover::build_cover;
use ddvol::fixtures;
use ddvol::volume;

fn main() {
    let seeds = [
        fixtures::pillowcase(),
        fixtures::triangle_pillow_d3(),
        fixtures::right_isosceles_pillow_d4(),
        fixtures::thirty_sixty_pillow_d6(),
    ];
    for s in seeds {
        let cover = build_cover(&s, 1).unwrap();
        match volume::masur_veech_ratio(&cover) {
            Ok(mv) => println!(
                "d={} g={} n={} r={}  lambda = {}  ({:?}, expected form: {})",
                mv.d,
                mv.base_genus,
                mv.n,
                mv.r,
                mv.render_lambda(),
                mv.classification,
                mv.holds
            ),
            Err(e) => println!("d={}: {e}", s.d()),
        }
    }
}
