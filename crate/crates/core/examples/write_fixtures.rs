//! Writes the hand-built seed surfaces as surface files.
//!
//! `cargo run --example write_fixtures -- data/`

use ddvol::{fixtures, format};

fn main() -> std::io::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "data".into());
    std::fs::create_dir_all(&dir)?;
    let named = [
        ("square_torus", fixtures::square_torus()),
        ("equilateral_torus", fixtures::equilateral_torus()),
        ("l_shape", fixtures::l_shape()),
        ("four_square_h11", fixtures::four_square_h11()),
        ("pillowcase", fixtures::pillowcase()),
        ("triangle_pillow_d3", fixtures::triangle_pillow_d3()),
        ("right_isosceles_pillow_d4", fixtures::right_isosceles_pillow_d4()),
        ("thirty_sixty_pillow_d6", fixtures::thirty_sixty_pillow_d6()),
        ("golden_pillow_d5", fixtures::golden_pillow_d5()),
    ];
    for (name, s) in named {
        let path = format!("{dir}/{name}.json");
        std::fs::write(&path, format::write_surface(&s))?;
        println!("{path}  d={} kappa={:?}", s.d(), s.kappa());
    }
    Ok(())
}
