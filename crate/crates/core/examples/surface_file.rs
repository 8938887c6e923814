//! Reading, validating and writing surface files.
//!
//! `cargo run --example surface_file -- data/pillowcase.json`

use ddvol::ddiff_surface::GeomConfig;
use ddvol::format;

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "data/pillowcase.json".into());
    let text = std::fs::read_to_string(&path).expect("readable file");
    match format::read_surface(&text, &GeomConfig::default()) {
        Ok(s) => {
            println!("d = {}, genus {}, kappa {:?}, area {}", s.d(), s.genus(), s.kappa(), s.area());
            println!("exact sides: {}", s.exact_sides().is_some());
            print!("{}", format::write_surface(&s));
        }
        Err(e) => {
            eprintln!("{path}: {e}");
            std::process::exit(2);
        }
    }
}
