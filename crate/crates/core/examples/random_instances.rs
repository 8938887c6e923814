//! Dimension and cover checks on random primitive rotation structures.
//!
//! `cargo run --example random_instances -- 20`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ddvol::checks;
use ddvol::generate;
use ddvol::scalar::FloatField;

fn main() {
    let count: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failed = 0;
    for i in 0..count {
        let (d, g, n) = (2 + i % 5, i % 3, 3 + i % 2);
        let Some(inst) = generate::random_instance(&mut rng, d, g, n, 500) else {
            println!("d{d} g{g} n{n}: no instance");
            continue;
        };
        let cover = inst.cover(1);
        let mut cs = checks::cover_checks(&cover);
        cs.extend(checks::dim_checks(&FloatField::new(d, 1e-9), &cover).unwrap());
        let bad: Vec<_> = cs.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        failed += bad.len();
        println!("d{d} g{g} n{n} kappa {:?}  cover genus {}  failed {:?}", inst.kappa, cover.genus(), bad);
    }
    std::process::exit(i32::from(failed > 0));
}
