//! Eigenspace V, the projection to absolute cohomology and its kernel, in
//! exact cyclotomic and floating point arithmetic.
//!
//! `cargo run --example eigenspace`

use ddvol::checks;
use ddvol::cohomology;
use ddvol::cyclic_cover::build_cover;
use ddvol::fixtures;
use ddvol::scalar::{ExactField, FloatField};

fn main() {
    let s = fixtures::right_isosceles_pillow_d4();
    let cover = build_cover(&s, 1).unwrap();
    let exact = ExactField::new(4).unwrap();
    let v = cohomology::eigenspace_v(&exact, &cover).unwrap();
    println!("kappa {:?}: dim V = {} inside {} edge cochains", s.kappa(), v.dim(), v.ambient);

    let basis = cohomology::symplectic_basis(&cover).unwrap();
    let p = cohomology::project_p(&exact, &basis, &v);
    println!("rank p = {}, dim ker p = {}, r = {}", p.rank, p.kernel_dim, cover.r());

    for (label, cs) in [
        ("exact", checks::dim_checks(&exact, &cover).unwrap()),
        ("float", checks::dim_checks(&FloatField::new(4, 1e-9), &cover).unwrap()),
    ] {
        for c in cs {
            println!("{label}  {:<26} {}  {}", c.name, if c.pass { "ok" } else { "FAIL" }, c.detail);
        }
    }
}
