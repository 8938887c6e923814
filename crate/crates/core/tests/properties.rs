use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ddvol::checks;
use ddvol::cover_charts::{self, ChartConfig};
use ddvol::cyclic_cover::build_cover;
use ddvol::ddiff_surface::GeomConfig;
use ddvol::delaunay::{self, DelaunayConfig};
use ddvol::fixtures;
use ddvol::format::{read_surface, write_surface};
use ddvol::generate;
use ddvol::scalar::FloatField;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn triangulations_have_requested_type(seed in any::<u64>(), g in 0usize..3, n in 1usize..4) {
        let m = generate::random_triangulation(&mut rng(seed), g, n);
        prop_assert_eq!(m.genus(), g);
        prop_assert_eq!(m.num_vertices(), if g == 0 { n.max(3) } else { n });
        prop_assert_eq!(2 * m.num_edges(), 3 * m.num_faces());
    }

    #[test]
    fn flips_preserve_counts(seed in any::<u64>(), e in 0usize..64) {
        let m = generate::random_triangulation(&mut rng(seed), 1, 2);
        let e = e % m.num_darts();
        if let Some(f) = m.flip(e) {
            prop_assert_eq!(f.genus(), m.genus());
            prop_assert_eq!(f.num_vertices(), m.num_vertices());
            prop_assert_eq!(f.num_faces(), m.num_faces());
            prop_assert_eq!(f.sigma2().to_vec(), ddvol::combmap::compose(&ddvol::combmap::invert(f.sigma1()), f.sigma0()));
        }
    }

    #[test]
    fn covers_satisfy_riemann_hurwitz(seed in any::<u64>(), d in 2usize..7, g in 0usize..2, n in 1usize..4) {
        if let Some(inst) = generate::random_instance(&mut rng(seed), d, g, n, 200) {
            for c in checks::cover_checks(&inst.cover(1)) {
                prop_assert!(c.pass, "{}: {}", c.name, c.detail);
            }
        }
    }

    #[test]
    fn dimensions_match_on_random_instances(seed in any::<u64>(), d in 2usize..6, g in 0usize..2, n in 2usize..4) {
        if let Some(inst) = generate::random_instance(&mut rng(seed), d, g, n, 200) {
            let cover = inst.cover(1);
            let f = FloatField::new(d, 1e-9);
            for c in checks::dim_checks(&f, &cover).unwrap() {
                prop_assert!(c.pass, "{}: {}", c.name, c.detail);
            }
        }
    }

    #[test]
    fn file_round_trip_under_rotation(i in 0usize..9, theta in 0.0f64..6.3, s in 0.25f64..4.0) {
        let config = GeomConfig::default();
        let seeds = fixtures::geometric_seeds();
        let base = &seeds[i % seeds.len()];
        let t = base.scaled(Complex64::from_polar(s, theta), &config).unwrap();
        prop_assert_eq!(t.kappa(), base.kappa());
        let text = write_surface(&t);
        let back = read_surface(&text, &config).unwrap();
        prop_assert_eq!(write_surface(&back), text);
    }

    #[test]
    fn invariant_delaunay_on_random_surfaces(seed in any::<u64>(), i in 0usize..9, steps in 1usize..5) {
        let config = ChartConfig::default();
        let seeds = fixtures::geometric_seeds();
        let c = build_cover(&seeds[i % seeds.len()], 1).unwrap();
        let o = cover_charts::random_surface(&mut rng(seed), &c, steps, &config).unwrap();
        let area = o.area().unwrap();
        let dc = DelaunayConfig::default();
        let (p, run, cs) = checks::delaunay_checks(&o, &dc).unwrap();
        for c in &cs {
            prop_assert!(c.pass, "{}: {}", c.name, c.detail);
        }
        prop_assert!((p.area().unwrap() - area).abs() < 1e-9);
        prop_assert_eq!(run.flips.len() % o.d(), 0);
        prop_assert!(delaunay::certify(&cover_charts::flat(&p).unwrap(), dc.tie_tol).is_ok());
    }
}

#[test]
fn unramified_torus_cover_kernel_in_floating_point() {
    let inst = generate::random_instance(&mut rng(5498259214542275134), 3, 1, 2, 200).unwrap();
    assert_eq!(inst.kappa, vec![0, 0]);
    let f = FloatField::new(3, 1e-9);
    for c in checks::dim_checks(&f, &inst.cover(1)).unwrap() {
        assert!(c.pass, "{}: {}", c.name, c.detail);
    }
}
