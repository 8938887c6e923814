//! Acceptance battery: one line per criterion.
//!
//! `cargo test --release --test acceptance`

use std::time::Instant;

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ddvol::checks::{self, Check};
use ddvol::cover_charts::{self, ChartConfig};
use ddvol::cyclic_cover::{build_cover, TranslationCover};
use ddvol::delaunay::{self, DelaunayConfig};
use ddvol::fixtures;
use ddvol::generate;
use ddvol::scalar::ExactField;

const SEED: u64 = 20_240_601;
const RANDOM_SURFACES: usize = 1000;

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

struct Instance {
    label: String,
    cover: TranslationCover,
}

fn combinatorial_instances() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut out = Vec::new();
    for d in [1usize, 2, 3, 4, 6] {
        for g in 0..=2usize {
            if d == 1 && g == 0 {
                continue;
            }
            let ns: &[usize] = if g == 0 { &[3, 4] } else { &[1, 2] };
            for &n in ns {
                if let Some(inst) = generate::random_instance(&mut rng, d, g, n, 2000) {
                    out.push(Instance { label: format!("d{d} g{g} n{n}"), cover: inst.cover(1) });
                }
            }
            if d > 1 {
                let n = if g == 0 { 4 } else { 2 };
                if let Some(inst) = generate::random_instance_with_r(&mut rng, d, g, n, 1, 4000) {
                    out.push(Instance { label: format!("d{d} g{g} n{n} r1"), cover: inst.cover(1) });
                }
            }
        }
    }
    for s in fixtures::geometric_seeds() {
        let c = build_cover(&s, 1).expect("seed cover");
        out.push(Instance { label: format!("seed d{} kappa {:?}", s.d(), s.kappa()), cover: c });
    }
    out
}

fn random_surfaces(config: &ChartConfig) -> Vec<TranslationCover> {
    let seeds = fixtures::geometric_seeds();
    (0..RANDOM_SURFACES)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            rng.set_stream(i as u64 + 1);
            let c = build_cover(&seeds[i % seeds.len()], 1).expect("seed cover");
            cover_charts::random_surface(&mut rng, &c, 2 + i % 5, config).expect("random surface")
        })
        .collect()
}

fn failures(cs: &[(String, Check)], names: &[&str]) -> Vec<String> {
    cs.iter().filter(|(_, c)| names.contains(&c.name) && !c.pass).map(|(l, c)| format!("{l}: {} {}", c.name, c.detail)).collect()
}

fn summarize(fails: &[String], total: usize, what: &str) -> (bool, String) {
    if fails.is_empty() {
        (true, format!("{total} {what}"))
    } else {
        (false, format!("{} of {total} {what} fail; first: {}", fails.len(), fails[0]))
    }
}

fn main() {
    let start = Instant::now();
    let pool = cover_charts::thread_pool();
    let outcomes = pool.install(run);
    for o in &outcomes {
        println!("criterion {:>2} {}: {} ({})", o.id, o.title, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("elapsed {:.1}s", start.elapsed().as_secs_f64());
    let required_fail = outcomes.iter().any(|o| !o.pass && o.id != "9");
    if required_fail {
        std::process::exit(1);
    }
}

fn run() -> Vec<Outcome> {
    let mut out = Vec::new();
    let instances = combinatorial_instances();
    let n_inst = instances.len();
    let ds: std::collections::BTreeSet<usize> = instances.iter().map(|i| i.cover.d()).collect();
    let gs: std::collections::BTreeSet<usize> = instances.iter().map(|i| i.cover.base_genus()).collect();

    // dimension, cover, kernel and intersection checks in exact arithmetic
    let per: Vec<Vec<(String, Check)>> = instances
        .par_iter()
        .map(|inst| {
            let f = ExactField::new(inst.cover.d()).expect("supported d");
            let mut cs = checks::cover_checks(&inst.cover);
            match checks::dim_checks(&f, &inst.cover) {
                Ok(v) => cs.extend(v),
                Err(e) => cs.push(Check::new("cohomology", false, e.to_string())),
            }
            cs.into_iter().map(|c| (inst.label.clone(), c)).collect()
        })
        .collect();
    let flat: Vec<(String, Check)> = per.into_iter().flatten().collect();

    let (mut p1, mut d1) = summarize(&failures(&flat, &["dim_formula", "dim_direct_equals_reduced", "cohomology"]), n_inst, "instances");
    p1 &= n_inst >= 20 && ds.len() == 5 && gs.len() == 3;
    d1 += &format!(", d in {ds:?}, g in {gs:?}");
    out.push(Outcome { id: "1", title: "dimension formula", pass: p1, detail: d1 });

    let pc = build_cover(&fixtures::pillowcase(), 1).expect("pillowcase cover");
    let pill_ok = pc.genus() == 1 && pc.num_vertices() == 4 && pc.cover_kappa() == vec![0, 0, 0, 0];
    let (p2, d2) = summarize(&failures(&flat, &["riemann_hurwitz", "cover_orders_sum"]), n_inst, "instances");
    out.push(Outcome {
        id: "2",
        title: "Riemann-Hurwitz",
        pass: p2 && pill_ok,
        detail: format!("{d2}; pillowcase g = {}, n = {}, kappa = {:?}", pc.genus(), pc.num_vertices(), pc.cover_kappa()),
    });

    let r_total: usize = instances.iter().map(|i| checks::predicted_kernel(&i.cover)).sum();
    let (p3, d3) = summarize(&failures(&flat, &["kernel_dim", "kernel_duality"]), n_inst, "instances");
    out.push(Outcome { id: "3", title: "kernel dimension", pass: p3, detail: format!("{d3}, {r_total} kernel vectors in total") });

    let (p4, d4) = summarize(&failures(&flat, &["signature_full", "restriction_nondegenerate"]), n_inst, "instances");
    out.push(Outcome { id: "4", title: "intersection form", pass: p4, detail: d4 });

    // volume form
    let vol: Vec<Vec<(String, Check)>> = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let f = ExactField::new(inst.cover.d()).expect("supported d");
            let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x5eed);
            rng.set_stream(i as u64);
            let mut cs = Vec::new();
            let mut push = |name: &'static str, r: Result<Check, ddvol::volume::VolumeError>| match r {
                Ok(c) => cs.push(c),
                Err(e) => cs.push(Check::new(name, false, e.to_string())),
            };
            push("theta_choice_independence", checks::theta_choice_check(&f, &mut rng, &inst.cover, 20, 0.0));
            if matches!(inst.cover.d(), 3 | 4 | 6) {
                push("zeta_independence", checks::zeta_check(&f, &inst.cover, 0.0));
            }
            push("masur_veech_ratio", checks::masur_veech_check(&inst.cover).map(|x| x.0));
            cs.into_iter().map(|c| (inst.label.clone(), c)).collect()
        })
        .collect();
    let vol: Vec<(String, Check)> = vol.into_iter().flatten().collect();
    let (p5, d5) = summarize(&failures(&vol, &["theta_choice_independence"]), n_inst, "instances x 20 choices");
    out.push(Outcome { id: "5", title: "theta choice-independence", pass: p5, detail: d5 });
    let n_zeta = vol.iter().filter(|(_, c)| c.name == "zeta_independence").count();
    let (p6, d6) = summarize(&failures(&vol, &["zeta_independence"]), n_zeta, "instances with d in {3,4,6}");
    out.push(Outcome { id: "6", title: "zeta-independence", pass: p6 && n_zeta > 0, detail: d6 });
    let (p7, d7) = summarize(&failures(&vol, &["masur_veech_ratio"]), n_inst, "instances");
    out.push(Outcome { id: "7", title: "Masur-Veech comparison", pass: p7, detail: d7 });

    // random flat surfaces
    let config = ChartConfig::default();
    let dconf = DelaunayConfig::default();
    let samples = random_surfaces(&config);
    let geo: Vec<(Vec<Check>, Option<delaunay::CylinderAudit>, usize)> = samples
        .par_iter()
        .map(|c| match checks::delaunay_checks(c, &dconf) {
            Ok((_, run, cs)) => {
                let a = delaunay::audit(&run.surface, &dconf);
                (cs, Some(a), run.flips.len())
            }
            Err(e) => (vec![Check::new("delaunay_certified", false, e.to_string())], None, 0),
        })
        .collect();
    let flips: usize = geo.iter().map(|g| g.2).sum();
    let flipped = geo.iter().filter(|g| g.2 > 0).count();
    let bad8: Vec<String> = geo.iter().enumerate().flat_map(|(i, g)| g.0.iter().filter(|c| !c.pass).map(move |c| format!("sample {i}: {} {}", c.name, c.detail))).collect();
    let (p8, d8) = summarize(&bad8, samples.len(), "surfaces");
    out.push(Outcome {
        id: "8",
        title: "Delaunay",
        pass: p8 && samples.len() == RANDOM_SURFACES,
        detail: format!("{d8}, {flips} flips, {flipped} surfaces needed flips"),
    });

    // cylinders: random samples and the normalized 1 x t torus family
    let mut audits: Vec<(String, delaunay::CylinderAudit)> =
        geo.iter().enumerate().filter_map(|(i, g)| g.1.clone().map(|a| (format!("sample {i}"), a))).collect();
    let ts: Vec<f64> = (0..1100).map(|i| 1.0 + 0.01 * i as f64).collect();
    let tori: Vec<(String, delaunay::CylinderAudit)> = ts
        .par_iter()
        .map(|&t| {
            let s = fixtures::rectangle_torus(1.0 / t.sqrt(), t.sqrt());
            let c = build_cover(&s, 1).expect("torus cover");
            let (_, run) = delaunay::invariant_delaunay(&c, &dconf).expect("delaunay");
            (format!("torus t = {t:.2}"), delaunay::audit(&run.surface, &dconf))
        })
        .collect();
    audits.extend(tori);
    let with_cyl = audits.iter().filter(|(_, a)| a.cylinders > 0).count();
    let lit: Vec<&String> = audits.iter().filter(|(_, a)| !a.unmatched_long_edges.is_empty()).map(|(l, _)| l).collect();
    let very: Vec<&String> = audits.iter().filter(|(_, a)| !a.unmatched_very_long_edges.is_empty()).map(|(l, _)| l).collect();
    let viol: usize = audits.iter().map(|(_, a)| a.bound_violations.len()).sum();
    let overlap: usize = audits.iter().map(|(_, a)| a.overlapping_cylinders).sum();
    let lit_range = |v: &[&String]| -> String {
        let t: Vec<&str> = v.iter().filter_map(|l| l.strip_prefix("torus t = ")).collect();
        match (t.first(), t.last()) {
            (Some(a), Some(b)) => format!("tori t in [{a}, {b}]"),
            _ => "no tori".into(),
        }
    };
    out.push(Outcome {
        id: "9",
        title: "cylinder bounds",
        pass: lit.is_empty() && viol == 0 && overlap == 0,
        detail: format!(
            "{} surfaces ({} with long cylinders); long edges without exactly one long cylinder on {} surfaces ({}, {} samples); \
             edges above sqrt2*alpha*sqrt(A) unmatched on {}; {viol} bound violations; {overlap} overlaps",
            audits.len(),
            with_cyl,
            lit.len(),
            lit_range(&lit),
            lit.iter().filter(|l| l.starts_with("sample")).count(),
            very.len(),
        ),
    });

    // witnesses and Monte Carlo
    let wit: Vec<Result<(usize, usize), String>> = samples
        .par_iter()
        .map(|c| cover_charts::cover_witness(c, &config).map(|w| (w.family.k(), w.family.n())).map_err(|e| e.to_string()))
        .collect();
    let ok = wit.iter().filter(|w| w.is_ok()).count();
    let with_k = wit.iter().filter(|w| matches!(w, Ok((k, _)) if *k > 0)).count();
    let first_err = wit.iter().find_map(|w| w.as_ref().err().cloned());
    let disc = 2.0 * std::f64::consts::PI * config.alpha * config.alpha;
    let mut p10 = ok == samples.len() && (disc - 16.0).abs() < 1e-12;
    let mut mc_runs = 0;
    let mut mc_detail = String::new();
    for (i, c) in samples.iter().enumerate().step_by(50) {
        let w = match cover_charts::cover_witness(c, &config) {
            Ok(w) => w,
            Err(_) => continue,
        };
        let (k, n) = (w.family.k(), w.family.n());
        let est = cover_charts::mc_estimate(&w.o, &w.family, 4096, SEED + i as u64, &config).expect("estimate");
        let b = cover_charts::bounding_volume(k, n, config.alpha);
        let formula = 8f64.powi(k as i32) * 16f64.powi((n - k) as i32);
        let exact_ok = b.exact == Some(BigInt::from(2).pow((4 * n - k) as u32));
        let run_ok = est.estimate <= est.bound && (b.value - formula).abs() <= 1e-9 * formula && exact_ok;
        if !run_ok && mc_detail.is_empty() {
            mc_detail = format!("; sample {i}: estimate {} bound {} formula {formula}", est.estimate, est.bound);
        }
        p10 &= run_ok;
        mc_runs += 1;
    }
    out.push(Outcome {
        id: "10",
        title: "cover witness",
        pass: p10,
        detail: format!(
            "{ok}/{} witnesses ({with_k} with k > 0){}; {mc_runs} Monte Carlo runs below 8^k*16^(N-k); 2*pi*alpha^2 = {disc}{mc_detail}",
            samples.len(),
            first_err.map(|e| format!(", first failure: {e}")).unwrap_or_default(),
        ),
    });
    out
}
