//! Theorem-backed checks on a single instance, shared by the command line
//! and the acceptance battery.

use rand::Rng;

use crate::cohomology::{self, CohomologyError};
use crate::cover_charts::{self, ChartConfig};
use crate::cyclic_cover::{riemann_hurwitz_genus, TranslationCover};
use crate::delaunay::{self, DelaunayConfig, DelaunayError, FlatMap, FlipRun};
use crate::linalg;
use crate::scalar::Field;
use crate::volume::{self, Choices, VolumeError};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &'static str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name, pass, detail: detail.into() }
    }
}

/// `dim V` predicted from the base: `2g + n − 1` for `d = 1`, else
/// `2g + n − 2`.
pub fn predicted_dim(d: usize, g: usize, n: usize) -> usize {
    if d == 1 {
        2 * g + n - 1
    } else {
        2 * g + n - 2
    }
}

/// Predicted `dim ker p ∩ V`: `r`, or `n − 1` for `d = 1`.
pub fn predicted_kernel(cover: &TranslationCover) -> usize {
    if cover.d() == 1 {
        cover.base_orders().len() - 1
    } else {
        cover.r()
    }
}

pub fn cover_checks(cover: &TranslationCover) -> Vec<Check> {
    let (g, d) = (cover.base_genus(), cover.d());
    let kappa = cover.base_orders();
    let rh = riemann_hurwitz_genus(g, d, kappa);
    let khat = cover.cover_kappa();
    let euler = 2 - 2 * cover.genus() as i64;
    let sum: i64 = khat.iter().sum();
    vec![
        Check::new(
            "riemann_hurwitz",
            rh.as_ref().ok() == Some(&cover.genus()),
            format!("built genus {}, formula {:?}", cover.genus(), rh.map_err(|e| e.to_string())),
        ),
        Check::new("cover_orders_sum", sum == -euler, format!("sum of orders {sum}, 2g-2 = {}", -euler)),
    ]
}

pub fn dim_checks<F: Field>(f: &F, cover: &TranslationCover) -> Result<Vec<Check>, CohomologyError> {
    let v = cohomology::eigenspace_v(f, cover)?;
    let vr = cohomology::eigenspace_v_reduced(f, cover)?;
    let (d, g, n) = (cover.d(), cover.base_genus(), cover.base_orders().len());
    let want = predicted_dim(d, g, n);
    let basis = cohomology::symplectic_basis(cover)?;
    let proj = cohomology::project_p(f, &basis, &v);
    let eta = cohomology::kernel_basis(f, cover, &basis.paths);
    let mut dual = eta.len() == predicted_kernel(cover);
    for (i, e) in eta.iter().enumerate() {
        let mut both = v.basis.clone();
        both.push(e.clone());
        dual &= linalg::rank(f, &both, v.ambient) == v.dim();
        dual &= basis.cycles.iter().all(|c| f.is_zero(&cohomology::eval(f, c, e), 1.0));
        for (j, p) in basis.paths.iter().enumerate() {
            let x = f.sub(&cohomology::eval(f, &p.chain, e), &f.from_i64((i == j) as i64));
            dual &= f.is_zero(&x, 1.0);
        }
    }
    let inter = cohomology::intersection_report(f, cover, &basis, &v, 1e-9);
    let gh = cover.genus();
    Ok(vec![
        Check::new("dim_formula", v.dim() == want, format!("dim V = {}, predicted {want}", v.dim())),
        Check::new("dim_direct_equals_reduced", v.dim() == vr.dim(), format!("{} vs {}", v.dim(), vr.dim())),
        Check::new(
            "kernel_dim",
            proj.kernel_dim == predicted_kernel(cover),
            format!("dim ker p = {}, predicted {}", proj.kernel_dim, predicted_kernel(cover)),
        ),
        Check::new("kernel_duality", dual, format!("{} kernel vectors", eta.len())),
        Check::new(
            "signature_full",
            (inter.full.0, inter.full.1) == (gh, gh),
            format!("signature {:?} on H^1 of genus {gh}", inter.full),
        ),
        Check::new(
            "restriction_nondegenerate",
            inter.nondegenerate,
            format!("dim H = {}, det = {}, signature {:?}", inter.h_dim, f.render(&inter.h_det), inter.h_signature),
        ),
    ])
}

/// Density under `trials` random changes of paths, base points and
/// symplectic marking.
pub fn theta_choice_check<F: Field, R: Rng>(
    f: &F,
    rng: &mut R,
    cover: &TranslationCover,
    trials: usize,
    rel: f64,
) -> Result<Check, VolumeError> {
    let v = cohomology::eigenspace_v(f, cover)?;
    let ch = Choices::of_cover(cover)?;
    let base = volume::theta_density(f, cover, &v, &ch)?;
    let mut bad = 0;
    for _ in 0..trials {
        let sp = volume::random_symplectic(rng, ch.genus, 6);
        let shifts: Vec<usize> = ch.paths.iter().map(|_| rng.gen_range(0..cover.d())).collect();
        let alt = volume::remark(&volume::perturb_paths(rng, &volume::shift_basepoints(cover, &ch, &shifts), 2), &sp);
        let other = volume::theta_density(f, cover, &v, &alt)?;
        if !volume::densities_agree(&base, &other, rel) {
            bad += 1;
        }
    }
    Ok(Check::new("theta_choice_independence", bad == 0, format!("{bad} of {trials} choices disagree")))
}

pub fn zeta_check<F: Field>(f: &F, cover: &TranslationCover, rel: f64) -> Result<Check, VolumeError> {
    let v = cohomology::eigenspace_v(f, cover)?;
    let rep = volume::zeta_independence(f, cover, &v, rel)?;
    let vals: Vec<String> = rep.densities.iter().map(|d| format!("{:.12e}", d.value)).collect();
    Ok(Check::new("zeta_independence", rep.agree, format!("powers {:?}: {}", rep.powers, vals.join(" "))))
}

pub fn masur_veech_check(cover: &TranslationCover) -> Result<(Check, volume::MasurVeech), VolumeError> {
    let mv = volume::masur_veech_ratio(cover)?;
    let ok = mv.holds && mv.lambda_sq == mv.lambda_sq_from_index;
    let c = Check::new("masur_veech_ratio", ok, format!("lambda = {} ({:?})", mv.render_lambda(), mv.classification));
    Ok((c, mv))
}

/// Invariant Delaunay triangulation of `cover`, certified and checked for
/// `ẑ∘T = ζ·ẑ`.
pub fn delaunay_checks(
    cover: &TranslationCover,
    config: &DelaunayConfig,
) -> Result<(TranslationCover, FlipRun, Vec<Check>), DelaunayError> {
    let (o, run) = delaunay::invariant_delaunay(cover, config)?;
    let cert = delaunay::certify(&run.surface, config.tie_tol);
    let z = o.periods().ok_or(DelaunayError::NoPeriods)?;
    let zeta = o.zeta();
    let scale = z.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let worst = (0..z.len()).map(|x| (z[o.deck().apply(x)] - zeta * z[x]).norm()).fold(0.0, f64::max);
    let checks = vec![
        Check::new(
            "delaunay_certified",
            cert.is_ok(),
            match cert {
                Ok(()) => format!("{} flips", run.flips.len()),
                Err(e) => format!("edge {e} violates the empty circumdisk condition"),
            },
        ),
        Check::new("delaunay_invariant", worst <= 1e-9 * scale, format!("max |z(Tx) - zeta z(x)| = {worst:.3e}")),
    ];
    Ok((o, run, checks))
}

pub fn cylinder_checks(fm: &FlatMap, config: &DelaunayConfig) -> (Vec<Check>, delaunay::CylinderAudit) {
    let a = delaunay::audit(fm, config);
    let checks = vec![
        Check::new(
            "long_edges_cross_one_cylinder",
            a.unmatched_very_long_edges.is_empty(),
            format!("edges above sqrt2*alpha*sqrt(A) without a unique long cylinder: {:?}", a.unmatched_very_long_edges),
        ),
        Check::new("crossing_bounds", a.bound_violations.is_empty(), format!("{} violations", a.bound_violations.len())),
        Check::new("cylinders_disjoint", a.overlapping_cylinders == 0, format!("{} overlapping pairs", a.overlapping_cylinders)),
    ];
    (checks, a)
}

pub fn witness_check(cover: &TranslationCover, config: &ChartConfig) -> (Check, Option<cover_charts::Witness>) {
    match cover_charts::cover_witness(cover, config) {
        Ok(w) => {
            let c = Check::new("cover_witness", true, format!("k = {}, N = {}", w.family.k(), w.family.n()));
            (c, Some(w))
        }
        Err(e) => (Check::new("cover_witness", false, e.to_string()), None),
    }
}
