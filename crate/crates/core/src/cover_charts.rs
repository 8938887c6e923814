//! Charts of the stratum from invariant triangulations: the space `W_o`,
//! the domain `U_o`, admissible families of dual cycles, the bounded sets
//! `U¹_o(γ̃, α)`, witnesses that a cover lies in one of them, and Monte Carlo
//! estimates inside the bounding region.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cohomology::{self, CohomologyError, Subspace};
use crate::combmap::CombinatorialMap;
use crate::cyclic_cover::TranslationCover;
use crate::ddiff_surface::triangle_area;
use crate::delaunay::{self, DelaunayConfig, DelaunayError, FlatMap};
use crate::linalg::{self, Matrix, RowBasis};
use crate::scalar::{Field, FloatField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("cycle {0} of the family has zero period")]
    DegenerateCycle(usize),
    #[error("witness search failed: {0}")]
    WitnessFailed(String),
    #[error("crossing and completion edges do not give coordinates on W_o")]
    Completion,
    #[error("cover has no periods")]
    NoPeriods,
    #[error(transparent)]
    Delaunay(#[from] DelaunayError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartConfig {
    pub alpha: f64,
    /// Relative slack on the closed inequalities.
    pub eps: f64,
    pub delaunay: DelaunayConfig,
}

impl Default for ChartConfig {
    fn default() -> Self {
        let delaunay = DelaunayConfig::default();
        Self { alpha: delaunay.alpha, eps: 1e-9, delaunay }
    }
}

/// `W_o`: solutions of the face and deck equations on the map of `o`.
pub fn chart_space<F: Field>(f: &F, o: &TranslationCover) -> Result<Subspace<F::S>, CohomologyError> {
    cohomology::eigenspace_v(f, o)
}

/// Values of the basis vectors of `w` on the dart `e`.
pub fn dart_row<F: Field>(f: &F, map: &CombinatorialMap, w: &Subspace<F::S>, e: usize) -> Vec<F::S> {
    w.basis.iter().map(|v| cohomology::dart_value(f, map, v, e)).collect()
}

/// Periods per dart from one value per undirected edge.
pub fn cochain_to_darts(map: &CombinatorialMap, v: &[Complex64]) -> Vec<Complex64> {
    map.edge_index().iter().map(|&(e, s)| v[e] * s as f64).collect()
}

pub fn darts_to_cochain(map: &CombinatorialMap, z: &[Complex64]) -> Vec<Complex64> {
    map.edge_darts().into_iter().map(|e| z[e]).collect()
}

/// An admissible family: `cycles[i][j]` are the darts crossed by `γᵢⱼ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleFamily {
    pub cycles: Vec<Vec<Vec<usize>>>,
    /// `e₁..e_k`, one canonical dart per orbit.
    pub crossing: Vec<usize>,
    /// `e_{k+1}..e_N`.
    pub completion: Vec<usize>,
}

impl AdmissibleFamily {
    pub fn k(&self) -> usize {
        self.crossing.len()
    }
    pub fn n(&self) -> usize {
        self.crossing.len() + self.completion.len()
    }
    /// All coordinate edges `e₁..e_N`.
    pub fn coordinates(&self) -> Vec<usize> {
        self.crossing.iter().chain(&self.completion).copied().collect()
    }
    /// `E_γ̃`: canonical darts crossed by some cycle.
    pub fn crossed_edges(&self, map: &CombinatorialMap) -> BTreeSet<usize> {
        self.cycles.iter().flatten().flatten().map(|&x| map.canonical(x)).collect()
    }
    /// `E*_γ̃`: the remaining edges.
    pub fn free_edges(&self, map: &CombinatorialMap) -> Vec<usize> {
        let crossed = self.crossed_edges(map);
        map.edge_darts().into_iter().filter(|e| !crossed.contains(e)).collect()
    }
}

fn orbit_of_cycle(o: &TranslationCover, crossed: &[usize]) -> Vec<Vec<usize>> {
    (0..o.d()).map(|j| crossed.iter().map(|&x| o.deck().pow(j)[x]).collect()).collect()
}

fn face_set(map: &CombinatorialMap, crossed: &[usize]) -> BTreeSet<usize> {
    crossed.iter().map(|&x| map.face_of(x)).collect()
}

/// Chooses `e₁..e_k` (smallest dart crossed by each `γᵢ₀`) and completes
/// them greedily by edges of `E*_γ̃` to coordinates on `w`.
pub fn complete_family<F: Field>(
    f: &F,
    o: &TranslationCover,
    w: &Subspace<F::S>,
    cycles: Vec<Vec<Vec<usize>>>,
) -> Result<AdmissibleFamily, ChartError> {
    let map = o.map();
    let crossing: Vec<usize> =
        cycles.iter().map(|orb| orb[0].iter().map(|&x| map.canonical(x)).min().expect("cycle is nonempty")).collect();
    let mut fam = AdmissibleFamily { cycles, crossing, completion: Vec::new() };
    let scale = if f.is_exact() { 1.0 } else { w.basis.iter().flatten().map(|x| f.magnitude(x)).fold(0.0, f64::max) };
    let mut rb = RowBasis::new(f.clone(), w.dim(), scale);
    for &e in &fam.crossing {
        if !rb.try_add(&dart_row(f, map, w, e)) {
            return Err(ChartError::Completion);
        }
    }
    for e in fam.free_edges(map) {
        if rb.rank() == w.dim() {
            break;
        }
        if rb.try_add(&dart_row(f, map, w, e)) {
            fam.completion.push(e);
        }
    }
    if rb.rank() != w.dim() {
        return Err(ChartError::Completion);
    }
    Ok(fam)
}

/// All admissible families with at most `max_k` orbits, the empty family
/// first.
pub fn admissible_families<F: Field>(
    f: &F,
    o: &TranslationCover,
    w: &Subspace<F::S>,
    max_k: usize,
    max_cycles: usize,
) -> Result<Vec<AdmissibleFamily>, ChartError> {
    let map = o.map();
    let dual = map.dual_graph();
    let mut orbits: Vec<(Vec<Vec<usize>>, BTreeSet<usize>)> = Vec::new();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    for cyc in dual.simple_cycles(max_cycles).cycles {
        let Some(crossed) = delaunay::crossing_darts(map, &dual, &cyc.nodes, &cyc.links) else { continue };
        let orb = orbit_of_cycle(o, &crossed);
        let sets: Vec<BTreeSet<usize>> = orb.iter().map(|c| face_set(map, c)).collect();
        let disjoint = (0..sets.len()).all(|a| (a + 1..sets.len()).all(|b| sets[a].is_disjoint(&sets[b])));
        if !disjoint {
            continue;
        }
        let key = orb
            .iter()
            .map(|c| {
                let mut k: Vec<usize> = c.iter().map(|&x| map.canonical(x)).collect();
                k.sort_unstable();
                k
            })
            .min()
            .expect("orbit is nonempty");
        if !seen.insert(key) {
            continue;
        }
        let all: BTreeSet<usize> = sets.into_iter().flatten().collect();
        orbits.push((orb, all));
    }
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    fn rec(
        start: usize,
        max_k: usize,
        orbits: &[(Vec<Vec<usize>>, BTreeSet<usize>)],
        chosen: &mut Vec<usize>,
        emit: &mut dyn FnMut(&[usize]),
    ) {
        emit(chosen);
        if chosen.len() == max_k {
            return;
        }
        for i in start..orbits.len() {
            if chosen.iter().all(|&c| orbits[c].1.is_disjoint(&orbits[i].1)) {
                chosen.push(i);
                rec(i + 1, max_k, orbits, chosen, emit);
                chosen.pop();
            }
        }
    }
    let mut sets: Vec<Vec<usize>> = Vec::new();
    rec(0, max_k, &orbits, &mut chosen, &mut |c: &[usize]| sets.push(c.to_vec()));
    for s in sets {
        let cycles = s.iter().map(|&i| orbits[i].0.clone()).collect();
        out.push(complete_family(f, o, w, cycles)?);
    }
    Ok(out)
}

/// `Φ`: values of the basis of `w` on `e₁..e_N` (rows).
pub fn phi_matrix<F: Field>(f: &F, map: &CombinatorialMap, w: &Subspace<F::S>, fam: &AdmissibleFamily) -> Matrix<F::S> {
    fam.coordinates().iter().map(|&e| dart_row(f, map, w, e)).collect()
}

/// `z(γ)` as a row over the basis of `w`.
pub fn cycle_row<F: Field>(f: &F, map: &CombinatorialMap, w: &Subspace<F::S>, crossed: &[usize]) -> Vec<F::S> {
    let ch = delaunay::core_chain(map, crossed);
    w.basis.iter().map(|v| cohomology::eval(f, &ch, v)).collect()
}

/// Coefficients of each `z(γᵢⱼ)` in the coordinates `z(e₁)..z(e_N)`.
#[derive(Debug, Clone)]
pub struct GammaReport<S> {
    pub coefficients: Vec<Vec<S>>,
    /// Largest coefficient on `z(e₁)..z(e_k)`.
    pub max_leading: f64,
    pub holds: bool,
}

pub fn gamma_period_independence<F: Field>(
    f: &F,
    o: &TranslationCover,
    w: &Subspace<F::S>,
    fam: &AdmissibleFamily,
    tol: f64,
) -> Result<GammaReport<F::S>, ChartError> {
    let map = o.map();
    let phi = phi_matrix(f, map, w, fam);
    let inv = linalg::inverse(f, &phi).ok_or(ChartError::Completion)?;
    let mut coefficients = Vec::new();
    let mut max_leading: f64 = 0.0;
    let mut holds = true;
    for orb in &fam.cycles {
        for c in orb {
            let g = cycle_row(f, map, w, c);
            let coef = linalg::matmul(f, &[g], &inv).remove(0);
            for x in &coef[..fam.k()] {
                max_leading = max_leading.max(f.magnitude(x));
                if !f.is_zero(x, 1.0) && (f.is_exact() || f.magnitude(x) > tol) {
                    holds = false;
                }
            }
            coefficients.push(coef);
        }
    }
    Ok(GammaReport { coefficients, max_leading, holds })
}

/// Cone orders of the cover vertices from the angles of `z`.
pub fn vertex_orders(map: &CombinatorialMap, z: &[Complex64]) -> Vec<i64> {
    map.vertices()
        .iter()
        .map(|darts| {
            let total: f64 = darts
                .iter()
                .map(|&x| delaunay_corner(map, z, x))
                .sum();
            (total / std::f64::consts::TAU).round() as i64 - 1
        })
        .collect()
}

fn delaunay_corner(map: &CombinatorialMap, z: &[Complex64], x: usize) -> f64 {
    (-z[map.prev_in_face(x)] / z[x]).arg()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub inside: bool,
    pub nonpositive_faces: Vec<usize>,
    /// Vertices whose cone order differs from the order prescribed by `o`.
    pub order_mismatch: Vec<usize>,
    pub area: f64,
}

/// Whether the periods `z` (per dart) define a surface of the stratum of `o`.
pub fn membership_u(o: &TranslationCover, z: &[Complex64]) -> MembershipReport {
    let map = o.map();
    let mut nonpositive_faces = Vec::new();
    let mut area = 0.0;
    for (i, t) in map.faces().iter().enumerate() {
        let a = triangle_area(z[t[0]], z[t[1]]);
        area += a;
        if !(a > 0.0) {
            nonpositive_faces.push(i);
        }
    }
    let mut order_mismatch = Vec::new();
    if nonpositive_faces.is_empty() {
        let want = o.cover_kappa();
        for (v, k) in vertex_orders(map, z).into_iter().enumerate() {
            if k != want[v] {
                order_mismatch.push(v);
            }
        }
    }
    MembershipReport { inside: nonpositive_faces.is_empty() && order_mismatch.is_empty(), nonpositive_faces, order_mismatch, area }
}

/// Conditions defining `U¹_o(γ̃, α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct U1Report {
    pub area: f64,
    pub area_ok: bool,
    /// Edges of `E*_γ̃` longer than `√2·α`.
    pub long_free_edges: Vec<usize>,
    pub ell: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub x_ok: Vec<bool>,
    pub y_ok: Vec<bool>,
}

impl U1Report {
    pub fn inside(&self) -> bool {
        self.area_ok && self.long_free_edges.is_empty() && self.x_ok.iter().all(|&b| b) && self.y_ok.iter().all(|&b| b)
    }
}

pub fn in_u1(map: &CombinatorialMap, z: &[Complex64], fam: &AdmissibleFamily, config: &ChartConfig) -> Result<U1Report, ChartError> {
    let eps = config.eps;
    let area: f64 = map.faces().iter().map(|t| triangle_area(z[t[0]], z[t[1]])).sum();
    let cap = 2f64.sqrt() * config.alpha;
    let long_free_edges = fam.free_edges(map).into_iter().filter(|&e| z[e].norm() > cap * (1.0 + eps)).collect();
    let mut rep = U1Report {
        area,
        area_ok: area <= 1.0 + eps,
        long_free_edges,
        ell: Vec::new(),
        x: Vec::new(),
        y: Vec::new(),
        x_ok: Vec::new(),
        y_ok: Vec::new(),
    };
    for (i, orb) in fam.cycles.iter().enumerate() {
        let ch = delaunay::core_chain(map, &orb[0]);
        let zg: Complex64 = map.edge_darts().iter().zip(&ch).map(|(&e, &c)| z[e] * c as f64).sum();
        let ell = zg.norm();
        if ell <= f64::EPSILON {
            return Err(ChartError::DegenerateCycle(i));
        }
        let w = z[fam.crossing[i]] * zg.conj() / ell;
        rep.x_ok.push(w.re.abs() <= ell * (1.0 + eps));
        rep.y_ok.push(w.im.abs() < 2.0 / ell);
        rep.ell.push(ell);
        rep.x.push(w.re);
        rep.y.push(w.im);
    }
    Ok(rep)
}

/// Upper bound `8^k·(2πα²)^{N−k}` for the volume of `U¹_o(γ̃, α)` in
/// `Φ`-coordinates; exact (`2^{4N−k}`) for the default `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub exact: Option<BigInt>,
}

pub fn bounding_volume(k: usize, n: usize, alpha: f64) -> Bound {
    let disc = 2.0 * std::f64::consts::PI * alpha * alpha;
    let value = 8f64.powi(k as i32) * disc.powi((n - k) as i32);
    let exact = (alpha == delaunay::alpha()).then(|| BigInt::from(2).pow((4 * n - k) as u32));
    Bound { value, exact }
}

/// A chart containing a given cover.
#[derive(Debug, Clone)]
pub struct Witness {
    /// The cover on its invariant Delaunay triangulation, area at most one.
    pub o: TranslationCover,
    pub family: AdmissibleFamily,
    pub u1: U1Report,
    pub membership: MembershipReport,
    /// Factor applied to the periods to bring the area to at most one.
    pub scale: f64,
    pub long_cylinders: Vec<delaunay::Cylinder>,
}

pub fn normalize_area(cover: &TranslationCover) -> Result<(TranslationCover, f64), ChartError> {
    let area = cover.area().ok_or(ChartError::NoPeriods)?;
    if area <= 1.0 {
        return Ok((cover.clone(), 1.0));
    }
    let s = 1.0 / area.sqrt();
    let z = cover.periods().expect("periods").iter().map(|x| x * s).collect();
    let c = cover.with_periods(z).map_err(|e| ChartError::WitnessFailed(e.to_string()))?;
    Ok((c, s))
}

/// Finds `(o, γ̃)` with the cover in `U¹_o(γ̃, α)`: the invariant Delaunay
/// triangulation and the orbits of long cylinders.
pub fn cover_witness(cover: &TranslationCover, config: &ChartConfig) -> Result<Witness, ChartError> {
    let (cover, scale) = normalize_area(cover)?;
    let (o, run) = delaunay::invariant_delaunay(&cover, &config.delaunay)?;
    let fm = &run.surface;
    let cyls = delaunay::detect_cylinders(fm, &config.delaunay);
    let map = o.map();
    let mut used = vec![false; cyls.len()];
    let mut cycles = Vec::new();
    for i in 0..cyls.len() {
        if used[i] {
            continue;
        }
        let orb = orbit_of_cycle(&o, &cyls[i].crossed);
        for c in &orb {
            let probe = delaunay::Cylinder { crossed: c.clone(), ..cyls[i].clone() };
            match (0..cyls.len()).find(|&j| cyls[j].same_as(map, &probe)) {
                Some(j) if !used[j] => used[j] = true,
                _ => return Err(ChartError::WitnessFailed(format!("cylinder {i} is not moved freely by T"))),
            }
        }
        cycles.push(orb);
    }
    let f = FloatField::new(o.d(), crate::scalar::DEFAULT_EPS_LIN);
    let w = chart_space(&f, &o)?;
    let family = complete_family(&f, &o, &w, cycles)?;
    let z = o.periods().expect("periods");
    let u1 = in_u1(map, z, &family, config)?;
    let membership = membership_u(&o, z);
    if !u1.inside() || !membership.inside {
        return Err(ChartError::WitnessFailed(format!("{u1:?} {membership:?}")));
    }
    Ok(Witness { o, family, u1, membership, scale, long_cylinders: cyls })
}

/// Rejection-sampling estimate of `vol(U¹_o(γ̃, α) ∩ U_o)` in
/// `Φ`-coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub bound: f64,
    pub accepted: u64,
    pub samples: u64,
    pub seed: u64,
}

/// Precomputed linear data of a chart.
struct ChartCoords {
    w: Subspace<Complex64>,
    phi_inv: Matrix<Complex64>,
    /// For each `γᵢ₀`, coefficients on `z(e₁)..z(e_N)`.
    gamma: Vec<Vec<Complex64>>,
}

fn chart_coords(o: &TranslationCover, fam: &AdmissibleFamily) -> Result<ChartCoords, ChartError> {
    let f = FloatField::new(o.d(), crate::scalar::DEFAULT_EPS_LIN);
    let w = chart_space(&f, o)?;
    let phi = phi_matrix(&f, o.map(), &w, fam);
    let phi_inv = linalg::inverse(&f, &phi).ok_or(ChartError::Completion)?;
    let gamma = fam
        .cycles
        .iter()
        .map(|orb| linalg::matmul(&f, &[cycle_row(&f, o.map(), &w, &orb[0])], &phi_inv).remove(0))
        .collect();
    Ok(ChartCoords { w, phi_inv, gamma })
}

fn uniform_disc<R: Rng>(rng: &mut R, radius: f64) -> Complex64 {
    loop {
        let p = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if p.norm_sqr() <= 1.0 {
            return p * radius;
        }
    }
}

/// One sample from the bounding region; `Some(periods)` when accepted.
fn sample_once<R: Rng>(
    rng: &mut R,
    o: &TranslationCover,
    fam: &AdmissibleFamily,
    cc: &ChartCoords,
    config: &ChartConfig,
) -> bool {
    let (k, n) = (fam.k(), fam.n());
    let radius = 2f64.sqrt() * config.alpha;
    let mut coords = vec![Complex64::new(0.0, 0.0); n];
    for c in coords.iter_mut().skip(k) {
        *c = uniform_disc(rng, radius);
    }
    for i in 0..k {
        let zg: Complex64 = cc.gamma[i].iter().zip(&coords).skip(k).map(|(a, b)| a * b).sum();
        let ell = zg.norm();
        if ell <= f64::EPSILON {
            return false;
        }
        let x = rng.gen_range(-ell..=ell);
        let y = rng.gen_range(-2.0 / ell..2.0 / ell);
        coords[i] = Complex64::new(x, y) * zg / ell;
    }
    let a: Vec<Complex64> = cc.phi_inv.iter().map(|row| row.iter().zip(&coords).map(|(p, q)| p * q).sum()).collect();
    let mut v = vec![Complex64::new(0.0, 0.0); cc.w.ambient];
    for (ai, b) in a.iter().zip(&cc.w.basis) {
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi += ai * bi;
        }
    }
    let z = cochain_to_darts(o.map(), &v);
    if !membership_u(o, &z).inside {
        return false;
    }
    matches!(in_u1(o.map(), &z, fam, config), Ok(r) if r.inside())
}

/// Number of worker threads: `DDVOL_THREADS` if set.
pub fn thread_pool() -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("DDVOL_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        b = b.num_threads(n.max(1));
    }
    b.build().expect("thread pool")
}

const MC_BLOCK: u64 = 1024;

pub fn mc_estimate(
    o: &TranslationCover,
    fam: &AdmissibleFamily,
    samples: u64,
    seed: u64,
    config: &ChartConfig,
) -> Result<McEstimate, ChartError> {
    let cc = chart_coords(o, fam)?;
    let bound = bounding_volume(fam.k(), fam.n(), config.alpha).value;
    let blocks = samples.div_ceil(MC_BLOCK);
    let accepted: u64 = thread_pool().install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b);
                let count = MC_BLOCK.min(samples - b * MC_BLOCK);
                (0..count).filter(|_| sample_once(&mut rng, o, fam, &cc, config)).count() as u64
            })
            .sum()
    });
    let p = if samples == 0 { 0.0 } else { accepted as f64 / samples as f64 };
    let stderr = if samples == 0 { 0.0 } else { bound * (p * (1.0 - p) / samples as f64).sqrt() };
    Ok(McEstimate { estimate: bound * p, stderr, bound, accepted, samples, seed })
}

// ---------------------------------------------------------------------------
// Random surfaces

/// Applies a real-linear map to the periods (`d ≤ 2` only).
pub fn linear_image(cover: &TranslationCover, m: [[f64; 2]; 2]) -> Option<TranslationCover> {
    if cover.d() > 2 {
        return None;
    }
    let z = cover
        .periods()?
        .iter()
        .map(|p| Complex64::new(m[0][0] * p.re + m[0][1] * p.im, m[1][0] * p.re + m[1][1] * p.im))
        .collect();
    cover.with_periods(z).ok()
}

fn rescaled(cover: &TranslationCover, area: f64) -> TranslationCover {
    let s = (area / cover.area().expect("periods")).sqrt();
    let z = cover.periods().expect("periods").iter().map(|x| x * s).collect();
    cover.with_periods(z).expect("scaling keeps a valid cover")
}

/// One random move of the periods on the current triangulation: a step in
/// `W_o` of size `step` relative to the shortest edge, and for `d ≤ 2` with
/// probability `stretch_p` a stretch by `e^t`, `t < 0.6`, in a random
/// direction. Faces stay positively oriented; the triangulation is kept.
pub fn perturb<R: Rng>(
    rng: &mut R,
    cur: &TranslationCover,
    step: f64,
    stretch_p: f64,
) -> Result<TranslationCover, ChartError> {
    let f = FloatField::new(cur.d(), crate::scalar::DEFAULT_EPS_LIN);
    let w = chart_space(&f, cur)?;
    let z = cur.periods().ok_or(ChartError::NoPeriods)?;
    let v0 = darts_to_cochain(cur.map(), z);
    let min_len = v0.iter().map(|x| x.norm()).fold(f64::INFINITY, f64::min);
    let mut out = cur.clone();
    for _ in 0..20 {
        let mut dv = vec![Complex64::new(0.0, 0.0); v0.len()];
        for b in &w.basis {
            let c = uniform_disc(rng, 1.0);
            for (x, y) in dv.iter_mut().zip(b) {
                *x += c * y;
            }
        }
        let big = dv.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if big == 0.0 {
            break;
        }
        let s = step * min_len / big;
        let v: Vec<Complex64> = v0.iter().zip(&dv).map(|(a, b)| a + b * s).collect();
        let zn = cochain_to_darts(cur.map(), &v);
        if membership_u(cur, &zn).inside {
            if let Ok(c) = cur.with_periods(zn) {
                out = c;
                break;
            }
        }
    }
    if out.d() <= 2 && rng.gen_bool(stretch_p) {
        let t: f64 = rng.gen_range(0.0..0.6);
        let th: f64 = rng.gen_range(0.0..std::f64::consts::PI);
        let (c, s) = (th.cos(), th.sin());
        let (a, b) = (t.exp(), (-t).exp());
        // R(θ)·diag(a, b)·R(−θ)
        let m = [[a * c * c + b * s * s, (a - b) * c * s], [(a - b) * c * s, a * s * s + b * c * c]];
        if let Some(c) = linear_image(&out, m) {
            out = c;
        }
    }
    Ok(out)
}

/// Random walk in period coordinates from `cover`, re-triangulating by
/// invariant Delaunay flips after every [`perturb`] step. The result has
/// area one.
pub fn random_walk<R: Rng>(
    rng: &mut R,
    cover: &TranslationCover,
    steps: usize,
    config: &ChartConfig,
) -> Result<TranslationCover, ChartError> {
    let mut cur = delaunay::invariant_delaunay(&rescaled(cover, 1.0), &config.delaunay)?.0;
    for _ in 0..steps {
        let next = perturb(rng, &cur, 0.3, 0.3)?;
        cur = delaunay::invariant_delaunay(&rescaled(&next, 1.0), &config.delaunay)?.0;
    }
    Ok(rescaled(&cur, 1.0))
}

/// A random area-one surface on a triangulation that is usually not
/// Delaunay: a [`random_walk`] followed by one more [`perturb`] step.
pub fn random_surface<R: Rng>(
    rng: &mut R,
    cover: &TranslationCover,
    steps: usize,
    config: &ChartConfig,
) -> Result<TranslationCover, ChartError> {
    let cur = random_walk(rng, cover, steps, config)?;
    Ok(rescaled(&perturb(rng, &cur, 0.45, 0.5)?, 1.0))
}

/// Flat map of a cover with periods.
pub fn flat(cover: &TranslationCover) -> Result<FlatMap, ChartError> {
    Ok(delaunay::flat_map_of(cover)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic_cover::build_cover;
    use crate::ddiff_surface::GeomConfig;
    use crate::fixtures;
    use crate::scalar::ExactField;

    fn delaunay_cover(s: &crate::ddiff_surface::DDiffSurface) -> TranslationCover {
        let c = build_cover(s, 1).unwrap();
        delaunay::invariant_delaunay(&c, &DelaunayConfig::default()).unwrap().0
    }

    #[test]
    fn chart_dimensions() {
        let f = ExactField::new(2).unwrap();
        assert_eq!(chart_space(&f, &delaunay_cover(&fixtures::pillowcase())).unwrap().dim(), 2);
        let f = ExactField::new(1).unwrap();
        assert_eq!(chart_space(&f, &delaunay_cover(&fixtures::square_torus())).unwrap().dim(), 2);
    }

    #[test]
    fn torus_families_match_hand_count() {
        // two faces, three edges: three simple dual cycles, pairwise sharing faces
        let o = delaunay_cover(&fixtures::square_torus());
        let f = ExactField::new(1).unwrap();
        let w = chart_space(&f, &o).unwrap();
        let fams = admissible_families(&f, &o, &w, 3, 1000).unwrap();
        assert_eq!(fams.len(), 4);
        assert_eq!(fams[0].k(), 0);
        assert!(fams.iter().all(|fm| fm.n() == 2));
    }

    #[test]
    fn gamma_periods_avoid_crossing_coordinates() {
        for s in [fixtures::pillowcase(), fixtures::triangle_pillow_d3(), fixtures::l_shape()] {
            let o = delaunay_cover(&s);
            let f = ExactField::new(o.d()).unwrap();
            let w = chart_space(&f, &o).unwrap();
            let fams = admissible_families(&f, &o, &w, 2, 10_000).unwrap();
            assert_eq!(fams[0].k(), 0);
            assert!(o.d() == 3 || fams.len() > 1);
            for fam in &fams {
                let rep = gamma_period_independence(&f, &o, &w, fam, 0.0).unwrap();
                assert!(rep.holds, "{fam:?}");
            }
            // floating point elimination agrees
            let ff = FloatField::new(o.d(), 1e-10);
            let wf = Subspace { ambient: w.ambient, basis: w.basis.iter().map(|b| b.iter().map(|x| f.to_c64(x)).collect()).collect() };
            for fam in &fams {
                let a = gamma_period_independence(&f, &o, &w, fam, 0.0).unwrap();
                let b = gamma_period_independence(&ff, &o, &wf, fam, 1e-9).unwrap();
                assert!(b.holds);
                for (x, y) in a.coefficients.iter().flatten().zip(b.coefficients.iter().flatten()) {
                    assert!((f.to_c64(x) - y).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn membership_round_trip_and_failure() {
        let o = delaunay_cover(&fixtures::pillowcase());
        let z = o.periods().unwrap().to_vec();
        assert!(membership_u(&o, &z).inside);
        let t = o.map().faces()[0];
        let mut bad = z.clone();
        bad.swap(t[0], t[1]);
        let r = membership_u(&o, &bad);
        assert!(!r.inside);
        assert!(r.nonpositive_faces.contains(&0));
    }

    #[test]
    fn bounds_are_powers_of_two() {
        let a = delaunay::alpha();
        assert_eq!(bounding_volume(0, 1, a).exact, Some(BigInt::from(16)));
        assert_eq!(bounding_volume(0, 2, a).exact, Some(BigInt::from(256)));
        for n in 1..5 {
            for k in 0..=n {
                let r = bounding_volume(k, n, a).value / bounding_volume(0, n, a).value;
                assert!((r - 0.5f64.powi(k as i32)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn witnesses_for_seeds() {
        let config = ChartConfig::default();
        for s in fixtures::geometric_seeds() {
            let c = build_cover(&s, 1).unwrap();
            let w = cover_witness(&c, &config).unwrap();
            assert!(w.u1.inside());
        }
        let w = cover_witness(&build_cover(&fixtures::equilateral_torus(), 1).unwrap(), &config).unwrap();
        assert_eq!(w.family.k(), 0);
        let stretched = fixtures::pillowcase().linear_image([[0.2, 0.0], [0.0, 5.0]], &GeomConfig::default()).unwrap().unwrap();
        let w = cover_witness(&build_cover(&stretched, 1).unwrap(), &config).unwrap();
        assert_eq!(w.family.k(), 1);
        assert!((w.o.area().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn torus_one_by_two() {
        let t = 2f64;
        let s = fixtures::rectangle_torus(1.0 / t.sqrt(), t.sqrt());
        let w = cover_witness(&build_cover(&s, 1).unwrap(), &ChartConfig::default()).unwrap();
        assert!(w.u1.inside());
        let doubled = fixtures::rectangle_torus(2f64.sqrt() / t.sqrt(), t.sqrt());
        let o = delaunay_cover(&doubled);
        let rep = in_u1(o.map(), o.periods().unwrap(), &w.family, &ChartConfig::default()).unwrap();
        assert!(!rep.area_ok);
    }

    #[test]
    fn mc_estimates() {
        let config = ChartConfig::default();
        let o = delaunay_cover(&fixtures::square_torus());
        let f = FloatField::new(1, 1e-10);
        let w = chart_space(&f, &o).unwrap();
        let fam = complete_family(&f, &o, &w, Vec::new()).unwrap();
        let a = mc_estimate(&o, &fam, 20_000, 1, &config).unwrap();
        let b = mc_estimate(&o, &fam, 20_000, 2, &config).unwrap();
        assert!(a.estimate <= a.bound && b.estimate <= b.bound);
        assert!((a.estimate - b.estimate).abs() <= 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt());
        assert_eq!(a, mc_estimate(&o, &fam, 20_000, 1, &config).unwrap());
        let none = mc_estimate(&o, &fam, 0, 1, &config).unwrap();
        assert_eq!(none.estimate, 0.0);
    }

    #[test]
    fn random_walk_stays_in_stratum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let config = ChartConfig::default();
        for s in fixtures::geometric_seeds() {
            let c = build_cover(&s, 1).unwrap();
            let r = random_walk(&mut rng, &c, 5, &config).unwrap();
            assert!((r.area().unwrap() - 1.0).abs() < 1e-9);
            assert!(membership_u(&r, r.periods().unwrap()).inside);
            assert!(cover_witness(&r, &config).is_ok());
        }
    }
}
