//! Delaunay triangulations of translation surfaces by edge flips, and long
//! cylinders crossed by long Delaunay edges.
//!
//! A translation triangulation is a map together with a period `z` per dart
//! (`z(σ₀e) = −z(e)`, faces closing up). Flips keep dart indices, so a deck
//! map given as a dart permutation stays an automorphism when whole orbits
//! are flipped.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::combmap::{CombinatorialMap, Graph};
use crate::cyclic_cover::{CoverError, TranslationCover};
use crate::ddiff_surface::triangle_area;

/// `2√(2/π)`: cylinders higher than `α·√Area` are long.
pub fn alpha() -> f64 {
    2.0 * (2.0 / PI).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelaunayConfig {
    pub alpha: f64,
    /// Opposite angle sums within `tie_tol` of `π` count as co-circular.
    pub tie_tol: f64,
    /// `None` means `50·E + 100`.
    pub max_flips: Option<usize>,
    /// Cap on enumerated dual cycles per surface.
    pub max_cycles: usize,
}

impl Default for DelaunayConfig {
    fn default() -> Self {
        Self { alpha: alpha(), tie_tol: 1e-9, max_flips: None, max_cycles: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DelaunayError {
    #[error("no Delaunay triangulation after {flips} flips")]
    FlipLimitExceeded { flips: usize },
    #[error("edge {edge} violates the Delaunay condition but its orbit cannot be flipped")]
    Stuck { edge: usize },
    #[error("surface has no periods")]
    NoPeriods,
    #[error(transparent)]
    Cover(#[from] CoverError),
}

/// Map with periods.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatMap {
    pub map: CombinatorialMap,
    pub z: Vec<Complex64>,
}

impl FlatMap {
    pub fn area(&self) -> f64 {
        self.map.faces().iter().map(|f| triangle_area(self.z[f[0]], self.z[f[1]])).sum()
    }
    pub fn length(&self, e: usize) -> f64 {
        self.z[e].norm()
    }
}

/// Sum of the two angles opposite the edge of `e`.
pub fn opposite_angle_sum(fm: &FlatMap, e: usize) -> f64 {
    let m = &fm.map;
    let corner = |x: usize| {
        // angle at the origin of x between x and the reversed previous side
        let p = m.prev_in_face(x);
        (-fm.z[p] / fm.z[x]).arg()
    };
    let o = m.opp(e);
    corner(m.prev_in_face(e)) + corner(m.prev_in_face(o))
}

/// `incircle > 0` iff the far vertex of the face of `σ₀e` lies strictly
/// inside the circumcircle of the face of `e`.
pub fn incircle(fm: &FlatMap, e: usize) -> f64 {
    let m = &fm.map;
    let o = m.opp(e);
    let a = Complex64::new(0.0, 0.0);
    let b = fm.z[e];
    let c = b + fm.z[m.next_in_face(e)];
    let dp = fm.z[m.next_in_face(o)];
    let row = |p: Complex64| [p.re - dp.re, p.im - dp.im, (p - dp).norm_sqr()];
    let (r1, r2, r3) = (row(a), row(b), row(c));
    r1[0] * (r2[1] * r3[2] - r2[2] * r3[1]) - r1[1] * (r2[0] * r3[2] - r2[2] * r3[0])
        + r1[2] * (r2[0] * r3[1] - r2[1] * r3[0])
}

/// Delaunay certificate: every edge has opposite angle sum at most
/// `π + tol`. Returns the worst edge otherwise.
pub fn certify(fm: &FlatMap, tol: f64) -> Result<(), usize> {
    match worst_edge(fm) {
        Some((e, v)) if v > tol => Err(e),
        _ => Ok(()),
    }
}

fn worst_edge(fm: &FlatMap) -> Option<(usize, f64)> {
    fm.map
        .edge_darts()
        .into_iter()
        .map(|e| (e, opposite_angle_sum(fm, e) - PI))
        .fold(None, |best, (e, v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((e, v)),
        })
}

/// Flips the edge of `e`; `None` if both sides lie in one face or a new
/// triangle is degenerate.
pub fn flip_edge(fm: &FlatMap, e: usize) -> Option<FlatMap> {
    let m = &fm.map;
    let o = m.opp(e);
    let b = m.prev_in_face(e);
    let c = m.next_in_face(o);
    let map = m.flip(e)?;
    let mut z = fm.z.clone();
    z[e] = -(fm.z[b] + fm.z[c]);
    z[o] = -z[e];
    let out = FlatMap { map, z };
    for &f in &[out.map.face_of(e), out.map.face_of(o)] {
        let t = out.map.faces()[f];
        if triangle_area(out.z[t[0]], out.z[t[1]]) <= 0.0 {
            return None;
        }
    }
    Some(out)
}

/// Output of the flip algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct FlipRun {
    pub surface: FlatMap,
    /// Flipped canonical darts, in order.
    pub flips: Vec<usize>,
    /// For each dart, the original vertex its origin lies at.
    pub origin_label: Vec<usize>,
}

/// Flips until the empty-circumdisk condition holds. With `deck`, whole
/// orbits are flipped at once, so the result is invariant.
pub fn delaunay_flip(fm: &FlatMap, deck: Option<&[usize]>, config: &DelaunayConfig) -> Result<FlipRun, DelaunayError> {
    let mut cur = fm.clone();
    let mut label: Vec<usize> = (0..fm.map.num_darts()).map(|x| fm.map.origin(x)).collect();
    let limit = config.max_flips.unwrap_or(50 * fm.map.num_edges() + 100);
    let mut flips = Vec::new();
    let orbit = |e: usize| -> Vec<usize> {
        let mut out = vec![e];
        if let Some(t) = deck {
            let mut x = t[e];
            while x != e {
                out.push(x);
                x = t[x];
            }
        }
        out
    };
    loop {
        let scale_tol = config.tie_tol;
        let mut cands: Vec<(usize, f64)> = cur
            .map
            .edge_darts()
            .into_iter()
            .map(|e| (e, opposite_angle_sum(&cur, e) - PI))
            .filter(|&(_, v)| v > scale_tol)
            .collect();
        if cands.is_empty() {
            return Ok(FlipRun { surface: cur, flips, origin_label: label });
        }
        cands.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut done = false;
        for &(e, _) in &cands {
            let mut next = cur.clone();
            let mut next_label = label.clone();
            let mut ok = true;
            let mut these = Vec::new();
            for x in orbit(e) {
                let m = &next.map;
                let (o, b, f) = (m.opp(x), m.prev_in_face(x), m.prev_in_face(m.opp(x)));
                if opposite_angle_sum(&next, x) - PI <= scale_tol {
                    ok = false;
                    break;
                }
                match flip_edge(&next, x) {
                    Some(s) => {
                        next_label[x] = next_label[f];
                        next_label[o] = next_label[b];
                        next = s;
                        these.push(next.map.canonical(x));
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && !these.is_empty() {
                cur = next;
                label = next_label;
                flips.extend(these);
                done = true;
                break;
            }
        }
        if !done {
            return Err(DelaunayError::Stuck { edge: cands[0].0 });
        }
        if flips.len() > limit {
            return Err(DelaunayError::FlipLimitExceeded { flips: flips.len() });
        }
    }
}

pub fn flat_map_of(cover: &TranslationCover) -> Result<FlatMap, DelaunayError> {
    let z = cover.periods().ok_or(DelaunayError::NoPeriods)?.to_vec();
    Ok(FlatMap { map: cover.map().clone(), z })
}

/// T-invariant Delaunay triangulation of a cover, returned as a cover over
/// the same base data.
pub fn invariant_delaunay(cover: &TranslationCover, config: &DelaunayConfig) -> Result<(TranslationCover, FlipRun), DelaunayError> {
    let fm = flat_map_of(cover)?;
    let run = delaunay_flip(&fm, Some(cover.deck().perm()), config)?;
    let out = rebuild(cover, &run)?;
    Ok((out, run))
}

fn rebuild(cover: &TranslationCover, run: &FlipRun) -> Result<TranslationCover, CoverError> {
    let map = run.surface.map.clone();
    let vertex_base = map.vertices().iter().map(|c| cover.vertex_base()[run.origin_label[c[0]]]).collect();
    TranslationCover::from_parts(
        cover.d(),
        cover.zeta_index(),
        map,
        cover.deck().perm(),
        vertex_base,
        cover.base_orders().to_vec(),
        Some(run.surface.z.clone()),
        cover.base_genus(),
    )
}

/// Canonical darts longer than `α·√Area`.
pub fn long_edges(fm: &FlatMap, alpha: f64) -> Vec<usize> {
    long_edges_above(fm, alpha * fm.area().sqrt())
}

pub fn long_edges_above(fm: &FlatMap, threshold: f64) -> Vec<usize> {
    fm.map.edge_darts().into_iter().filter(|&e| fm.length(e) > threshold).collect()
}

/// Flat cylinder found from a simple cycle of the dual graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    /// Period of the core curve (direction of traversal).
    pub holonomy: Complex64,
    pub circumference: f64,
    pub height: f64,
    /// Crossed darts, each leaving the face before it.
    pub crossed: Vec<usize>,
    pub faces: Vec<usize>,
}

impl Cylinder {
    pub fn direction(&self) -> Complex64 {
        self.holonomy / self.circumference
    }
    pub fn crosses(&self, map: &CombinatorialMap, e: usize) -> usize {
        let c = map.canonical(e);
        self.crossed.iter().filter(|&&x| map.canonical(x) == c).count()
    }
    /// Same cylinder up to cyclic order of the crossing.
    pub fn same_as(&self, map: &CombinatorialMap, other: &Cylinder) -> bool {
        let key = |c: &Cylinder| {
            let mut v: Vec<usize> = c.crossed.iter().map(|&x| map.canonical(x)).collect();
            v.sort();
            v
        };
        key(self) == key(other)
    }
}

/// Darts crossed by a dual cycle, each in the face the cycle leaves.
pub fn crossing_darts(map: &CombinatorialMap, graph: &Graph, nodes: &[usize], links: &[usize]) -> Option<Vec<usize>> {
    let k = links.len();
    let mut crossed = Vec::with_capacity(k);
    for i in 0..k {
        let c = graph.link_dart[links[i]];
        let x = if map.face_of(c) == nodes[i] && map.face_of(map.opp(c)) == nodes[(i + 1) % k] { c } else { map.opp(c) };
        if map.face_of(x) != nodes[i] {
            return None;
        }
        crossed.push(x);
    }
    Some(crossed)
}

/// Edge chain homologous to the closed curve through the crossed darts.
pub fn core_chain(map: &CombinatorialMap, crossed: &[usize]) -> Vec<i64> {
    let idx = map.edge_index();
    let mut c = vec![0; map.num_edges()];
    let k = crossed.len();
    for i in 0..k {
        let y = map.opp(crossed[i]);
        if crossed[(i + 1) % k] == map.prev_in_face(y) {
            let (e, s) = idx[map.next_in_face(y)];
            c[e] += s as i64;
        }
    }
    c
}

/// Develops the faces along a dual cycle and returns the maximal strip
/// parallel to its holonomy that crosses exactly the cycle's edges.
pub fn cylinder_of_cycle(fm: &FlatMap, graph: &Graph, nodes: &[usize], links: &[usize]) -> Option<Cylinder> {
    let crossed = crossing_darts(&fm.map, graph, nodes, links)?;
    cylinder_of_crossing(fm, crossed)
}

pub fn cylinder_of_crossing(fm: &FlatMap, crossed: Vec<usize>) -> Option<Cylinder> {
    let m = &fm.map;
    let k = crossed.len();
    let mut pos = vec![Complex64::new(0.0, 0.0); k + 1];
    for i in 0..k {
        let y = m.opp(crossed[i]);
        let oy = pos[i] + fm.z[crossed[i]];
        let nx = crossed[(i + 1) % k];
        pos[i + 1] = if nx == m.next_in_face(y) {
            oy + fm.z[y]
        } else if nx == m.prev_in_face(y) {
            oy + fm.z[y] + fm.z[m.next_in_face(y)]
        } else {
            return None;
        };
    }
    let hol = pos[k] - pos[0];
    let ell = hol.norm();
    if ell == 0.0 {
        return None;
    }
    let u = hol / ell;
    let normal = |p: Complex64| (p * u.conj()).im;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..k {
        let a = normal(pos[i]);
        let b = normal(pos[i] + fm.z[crossed[i]]);
        // the core leaves the face to the right of its crossed side
        if b <= a {
            return None;
        }
        lo = lo.max(a);
        hi = hi.min(b);
    }
    let height = hi - lo;
    if height <= 0.0 {
        return None;
    }
    let faces = crossed.iter().map(|&x| m.face_of(x)).collect();
    Some(Cylinder { holonomy: hol, circumference: ell, height, crossed, faces })
}

/// All cylinders dual to simple cycles made of edges longer than
/// `threshold`, with height above `threshold`.
pub fn cylinders_above(fm: &FlatMap, threshold: f64, config: &DelaunayConfig) -> Vec<Cylinder> {
    let dual = fm.map.dual_graph();
    let keep: Vec<usize> = (0..dual.links.len()).filter(|&l| fm.length(dual.link_dart[l]) > threshold).collect();
    let sub = Graph {
        nodes: dual.nodes,
        links: keep.iter().map(|&l| dual.links[l]).collect(),
        link_dart: keep.iter().map(|&l| dual.link_dart[l]).collect(),
    };
    let mut out: Vec<Cylinder> = Vec::new();
    for cyc in sub.simple_cycles(config.max_cycles).cycles {
        if let Some(c) = cylinder_of_cycle(fm, &sub, &cyc.nodes, &cyc.links) {
            if c.height > threshold && !out.iter().any(|o| o.same_as(&fm.map, &c)) {
                out.push(c);
            }
        }
    }
    out
}

/// Long cylinders: height above `α·√Area`.
pub fn detect_cylinders(fm: &FlatMap, config: &DelaunayConfig) -> Vec<Cylinder> {
    cylinders_above(fm, config.alpha * fm.area().sqrt(), config)
}

/// An edge in the frame of a cylinder it crosses.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingReport {
    pub edge: usize,
    pub length: f64,
    pub x: f64,
    pub y: f64,
    pub height: f64,
    pub circumference: f64,
    /// `h ≤ |e| ≤ √(h² + ℓ²) ≤ √2·h`.
    pub eq_6_1: bool,
    /// `|x| ≤ ℓ`.
    pub x_bound: bool,
    /// `|e| < h + √A/α³`.
    pub length_excess: bool,
    /// `|y| < 2/ℓ` (area at most one).
    pub y_bound: bool,
}

impl CrossingReport {
    pub fn all_hold(&self) -> bool {
        self.eq_6_1 && self.x_bound && self.length_excess && self.y_bound
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrossingError {
    #[error("edge {0} does not cross the cylinder")]
    NotCrossing(usize),
}

pub fn verify_crossing_bounds(fm: &FlatMap, e: usize, cyl: &Cylinder, alpha: f64) -> Result<CrossingReport, CrossingError> {
    if cyl.crosses(&fm.map, e) == 0 {
        return Err(CrossingError::NotCrossing(e));
    }
    let eps = 1e-9;
    let area = fm.area();
    let z = fm.z[e];
    let (h, ell) = (cyl.height, cyl.circumference);
    let w = z * cyl.holonomy.conj() / ell;
    let len = z.norm();
    let diag = (h * h + ell * ell).sqrt();
    let tol = eps * (1.0 + len);
    Ok(CrossingReport {
        edge: e,
        length: len,
        x: w.re,
        y: w.im,
        height: h,
        circumference: ell,
        eq_6_1: h <= len + tol && len <= diag + tol && diag <= 2f64.sqrt() * h + tol,
        x_bound: w.re.abs() <= ell + tol,
        length_excess: len < h + area.sqrt() / alpha.powi(3) + tol,
        y_bound: area > 1.0 + eps || w.im.abs() < 2.0 / ell,
    })
}

/// Checks on one Delaunay surface: long edges and the cylinders they cross.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CylinderAudit {
    pub long_edges: usize,
    pub cylinders: usize,
    /// Long edges not crossing exactly one long cylinder exactly once.
    pub unmatched_long_edges: Vec<usize>,
    /// Edges longer than `√2·α·√A` not crossing exactly one long cylinder.
    pub unmatched_very_long_edges: Vec<usize>,
    pub bound_violations: Vec<CrossingReport>,
    pub overlapping_cylinders: usize,
}

pub fn audit(fm: &FlatMap, config: &DelaunayConfig) -> CylinderAudit {
    let cyls = detect_cylinders(fm, config);
    let long = long_edges(fm, config.alpha);
    let very = long_edges_above(fm, 2f64.sqrt() * config.alpha * fm.area().sqrt());
    let matched = |e: usize| {
        let hits: Vec<&Cylinder> = cyls.iter().filter(|c| c.crosses(&fm.map, e) > 0).collect();
        hits.len() == 1 && hits[0].crosses(&fm.map, e) == 1
    };
    let mut out = CylinderAudit { long_edges: long.len(), cylinders: cyls.len(), ..Default::default() };
    out.unmatched_long_edges = long.iter().copied().filter(|&e| !matched(e)).collect();
    out.unmatched_very_long_edges = very.iter().copied().filter(|&e| !matched(e)).collect();
    for c in &cyls {
        for &x in &c.crossed {
            let r = verify_crossing_bounds(fm, x, c, config.alpha).expect("crossed edge");
            if !r.all_hold() {
                out.bound_violations.push(r);
            }
        }
    }
    for i in 0..cyls.len() {
        for j in i + 1..cyls.len() {
            if cyls[i].faces.iter().any(|f| cyls[j].faces.contains(f)) {
                out.overlapping_cylinders += 1;
            }
        }
    }
    out
}

/// Images of cylinders under the deck map are again detected cylinders, and
/// no cylinder is fixed.
pub fn deck_permutes_freely(cover: &TranslationCover, cyls: &[Cylinder]) -> bool {
    let m = cover.map();
    cyls.iter().all(|c| {
        let img = Cylinder { crossed: c.crossed.iter().map(|&x| cover.deck().apply(x)).collect(), ..c.clone() };
        let found = cyls.iter().any(|o| o.same_as(m, &img));
        found && (cover.d() == 1 || !img.same_as(m, c))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic_cover::build_cover;
    use crate::fixtures;
    use crate::ddiff_surface::GeomConfig;

    fn flat(s: &crate::ddiff_surface::DDiffSurface) -> (TranslationCover, FlatMap) {
        let c = build_cover(s, 1).unwrap();
        let fm = flat_map_of(&c).unwrap();
        (c, fm)
    }

    fn torus(u: Complex64, v: Complex64) -> FlatMap {
        flat(&fixtures::parallelogram_torus(u, v)).1
    }

    #[test]
    fn alpha_squared_times_two_pi_is_sixteen() {
        assert!((2.0 * PI * alpha() * alpha() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn long_diagonal_flips_to_short() {
        // 1×3 rectangle with the sheared basis (1, 1+3i): the diagonal (2+3i) is long
        let fm = torus(Complex64::new(1.0, 0.0), Complex64::new(1.0, 3.0));
        assert!(certify(&fm, 1e-9).is_err());
        let run = delaunay_flip(&fm, None, &DelaunayConfig::default()).unwrap();
        assert!(certify(&run.surface, 1e-9).is_ok());
        assert!(!run.flips.is_empty());
        let mut lens: Vec<f64> = run.surface.map.edge_darts().iter().map(|&e| run.surface.length(e)).collect();
        lens.sort_by(f64::total_cmp);
        assert!((lens[0] - 1.0).abs() < 1e-12 && (lens[1] - 3.0).abs() < 1e-12);
        assert!((run.surface.area() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn equilateral_torus_needs_no_flip() {
        let (_, fm) = flat(&fixtures::equilateral_torus());
        let run = delaunay_flip(&fm, None, &DelaunayConfig::default()).unwrap();
        assert!(run.flips.is_empty());
        assert!(long_edges(&fm, alpha()).is_empty());
    }

    #[test]
    fn square_torus_is_a_tie() {
        let (_, fm) = flat(&fixtures::square_torus());
        assert!((opposite_angle_sum(&fm, 2) - PI).abs() < 1e-12);
        assert!(delaunay_flip(&fm, None, &DelaunayConfig::default()).unwrap().flips.is_empty());
    }

    #[test]
    fn incircle_agrees_with_angles() {
        for fm in [
            torus(Complex64::new(1.0, 0.0), Complex64::new(1.0, 3.0)),
            torus(Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.8)),
        ] {
            for e in fm.map.edge_darts() {
                let v = opposite_angle_sum(&fm, e) - PI;
                if v.abs() > 1e-9 {
                    assert_eq!(v > 0.0, incircle(&fm, e) > 0.0, "edge {e}");
                }
            }
        }
    }

    #[test]
    fn covers_get_invariant_triangulations() {
        let config = DelaunayConfig::default();
        for s in fixtures::geometric_seeds() {
            let stretched = s.scaled(Complex64::new(1.0, 0.0), &GeomConfig::default()).unwrap();
            let c = build_cover(&stretched, 1).unwrap();
            let (dc, run) = invariant_delaunay(&c, &config).unwrap();
            assert!(certify(&run.surface, 1e-9).is_ok());
            assert_eq!(dc.cover_kappa().len(), c.cover_kappa().len());
            assert!((dc.area().unwrap() - c.area().unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn long_rectangle_torus_has_one_cylinder() {
        let t = 5.0;
        let fm = torus(Complex64::new(1.0, 0.0), Complex64::new(0.0, t));
        let config = DelaunayConfig::default();
        let run = delaunay_flip(&fm, None, &config).unwrap();
        let s = &run.surface;
        let a = alpha() * s.area().sqrt();
        assert!(t > a);
        let cyls = detect_cylinders(s, &config);
        assert_eq!(cyls.len(), 1);
        assert!((cyls[0].circumference - 1.0).abs() < 1e-12);
        assert!((cyls[0].height - t).abs() < 1e-12);
        let vertical = s.map.edge_darts().into_iter().find(|&e| (s.z[e].re).abs() < 1e-12).unwrap();
        let r = verify_crossing_bounds(s, vertical, &cyls[0], alpha()).unwrap();
        assert!(r.x.abs() < 1e-12 && (r.y.abs() - t).abs() < 1e-12);
        let horizontal = s.map.edge_darts().into_iter().find(|&e| (s.z[e].im).abs() < 1e-12).unwrap();
        assert_eq!(verify_crossing_bounds(s, horizontal, &cyls[0], alpha()), Err(CrossingError::NotCrossing(horizontal)));
    }

    #[test]
    fn normalized_torus_family() {
        let config = DelaunayConfig::default();
        for i in 1..200 {
            let t = 1.0 + 0.05 * i as f64;
            let fm = torus(Complex64::new(1.0 / t.sqrt(), 0.0), Complex64::new(0.0, t.sqrt()));
            let run = delaunay_flip(&fm, None, &config).unwrap();
            let a = audit(&run.surface, &config);
            assert!(a.unmatched_very_long_edges.is_empty(), "t = {t}");
            assert!(a.bound_violations.is_empty(), "t = {t}");
            assert_eq!(a.cylinders, (t.sqrt() > alpha()) as usize, "t = {t}");
        }
    }

    #[test]
    fn core_chain_carries_the_holonomy() {
        let s = fixtures::pillowcase().linear_image([[0.2, 0.0], [0.0, 5.0]], &GeomConfig::default()).unwrap().unwrap();
        let (_, fm) = flat(&s);
        let run = delaunay_flip(&fm, None, &DelaunayConfig::default()).unwrap();
        let f = &run.surface;
        let cyls = cylinders_above(f, 0.0, &DelaunayConfig::default());
        assert!(!cyls.is_empty());
        for c in &cyls {
            let ch = core_chain(&f.map, &c.crossed);
            let hol: Complex64 = f.map.edge_darts().iter().zip(&ch).map(|(&e, &k)| f.z[e] * k as f64).sum();
            assert!((hol - c.holonomy).norm() < 1e-12);
        }
    }

    #[test]
    fn pillowcase_cylinders_are_permuted_freely() {
        let s = fixtures::pillowcase().linear_image([[0.2, 0.0], [0.0, 5.0]], &GeomConfig::default()).unwrap().unwrap();
        let c = build_cover(&s, 1).unwrap();
        let (dc, run) = invariant_delaunay(&c, &DelaunayConfig::default()).unwrap();
        let cyls = detect_cylinders(&run.surface, &DelaunayConfig::default());
        assert!(!cyls.is_empty());
        assert!(deck_permutes_freely(&dc, &cyls));
    }
}
