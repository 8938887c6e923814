//! Flat surfaces of d-differentials.
//!
//! Each face carries its own chart in which the three sides are the vectors
//! `side(e)`. Crossing the edge through dart `e` changes chart by the rotation
//! `ζ_d^{rot(e)}`, so that `side(σ₀e) = −ζ_d^{rot(e)}·side(e)`.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::f64::consts::PI;
use thiserror::Error;

use crate::combmap::{CombinatorialMap, MapError};
use crate::scalar::root_c64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("d must be positive")]
    ZeroD,
    #[error("expected {expected} {what}, found {found}")]
    Length { what: &'static str, expected: usize, found: usize },
    #[error("face {face} is degenerate (area {area:e})")]
    DegenerateTriangle { face: usize, area: f64 },
    #[error("face {face} does not close up (residual {residual:e})")]
    OpenTriangle { face: usize, residual: f64 },
    #[error("gluing mismatch at edge {edge} (darts {dart}/{opposite}): {reason}")]
    GluingMismatch { edge: usize, dart: usize, opposite: usize, reason: String },
    #[error("cone order {k} at vertex {vertex} is not above -d = -{d}")]
    BadOrders { vertex: usize, k: i64, d: usize },
    #[error("cone orders sum to {sum}, expected d(2g-2) = {expected}")]
    OrderSum { sum: i64, expected: i64 },
    #[error("vertex {vertex}: cone angle gives non-integral order {value}")]
    NonIntegralOrder { vertex: usize, value: f64 },
    #[error("vertex {vertex}: holonomy {holonomy} disagrees with order {k} mod {d}")]
    HolonomyMismatch { vertex: usize, holonomy: i64, k: i64, d: usize },
}

/// Tolerances for floating point geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeomConfig {
    /// Relative geometric tolerance; the absolute one is `eps_rel·√area`.
    pub eps_rel: f64,
    /// Allowed distance of `d·Θ/2π − d` from an integer.
    pub order_tol: f64,
}

impl Default for GeomConfig {
    fn default() -> Self {
        Self { eps_rel: 1e-9, order_tol: 1e-6 }
    }
}

/// A triangulation together with rotation classes in ℤ/d: the combinatorial
/// part of a d-differential.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DStructure {
    map: CombinatorialMap,
    d: usize,
    /// Per dart, in `0..d`, with `rot[σ₀e] = −rot[e]`.
    rot: Vec<i64>,
}

/// Linear holonomy in ℤ/d.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Holonomy {
    pub d: usize,
    /// One value per dual edge outside a spanning tree of the dual graph.
    pub loop_values: Vec<i64>,
    /// Value around each vertex, counterclockwise.
    pub vertex_values: Vec<i64>,
    /// The image is generated by this divisor of `d`.
    pub generator: usize,
}

impl Holonomy {
    pub fn surjective(&self) -> bool {
        self.generator == 1
    }
    pub fn image_order(&self) -> usize {
        self.d / self.generator
    }
}

impl DStructure {
    /// `rot_per_edge[i]` is the class of the canonical dart of edge `i`.
    pub fn new(map: CombinatorialMap, d: usize, rot_per_edge: &[i64]) -> Result<Self, SurfaceError> {
        if d == 0 {
            return Err(SurfaceError::ZeroD);
        }
        if rot_per_edge.len() != map.num_edges() {
            return Err(SurfaceError::Length { what: "rot entries", expected: map.num_edges(), found: rot_per_edge.len() });
        }
        let mut rot = vec![0; map.num_darts()];
        for (i, e) in map.edge_darts().into_iter().enumerate() {
            let r = rot_per_edge[i].rem_euclid(d as i64);
            rot[e] = r;
            rot[map.opp(e)] = (-r).rem_euclid(d as i64);
        }
        Ok(Self { map, d, rot })
    }

    pub fn map(&self) -> &CombinatorialMap {
        &self.map
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn rot(&self, e: usize) -> i64 {
        self.rot[e]
    }
    pub fn rot_per_edge(&self) -> Vec<i64> {
        self.map.edge_darts().into_iter().map(|e| self.rot[e]).collect()
    }
    pub fn genus(&self) -> usize {
        self.map.genus()
    }

    /// Sheet potential along a BFS tree of the dual graph: crossing dart `e`
    /// adds `rot(e)`.
    pub(crate) fn face_potential(&self) -> (Vec<i64>, Vec<bool>) {
        let m = &self.map;
        let d = self.d as i64;
        let mut pot = vec![i64::MIN; m.num_faces()];
        let mut tree = vec![false; m.num_darts()];
        pot[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(f) = queue.pop_front() {
            for &e in &m.faces()[f] {
                let g = m.face_of(m.opp(e));
                if pot[g] == i64::MIN {
                    pot[g] = (pot[f] + self.rot[e]).rem_euclid(d);
                    tree[e] = true;
                    tree[m.opp(e)] = true;
                    queue.push_back(g);
                }
            }
        }
        (pot, tree)
    }

    pub fn holonomy(&self) -> Holonomy {
        let m = &self.map;
        let d = self.d as i64;
        let (pot, tree) = self.face_potential();
        let mut loop_values = Vec::new();
        let mut g = d;
        for e in m.edge_darts() {
            if tree[e] {
                continue;
            }
            let v = (pot[m.face_of(e)] + self.rot[e] - pot[m.face_of(m.opp(e))]).rem_euclid(d);
            g = num_integer::gcd(g, v);
            loop_values.push(v);
        }
        let vertex_values = (0..m.num_vertices()).map(|v| self.vertex_holonomy(v)).collect();
        Holonomy { d: self.d, loop_values, vertex_values, generator: g.max(1) as usize }
    }

    /// Rotation accumulated while turning once around vertex `v`; equals the
    /// cone order modulo `d`.
    pub fn vertex_holonomy(&self, v: usize) -> i64 {
        let m = &self.map;
        let d = self.d as i64;
        let s: i64 = m.vertices()[v].iter().map(|&x| self.rot[m.opp(m.sigma1()[x])]).sum();
        (-s).rem_euclid(d)
    }
}

/// Exact Gaussian rational `re + i·im`.
pub type GaussRat = (BigRational, BigRational);

#[derive(Debug, Clone, PartialEq)]
pub struct DDiffSurface {
    structure: DStructure,
    side: Vec<Complex64>,
    exact: Option<Vec<GaussRat>>,
    kappa: Vec<i64>,
    angles: Vec<f64>,
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Euclidean area of the triangle with consecutive sides `a`, `b`.
pub fn triangle_area(a: Complex64, b: Complex64) -> f64 {
    0.5 * cross(a, b)
}

/// Corner angle in `(0, π)` from direction `a` counterclockwise to `b`.
pub fn corner_angle(a: Complex64, b: Complex64) -> f64 {
    cross(a, b).atan2(a.re * b.re + a.im * b.im)
}

impl DDiffSurface {
    pub fn new(structure: DStructure, side: Vec<Complex64>, config: &GeomConfig) -> Result<Self, SurfaceError> {
        Self::build(structure, side, None, config)
    }

    /// Builds from exact Gaussian rational sides; validation of face sums and
    /// of gluings is exact whenever `ζ_d^{rot}` is a Gaussian integer.
    pub fn new_exact(structure: DStructure, exact: Vec<GaussRat>, config: &GeomConfig) -> Result<Self, SurfaceError> {
        use num_traits::ToPrimitive;
        let side = exact
            .iter()
            .map(|(a, b)| Complex64::new(a.to_f64().unwrap_or(f64::NAN), b.to_f64().unwrap_or(f64::NAN)))
            .collect();
        Self::build(structure, side, Some(exact), config)
    }

    fn build(
        structure: DStructure,
        side: Vec<Complex64>,
        exact: Option<Vec<GaussRat>>,
        config: &GeomConfig,
    ) -> Result<Self, SurfaceError> {
        let m = structure.map();
        let d = structure.d();
        if side.len() != m.num_darts() {
            return Err(SurfaceError::Length { what: "side vectors", expected: m.num_darts(), found: side.len() });
        }
        let area: f64 = m.faces().iter().map(|f| triangle_area(side[f[0]], side[f[1]])).sum();
        let eps = config.eps_rel * area.abs().sqrt().max(f64::MIN_POSITIVE);
        let exact_rot = matches!(d, 1 | 2 | 4);

        for (i, f) in m.faces().iter().enumerate() {
            if let Some(ex) = &exact {
                let re = &ex[f[0]].0 + &ex[f[1]].0 + &ex[f[2]].0;
                let im = &ex[f[0]].1 + &ex[f[1]].1 + &ex[f[2]].1;
                if !re.is_zero() || !im.is_zero() {
                    return Err(SurfaceError::OpenTriangle { face: i, residual: (side[f[0]] + side[f[1]] + side[f[2]]).norm() });
                }
                let (a, b) = (&ex[f[0]], &ex[f[1]]);
                let cr = &a.0 * &b.1 - &a.1 * &b.0;
                if !cr.is_positive() {
                    return Err(SurfaceError::DegenerateTriangle { face: i, area: triangle_area(side[f[0]], side[f[1]]) });
                }
            } else {
                let res = (side[f[0]] + side[f[1]] + side[f[2]]).norm();
                if res > eps {
                    return Err(SurfaceError::OpenTriangle { face: i, residual: res });
                }
                let a = triangle_area(side[f[0]], side[f[1]]);
                if a <= eps * eps {
                    return Err(SurfaceError::DegenerateTriangle { face: i, area: a });
                }
            }
        }

        for (i, e) in m.edge_darts().into_iter().enumerate() {
            let o = m.opp(e);
            let r = structure.rot(e);
            let mismatch = |reason: String| SurfaceError::GluingMismatch { edge: i, dart: e, opposite: o, reason };
            match (&exact, exact_rot) {
                (Some(ex), true) => {
                    let z = gauss_root(d, r);
                    let (x, y) = (&ex[e].0, &ex[e].1);
                    // −ζ^r·(x + iy)
                    let want_re = -(x * &z.0 - y * &z.1);
                    let want_im = -(x * &z.1 + y * &z.0);
                    if want_re != ex[o].0 || want_im != ex[o].1 {
                        return Err(mismatch(format!("side of dart {o} is not -z{d}^{r} times side of dart {e}")));
                    }
                }
                _ => {
                    let want = -root_c64(d, r) * side[e];
                    let err = (want - side[o]).norm();
                    if err > eps {
                        let lens = (side[e].norm(), side[o].norm());
                        let why = if (lens.0 - lens.1).abs() > eps {
                            format!("lengths {:.6} and {:.6} differ", lens.0, lens.1)
                        } else {
                            format!("rotation class {r} off by {err:e}")
                        };
                        return Err(mismatch(why));
                    }
                }
            }
        }

        let mut kappa = Vec::with_capacity(m.num_vertices());
        let mut angles = Vec::with_capacity(m.num_vertices());
        for (v, darts) in m.vertices().iter().enumerate() {
            let theta: f64 = darts
                .iter()
                .map(|&x| corner_angle(side[x], -side[m.prev_in_face(x)]))
                .sum();
            let value = d as f64 * theta / (2.0 * PI) - d as f64;
            let k = value.round();
            if (value - k).abs() > config.order_tol {
                return Err(SurfaceError::NonIntegralOrder { vertex: v, value });
            }
            let k = k as i64;
            if k <= -(d as i64) {
                return Err(SurfaceError::BadOrders { vertex: v, k, d });
            }
            let h = structure.vertex_holonomy(v);
            if h != k.rem_euclid(d as i64) {
                return Err(SurfaceError::HolonomyMismatch { vertex: v, holonomy: h, k, d });
            }
            kappa.push(k);
            angles.push(theta);
        }
        let g = m.genus() as i64;
        let sum: i64 = kappa.iter().sum();
        if sum != d as i64 * (2 * g - 2) {
            return Err(SurfaceError::OrderSum { sum, expected: d as i64 * (2 * g - 2) });
        }
        Ok(Self { structure, side, exact, kappa, angles })
    }

    pub fn structure(&self) -> &DStructure {
        &self.structure
    }
    pub fn map(&self) -> &CombinatorialMap {
        self.structure.map()
    }
    pub fn d(&self) -> usize {
        self.structure.d()
    }
    pub fn genus(&self) -> usize {
        self.structure.genus()
    }
    pub fn side(&self, e: usize) -> Complex64 {
        self.side[e]
    }
    pub fn sides(&self) -> &[Complex64] {
        &self.side
    }
    pub fn exact_sides(&self) -> Option<&[GaussRat]> {
        self.exact.as_deref()
    }
    /// Cone orders `k_i` indexed by vertex.
    pub fn kappa(&self) -> &[i64] {
        &self.kappa
    }
    /// Total cone angles `Θ_i = (1 + k_i/d)·2π`.
    pub fn cone_angles(&self) -> &[f64] {
        &self.angles
    }
    pub fn face_area(&self, f: usize) -> f64 {
        let t = self.map().faces()[f];
        triangle_area(self.side[t[0]], self.side[t[1]])
    }
    pub fn area(&self) -> f64 {
        (0..self.map().num_faces()).map(|f| self.face_area(f)).sum()
    }
    pub fn primitivity(&self) -> Holonomy {
        self.structure.holonomy()
    }

    /// Same surface with every side multiplied by `c ≠ 0` (rotation classes
    /// unchanged).
    pub fn scaled(&self, c: Complex64, config: &GeomConfig) -> Result<Self, SurfaceError> {
        let side = self.side.iter().map(|s| s * c).collect();
        Self::new(self.structure.clone(), side, config)
    }

    /// Rescaled to area 1.
    pub fn normalized(&self, config: &GeomConfig) -> Result<Self, SurfaceError> {
        self.scaled(Complex64::new(1.0 / self.area().sqrt(), 0.0), config)
    }

    /// Applies the real linear map `[[a, b], [c, d]]` to every chart. Only
    /// defined when the rotations `ζ_d` commute with it, i.e. `d ≤ 2`.
    pub fn linear_image(&self, m: [[f64; 2]; 2], config: &GeomConfig) -> Option<Result<Self, SurfaceError>> {
        if self.d() > 2 {
            return None;
        }
        let side = self
            .side
            .iter()
            .map(|s| Complex64::new(m[0][0] * s.re + m[0][1] * s.im, m[1][0] * s.re + m[1][1] * s.im))
            .collect();
        Some(Self::new(self.structure.clone(), side, config))
    }

    /// Adds a marked point (order 0) inside face `f` at barycentric weights
    /// `w` relative to the face's vertices `A, B, C`.
    pub fn with_marked_point(&self, f: usize, w: [f64; 3], config: &GeomConfig) -> Result<Self, SurfaceError> {
        let m = self.map();
        let [x, y, _] = m.faces()[f];
        let sum = w[0] + w[1] + w[2];
        // positions relative to A
        let (a, b, c) = (Complex64::new(0.0, 0.0), self.side[x], self.side[x] + self.side[y]);
        let p = (a * w[0] + b * w[1] + c * w[2]) / sum;
        let new_map = m.stellar_subdivide(f);
        let mut side = self.side.clone();
        side.extend([p - a, a - p, p - b, b - p, p - c, c - p]);
        let mut rot = self.structure.rot_per_edge();
        rot.resize(new_map.num_edges(), 0);
        let structure = DStructure::new(new_map, self.d(), &rot)?;
        Self::new(structure, side, config)
    }

    /// Rotates the chart of face `f` by `ζ_d^{shift[f]}`; the surface is the
    /// same, rotation classes change accordingly.
    pub fn gauge(&self, shift: &[i64], config: &GeomConfig) -> Result<Self, SurfaceError> {
        let m = self.map();
        let d = self.d();
        let side: Vec<Complex64> = (0..m.num_darts())
            .map(|e| root_c64(d, shift[m.face_of(e)]) * self.side[e])
            .collect();
        let rot: Vec<i64> = m
            .edge_darts()
            .into_iter()
            .map(|e| self.structure.rot(e) + shift[m.face_of(m.opp(e))] - shift[m.face_of(e)])
            .collect();
        let structure = DStructure::new(m.clone(), d, &rot)?;
        Self::new(structure, side, config)
    }

    /// If the holonomy has image of order `d' < d`, the same flat surface as
    /// a primitive d'-differential.
    pub fn primitive_part(&self, config: &GeomConfig) -> Result<Self, SurfaceError> {
        let h = self.primitivity();
        if h.surjective() {
            return Ok(self.clone());
        }
        let (pot, _) = self.structure.face_potential();
        let shift: Vec<i64> = pot.iter().map(|p| -p).collect();
        let g = self.gauge(&shift, config)?;
        let q = h.generator as i64;
        let rot: Vec<i64> = g.structure.rot_per_edge().iter().map(|r| r / q).collect();
        let structure = DStructure::new(g.map().clone(), h.image_order(), &rot)?;
        Self::new(structure, g.side.clone(), config)
    }
}

/// `ζ_d^r` as a Gaussian integer for `d ∈ {1,2,4}`.
fn gauss_root(d: usize, r: i64) -> (BigRational, BigRational) {
    let q = |x: i64| BigRational::from_integer(x.into());
    let steps = match d {
        1 => 0,
        2 => 2 * r.rem_euclid(2),
        4 => r.rem_euclid(4),
        _ => unreachable!(),
    };
    match steps {
        0 => (q(1), q(0)),
        1 => (q(0), q(1)),
        2 => (q(-1), q(0)),
        _ => (q(0), q(-1)),
    }
}

/// Builds a surface from faces given as counterclockwise side vectors.
/// Darts of face `f` are `3f, 3f+1, 3f+2`; `pairs` glues darts, and rotation
/// classes are read off the geometry.
pub fn from_triangles(
    d: usize,
    faces: &[[Complex64; 3]],
    pairs: &[(usize, usize)],
    config: &GeomConfig,
) -> Result<DDiffSurface, SurfaceError> {
    let n = 3 * faces.len();
    let mut sigma0 = vec![usize::MAX; n];
    for &(a, b) in pairs {
        sigma0[a] = b;
        sigma0[b] = a;
    }
    if sigma0.iter().any(|&x| x == usize::MAX) {
        return Err(SurfaceError::Map(MapError::NotPermutation { which: "pairs", value: n }));
    }
    let tri: Vec<[usize; 3]> = (0..faces.len()).map(|f| [3 * f, 3 * f + 1, 3 * f + 2]).collect();
    let map = CombinatorialMap::from_faces(sigma0, &tri)?;
    let side: Vec<Complex64> = faces.iter().flat_map(|f| f.iter().copied()).collect();
    let rot = map
        .edge_darts()
        .into_iter()
        .map(|e| rotation_class(d, side[e], side[map.opp(e)]))
        .collect::<Vec<_>>();
    let structure = DStructure::new(map, d, &rot)?;
    DDiffSurface::new(structure, side, config)
}

/// The `r ∈ ℤ/d` minimizing `|−ζ_d^r·a − b|`.
pub fn rotation_class(d: usize, a: Complex64, b: Complex64) -> i64 {
    (0..d as i64)
        .min_by(|&r, &s| {
            let er = (-root_c64(d, r) * a - b).norm();
            let es = (-root_c64(d, s) * a - b).norm();
            er.total_cmp(&es)
        })
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn square_torus() {
        let s = fixtures::square_torus();
        assert_eq!(s.kappa(), &[0]);
        assert_eq!(s.genus(), 1);
        assert!((s.area() - 1.0).abs() < 1e-15);
        assert!(s.primitivity().surjective());
    }

    #[test]
    fn pillowcase_orders_and_area() {
        let s = fixtures::pillowcase();
        assert_eq!(s.kappa(), &[-1, -1, -1, -1]);
        assert_eq!(s.genus(), 0);
        assert!((s.area() - 2.0).abs() < 1e-12);
        for a in s.cone_angles() {
            assert!((a - PI).abs() < 1e-12);
        }
        assert!(s.primitivity().surjective());
    }

    #[test]
    fn collinear_face_rejected() {
        let c = |x: f64, y: f64| Complex64::new(x, y);
        let f0 = [c(1.0, 0.0), c(1.0, 0.0), c(-2.0, 0.0)];
        let f1 = [c(2.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0)];
        let err = from_triangles(1, &[f0, f1], &[(0, 4), (1, 5), (2, 3)], &GeomConfig::default()).unwrap_err();
        assert!(matches!(err, SurfaceError::DegenerateTriangle { .. }));
    }

    #[test]
    fn orders_sum_matches_genus() {
        for s in fixtures::geometric_seeds() {
            let sum: i64 = s.kappa().iter().sum();
            assert_eq!(sum, s.d() as i64 * (2 * s.genus() as i64 - 2));
            for (v, &k) in s.kappa().iter().enumerate() {
                assert_eq!(s.structure().vertex_holonomy(v), k.rem_euclid(s.d() as i64));
            }
        }
    }

    #[test]
    fn rotation_keeps_orders() {
        let s = fixtures::triangle_pillow_d3();
        let r = s.scaled(Complex64::from_polar(1.7, 0.4), &GeomConfig::default()).unwrap();
        assert_eq!(r.kappa(), s.kappa());
        assert!((r.area() - 1.7f64.powi(2) * s.area()).abs() < 1e-12);
    }

    #[test]
    fn even_rotations_in_d4_are_not_primitive() {
        let s = fixtures::pillowcase();
        let m = s.map().clone();
        let rot: Vec<i64> = s.structure().rot_per_edge().iter().map(|r| 2 * r).collect();
        let st = DStructure::new(m, 4, &rot).unwrap();
        let h = st.holonomy();
        assert!(!h.surjective());
        assert_eq!(h.image_order(), 2);
    }

    #[test]
    fn d1_is_always_primitive() {
        let s = fixtures::square_torus();
        assert!(s.primitivity().surjective());
        assert_eq!(s.primitivity().image_order(), 1);
    }

    #[test]
    fn corrupted_rot_names_edge() {
        let s = fixtures::pillowcase();
        let mut rot = s.structure().rot_per_edge();
        rot[2] = (rot[2] + 1) % 2;
        let st = DStructure::new(s.map().clone(), 2, &rot).unwrap();
        let err = DDiffSurface::new(st, s.sides().to_vec(), &GeomConfig::default()).unwrap_err();
        assert!(matches!(err, SurfaceError::GluingMismatch { edge: 2, .. }));
    }
}
