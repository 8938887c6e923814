//! The canonical cyclic cover of a d-differential.
//!
//! Cover darts are pairs `(e, j)` with `e` a base dart and `j ∈ ℤ/d` a sheet,
//! stored at index `j·n + e` so that sheet 0 reproduces the base numbering.
//! With `ζ = ζ_d^k` the periods are `ẑ(e, j) = ζ^j·side(e)`, crossing dart
//! `(e, j)` lands on sheet `j − k⁻¹·rot(e)`, and the deck map is
//! `T(e, j) = (e, j + 1)`.

use num_complex::Complex64;
use thiserror::Error;

use crate::combmap::{AutomorphismError, CombinatorialMap, MapAutomorphism, MapError};
use crate::scalar::root_c64;
use crate::ddiff_surface::{from_triangles, triangle_area, DDiffSurface, DStructure, GeomConfig, SurfaceError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoverError {
    #[error("holonomy image has order {image_order}, not d = {d}: the differential is not primitive")]
    NotPrimitive { d: usize, image_order: usize },
    #[error("zeta index {k} is not a unit mod {d}")]
    BadZetaIndex { k: i64, d: usize },
    #[error("cover has {components} connected components")]
    DisconnectedCover { components: usize },
    #[error("stratum data gives non-integral cover genus ({twice} = 2ĝ)")]
    NonIntegral { twice: i64 },
    #[error("{0} orders given for {1} vertices")]
    OrderCount(usize, usize),
    #[error("order {k} at vertex {vertex} disagrees with holonomy {h} mod {d}")]
    OrderMismatch { vertex: usize, k: i64, h: i64, d: usize },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Automorphism(#[from] AutomorphismError),
    #[error("cover check failed: {0}")]
    Inconsistent(String),
}

/// Ramification data of one base vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiberProfile {
    pub k: i64,
    /// Order of `k` in `ℤ/d`.
    pub d_i: usize,
    /// Number of preimages, `d / d_i`.
    pub n_i: usize,
    /// Order of the cover 1-form at each preimage.
    pub k_hat: i64,
}

pub fn fiber_profile(d: usize, k: i64) -> FiberProfile {
    let d_i = d / num_integer::gcd(k.rem_euclid(d as i64) as usize, d);
    let k_hat = d_i as i64 + d_i as i64 * k / d as i64 - 1;
    FiberProfile { k, d_i, n_i: d / d_i, k_hat }
}

/// Cover orders, preimages of base vertex `i` listed consecutively.
pub fn cover_orders(d: usize, kappa: &[i64]) -> (Vec<i64>, Vec<FiberProfile>) {
    let prof: Vec<FiberProfile> = kappa.iter().map(|&k| fiber_profile(d, k)).collect();
    let hat = prof.iter().flat_map(|p| std::iter::repeat(p.k_hat).take(p.n_i)).collect();
    (hat, prof)
}

/// Genus of the canonical cover, `2ĝ − 2 = d(2g − 2) + Σ(d − nᵢ)`.
pub fn riemann_hurwitz_genus(g: usize, d: usize, kappa: &[i64]) -> Result<usize, CoverError> {
    let d = d as i64;
    let ram: i64 = kappa.iter().map(|&k| d - fiber_profile(d as usize, k).n_i as i64).sum();
    let twice = d * (2 * g as i64 - 2) + ram + 2;
    if twice < 0 || twice % 2 != 0 {
        return Err(CoverError::NonIntegral { twice });
    }
    Ok((twice / 2) as usize)
}

/// Inverse of `k` modulo `d`, if it exists.
pub fn unit_inverse(k: i64, d: usize) -> Option<i64> {
    let d = d as i64;
    (0..d).find(|&x| (x * k).rem_euclid(d) == 1 % d)
}

/// Orders lifting the holonomy classes with `kᵢ > −d` and `Σkᵢ = d(2g − 2)`,
/// the surplus put on vertex 0; `None` if no such lift exists.
pub fn nominal_orders(structure: &DStructure) -> Option<Vec<i64>> {
    let d = structure.d() as i64;
    let mut k: Vec<i64> = (0..structure.map().num_vertices())
        .map(|v| {
            let h = structure.vertex_holonomy(v);
            if h == 0 {
                0
            } else {
                h - d
            }
        })
        .collect();
    let target = d * (2 * structure.genus() as i64 - 2);
    let surplus = target - k.iter().sum::<i64>();
    if surplus < 0 || surplus % d != 0 {
        return None;
    }
    k[0] += surplus;
    Some(k)
}

/// A translation surface triangulated with a free deck automorphism `T` of
/// order `d` satisfying `ẑ∘T = ζ·ẑ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationCover {
    d: usize,
    zeta_index: i64,
    map: CombinatorialMap,
    deck: MapAutomorphism,
    vertex_base: Vec<usize>,
    base_orders: Vec<i64>,
    z: Option<Vec<Complex64>>,
    base_dart: Option<Vec<usize>>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Builds the cover of a flat surface.
pub fn build_cover(surface: &DDiffSurface, zeta_index: i64) -> Result<TranslationCover, CoverError> {
    build_cover_with(surface.structure(), surface.kappa(), Some(surface.sides()), zeta_index)
}

/// Builds the cover of a rotation structure with prescribed orders, without
/// geometry.
pub fn build_cover_combinatorial(
    structure: &DStructure,
    kappa: &[i64],
    zeta_index: i64,
) -> Result<TranslationCover, CoverError> {
    build_cover_with(structure, kappa, None, zeta_index)
}

fn build_cover_with(
    structure: &DStructure,
    kappa: &[i64],
    side: Option<&[Complex64]>,
    zeta_index: i64,
) -> Result<TranslationCover, CoverError> {
    let d = structure.d();
    let base = structure.map();
    if kappa.len() != base.num_vertices() {
        return Err(CoverError::OrderCount(kappa.len(), base.num_vertices()));
    }
    for (v, &k) in kappa.iter().enumerate() {
        let h = structure.vertex_holonomy(v);
        if k.rem_euclid(d as i64) != h {
            return Err(CoverError::OrderMismatch { vertex: v, k, h, d });
        }
    }
    let kinv = unit_inverse(zeta_index, d).ok_or(CoverError::BadZetaIndex { k: zeta_index, d })?;
    let hol = structure.holonomy();
    if !hol.surjective() {
        return Err(CoverError::NotPrimitive { d, image_order: hol.image_order() });
    }
    let n = base.num_darts();
    let di = d as i64;
    let idx = |e: usize, j: i64| j.rem_euclid(di) as usize * n + e;

    let mut sigma0 = vec![0; n * d];
    let mut faces = Vec::with_capacity(base.num_faces() * d);
    let mut uf = UnionFind((0..base.num_faces() * d).collect());
    for j in 0..di {
        for e in 0..n {
            sigma0[idx(e, j)] = idx(base.opp(e), j - kinv * structure.rot(e));
        }
        for f in base.faces() {
            faces.push([idx(f[0], j), idx(f[1], j), idx(f[2], j)]);
        }
    }
    let nf = base.num_faces();
    for j in 0..di {
        for e in 0..n {
            let a = j as usize * nf + base.face_of(e);
            let t = sigma0[idx(e, j)];
            uf.union(a, (t / n) * nf + base.face_of(t % n));
        }
    }
    let components = (0..nf * d).filter(|&x| uf.find(x) == x).count();
    if components != 1 {
        return Err(CoverError::DisconnectedCover { components });
    }
    let map = CombinatorialMap::from_faces(sigma0, &faces)?;
    let perm: Vec<usize> = (0..n * d).map(|x| idx(x % n, (x / n) as i64 + 1)).collect();
    let deck = map.check_automorphism(&perm, d)?;
    let vertex_base = map.vertices().iter().map(|c| base.origin(c[0] % n)).collect();
    let z = side.map(|s| {
        let zeta = root_c64(d, zeta_index);
        (0..n * d).map(|x| s[x % n] * zeta.powi((x / n) as i32)).collect()
    });
    let cover = TranslationCover {
        d,
        zeta_index: zeta_index.rem_euclid(di),
        map,
        deck,
        vertex_base,
        base_orders: kappa.to_vec(),
        z,
        base_dart: Some((0..n * d).map(|x| x % n).collect()),
    };
    cover.verify(base.genus())?;
    Ok(cover)
}

impl TranslationCover {
    /// Assembles a cover from its parts, validating `T`, the fiber map and,
    /// if given, the periods.
    pub fn from_parts(
        d: usize,
        zeta_index: i64,
        map: CombinatorialMap,
        deck: &[usize],
        vertex_base: Vec<usize>,
        base_orders: Vec<i64>,
        z: Option<Vec<Complex64>>,
        base_genus: usize,
    ) -> Result<Self, CoverError> {
        unit_inverse(zeta_index, d).ok_or(CoverError::BadZetaIndex { k: zeta_index, d })?;
        let deck = map.check_automorphism(deck, d)?;
        let cover = Self {
            d,
            zeta_index: zeta_index.rem_euclid(d as i64),
            map,
            deck,
            vertex_base,
            base_orders,
            z,
            base_dart: None,
        };
        cover.verify(base_genus)?;
        Ok(cover)
    }

    fn verify(&self, base_genus: usize) -> Result<(), CoverError> {
        let m = &self.map;
        if self.vertex_base.len() != m.num_vertices() {
            return Err(CoverError::Inconsistent("fiber map length".into()));
        }
        let profile: Vec<FiberProfile> = self.base_orders.iter().map(|&k| fiber_profile(self.d, k)).collect();
        let mut count = vec![0usize; profile.len()];
        for (v, &b) in self.vertex_base.iter().enumerate() {
            let t = m.origin(self.deck.apply(m.vertices()[v][0]));
            if self.vertex_base[t] != b {
                return Err(CoverError::Inconsistent(format!("T moves vertex {v} off its fiber")));
            }
            count[b] += 1;
        }
        for (i, p) in profile.iter().enumerate() {
            if count[i] != p.n_i {
                return Err(CoverError::Inconsistent(format!(
                    "base vertex {i} has {} preimages, expected {}",
                    count[i], p.n_i
                )));
            }
        }
        let g_hat = riemann_hurwitz_genus(base_genus, self.d, &self.base_orders)?;
        if g_hat != m.genus() {
            return Err(CoverError::Inconsistent(format!(
                "Riemann-Hurwitz gives genus {g_hat}, cover has {}",
                m.genus()
            )));
        }
        if let Some(z) = &self.z {
            let zeta = root_c64(self.d, self.zeta_index);
            let scale = z.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1.0);
            let tol = 1e-9 * scale;
            for e in 0..m.num_darts() {
                if (z[m.opp(e)] + z[e]).norm() > tol {
                    return Err(CoverError::Inconsistent(format!("periods not antisymmetric at dart {e}")));
                }
                if (z[self.deck.apply(e)] - zeta * z[e]).norm() > tol {
                    return Err(CoverError::Inconsistent(format!("z(Te) != zeta z(e) at dart {e}")));
                }
            }
            for (i, f) in m.faces().iter().enumerate() {
                if (z[f[0]] + z[f[1]] + z[f[2]]).norm() > tol {
                    return Err(CoverError::Inconsistent(format!("face {i} does not close")));
                }
                if triangle_area(z[f[0]], z[f[1]]) <= 0.0 {
                    return Err(CoverError::Inconsistent(format!("face {i} has non-positive area")));
                }
            }
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn zeta_index(&self) -> i64 {
        self.zeta_index
    }
    pub fn zeta(&self) -> Complex64 {
        root_c64(self.d, self.zeta_index)
    }
    pub fn map(&self) -> &CombinatorialMap {
        &self.map
    }
    pub fn deck(&self) -> &MapAutomorphism {
        &self.deck
    }
    pub fn genus(&self) -> usize {
        self.map.genus()
    }
    pub fn num_vertices(&self) -> usize {
        self.map.num_vertices()
    }
    /// Base vertex under each cover vertex.
    pub fn vertex_base(&self) -> &[usize] {
        &self.vertex_base
    }
    pub fn base_orders(&self) -> &[i64] {
        &self.base_orders
    }
    /// Base dart under each cover dart, when the cover was built from a base
    /// triangulation.
    pub fn base_dart(&self) -> Option<&[usize]> {
        self.base_dart.as_deref()
    }
    pub fn periods(&self) -> Option<&[Complex64]> {
        self.z.as_deref()
    }
    /// Order of the 1-form at each cover vertex.
    pub fn cover_kappa(&self) -> Vec<i64> {
        self.vertex_base.iter().map(|&b| fiber_profile(self.d, self.base_orders[b]).k_hat).collect()
    }
    pub fn profile(&self) -> Vec<FiberProfile> {
        self.base_orders.iter().map(|&k| fiber_profile(self.d, k)).collect()
    }
    /// Number `r` of base vertices with `kᵢ ≡ 0 mod d`.
    pub fn r(&self) -> usize {
        self.base_orders.iter().filter(|&&k| k.rem_euclid(self.d as i64) == 0).count()
    }
    pub fn area(&self) -> Option<f64> {
        let z = self.z.as_ref()?;
        Some(self.map.faces().iter().map(|f| triangle_area(z[f[0]], z[f[1]])).sum())
    }
    /// Same cover with the deck map replaced by `T^m`, which satisfies
    /// `ẑ∘T^m = ζ^m·ẑ`.
    pub fn with_deck_power(&self, m: usize) -> Result<Self, CoverError> {
        let zi = self.zeta_index * m as i64;
        unit_inverse(zi, self.d).ok_or(CoverError::BadZetaIndex { k: zi, d: self.d })?;
        let deck = self.map.check_automorphism(&self.deck.pow(m), self.d)?;
        Ok(Self { zeta_index: zi.rem_euclid(self.d as i64), deck, ..self.clone() })
    }
    /// Same combinatorics with new periods (validated).
    pub fn with_periods(&self, z: Vec<Complex64>) -> Result<Self, CoverError> {
        let c = Self { z: Some(z), ..self.clone() };
        c.verify(self.base_genus())?;
        Ok(c)
    }
    /// The cover as a translation surface (`d = 1`, all rotations zero).
    pub fn translation_surface(&self, config: &GeomConfig) -> Result<DDiffSurface, SurfaceError> {
        let z = self.z.clone().ok_or(SurfaceError::Length { what: "periods", expected: self.map.num_darts(), found: 0 })?;
        let structure = DStructure::new(self.map.clone(), 1, &vec![0; self.map.num_edges()])?;
        DDiffSurface::new(structure, z, config)
    }

    /// The quotient d-differential, triangulated by the images of the cover
    /// faces. Face `i` of the result is the `i`-th `T`-orbit of cover faces
    /// (ordered by smallest face), with the sides of its first face.
    pub fn quotient(&self, config: &GeomConfig) -> Result<DDiffSurface, SurfaceError> {
        let z = self.z.as_ref().ok_or(SurfaceError::Length { what: "periods", expected: self.map.num_darts(), found: 0 })?;
        let m = &self.map;
        let t = self.deck.perm();
        // base face and position of every cover dart
        let mut slot = vec![(usize::MAX, 0usize); m.num_darts()];
        let mut faces = Vec::new();
        let mut reps = Vec::new();
        for (fi, tri) in m.faces().iter().enumerate() {
            if slot[tri[0]].0 != usize::MAX {
                continue;
            }
            let b = faces.len();
            faces.push([z[tri[0]], z[tri[1]], z[tri[2]]]);
            reps.extend_from_slice(tri);
            let mut cur = *tri;
            loop {
                for (p, &x) in cur.iter().enumerate() {
                    slot[x] = (b, p);
                }
                cur = [t[cur[0]], t[cur[1]], t[cur[2]]];
                if m.face_of(cur[0]) == fi {
                    break;
                }
            }
        }
        let mut pairs = Vec::new();
        for &x in &reps {
            let (u, v) = (3 * slot[x].0 + slot[x].1, 3 * slot[m.opp(x)].0 + slot[m.opp(x)].1);
            if u < v {
                pairs.push((u, v));
            }
        }
        from_triangles(self.d, &faces, &pairs, config)
    }

    /// Genus of the quotient surface.
    pub fn base_genus(&self) -> usize {
        let d = self.d as i64;
        let sum: i64 = self.base_orders.iter().sum();
        ((sum / d + 2) / 2) as usize
    }
}
