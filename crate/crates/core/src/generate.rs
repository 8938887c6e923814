//! Random instances: combinatorial triangulations with rotation classes, and
//! random flat surfaces obtained by deforming seeds inside their period chart.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::combmap::CombinatorialMap;
use crate::cyclic_cover::{build_cover_combinatorial, nominal_orders, TranslationCover};
use crate::ddiff_surface::DStructure;

/// Glues `faces` triangles along a uniformly random pairing of their sides.
pub fn random_gluing<R: Rng>(rng: &mut R, faces: usize) -> Option<CombinatorialMap> {
    let n = 3 * faces;
    let mut darts: Vec<usize> = (0..n).collect();
    darts.shuffle(rng);
    let mut sigma0 = vec![0; n];
    for p in darts.chunks(2) {
        sigma0[p[0]] = p[1];
        sigma0[p[1]] = p[0];
    }
    let tri: Vec<[usize; 3]> = (0..faces).map(|f| [3 * f, 3 * f + 1, 3 * f + 2]).collect();
    CombinatorialMap::from_faces(sigma0, &tri).ok()
}

/// A triangulation of genus `g` with a single vertex (`g ≥ 1`) or the double
/// triangle (`g = 0`).
pub fn minimal_map<R: Rng>(rng: &mut R, g: usize) -> CombinatorialMap {
    if g == 0 {
        return CombinatorialMap::from_faces(vec![1, 0, 3, 2, 5, 4], &[[0, 2, 4], [5, 3, 1]]).expect("sphere");
    }
    loop {
        if let Some(m) = random_gluing(rng, 4 * g - 2) {
            if m.num_vertices() == 1 {
                return m;
            }
        }
    }
}

/// Random flip of an edge joining two distinct faces that keeps every vertex
/// degree at least 2.
fn random_flip<R: Rng>(rng: &mut R, m: &CombinatorialMap) -> Option<CombinatorialMap> {
    let e = rng.gen_range(0..m.num_darts());
    let (a, b) = (m.origin(e), m.target(e));
    let deg = |v: usize| m.vertices()[v].len();
    let ok = if a == b { deg(a) >= 4 } else { deg(a) >= 3 && deg(b) >= 3 };
    if !ok {
        return None;
    }
    m.flip(e)
}

/// Triangulation of genus `g` with `n` vertices, randomized by flips.
pub fn random_triangulation<R: Rng>(rng: &mut R, g: usize, n: usize) -> CombinatorialMap {
    let mut m = minimal_map(rng, g);
    while m.num_vertices() < n {
        let f = rng.gen_range(0..m.num_faces());
        m = m.stellar_subdivide(f);
    }
    for _ in 0..3 * m.num_edges() {
        if let Some(x) = random_flip(rng, &m) {
            m = x;
        }
    }
    m
}

/// Combinatorial instance: a primitive rotation structure with orders
/// lifting its vertex holonomy.
#[derive(Debug, Clone)]
pub struct Instance {
    pub structure: DStructure,
    pub kappa: Vec<i64>,
}

impl Instance {
    pub fn cover(&self, zeta_index: i64) -> TranslationCover {
        build_cover_combinatorial(&self.structure, &self.kappa, zeta_index).expect("instance is primitive")
    }
    pub fn d(&self) -> usize {
        self.structure.d()
    }
    pub fn genus(&self) -> usize {
        self.structure.genus()
    }
    pub fn n(&self) -> usize {
        self.kappa.len()
    }
    pub fn r(&self) -> usize {
        self.kappa.iter().filter(|&&k| k.rem_euclid(self.d() as i64) == 0).count()
    }
}

/// Random primitive rotation structure of type `(d, g, n)`. Retries until the
/// holonomy is surjective and admissible orders exist; gives up after
/// `attempts` tries.
pub fn random_instance<R: Rng>(rng: &mut R, d: usize, g: usize, n: usize, attempts: usize) -> Option<Instance> {
    for _ in 0..attempts {
        let map = random_triangulation(rng, g, n);
        let rot: Vec<i64> = (0..map.num_edges()).map(|_| rng.gen_range(0..d as i64)).collect();
        let structure = DStructure::new(map, d, &rot).ok()?;
        if !structure.holonomy().surjective() {
            continue;
        }
        if let Some(kappa) = nominal_orders(&structure) {
            return Some(Instance { structure, kappa });
        }
    }
    None
}

/// As [`random_instance`], additionally requiring `r` vertices with
/// `kᵢ ≡ 0 mod d`.
pub fn random_instance_with_r<R: Rng>(
    rng: &mut R,
    d: usize,
    g: usize,
    n: usize,
    r: usize,
    attempts: usize,
) -> Option<Instance> {
    for _ in 0..attempts {
        if let Some(i) = random_instance(rng, d, g, n, 1) {
            if i.r() == r {
                return Some(i);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn triangulation_has_requested_type() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (g, n) in [(0, 3), (0, 5), (1, 1), (1, 3), (2, 1), (2, 2)] {
            let m = random_triangulation(&mut rng, g, n);
            assert_eq!((m.genus(), m.num_vertices()), (g, n));
            assert_eq!(2 * m.num_edges(), 3 * m.num_faces());
        }
    }

    #[test]
    fn instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2, 3, 4, 6] {
            let i = random_instance(&mut rng, d, 1, 2, 200).unwrap();
            let c = i.cover(1);
            assert_eq!(i.kappa.iter().sum::<i64>(), 0);
            assert_eq!(c.cover_kappa().iter().sum::<i64>(), 2 * c.genus() as i64 - 2);
        }
    }
}
