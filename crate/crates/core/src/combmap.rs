//! Triangulated surfaces as combinatorial maps.
//!
//! A map is a pair of permutations on darts `0..2N₁`: `sigma0` pairs the two
//! halves of an edge and `sigma1` rotates counterclockwise around a vertex.
//! Faces are the cycles of `sigma2 = sigma1⁻¹ ∘ sigma0`, which lists the sides
//! of each triangle counterclockwise.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("sigma0 and sigma1 have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("{which} is not a permutation (value {value} repeated or out of range)")]
    NotPermutation { which: &'static str, value: usize },
    #[error("sigma0 fixes dart {0}")]
    FixedPoint(usize),
    #[error("sigma0 is not an involution at dart {0}")]
    NotInvolution(usize),
    #[error("face through dart {dart} has length {len}, expected 3")]
    FaceLength { dart: usize, len: usize },
    #[error("map is disconnected")]
    Disconnected,
    #[error("map has no darts")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomorphismError {
    #[error("permutation is not a map automorphism: {0}")]
    NotAutomorphism(String),
    #[error("permutation has order {actual}, expected {expected}")]
    WrongOrder { expected: usize, actual: usize },
    #[error("permutation does not act freely: {0}")]
    NotFree(String),
}

/// Validated triangulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombinatorialMap {
    sigma0: Vec<usize>,
    sigma1: Vec<usize>,
    sigma2: Vec<usize>,
    vertex_of: Vec<usize>,
    face_of: Vec<usize>,
    vertices: Vec<Vec<usize>>,
    faces: Vec<[usize; 3]>,
}

fn check_perm(p: &[usize], which: &'static str) -> Result<(), MapError> {
    let mut seen = vec![false; p.len()];
    for &v in p {
        if v >= p.len() || seen[v] {
            return Err(MapError::NotPermutation { which, value: v });
        }
        seen[v] = true;
    }
    Ok(())
}

/// Cycles of a permutation, each starting at its smallest element, ordered by
/// that element.
pub fn cycles(p: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut c = Vec::new();
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            c.push(x);
            x = p[x];
        }
        out.push(c);
    }
    out
}

pub fn invert(p: &[usize]) -> Vec<usize> {
    let mut q = vec![0; p.len()];
    for (i, &v) in p.iter().enumerate() {
        q[v] = i;
    }
    q
}

/// `a ∘ b`, i.e. `x ↦ a[b[x]]`.
pub fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&x| a[x]).collect()
}

pub fn perm_pow(p: &[usize], k: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..p.len()).collect();
    for _ in 0..k {
        out = compose(p, &out);
    }
    out
}

pub fn perm_order(p: &[usize]) -> usize {
    cycles(p)
        .iter()
        .fold(1usize, |acc, c| num_integer::lcm(acc, c.len()))
}

impl CombinatorialMap {
    pub fn new(sigma0: Vec<usize>, sigma1: Vec<usize>) -> Result<Self, MapError> {
        if sigma0.len() != sigma1.len() {
            return Err(MapError::LengthMismatch(sigma0.len(), sigma1.len()));
        }
        if sigma0.is_empty() {
            return Err(MapError::Empty);
        }
        check_perm(&sigma0, "sigma0")?;
        check_perm(&sigma1, "sigma1")?;
        for (e, &f) in sigma0.iter().enumerate() {
            if f == e {
                return Err(MapError::FixedPoint(e));
            }
            if sigma0[f] != e {
                return Err(MapError::NotInvolution(e));
            }
        }
        let sigma2 = compose(&invert(&sigma1), &sigma0);
        let n = sigma0.len();

        let vertices = cycles(&sigma1);
        let mut vertex_of = vec![0; n];
        for (i, c) in vertices.iter().enumerate() {
            for &e in c {
                vertex_of[e] = i;
            }
        }
        let mut faces = Vec::new();
        let mut face_of = vec![0; n];
        for c in cycles(&sigma2) {
            if c.len() != 3 {
                return Err(MapError::FaceLength { dart: c[0], len: c.len() });
            }
            for &e in &c {
                face_of[e] = faces.len();
            }
            faces.push([c[0], c[1], c[2]]);
        }

        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(e) = stack.pop() {
            for f in [sigma0[e], sigma1[e]] {
                if !seen[f] {
                    seen[f] = true;
                    count += 1;
                    stack.push(f);
                }
            }
        }
        if count != n {
            return Err(MapError::Disconnected);
        }

        Ok(Self { sigma0, sigma1, sigma2, vertex_of, face_of, vertices, faces })
    }

    /// Builds a map from `sigma0` and the list of counterclockwise face
    /// triples, deriving `sigma1 = sigma0 ∘ sigma2⁻¹`.
    pub fn from_faces(sigma0: Vec<usize>, faces: &[[usize; 3]]) -> Result<Self, MapError> {
        let n = sigma0.len();
        let mut sigma2 = vec![usize::MAX; n];
        for f in faces {
            for i in 0..3 {
                let e = f[i];
                if e >= n || sigma2[e] != usize::MAX {
                    return Err(MapError::NotPermutation { which: "faces", value: e });
                }
                sigma2[e] = f[(i + 1) % 3];
            }
        }
        if let Some(e) = sigma2.iter().position(|&x| x == usize::MAX) {
            return Err(MapError::NotPermutation { which: "faces", value: e });
        }
        check_perm(&sigma0, "sigma0")?;
        let sigma1 = compose(&sigma0, &invert(&sigma2));
        Self::new(sigma0, sigma1)
    }

    pub fn num_darts(&self) -> usize {
        self.sigma0.len()
    }
    pub fn num_edges(&self) -> usize {
        self.sigma0.len() / 2
    }
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }
    pub fn sigma0(&self) -> &[usize] {
        &self.sigma0
    }
    pub fn sigma1(&self) -> &[usize] {
        &self.sigma1
    }
    pub fn sigma2(&self) -> &[usize] {
        &self.sigma2
    }
    pub fn opp(&self, e: usize) -> usize {
        self.sigma0[e]
    }
    pub fn next_in_face(&self, e: usize) -> usize {
        self.sigma2[e]
    }
    pub fn prev_in_face(&self, e: usize) -> usize {
        self.sigma2[self.sigma2[e]]
    }
    /// Vertex at which dart `e` starts.
    pub fn origin(&self, e: usize) -> usize {
        self.vertex_of[e]
    }
    /// Vertex at which dart `e` ends.
    pub fn target(&self, e: usize) -> usize {
        self.vertex_of[self.sigma0[e]]
    }
    pub fn face_of(&self, e: usize) -> usize {
        self.face_of[e]
    }
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }
    /// Outgoing darts of each vertex in counterclockwise order.
    pub fn vertices(&self) -> &[Vec<usize>] {
        &self.vertices
    }

    /// The canonical dart of an undirected edge (the smaller of the pair).
    pub fn canonical(&self, e: usize) -> usize {
        e.min(self.sigma0[e])
    }
    /// Canonical darts in increasing order; position = undirected edge index.
    pub fn edge_darts(&self) -> Vec<usize> {
        (0..self.num_darts()).filter(|&e| e < self.sigma0[e]).collect()
    }
    /// Undirected edge index of each dart, with orientation sign (+1 for the
    /// canonical dart).
    pub fn edge_index(&self) -> Vec<(usize, i32)> {
        let mut idx = vec![(0, 0); self.num_darts()];
        for (i, e) in self.edge_darts().into_iter().enumerate() {
            idx[e] = (i, 1);
            idx[self.sigma0[e]] = (i, -1);
        }
        idx
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }
    pub fn genus(&self) -> usize {
        ((2 - self.euler_characteristic()) / 2) as usize
    }

    pub fn dual_graph(&self) -> Graph {
        let darts = self.edge_darts();
        let links = darts
            .iter()
            .map(|&e| (self.face_of[e], self.face_of[self.sigma0[e]]))
            .collect();
        Graph { nodes: self.num_faces(), links, link_dart: darts }
    }

    /// Diagonal flip of the edge of dart `e`: faces `(e,a,b)` and `(ē,c,f)`
    /// become `(e,b,c)` and `(ē,f,a)`. Dart indices are preserved. Returns
    /// `None` when both darts lie in the same face.
    pub fn flip(&self, e: usize) -> Option<Self> {
        let o = self.sigma0[e];
        let (fe, fo) = (self.face_of[e], self.face_of[o]);
        if fe == fo {
            return None;
        }
        let (a, b) = (self.sigma2[e], self.sigma2[self.sigma2[e]]);
        let (c, f) = (self.sigma2[o], self.sigma2[self.sigma2[o]]);
        let mut faces = self.faces.clone();
        faces[fe] = [e, b, c];
        faces[fo] = [o, f, a];
        Self::from_faces(self.sigma0.clone(), &faces).ok()
    }

    /// Cone over face `f` from a new vertex. The six new darts are appended:
    /// for the face `(x, y, w)` with origins `A, B, C` they are
    /// `A→P, P→A, B→P, P→B, C→P, P→C` in this order.
    pub fn stellar_subdivide(&self, f: usize) -> Self {
        let n = self.num_darts();
        let [x, y, w] = self.faces[f];
        let mut sigma0 = self.sigma0.clone();
        sigma0.extend([n + 1, n, n + 3, n + 2, n + 5, n + 4]);
        let mut faces = self.faces.clone();
        faces[f] = [x, n + 2, n + 1];
        faces.push([y, n + 4, n + 3]);
        faces.push([w, n, n + 5]);
        Self::from_faces(sigma0, &faces).expect("subdivision of a valid map")
    }

    /// Validates `perm` as an automorphism of order exactly `d`, acting freely
    /// on darts and faces when `d ≥ 2`.
    pub fn check_automorphism(&self, perm: &[usize], d: usize) -> Result<MapAutomorphism, AutomorphismError> {
        if perm.len() != self.num_darts() {
            return Err(AutomorphismError::NotAutomorphism(format!(
                "length {} differs from dart count {}",
                perm.len(),
                self.num_darts()
            )));
        }
        if check_perm(perm, "T").is_err() {
            return Err(AutomorphismError::NotAutomorphism("not a permutation".into()));
        }
        for e in 0..self.num_darts() {
            if perm[self.sigma0[e]] != self.sigma0[perm[e]] {
                return Err(AutomorphismError::NotAutomorphism(format!("does not commute with sigma0 at dart {e}")));
            }
            if perm[self.sigma1[e]] != self.sigma1[perm[e]] {
                return Err(AutomorphismError::NotAutomorphism(format!("does not commute with sigma1 at dart {e}")));
            }
        }
        let order = perm_order(perm);
        if order != d {
            return Err(AutomorphismError::WrongOrder { expected: d, actual: order });
        }
        if d >= 2 {
            let mut p = perm.to_vec();
            for k in 1..d {
                if let Some(e) = (0..self.num_darts()).find(|&e| p[e] == e) {
                    return Err(AutomorphismError::NotFree(format!("T^{k} fixes dart {e}")));
                }
                if let Some(f) = self.faces.iter().position(|t| self.face_of[p[t[0]]] == self.face_of[t[0]]) {
                    return Err(AutomorphismError::NotFree(format!("T^{k} fixes face {f}")));
                }
                p = compose(perm, &p);
            }
        }
        Ok(MapAutomorphism { perm: perm.to_vec(), order: d })
    }
}

/// A permutation of darts commuting with `sigma0` and `sigma1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapAutomorphism {
    perm: Vec<usize>,
    order: usize,
}

impl MapAutomorphism {
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }
    pub fn order(&self) -> usize {
        self.order
    }
    pub fn apply(&self, e: usize) -> usize {
        self.perm[e]
    }
    pub fn pow(&self, k: usize) -> Vec<usize> {
        perm_pow(&self.perm, k % self.order.max(1))
    }
    /// Orbit of a dart, `[e, T e, T² e, …]`.
    pub fn orbit(&self, e: usize) -> Vec<usize> {
        let mut out = vec![e];
        let mut x = self.perm[e];
        while x != e {
            out.push(x);
            x = self.perm[x];
        }
        out
    }
}

/// Undirected multigraph; links may be loops or parallel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub nodes: usize,
    pub links: Vec<(usize, usize)>,
    /// For dual graphs, the canonical dart crossed by each link.
    pub link_dart: Vec<usize>,
}

/// A simple cycle: `links[i]` joins `nodes[i]` to `nodes[i+1]` (cyclically).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleCycle {
    pub nodes: Vec<usize>,
    pub links: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleEnumeration {
    pub cycles: Vec<SimpleCycle>,
    pub truncated: bool,
}

pub const DEFAULT_MAX_CYCLES: usize = 1_000_000;

impl Graph {
    pub fn degree(&self, v: usize) -> usize {
        self.links.iter().map(|&(a, b)| (a == v) as usize + (b == v) as usize).sum()
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for (l, &(a, b)) in self.links.iter().enumerate() {
            adj[a].push((l, b));
            if a != b {
                adj[b].push((l, a));
            }
        }
        adj
    }

    /// All simple cycles, each reported once. Cycles are rooted at their
    /// smallest node; a traversal direction is fixed by requiring the first
    /// link index to be below the closing one.
    pub fn simple_cycles(&self, max_count: usize) -> CycleEnumeration {
        let adj = self.adjacency();
        let mut out = CycleEnumeration { cycles: Vec::new(), truncated: false };
        for (l, &(a, b)) in self.links.iter().enumerate() {
            if a == b {
                if out.cycles.len() >= max_count {
                    out.truncated = true;
                    return out;
                }
                out.cycles.push(SimpleCycle { nodes: vec![a], links: vec![l] });
            }
        }
        let mut on_path = vec![false; self.nodes];
        for s in 0..self.nodes {
            let mut nodes = vec![s];
            let mut links = Vec::new();
            on_path[s] = true;
            if !self.dfs(&adj, s, s, &mut nodes, &mut links, &mut on_path, max_count, &mut out) {
                return out;
            }
            on_path[s] = false;
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        adj: &[Vec<(usize, usize)>],
        s: usize,
        v: usize,
        nodes: &mut Vec<usize>,
        links: &mut Vec<usize>,
        on_path: &mut [bool],
        max_count: usize,
        out: &mut CycleEnumeration,
    ) -> bool {
        for &(l, w) in &adj[v] {
            if w == v {
                continue;
            }
            if w == s {
                if !links.is_empty() && links[0] < l {
                    if out.cycles.len() >= max_count {
                        out.truncated = true;
                        return false;
                    }
                    let mut ls = links.clone();
                    ls.push(l);
                    out.cycles.push(SimpleCycle { nodes: nodes.clone(), links: ls });
                }
                continue;
            }
            if w < s || on_path[w] {
                continue;
            }
            on_path[w] = true;
            nodes.push(w);
            links.push(l);
            let ok = self.dfs(adj, s, w, nodes, links, on_path, max_count, out);
            nodes.pop();
            links.pop();
            on_path[w] = false;
            if !ok {
                return false;
            }
        }
        true
    }
}
