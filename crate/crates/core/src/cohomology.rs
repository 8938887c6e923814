//! Relative and absolute cohomology of a cover as explicit cochain spaces.
//!
//! A relative cochain is stored as one value per undirected edge (the value
//! on its canonical dart). A chain is an integer vector over the same edges,
//! and evaluation is the dot product.

use std::collections::VecDeque;

use thiserror::Error;

use crate::combmap::CombinatorialMap;
use crate::cyclic_cover::TranslationCover;
use crate::linalg::{self, Matrix, RowBasis};
use crate::scalar::Field;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CohomologyError {
    #[error("{what}: dimension {found}, expected {expected}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    #[error("restriction of the intersection form to H_zeta is degenerate")]
    DegenerateRestriction,
    #[error("symplectic reduction failed: {0}")]
    Symplectic(String),
    #[error("operation requires d >= 2")]
    NeedsCover,
    #[error("cover was not built from a base triangulation")]
    NoBase,
}

/// A linear subspace of `F^ambient` given by a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<S> {
    pub ambient: usize,
    pub basis: Vec<Vec<S>>,
}

impl<S: Clone> Subspace<S> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Integer chain over undirected edges.
pub type Chain = Vec<i64>;

/// Chain of a dart path.
pub fn chain_of_walk(map: &CombinatorialMap, walk: &[usize]) -> Chain {
    let idx = map.edge_index();
    let mut c = vec![0; map.num_edges()];
    for &x in walk {
        let (e, s) = idx[x];
        c[e] += s as i64;
    }
    c
}

/// Image of a chain under a dart permutation commuting with `σ₀`.
pub fn push_chain(map: &CombinatorialMap, perm: &[usize], c: &[i64]) -> Chain {
    let idx = map.edge_index();
    let mut out = vec![0; c.len()];
    for (i, e) in map.edge_darts().into_iter().enumerate() {
        if c[i] != 0 {
            let (j, s) = idx[perm[e]];
            out[j] += s as i64 * c[i];
        }
    }
    out
}

pub fn eval<F: Field>(f: &F, chain: &[i64], v: &[F::S]) -> F::S {
    let mut s = f.zero();
    for (c, x) in chain.iter().zip(v) {
        if *c != 0 {
            s = f.add(&s, &f.mul_i64(x, *c));
        }
    }
    s
}

/// Value of cochain `v` on a single dart.
pub fn dart_value<F: Field>(f: &F, map: &CombinatorialMap, v: &[F::S], x: usize) -> F::S {
    let (e, s) = map.edge_index()[x];
    if s > 0 {
        v[e].clone()
    } else {
        f.neg(&v[e])
    }
}

/// One row per face: the sum of the cochain over its three sides.
pub fn face_rows<F: Field>(f: &F, map: &CombinatorialMap) -> Matrix<F::S> {
    let idx = map.edge_index();
    map.faces()
        .iter()
        .map(|t| {
            let mut row = vec![f.zero(); map.num_edges()];
            for &x in t {
                let (e, s) = idx[x];
                row[e] = f.add(&row[e], &f.from_i64(s as i64));
            }
            row
        })
        .collect()
}

/// `V₁`: cochains summing to zero on every face, i.e. `H¹(M̂, Σ̂)`.
pub fn relative_cocycles<F: Field>(f: &F, map: &CombinatorialMap) -> Subspace<F::S> {
    let rows = face_rows(f, map);
    Subspace { ambient: map.num_edges(), basis: linalg::kernel(f, &rows, map.num_edges()) }
}

/// Rows `v(T e) − ζ·v(e)` for every undirected edge `e`.
pub fn deck_rows<F: Field>(f: &F, cover: &TranslationCover) -> Matrix<F::S> {
    let map = cover.map();
    let idx = map.edge_index();
    let zeta = f.root(cover.zeta_index());
    map.edge_darts()
        .into_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut row = vec![f.zero(); map.num_edges()];
            let (j, s) = idx[cover.deck().apply(x)];
            row[j] = f.from_i64(s as i64);
            row[i] = f.sub(&row[i], &zeta);
            row
        })
        .collect()
}

/// Expected `dim V`: `2g + n − 1` for `d = 1`, `2g + n − 2` otherwise.
pub fn expected_dim(cover: &TranslationCover) -> usize {
    let (g, n) = (cover.base_genus(), cover.base_orders().len());
    if cover.d() == 1 {
        2 * g + n - 1
    } else {
        2 * g + n - 2
    }
}

/// `V = V₁ ∩ ker(T* − ζ)` from the full stacked system on the cover.
pub fn eigenspace_v<F: Field>(f: &F, cover: &TranslationCover) -> Result<Subspace<F::S>, CohomologyError> {
    let map = cover.map();
    let mut rows = face_rows(f, map);
    if cover.d() > 1 {
        rows.extend(deck_rows(f, cover));
    }
    let basis = linalg::kernel(f, &rows, map.num_edges());
    check_dim("V", expected_dim(cover), basis.len())?;
    Ok(Subspace { ambient: map.num_edges(), basis })
}

fn check_dim(what: &'static str, expected: usize, found: usize) -> Result<(), CohomologyError> {
    if expected != found {
        return Err(CohomologyError::DimensionMismatch { what, expected, found });
    }
    Ok(())
}

/// For each dart `x`: `(orbit, j, sign)` with `x = T^j(rep)` (sign +1) or
/// `x = σ₀T^j(rep)` (sign −1), `rep` the smallest dart of the orbit.
fn dart_orbits(cover: &TranslationCover) -> (Vec<usize>, Vec<(usize, i64, i64)>) {
    let map = cover.map();
    let n = map.num_darts();
    let mut info = vec![(usize::MAX, 0, 0); n];
    let mut reps = Vec::new();
    for x in 0..n {
        if info[x].0 != usize::MAX {
            continue;
        }
        let o = reps.len();
        reps.push(x);
        let mut y = x;
        for j in 0..cover.d() as i64 {
            info[y] = (o, j, 1);
            info[map.opp(y)] = (o, j, -1);
            y = cover.deck().apply(y);
        }
    }
    (reps, info)
}

/// `V` computed on `T`-orbit representatives: one unknown per orbit of
/// undirected edges and one face relation per orbit of faces.
pub fn eigenspace_v_reduced<F: Field>(f: &F, cover: &TranslationCover) -> Result<Subspace<F::S>, CohomologyError> {
    let map = cover.map();
    let (reps, info) = dart_orbits(cover);
    let pow = |j: i64| f.root(cover.zeta_index() * j);
    let mut face_seen = vec![false; map.num_faces()];
    let mut rows = Vec::new();
    for (fi, t) in map.faces().iter().enumerate() {
        if face_seen[fi] {
            continue;
        }
        let mut x = t[0];
        for _ in 0..cover.d() {
            face_seen[map.face_of(x)] = true;
            x = cover.deck().apply(x);
        }
        let mut row = vec![f.zero(); reps.len()];
        for &x in t {
            let (o, j, s) = info[x];
            let c = f.mul_i64(&pow(j), s);
            row[o] = f.add(&row[o], &c);
        }
        rows.push(row);
    }
    let small = linalg::kernel(f, &rows, reps.len());
    check_dim("V", expected_dim(cover), small.len())?;
    let basis = small
        .iter()
        .map(|u| {
            map.edge_darts()
                .into_iter()
                .map(|x| {
                    let (o, j, s) = info[x];
                    f.mul_i64(&f.mul(&pow(j), &u[o]), s)
                })
                .collect()
        })
        .collect();
    Ok(Subspace { ambient: map.num_edges(), basis })
}

/// Closed walk with backtracks removed, also cyclically.
pub fn reduce_walk(map: &CombinatorialMap, walk: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(walk.len());
    for &x in walk {
        if out.last().is_some_and(|&y| map.opp(y) == x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    let (mut i, mut j) = (0, out.len());
    while j > i + 1 && map.opp(out[i]) == out[j - 1] {
        i += 1;
        j -= 1;
    }
    out[i..j].to_vec()
}

/// Poincaré dual of a closed walk: the walk pushed off to its left crosses
/// the darts swept counterclockwise from the outgoing dart to the reversed
/// incoming dart at every corner. `⟨γ, δ⟩ = pd(γ)·chain(δ)`.
pub fn poincare_dual(map: &CombinatorialMap, walk: &[usize]) -> Vec<i64> {
    let idx = map.edge_index();
    let mut c = vec![0; map.num_edges()];
    let m = walk.len();
    for i in 0..m {
        let d_in = walk[i];
        let d_out = walk[(i + 1) % m];
        let stop = map.opp(d_in);
        let mut x = map.sigma1()[d_out];
        while x != stop && x != d_out {
            let (e, s) = idx[x];
            c[e] += s as i64;
            x = map.sigma1()[x];
        }
    }
    c
}

/// Tree–cotree fundamental cycles: `2ĝ` reduced closed walks.
pub fn fundamental_cycles(map: &CombinatorialMap) -> Vec<Vec<usize>> {
    let nv = map.num_vertices();
    let mut parent = vec![usize::MAX; nv];
    let mut seen = vec![false; nv];
    let mut in_tree = vec![false; map.num_darts()];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for &x in &map.vertices()[v] {
            let w = map.target(x);
            if !seen[w] {
                seen[w] = true;
                parent[w] = x;
                in_tree[x] = true;
                in_tree[map.opp(x)] = true;
                queue.push_back(w);
            }
        }
    }
    let nf = map.num_faces();
    let mut fseen = vec![false; nf];
    let mut in_cotree = vec![false; map.num_darts()];
    fseen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(fc) = queue.pop_front() {
        for &x in &map.faces()[fc] {
            if in_tree[x] {
                continue;
            }
            let g = map.face_of(map.opp(x));
            if !fseen[g] {
                fseen[g] = true;
                in_cotree[x] = true;
                in_cotree[map.opp(x)] = true;
                queue.push_back(g);
            }
        }
    }
    let up = |mut v: usize| {
        let mut p = Vec::new();
        while v != 0 {
            let x = parent[v];
            p.push(map.opp(x));
            v = map.origin(x);
        }
        p
    };
    map.edge_darts()
        .into_iter()
        .filter(|&x| !in_tree[x] && !in_cotree[x])
        .map(|x| {
            let mut w: Vec<usize> = up(map.origin(x)).iter().rev().map(|&y| map.opp(y)).collect();
            w.push(x);
            w.extend(up(map.target(x)));
            reduce_walk(map, &w)
        })
        .collect()
}

/// Relative path `cᵢ` of the kernel construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativePath {
    /// Base vertex `sᵢ`.
    pub base_vertex: usize,
    /// Cover vertex `ŝᵢ` the path starts from.
    pub start: usize,
    pub end: usize,
    pub walk: Vec<usize>,
    pub chain: Chain,
}

/// Symplectic basis of `H₁(M̂, ℤ)` and relative paths.
#[derive(Debug, Clone, PartialEq)]
pub struct HomologyBasis {
    /// `a₁..a_ĝ, b₁..b_ĝ` as chains.
    pub cycles: Vec<Chain>,
    /// Poincaré duals of `cycles`, so `⟨cycles[i], c⟩ = pd[i]·c`.
    pub pd: Vec<Vec<i64>>,
    pub genus: usize,
    pub paths: Vec<RelativePath>,
}

impl HomologyBasis {
    pub fn a(&self, j: usize) -> &Chain {
        &self.cycles[j]
    }
    pub fn b(&self, j: usize) -> &Chain {
        &self.cycles[self.genus + j]
    }
    /// Intersection matrix of `cycles`; equals the standard `J`.
    pub fn gram(&self) -> Vec<Vec<i64>> {
        self.pd
            .iter()
            .map(|p| self.cycles.iter().map(|c| p.iter().zip(c).map(|(x, y)| x * y).sum()).collect())
            .collect()
    }
    pub fn intersection(&self, i: usize, c: &[i64]) -> i64 {
        self.pd[i].iter().zip(c).map(|(x, y)| x * y).sum()
    }
    /// Coordinates of an absolute cycle in the basis: `c = Σ xⱼaⱼ + yⱼbⱼ`.
    pub fn coordinates(&self, c: &[i64]) -> Vec<i64> {
        let g = self.genus;
        let mut out = vec![0; 2 * g];
        for j in 0..g {
            // ⟨c, bⱼ⟩ = xⱼ, ⟨c, aⱼ⟩ = −yⱼ; ⟨c, x⟩ = −pd(x)·c
            out[j] = -self.intersection(g + j, c);
            out[g + j] = self.intersection(j, c);
        }
        out
    }
}

/// The standard symplectic matrix `[[0, I], [−I, 0]]`.
pub fn standard_j(g: usize) -> Vec<Vec<i64>> {
    let mut j = vec![vec![0; 2 * g]; 2 * g];
    for i in 0..g {
        j[i][g + i] = 1;
        j[g + i][i] = -1;
    }
    j
}

/// Integral symplectic reduction of vectors with Gram matrix `omega`
/// (antisymmetric, unimodular). Returns coefficient rows of `a₁..a_g, b₁..b_g`.
pub fn symplectic_reduce(omega: &[Vec<i64>]) -> Result<Vec<Vec<i128>>, CohomologyError> {
    let m = omega.len();
    let form = |u: &[i128], w: &[i128]| -> i128 {
        let mut s = 0;
        for i in 0..m {
            if u[i] == 0 {
                continue;
            }
            for j in 0..m {
                if w[j] != 0 && omega[i][j] != 0 {
                    s += u[i] * omega[i][j] as i128 * w[j];
                }
            }
        }
        s
    };
    let mut pool: Vec<Vec<i128>> = (0..m).map(|i| (0..m).map(|j| (i == j) as i128).collect()).collect();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    while !pool.is_empty() {
        let x = pool.remove(0);
        loop {
            let vals: Vec<i128> = pool.iter().map(|z| form(&x, z)).collect();
            let Some(p) = (0..pool.len()).filter(|&i| vals[i] != 0).min_by_key(|&i| vals[i].abs()) else {
                return Err(CohomologyError::Symplectic("form is degenerate".into()));
            };
            let pv = vals[p];
            let mut changed = false;
            for i in 0..pool.len() {
                if i == p || vals[i] == 0 {
                    continue;
                }
                let q = vals[i].div_euclid(pv);
                if q != 0 {
                    let y = pool[p].clone();
                    for (zi, yi) in pool[i].iter_mut().zip(&y) {
                        *zi -= q * yi;
                    }
                    changed = true;
                }
            }
            if !changed {
                if pv.abs() != 1 {
                    return Err(CohomologyError::Symplectic(format!("form is not unimodular ({pv})")));
                }
                if vals.iter().enumerate().any(|(i, &v)| i != p && v != 0) {
                    continue;
                }
                let mut y = pool.remove(p);
                if pv < 0 {
                    y.iter_mut().for_each(|t| *t = -*t);
                }
                let rest: Vec<Vec<i128>> = pool
                    .drain(..)
                    .map(|z| {
                        let (bz, az) = (form(&y, &z), form(&x, &z));
                        z.iter().zip(&x).zip(&y).map(|((zi, xi), yi)| zi + bz * xi - az * yi).collect()
                    })
                    .collect();
                pool = rest;
                a.push(x);
                b.push(y);
                break;
            }
        }
    }
    a.extend(b);
    Ok(a)
}

fn bfs_path(map: &CombinatorialMap, from: usize, to: usize) -> Vec<usize> {
    let nv = map.num_vertices();
    let mut via = vec![usize::MAX; nv];
    let mut seen = vec![false; nv];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for &x in &map.vertices()[v] {
            let w = map.target(x);
            if !seen[w] {
                seen[w] = true;
                via[w] = x;
                queue.push_back(w);
            }
        }
    }
    let mut path = Vec::new();
    let mut v = to;
    while v != from {
        let x = via[v];
        path.push(x);
        v = map.origin(x);
    }
    path.reverse();
    path
}

/// Cover vertex reached from vertex `v` by the deck map.
pub fn deck_vertex(cover: &TranslationCover, v: usize) -> usize {
    let map = cover.map();
    map.origin(cover.deck().apply(map.vertices()[v][0]))
}

/// Relative paths: for `d ≥ 2`, `ŝᵢ → T(ŝᵢ)` for the base vertices with
/// `kᵢ ≡ 0 mod d`, `ŝᵢ` the smallest vertex of the fiber; for `d = 1`,
/// `sᵢ → s_n` for `i < n`.
pub fn relative_paths(cover: &TranslationCover) -> Vec<RelativePath> {
    let map = cover.map();
    let d = cover.d() as i64;
    let mut out = Vec::new();
    if d == 1 {
        let last = map.num_vertices() - 1;
        for v in 0..last {
            let walk = bfs_path(map, v, last);
            let chain = chain_of_walk(map, &walk);
            out.push(RelativePath { base_vertex: cover.vertex_base()[v], start: v, end: last, walk, chain });
        }
        return out;
    }
    for (i, &k) in cover.base_orders().iter().enumerate() {
        if k.rem_euclid(d) != 0 {
            continue;
        }
        let start = (0..map.num_vertices()).find(|&v| cover.vertex_base()[v] == i).expect("fiber is nonempty");
        let end = deck_vertex(cover, start);
        let walk = bfs_path(map, start, end);
        let chain = chain_of_walk(map, &walk);
        out.push(RelativePath { base_vertex: i, start, end, walk, chain });
    }
    out
}

pub fn symplectic_basis(cover: &TranslationCover) -> Result<HomologyBasis, CohomologyError> {
    let map = cover.map();
    let walks = fundamental_cycles(map);
    let g = map.genus();
    check_dim("fundamental cycles", 2 * g, walks.len())?;
    let chains: Vec<Chain> = walks.iter().map(|w| chain_of_walk(map, w)).collect();
    let pds: Vec<Vec<i64>> = walks.iter().map(|w| poincare_dual(map, w)).collect();
    let omega: Vec<Vec<i64>> = pds
        .iter()
        .map(|p| chains.iter().map(|c| p.iter().zip(c).map(|(x, y)| x * y).sum()).collect())
        .collect();
    for i in 0..omega.len() {
        for j in 0..omega.len() {
            if omega[i][j] != -omega[j][i] {
                return Err(CohomologyError::Symplectic(format!("intersection not antisymmetric at ({i},{j})")));
            }
        }
    }
    let coeffs = symplectic_reduce(&omega)?;
    let combine = |rows: &[Vec<i64>], co: &[i128]| -> Vec<i64> {
        let mut out = vec![0i128; map.num_edges()];
        for (r, &c) in rows.iter().zip(co) {
            if c != 0 {
                for (o, &x) in out.iter_mut().zip(r) {
                    *o += c * x as i128;
                }
            }
        }
        out.into_iter().map(|x| i64::try_from(x).expect("chain coefficient overflow")).collect()
    };
    let cycles = coeffs.iter().map(|c| combine(&chains, c)).collect();
    let pd = coeffs.iter().map(|c| combine(&pds, c)).collect();
    let basis = HomologyBasis { cycles, pd, genus: g, paths: relative_paths(cover) };
    if basis.gram() != standard_j(g) {
        return Err(CohomologyError::Symplectic("reduced basis is not symplectic".into()));
    }
    Ok(basis)
}

/// Matrix with one row per functional (chain) and one column per basis
/// vector of `sub`.
pub fn evaluation_matrix<F: Field>(f: &F, chains: &[Chain], sub: &Subspace<F::S>) -> Matrix<F::S> {
    chains.iter().map(|c| sub.basis.iter().map(|v| eval(f, c, v)).collect()).collect()
}

/// The normalized kernel basis `η₁..η_r` of `ker p ∩ V`, `ηⱼ(cᵢ) = δᵢⱼ`.
pub fn kernel_basis<F: Field>(f: &F, cover: &TranslationCover, paths: &[RelativePath]) -> Vec<Vec<F::S>> {
    let map = cover.map();
    let d = cover.d();
    paths
        .iter()
        .map(|p| {
            let mut val = vec![f.zero(); map.num_vertices()];
            if d == 1 {
                val[p.start] = f.from_i64(-1);
            } else {
                let mut v = p.start;
                let scale = f.inv(&f.sub(&f.root(cover.zeta_index()), &f.one()));
                for j in 0..d as i64 {
                    val[v] = f.mul(&f.root(cover.zeta_index() * j), &scale);
                    v = deck_vertex(cover, v);
                }
            }
            map.edge_darts()
                .into_iter()
                .map(|x| f.sub(&val[map.target(x)], &val[map.origin(x)]))
                .collect()
        })
        .collect()
}

/// `p` restricted to `V`: evaluation on the absolute basis, its rank `K`
/// and `dim ker p ∩ V = N − K`.
pub struct Projection<S> {
    pub matrix: Matrix<S>,
    pub rank: usize,
    pub kernel_dim: usize,
}

/// Magnitude of the periods of `sub` on `basis`, for zero tests.
fn period_scale<F: Field>(f: &F, basis: &HomologyBasis, sub: &Subspace<F::S>) -> f64 {
    let weight = basis.cycles.iter().map(|c| c.iter().map(|x| x.unsigned_abs()).sum::<u64>()).max().unwrap_or(0);
    linalg::scale_of(f, &sub.basis) * weight.max(1) as f64
}

pub fn project_p<F: Field>(f: &F, basis: &HomologyBasis, sub: &Subspace<F::S>) -> Projection<F::S> {
    let matrix = evaluation_matrix(f, &basis.cycles, sub);
    let rank = linalg::rank_at(f, &matrix, sub.dim(), period_scale(f, basis, sub));
    Projection { matrix, rank, kernel_dim: sub.dim() - rank }
}

/// `ω(η, μ) = Σⱼ (η(aⱼ)·conj μ(bⱼ) − η(bⱼ)·conj μ(aⱼ))` for cochains given by
/// their absolute periods. The intersection form is `(i/2)·ω`.
pub fn skew_pairing<F: Field>(f: &F, g: usize, x: &[F::S], y: &[F::S]) -> F::S {
    let mut s = f.zero();
    for j in 0..g {
        let t1 = f.mul(&x[j], &f.conj(&y[g + j]));
        let t2 = f.mul(&x[g + j], &f.conj(&y[j]));
        s = f.add(&s, &f.sub(&t1, &t2));
    }
    s
}

/// Gram matrix of the Hermitian form `(i/2)·ω` on the columns of `periods`
/// (`2ĝ × m`).
pub fn hermitian_gram<F: Field>(f: &F, g: usize, periods: &Matrix<F::S>) -> Vec<Vec<num_complex::Complex64>> {
    let m = periods.first().map_or(0, |r| r.len());
    let cols = linalg::transpose(periods, m);
    let half_i = num_complex::Complex64::new(0.0, 0.5);
    cols.iter().map(|x| cols.iter().map(|y| half_i * f.to_c64(&skew_pairing(f, g, x, y))).collect()).collect()
}

/// Signature `(positive, negative, zero)` of a Hermitian matrix given in
/// floating point.
pub fn signature(m: &[Vec<num_complex::Complex64>], tol: f64) -> (usize, usize, usize) {
    let n = m.len();
    if n == 0 {
        return (0, 0, 0);
    }
    let h = nalgebra::DMatrix::from_fn(n, n, |i, j| (m[i][j] + m[j][i].conj()) * 0.5);
    let eig = nalgebra::linalg::SymmetricEigen::new(h).eigenvalues;
    let scale = eig.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
    let pos = eig.iter().filter(|&&x| x > tol * scale).count();
    let neg = eig.iter().filter(|&&x| x < -tol * scale).count();
    (pos, neg, n - pos - neg)
}

/// The intersection form on the cover and on `H_ζ = p(V)`.
#[derive(Debug, Clone)]
pub struct IntersectionReport<S> {
    pub genus: usize,
    /// Signature on `H¹(M̂)`, as `(positive, negative, zero)`.
    pub full: (usize, usize, usize),
    pub h_dim: usize,
    /// Determinant of `ω` on a basis of `H_ζ`.
    pub h_det: S,
    pub h_signature: (usize, usize, usize),
    pub nondegenerate: bool,
}

pub fn intersection_report<F: Field>(
    f: &F,
    cover: &TranslationCover,
    basis: &HomologyBasis,
    v: &Subspace<F::S>,
    tol: f64,
) -> IntersectionReport<F::S> {
    let g = basis.genus;
    let v1 = relative_cocycles(f, cover.map());
    let full = signature(&hermitian_gram(f, g, &evaluation_matrix(f, &basis.cycles, &v1)), tol);
    let p = evaluation_matrix(f, &basis.cycles, v);
    let cols = linalg::transpose(&p, v.dim());
    let keep = linalg::independent_rows_at(f, &cols, 2 * g, period_scale(f, basis, v));
    let h: Matrix<F::S> = keep.iter().map(|&i| cols[i].clone()).collect();
    let omega: Matrix<F::S> = h.iter().map(|x| h.iter().map(|y| skew_pairing(f, g, x, y)).collect()).collect();
    let h_det = linalg::det(f, &omega);
    let nondegenerate = if f.is_exact() { !f.is_zero(&h_det, 1.0) } else { f.magnitude(&h_det) > 1e-8 };
    let ht = linalg::transpose(&h, 2 * g);
    let h_signature = signature(&hermitian_gram(f, g, &ht), tol);
    IntersectionReport { genus: g, full, h_dim: h.len(), h_det, h_signature, nondegenerate }
}

/// Boundary relation of a fundamental domain: the lift of a disc cut from
/// the base along the edges `E₀` dual to the complement of a spanning tree.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscRelation {
    /// Cover darts `e₁..e_m` (one per cut edge) and shifts `rᵢ`.
    pub darts: Vec<usize>,
    pub shifts: Vec<i64>,
}

impl DiscRelation {
    pub fn cut_edges(&self) -> usize {
        self.darts.len()
    }
    pub fn nontrivial(&self, d: usize) -> bool {
        self.shifts.iter().any(|r| r.rem_euclid(d as i64) != 0)
    }
    /// `Σ (1 − ζ^{rᵢ})·v(eᵢ)`.
    pub fn residual<F: Field>(&self, f: &F, cover: &TranslationCover, v: &[F::S]) -> F::S {
        let mut s = f.zero();
        for (&x, &r) in self.darts.iter().zip(&self.shifts) {
            let c = f.sub(&f.one(), &f.root(cover.zeta_index() * r));
            s = f.add(&s, &f.mul(&c, &dart_value(f, cover.map(), v, x)));
        }
        s
    }
}

pub fn disc_relation(cover: &TranslationCover) -> Result<DiscRelation, CohomologyError> {
    let d = cover.d();
    if d < 2 {
        return Err(CohomologyError::NeedsCover);
    }
    let bd = cover.base_dart().ok_or(CohomologyError::NoBase)?;
    let map = cover.map();
    let n = bd.len() / d;
    let sheet = |x: usize| (x / n) as i64;
    // lift a spanning tree of base faces through the cover's own gluing
    let nf = map.num_faces() / d;
    let base_face = |x: usize| map.face_of(x) % nf;
    let mut lifted = vec![usize::MAX; nf];
    let mut tree_dart = vec![false; n];
    lifted[0] = map.face_of(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(fb) = queue.pop_front() {
        for &x in &map.faces()[lifted[fb]] {
            let y = map.opp(x);
            let gb = base_face(y);
            if lifted[gb] == usize::MAX {
                lifted[gb] = map.face_of(y);
                tree_dart[bd[x]] = true;
                tree_dart[bd[y]] = true;
                queue.push_back(gb);
            }
        }
    }
    let dom: Vec<usize> = (0..nf).map(|fb| sheet(map.faces()[lifted[fb]][0]) as usize).collect();
    let mut darts = Vec::new();
    let mut shifts = Vec::new();
    for e in 0..n {
        let eb = bd[map.opp(e)];
        if tree_dart[e] || e > eb {
            continue;
        }
        let fe = base_face(e);
        let fo = base_face(eb);
        let x = dom[fe] * n + e;
        let y = dom[fo] * n + eb;
        // y = σ₀(T^r x)
        let r = (0..d as i64)
            .find(|&r| map.opp(cover.deck().pow(r as usize)[x]) == y)
            .ok_or_else(|| CohomologyError::Symplectic("boundary darts are not paired".into()))?;
        darts.push(x);
        shifts.push(r);
    }
    Ok(DiscRelation { darts, shifts })
}

/// Matrix of `T` acting on `H₁(M̂, ℤ)` in the symplectic basis (columns are
/// images of basis cycles).
pub fn deck_on_homology(cover: &TranslationCover, basis: &HomologyBasis) -> Vec<Vec<i64>> {
    let cols: Vec<Vec<i64>> = basis
        .cycles
        .iter()
        .map(|c| basis.coordinates(&push_chain(cover.map(), cover.deck().perm(), c)))
        .collect();
    linalg_int_transpose(&cols)
}

fn linalg_int_transpose(a: &[Vec<i64>]) -> Vec<Vec<i64>> {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// Incremental independence over a field, re-exported for callers that pick
/// coordinate subsets.
pub fn row_basis<F: Field>(f: &F, ncols: usize) -> RowBasis<F> {
    RowBasis::new(f.clone(), ncols, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic_cover::build_cover;
    use crate::fixtures;
    use crate::scalar::ExactField;

    fn span_eq<F: Field>(f: &F, a: &Subspace<F::S>, b: &Subspace<F::S>) -> bool {
        let mut all = a.basis.clone();
        all.extend(b.basis.iter().cloned());
        let r = linalg::rank(f, &all, a.ambient);
        r == a.dim() && r == b.dim()
    }

    #[test]
    fn torus_horizontal_meets_vertical_positively() {
        let s = fixtures::square_torus();
        let m = s.map();
        // one vertex: darts 0 (u) and 1 (v) are closed loops
        let h = poincare_dual(m, &[0]);
        let v = chain_of_walk(m, &[1]);
        assert_eq!(h.iter().zip(&v).map(|(x, y)| x * y).sum::<i64>(), 1);
        let cover = build_cover(&s, 1).unwrap();
        let b = symplectic_basis(&cover).unwrap();
        assert_eq!(b.gram(), standard_j(1));
    }

    #[test]
    fn symplectic_basis_on_seeds() {
        for s in fixtures::geometric_seeds() {
            let cover = build_cover(&s, 1).unwrap();
            let b = symplectic_basis(&cover).unwrap();
            assert_eq!(b.cycles.len(), 2 * cover.genus());
            for (i, c) in b.cycles.iter().enumerate() {
                let mut e = vec![0; 2 * b.genus];
                e[i] = 1;
                assert_eq!(b.coordinates(c), e);
            }
        }
    }

    #[test]
    fn pillowcase_dimensions() {
        let cover = build_cover(&fixtures::pillowcase(), 1).unwrap();
        let f = ExactField::new(2).unwrap();
        assert_eq!(relative_cocycles(&f, cover.map()).dim(), 5);
        let v = eigenspace_v(&f, &cover).unwrap();
        let w = eigenspace_v_reduced(&f, &cover).unwrap();
        assert_eq!(v.dim(), 2);
        assert!(span_eq(&f, &v, &w));
    }

    #[test]
    fn direct_and_reduced_agree_on_seeds() {
        for s in fixtures::geometric_seeds() {
            let f = ExactField::new(s.d()).unwrap();
            let cover = build_cover(&s, 1).unwrap();
            let v = eigenspace_v(&f, &cover).unwrap();
            let w = eigenspace_v_reduced(&f, &cover).unwrap();
            assert!(span_eq(&f, &v, &w), "d = {}", s.d());
        }
    }

    #[test]
    fn kernel_basis_is_dual_to_paths() {
        for s in fixtures::geometric_seeds() {
            let f = ExactField::new(s.d()).unwrap();
            let cover = build_cover(&s, 1).unwrap();
            let v = eigenspace_v(&f, &cover).unwrap();
            let b = symplectic_basis(&cover).unwrap();
            let eta = kernel_basis(&f, &cover, &b.paths);
            let expected = if s.d() == 1 { s.kappa().len() - 1 } else { cover.r() };
            assert_eq!(eta.len(), expected);
            let rows = face_rows(&f, cover.map());
            for (i, e) in eta.iter().enumerate() {
                for r in &rows {
                    assert_eq!(linalg::dot(&f, r, e), f.zero());
                }
                let mut both = v.basis.clone();
                both.push(e.clone());
                assert_eq!(linalg::rank(&f, &both, v.ambient), v.dim());
                for c in &b.cycles {
                    assert_eq!(eval(&f, c, e), f.zero());
                }
                for (j, p) in b.paths.iter().enumerate() {
                    assert_eq!(eval(&f, &p.chain, e), f.from_i64((i == j) as i64));
                }
            }
            let proj = project_p(&f, &b, &v);
            assert_eq!(proj.kernel_dim, eta.len());
        }
    }

    #[test]
    fn disc_relation_holds() {
        for s in fixtures::geometric_seeds().into_iter().filter(|s| s.d() > 1) {
            let f = ExactField::new(s.d()).unwrap();
            let cover = build_cover(&s, 1).unwrap();
            let rel = disc_relation(&cover).unwrap();
            assert_eq!(rel.cut_edges(), 2 * s.genus() + s.kappa().len() - 1);
            assert!(rel.nontrivial(s.d()));
            for v in &eigenspace_v(&f, &cover).unwrap().basis {
                assert_eq!(rel.residual(&f, &cover, v), f.zero());
            }
        }
        let cover = build_cover(&fixtures::square_torus(), 1).unwrap();
        assert_eq!(disc_relation(&cover), Err(CohomologyError::NeedsCover));
    }

    #[test]
    fn deck_action_is_symplectic_of_order_d() {
        for s in fixtures::geometric_seeds() {
            let cover = build_cover(&s, 1).unwrap();
            let b = symplectic_basis(&cover).unwrap();
            let t = deck_on_homology(&cover, &b);
            let n = t.len();
            let mul = |a: &[Vec<i64>], c: &[Vec<i64>]| -> Vec<Vec<i64>> {
                (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * c[k][j]).sum()).collect()).collect()
            };
            let mut p: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
            let id = p.clone();
            for _ in 0..s.d() {
                p = mul(&p, &t);
            }
            assert_eq!(p, id);
            let tt: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| t[j][i]).collect()).collect();
            assert_eq!(mul(&mul(&tt, &standard_j(b.genus)), &t), standard_j(b.genus));
        }
    }

    #[test]
    fn intersection_reports_on_seeds() {
        for s in fixtures::geometric_seeds() {
            let cover = build_cover(&s, 1).unwrap();
            let f = ExactField::new(s.d()).unwrap();
            let b = symplectic_basis(&cover).unwrap();
            let v = eigenspace_v(&f, &cover).unwrap();
            let rep = intersection_report(&f, &cover, &b, &v, 1e-9);
            let g = cover.genus();
            assert_eq!(rep.full, (g, g, cover.num_vertices() - 1));
            assert!(rep.nondegenerate);
            assert_eq!(rep.h_dim, v.dim() + (s.d() == 1) as usize - cover.r());
            let (p, q, z) = rep.h_signature;
            assert_eq!((p + q, z), (rep.h_dim, 0));
        }
    }

    #[test]
    fn pillowcase_relative_signature() {
        let cover = build_cover(&fixtures::pillowcase(), 1).unwrap();
        let f = ExactField::new(2).unwrap();
        let b = symplectic_basis(&cover).unwrap();
        let v1 = relative_cocycles(&f, cover.map());
        let p = evaluation_matrix(&f, &b.cycles, &v1);
        assert_eq!(signature(&hermitian_gram(&f, b.genus, &p), 1e-9), (1, 1, 3));
    }
}
