//! The canonical volume form on `V` as a density against a declared basis,
//! and its comparison with the lattice (Masur–Veech) normalization.
//!
//! With `K = N − r` coordinates `q` given by independent absolute cycles and
//! the relative paths `c`, the density against the basis is
//!
//! ```text
//!   2^K · |det ϑ| · |det L|² / |1 − ζ|^{2r},    ϑ = ¼ · Rᵀ J R̄,
//! ```
//!
//! where `R` expresses all absolute periods in terms of `q` and `L` is the
//! matrix of `(q, c)` on the basis. For `d = 1` the paths run from each
//! marked point to the last one and there is no `|1 − ζ|` factor.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

use crate::cohomology::{self, Chain, CohomologyError, HomologyBasis, Subspace};
use crate::cyclic_cover::TranslationCover;
use crate::linalg::{self, Matrix};
use crate::scalar::{one_minus_zeta_sq, Cyc, ExactField, Field};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VolumeError {
    #[error("coordinates do not form a basis of V ({0})")]
    RankDeficiency(String),
    #[error("no lattice normalization for d = {0}")]
    UnsupportedD(usize),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
}

/// Cycles and paths entering the volume form.
#[derive(Debug, Clone, PartialEq)]
pub struct Choices {
    pub genus: usize,
    /// Symplectic basis `a₁..a_g, b₁..b_g`.
    pub cycles: Vec<Chain>,
    pub paths: Vec<Chain>,
}

impl From<&HomologyBasis> for Choices {
    fn from(b: &HomologyBasis) -> Self {
        Self { genus: b.genus, cycles: b.cycles.clone(), paths: b.paths.iter().map(|p| p.chain.clone()).collect() }
    }
}

impl Choices {
    pub fn of_cover(cover: &TranslationCover) -> Result<Self, CohomologyError> {
        Ok(Self::from(&cohomology::symplectic_basis(cover)?))
    }
}

/// Density of the canonical form against a declared basis of `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeDensity {
    pub value: f64,
    /// `value²`, exact in exact arithmetic.
    pub value_sq: Option<BigRational>,
    pub d: usize,
    pub zeta_index: i64,
    pub n: usize,
    pub r: usize,
    pub k: usize,
    pub det_theta: Complex64,
    pub det_theta_text: String,
    /// `|det L|²`.
    pub det_l_sq: f64,
    pub det_l_sq_exact: Option<BigRational>,
}

/// Intermediate matrices of the density computation.
pub struct ThetaParts<S> {
    /// `K × K` matrix `ϑ` in the `q` coordinates.
    pub theta: Matrix<S>,
    /// `N × N` matrix of `(q, c)` on the basis.
    pub l: Matrix<S>,
    /// Indices of the cycles used as `q`.
    pub rows: Vec<usize>,
}

pub fn theta_parts<F: Field>(f: &F, v: &Subspace<F::S>, ch: &Choices) -> Result<ThetaParts<F::S>, VolumeError> {
    let n = v.dim();
    let p = cohomology::evaluation_matrix(f, &ch.cycles, v);
    let k = n
        .checked_sub(ch.paths.len())
        .ok_or_else(|| VolumeError::RankDeficiency(format!("{} paths for dim {n}", ch.paths.len())))?;
    let rows = linalg::independent_rows(f, &p, n);
    if rows.len() != k {
        return Err(VolumeError::RankDeficiency(format!("rank of p is {}, expected {k}", rows.len())));
    }
    let sel: Matrix<F::S> = rows.iter().map(|&i| p[i].clone()).collect();
    let cols = linalg::independent_rows(f, &linalg::transpose(&sel, n), k);
    let square: Matrix<F::S> = sel.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect();
    let inv = linalg::inverse(f, &square).ok_or_else(|| VolumeError::RankDeficiency("q is singular".into()))?;
    let pc: Matrix<F::S> = p.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect();
    let r = linalg::matmul(f, &pc, &inv);
    let rc = linalg::transpose(&r, k);
    let quarter = f.from_ratio(1, 4);
    let theta = rc
        .iter()
        .map(|x| rc.iter().map(|y| f.mul(&quarter, &cohomology::skew_pairing(f, ch.genus, x, y))).collect())
        .collect();
    let mut l = sel;
    l.extend(cohomology::evaluation_matrix(f, &ch.paths, v));
    Ok(ThetaParts { theta, l, rows })
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn rat_pow(x: &BigRational, e: usize) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}

fn rat_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn theta_density<F: Field>(
    f: &F,
    cover: &TranslationCover,
    v: &Subspace<F::S>,
    ch: &Choices,
) -> Result<VolumeDensity, VolumeError> {
    let parts = theta_parts(f, v, ch)?;
    let (n, k) = (v.dim(), parts.theta.len());
    let r = if cover.d() == 1 { 0 } else { ch.paths.len() };
    let dt = linalg::det(f, &parts.theta);
    let dl = linalg::det(f, &parts.l);
    let dl_sq = f.to_c64(&dl).norm_sqr();
    if dl_sq == 0.0 || f.is_zero(&dl, 1.0) {
        return Err(VolumeError::RankDeficiency("(q, c) is not a basis of V*".into()));
    }
    let norm = if r > 0 { rat_to_f64(&one_minus_zeta_sq(cover.d(), cover.zeta_index())).powi(r as i32) } else { 1.0 };
    let value = 2f64.powi(k as i32) * f.to_c64(&dt).norm() * dl_sq / norm;
    let exact = match (f.abs_sq_exact(&dt), f.abs_sq_exact(&dl)) {
        (Some(t), Some(l)) => {
            let den = if r > 0 { rat_pow(&one_minus_zeta_sq(cover.d(), cover.zeta_index()), 2 * r) } else { BigRational::one() };
            Some((rat_pow(&rat(4), k) * t * &l * &l / den, l))
        }
        _ => None,
    };
    let (value_sq, det_l_sq_exact) = match exact {
        Some((s, l)) => (Some(s), Some(l)),
        None => (None, None),
    };
    Ok(VolumeDensity {
        value,
        value_sq,
        d: cover.d(),
        zeta_index: cover.zeta_index(),
        n,
        r,
        k,
        det_theta: f.to_c64(&dt),
        det_theta_text: f.render(&dt),
        det_l_sq: dl_sq,
        det_l_sq_exact,
    })
}

/// Equality of two densities: exact when both carry `value²`, otherwise to
/// relative tolerance `rel`.
pub fn densities_agree(a: &VolumeDensity, b: &VolumeDensity, rel: f64) -> bool {
    match (&a.value_sq, &b.value_sq) {
        (Some(x), Some(y)) => x == y,
        _ => (a.value - b.value).abs() <= rel * a.value.abs().max(b.value.abs()),
    }
}

/// Report of [`zeta_independence`]: one density per primitive power.
#[derive(Debug, Clone)]
pub struct ZetaReport {
    pub powers: Vec<usize>,
    pub densities: Vec<VolumeDensity>,
    pub agree: bool,
}

/// Densities on one fixed basis of `V` computed for `T' = T^m` and
/// `ζ' = ζ^m` for every `m` prime to `d`.
pub fn zeta_independence<F: Field>(
    f: &F,
    cover: &TranslationCover,
    v: &Subspace<F::S>,
    rel: f64,
) -> Result<ZetaReport, VolumeError> {
    let d = cover.d();
    let powers: Vec<usize> = (1..d.max(2)).filter(|&m| m.gcd(&d) == 1).collect();
    let mut densities = Vec::new();
    for &m in &powers {
        let c = cover.with_deck_power(m).map_err(|e| VolumeError::RankDeficiency(e.to_string()))?;
        densities.push(theta_density(f, &c, v, &Choices::of_cover(&c)?)?);
    }
    let agree = densities.windows(2).all(|w| densities_agree(&w[0], &w[1], rel));
    Ok(ZetaReport { powers, densities, agree })
}

/// Anti-Hermitian symmetry of `ϑ` and `det ϑ ∈ i^K ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetThetaReport {
    pub k: usize,
    pub det: String,
    pub anti_hermitian: bool,
    pub in_ik_reals: bool,
}

pub fn det_theta_check(f: &ExactField, v: &Subspace<Cyc>, ch: &Choices) -> Result<DetThetaReport, VolumeError> {
    let parts = theta_parts(f, v, ch)?;
    let k = parts.theta.len();
    let th = &parts.theta;
    let anti_hermitian = (0..k).all(|i| (0..k).all(|j| th[j][i] == f.neg(&f.conj(&th[i][j]))));
    let det = linalg::det(f, th);
    let in_ik_reals = if k % 2 == 0 { f.is_real(&det) } else { f.is_imaginary(&det) };
    Ok(DetThetaReport { k, det: f.render(&det), anti_hermitian, in_ik_reals })
}

/// `(η, η) = (i/2)·ω(η, η)` for `η ∈ V`; the area of the cover when `η` is
/// its period cochain.
pub fn area_pairing<F: Field>(f: &F, basis: &HomologyBasis, v: &[F::S]) -> f64 {
    let per: Vec<F::S> = basis.cycles.iter().map(|c| cohomology::eval(f, c, v)).collect();
    let w = f.to_c64(&cohomology::skew_pairing(f, basis.genus, &per, &per));
    (Complex64::new(0.0, 0.5) * w).re
}

/// Mass of the projectivized measure from the mass of the cone
/// `{0 < (η, η) ≤ 1}` over a region.
pub fn projectivized_mass(cone_mass: f64, d: usize) -> f64 {
    cone_mass / d as f64
}

/// Mass of `{0 < (η, η) ≤ t}` from the mass at `t = 1` (`N = dim V`).
pub fn cone_mass_at(cone_mass: f64, t: f64, n: usize) -> f64 {
    cone_mass * t.powi(n as i32)
}

// ---------------------------------------------------------------------------
// Lattice normalization

/// `O`-lattice `Λ = V ∩ O^E` with `O = ℤ[ζ_d]` (`ℤ` coefficients for
/// `d ≤ 2`, complexified to `ℤ[i]`).
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeData {
    /// `O`-basis of `Λ` as cochains.
    pub basis: Subspace<Cyc>,
    /// Index of `Λ` (as a ℤ-lattice) in `O^N` in pivot coordinates.
    pub z_index: BigInt,
    /// Norm of the determinant of the `O`-basis in pivot coordinates.
    pub o_det_norm: BigRational,
}

fn ring_rank(d: usize) -> usize {
    if d <= 2 {
        1
    } else {
        2
    }
}

/// `Λ = V ∩ O^E` by successive integrality conditions on a ℤ-basis in pivot
/// coordinates, then Hermite reduction over `O`.
pub fn lattice(f: &ExactField, v: &Subspace<Cyc>) -> LatticeData {
    let d = f.d();
    let n = v.dim();
    let ech = linalg::rref(f, &v.basis, v.ambient);
    let b = ech.rows;
    let m = ring_rank(d);
    let unit = [f.one(), f.root(1)];
    let mut zb: Vec<Vec<Cyc>> = Vec::new();
    for i in 0..n {
        for u in unit.iter().take(m) {
            let mut x = vec![f.zero(); n];
            x[i] = u.clone();
            zb.push(x);
        }
    }
    let mut index = BigInt::one();
    let image = |x: &[Cyc], e: usize| -> Cyc {
        let mut s = f.zero();
        for (xi, row) in x.iter().zip(&b) {
            s = f.add(&s, &f.mul(xi, &row[e]));
        }
        s
    };
    for e in 0..v.ambient {
        if ech.pivots.contains(&e) {
            continue;
        }
        for comp in 0..m {
            let vals: Vec<BigRational> = zb
                .iter()
                .map(|x| {
                    let c = image(x, e);
                    if comp == 0 {
                        c.a
                    } else {
                        c.b
                    }
                })
                .collect();
            if vals.iter().all(|q| q.is_integer()) {
                continue;
            }
            let q = vals.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let mut p: Vec<BigInt> = vals.iter().map(|x| (x * BigRational::from_integer(q.clone())).to_integer()).collect();
            // unimodular row operations until one value carries the gcd
            loop {
                let nz: Vec<usize> = (0..p.len()).filter(|&i| !p[i].is_zero()).collect();
                if nz.len() <= 1 {
                    break;
                }
                let piv = *nz.iter().min_by_key(|&&i| p[i].abs()).expect("nonempty");
                for &i in &nz {
                    if i == piv {
                        continue;
                    }
                    let t = p[i].div_floor(&p[piv]);
                    let sub = &t * &p[piv];
                    p[i] -= sub;
                    let tc = f.rational(BigRational::from_integer(t));
                    let y = zb[piv].clone();
                    for (zi, yi) in zb[i].iter_mut().zip(&y) {
                        *zi = f.sub(zi, &f.mul(&tc, yi));
                    }
                }
            }
            let piv = (0..p.len()).find(|&i| !p[i].is_zero()).expect("some value is non-integral");
            let mult = &q / p[piv].gcd(&q);
            let mc = f.rational(BigRational::from_integer(mult.clone()));
            zb[piv] = zb[piv].iter().map(|x| f.mul(x, &mc)).collect();
            index *= mult;
        }
    }
    let hnf = hermite(f, zb, n);
    let mut det = f.one();
    for (i, row) in hnf.iter().enumerate() {
        det = f.mul(&det, &row[i]);
    }
    let o_det_norm = f.norm(&det);
    let basis = hnf
        .iter()
        .map(|x| (0..v.ambient).map(|e| image(x, e)).collect())
        .collect();
    LatticeData { basis: Subspace { ambient: v.ambient, basis }, z_index: index, o_det_norm }
}

/// Row Hermite form over the Euclidean ring `O`; returns the `n` nonzero
/// rows, upper triangular.
fn hermite(f: &ExactField, mut rows: Vec<Vec<Cyc>>, n: usize) -> Vec<Vec<Cyc>> {
    let mut out = Vec::with_capacity(n);
    for c in 0..n {
        loop {
            let nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][c] != f.zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            let piv = *nz.iter().min_by(|&&i, &&j| f.norm(&rows[i][c]).cmp(&f.norm(&rows[j][c]))).expect("nonempty");
            let pv = rows[piv][c].clone();
            let y = rows[piv].clone();
            for &i in &nz {
                if i == piv {
                    continue;
                }
                let q = f.round(&f.div(&rows[i][c], &pv));
                for (zi, yi) in rows[i].iter_mut().zip(&y) {
                    *zi = f.sub(zi, &f.mul(&q, yi));
                }
            }
        }
        let piv = (0..rows.len()).find(|&i| rows[i][c] != f.zero()).expect("lattice has full rank");
        out.push(rows.swap_remove(piv));
    }
    out
}

/// How `λ` sits in `ℝ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// `d = 1`: `|λ| = 2^{−2g}`.
    PowerOfTwo,
    /// `λ ∈ ℚ`.
    Rational,
    /// `λ ∈ (√3)^r·ℚ`.
    Sqrt3Power,
    /// None of the expected forms.
    Unexpected,
}

/// Ratio `λ = d vol / d vol*` of the canonical form to the form giving `Λ`
/// covolume one.
#[derive(Debug, Clone)]
pub struct MasurVeech {
    pub d: usize,
    pub base_genus: usize,
    pub n: usize,
    pub r: usize,
    pub k: usize,
    /// `λ²`, exact.
    pub lambda_sq: BigRational,
    pub lambda: f64,
    pub det_theta: String,
    /// `|det L|²` on the `Λ` basis.
    pub ell: BigRational,
    pub classification: Classification,
    /// Whether the classification is the one predicted for `d`.
    pub holds: bool,
    /// `λ²` recomputed from the pivot-coordinate density and the ℤ-index.
    pub lambda_sq_from_index: BigRational,
}

impl MasurVeech {
    pub fn render_lambda(&self) -> String {
        render_sqrt(&self.lambda_sq)
    }
}

/// `√q` as `a/b` or `a/b*sqrt(m)` with `m` squarefree.
pub fn render_sqrt(q: &BigRational) -> String {
    let (sn, rn) = split_square(q.numer());
    let (sd, rd) = split_square(q.denom());
    // √(rn/rd) = √(rn·rd)/rd
    let inside = &rn * &rd;
    let coef = BigRational::new(sn, sd * rd);
    if inside.is_one() {
        coef.to_string()
    } else {
        format!("{coef}*sqrt({inside})")
    }
}

/// `x = s²·t` with `t` squarefree (trial division; inputs are small).
fn split_square(x: &BigInt) -> (BigInt, BigInt) {
    let mut s = BigInt::one();
    let mut t = BigInt::one();
    let mut rest = x.abs();
    let mut p = BigInt::from(2);
    while &p * &p <= rest {
        let mut e = 0;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        for _ in 0..e / 2 {
            s *= &p;
        }
        if e % 2 == 1 {
            t *= &p;
        }
        p += 1;
    }
    (s, t * rest)
}

pub fn classify(d: usize, g: usize, r: usize, lambda_sq: &BigRational) -> Classification {
    let is_sq = ExactField::is_rational_square;
    match d {
        1 if *lambda_sq == BigRational::new(BigInt::one(), BigInt::from(2).pow(4 * g as u32)) => Classification::PowerOfTwo,
        1 | 2 | 4 if is_sq(lambda_sq) => Classification::Rational,
        3 | 6 if is_sq(&(lambda_sq / rat_pow(&rat(3), r))) => Classification::Sqrt3Power,
        _ => Classification::Unexpected,
    }
}

fn expected_class(d: usize) -> Classification {
    match d {
        1 => Classification::PowerOfTwo,
        2 | 4 => Classification::Rational,
        _ => Classification::Sqrt3Power,
    }
}

pub fn masur_veech_ratio(cover: &TranslationCover) -> Result<MasurVeech, VolumeError> {
    let d = cover.d();
    let f = ExactField::new(d).ok_or(VolumeError::UnsupportedD(d))?;
    let v = cohomology::eigenspace_v(&f, cover)?;
    let ch = Choices::of_cover(cover)?;
    let lat = lattice(&f, &v);
    let n = v.dim();
    let dens = theta_density(&f, cover, &lat.basis, &ch)?;
    let three_quarters = BigRational::new(3.into(), 4.into());
    let cov_sq = if matches!(d, 3 | 6) { rat_pow(&three_quarters, n) } else { BigRational::one() };
    let lambda_sq = dens.value_sq.clone().expect("exact") * &cov_sq;

    let ech = linalg::rref(&f, &v.basis, v.ambient);
    let pivot_basis = Subspace { ambient: v.ambient, basis: ech.rows };
    let dp = theta_density(&f, cover, &pivot_basis, &ch)?;
    let idx = BigRational::from_integer(lat.z_index.clone());
    let idx_pow = if d <= 2 { rat_pow(&idx, 4) } else { rat_pow(&idx, 2) };
    let lambda_sq_from_index = dp.value_sq.expect("exact") * idx_pow * &cov_sq;

    let g = cover.base_genus();
    let r = if d == 1 { 0 } else { ch.paths.len() };
    let classification = classify(d, g, r, &lambda_sq);
    Ok(MasurVeech {
        d,
        base_genus: g,
        n,
        r,
        k: dens.k,
        lambda: rat_to_f64(&lambda_sq).sqrt(),
        lambda_sq,
        det_theta: dens.det_theta_text.clone(),
        ell: dens.det_l_sq_exact.clone().expect("exact"),
        holds: classification == expected_class(d),
        classification,
        lambda_sq_from_index,
    })
}

// ---------------------------------------------------------------------------
// Alternative choices

/// Adds random integer combinations of absolute cycles to every path.
pub fn perturb_paths<R: Rng>(rng: &mut R, ch: &Choices, spread: i64) -> Choices {
    let mut out = ch.clone();
    for p in out.paths.iter_mut() {
        for c in &ch.cycles {
            let t = rng.gen_range(-spread..=spread);
            if t != 0 {
                for (x, y) in p.iter_mut().zip(c) {
                    *x += t * y;
                }
            }
        }
    }
    out
}

/// Replaces each path `cᵢ` by `T^{mᵢ}(cᵢ)`, moving its base point along the
/// fiber.
pub fn shift_basepoints(cover: &TranslationCover, ch: &Choices, shifts: &[usize]) -> Choices {
    let mut out = ch.clone();
    for (p, &m) in out.paths.iter_mut().zip(shifts) {
        *p = cohomology::push_chain(cover.map(), &cover.deck().pow(m), p);
    }
    out
}

/// Random element of `Sp(2g, ℤ)` as a product of elementary symplectic
/// transvections.
pub fn random_symplectic<R: Rng>(rng: &mut R, g: usize, steps: usize) -> Vec<Vec<i64>> {
    let n = 2 * g;
    let mut s: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    for _ in 0..steps {
        let t = if rng.gen_bool(0.5) { 1 } else { -1 };
        let (i, j) = (rng.gen_range(0..g), rng.gen_range(0..g));
        // elementary generator E with Eᵀ J E = J, applied on the left
        let mut e: Vec<Vec<i64>> = (0..n).map(|a| (0..n).map(|b| (a == b) as i64).collect()).collect();
        match rng.gen_range(0..3) {
            0 => {
                e[i][g + j] += t;
                if i != j {
                    e[j][g + i] += t;
                }
            }
            1 => {
                e[g + i][j] += t;
                if i != j {
                    e[g + j][i] += t;
                }
            }
            _ => {
                if i == j {
                    continue;
                }
                e[i][j] += t;
                e[g + j][g + i] -= t;
            }
        }
        s = (0..n).map(|a| (0..n).map(|b| (0..n).map(|c| e[a][c] * s[c][b]).sum()).collect()).collect();
    }
    s
}

/// New marking: cycle `j` becomes `Σᵢ S[i][j]·cycleᵢ`.
pub fn remark(ch: &Choices, s: &[Vec<i64>]) -> Choices {
    let mut out = ch.clone();
    let len = ch.cycles.first().map_or(0, |c| c.len());
    out.cycles = (0..s.len())
        .map(|j| {
            let mut c = vec![0i64; len];
            for (i, cyc) in ch.cycles.iter().enumerate() {
                if s[i][j] != 0 {
                    for (x, y) in c.iter_mut().zip(cyc) {
                        *x += s[i][j] * y;
                    }
                }
            }
            c
        })
        .collect();
    out
}

pub fn is_symplectic(s: &[Vec<i64>]) -> bool {
    let n = s.len();
    let j = cohomology::standard_j(n / 2);
    let sts: Vec<Vec<i64>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| (0..n).flat_map(|c| (0..n).map(move |e| (c, e))).map(|(c, e)| s[c][a] * j[c][e] * s[e][b]).sum())
                .collect()
        })
        .collect();
    sts == j
}
