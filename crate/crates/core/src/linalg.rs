//! Dense elimination over a [`Field`].

use crate::scalar::Field;

pub type Matrix<S> = Vec<Vec<S>>;

pub fn scale_of<F: Field>(f: &F, m: &[Vec<F::S>]) -> f64 {
    if f.is_exact() {
        return 1.0;
    }
    m.iter().flatten().map(|x| f.magnitude(x)).fold(0.0, f64::max)
}

/// Reduced row echelon form with the list of pivot columns.
pub struct Rref<S> {
    pub rows: Matrix<S>,
    pub pivots: Vec<usize>,
}

pub fn rref<F: Field>(f: &F, m: &[Vec<F::S>], ncols: usize) -> Rref<F::S> {
    rref_at(f, m, ncols, scale_of(f, m))
}

/// As [`rref`], with zero tests relative to `scale` instead of the largest
/// entry of `m`.
pub fn rref_at<F: Field>(f: &F, m: &[Vec<F::S>], ncols: usize, scale: f64) -> Rref<F::S> {
    let mut a: Matrix<F::S> = m.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        let pick = if f.is_exact() {
            (r..a.len()).find(|&i| !f.is_zero(&a[i][c], scale))
        } else {
            (r..a.len())
                .filter(|&i| !f.is_zero(&a[i][c], scale))
                .max_by(|&i, &j| f.magnitude(&a[i][c]).total_cmp(&f.magnitude(&a[j][c])))
        };
        let Some(p) = pick else {
            if !f.is_exact() {
                for row in a.iter_mut().skip(r) {
                    row[c] = f.zero();
                }
            }
            continue;
        };
        a.swap(r, p);
        let inv = f.inv(&a[r][c]);
        for x in a[r].iter_mut().skip(c) {
            *x = f.mul(x, &inv);
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c] == f.zero() {
                continue;
            }
            let factor = row[c].clone();
            for j in c..pivot_row.len() {
                if pivot_row[j] != f.zero() {
                    row[j] = f.sub(&row[j], &f.mul(&factor, &pivot_row[j]));
                }
            }
            row[c] = f.zero();
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    Rref { rows: a, pivots }
}

pub fn rank<F: Field>(f: &F, m: &[Vec<F::S>], ncols: usize) -> usize {
    rref(f, m, ncols).pivots.len()
}

pub fn rank_at<F: Field>(f: &F, m: &[Vec<F::S>], ncols: usize, scale: f64) -> usize {
    rref_at(f, m, ncols, scale).pivots.len()
}

/// Basis of `{x : m·x = 0}`, one vector per free column.
pub fn kernel<F: Field>(f: &F, m: &[Vec<F::S>], ncols: usize) -> Vec<Vec<F::S>> {
    let r = rref(f, m, ncols);
    let mut is_pivot = vec![false; ncols];
    for &p in &r.pivots {
        is_pivot[p] = true;
    }
    let mut out = Vec::new();
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![f.zero(); ncols];
        v[free] = f.one();
        for (row, &p) in r.rows.iter().zip(&r.pivots) {
            v[p] = f.neg(&row[free]);
        }
        out.push(v);
    }
    out
}

pub fn det<F: Field>(f: &F, m: &[Vec<F::S>]) -> F::S {
    let n = m.len();
    let scale = scale_of(f, m);
    let mut a = m.to_vec();
    let mut d = f.one();
    for c in 0..n {
        let pick = if f.is_exact() {
            (c..n).find(|&i| !f.is_zero(&a[i][c], scale))
        } else {
            (c..n).max_by(|&i, &j| f.magnitude(&a[i][c]).total_cmp(&f.magnitude(&a[j][c])))
        };
        let Some(p) = pick else { return f.zero() };
        if f.is_zero(&a[p][c], scale) && f.is_exact() {
            return f.zero();
        }
        if p != c {
            a.swap(p, c);
            d = f.neg(&d);
        }
        d = f.mul(&d, &a[c][c]);
        if a[c][c] == f.zero() {
            return f.zero();
        }
        let inv = f.inv(&a[c][c]);
        for i in c + 1..n {
            if a[i][c] == f.zero() {
                continue;
            }
            let factor = f.mul(&a[i][c], &inv);
            for j in c..n {
                let t = f.mul(&factor, &a[c][j]);
                a[i][j] = f.sub(&a[i][j], &t);
            }
        }
    }
    d
}

pub fn inverse<F: Field>(f: &F, m: &[Vec<F::S>]) -> Option<Matrix<F::S>> {
    let n = m.len();
    let aug: Matrix<F::S> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { f.one() } else { f.zero() }));
            r
        })
        .collect();
    let r = rref(f, &aug, n);
    if r.pivots.len() < n || r.pivots.iter().enumerate().any(|(i, &p)| i != p) {
        return None;
    }
    Some(r.rows.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn matmul<F: Field>(f: &F, a: &[Vec<F::S>], b: &[Vec<F::S>]) -> Matrix<F::S> {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut s = f.zero();
                    for k in 0..inner {
                        if row[k] != f.zero() && b[k][j] != f.zero() {
                            s = f.add(&s, &f.mul(&row[k], &b[k][j]));
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn transpose<S: Clone>(a: &[Vec<S>], rows_if_empty: usize) -> Matrix<S> {
    if a.is_empty() {
        return vec![Vec::new(); rows_if_empty];
    }
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn dot<F: Field>(f: &F, x: &[F::S], y: &[F::S]) -> F::S {
    let mut s = f.zero();
    for (a, b) in x.iter().zip(y) {
        if *a != f.zero() && *b != f.zero() {
            s = f.add(&s, &f.mul(a, b));
        }
    }
    s
}

/// Incremental independence test: feeds rows one at a time and reports which
/// ones increase the rank.
pub struct RowBasis<F: Field> {
    field: F,
    ncols: usize,
    rows: Vec<(usize, Vec<F::S>)>,
    scale: f64,
}

impl<F: Field> RowBasis<F> {
    pub fn new(field: F, ncols: usize, scale: f64) -> Self {
        Self { field, ncols, rows: Vec::new(), scale }
    }
    pub fn rank(&self) -> usize {
        self.rows.len()
    }
    /// Adds `v` if it is independent of the rows accepted so far.
    pub fn try_add(&mut self, v: &[F::S]) -> bool {
        let f = &self.field;
        let mut w = v.to_vec();
        for (p, row) in &self.rows {
            if w[*p] == f.zero() {
                continue;
            }
            let factor = w[*p].clone();
            for j in 0..self.ncols {
                if row[j] != f.zero() {
                    w[j] = f.sub(&w[j], &f.mul(&factor, &row[j]));
                }
            }
        }
        let pick = if f.is_exact() {
            (0..self.ncols).find(|&j| !f.is_zero(&w[j], self.scale))
        } else {
            (0..self.ncols)
                .filter(|&j| !f.is_zero(&w[j], self.scale))
                .max_by(|&i, &j| f.magnitude(&w[i]).total_cmp(&f.magnitude(&w[j])))
        };
        let Some(p) = pick else { return false };
        let inv = f.inv(&w[p]);
        for x in w.iter_mut() {
            *x = f.mul(x, &inv);
        }
        for (_, row) in self.rows.iter_mut() {
            if row[p] == f.zero() {
                continue;
            }
            let factor = row[p].clone();
            for j in 0..self.ncols {
                if w[j] != f.zero() {
                    row[j] = f.sub(&row[j], &f.mul(&factor, &w[j]));
                }
            }
        }
        self.rows.push((p, w));
        true
    }
}

/// Indices of a maximal independent subset of rows, chosen greedily in order.
pub fn independent_rows<F: Field>(f: &F, m: &[Vec<F::S>], ncols: usize) -> Vec<usize> {
    independent_rows_at(f, m, ncols, scale_of(f, m))
}

pub fn independent_rows_at<F: Field>(f: &F, m: &[Vec<F::S>], ncols: usize, scale: f64) -> Vec<usize> {
    let mut rb = RowBasis::new(f.clone(), ncols, scale);
    (0..m.len()).filter(|&i| rb.try_add(&m[i])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ExactField, FloatField};

    #[test]
    fn kernel_is_annihilated() {
        let f = ExactField::new(4).unwrap();
        let z = f.root(1);
        let m = vec![
            vec![f.one(), z.clone(), f.zero()],
            vec![f.zero(), f.one(), f.neg(&z)],
        ];
        let k = kernel(&f, &m, 3);
        assert_eq!(k.len(), 1);
        for row in &m {
            assert_eq!(dot(&f, row, &k[0]), f.zero());
        }
    }

    #[test]
    fn det_and_inverse_agree() {
        let f = ExactField::new(3).unwrap();
        let z = f.root(1);
        let m = vec![vec![f.one(), z.clone()], vec![f.conj(&z), f.from_i64(2)]];
        let d = det(&f, &m);
        let inv = inverse(&f, &m).unwrap();
        let id = matmul(&f, &m, &inv);
        assert_eq!(id[0][0], f.one());
        assert_eq!(id[0][1], f.zero());
        // det = 2 − z·z̄ = 1
        assert_eq!(d, f.one());
    }

    #[test]
    fn float_rank_with_noise() {
        let f = FloatField::new(1, 1e-8);
        let m = vec![
            vec![f.from_i64(1), f.from_i64(2)],
            vec![f.from_i64(2), num_complex::Complex64::new(4.0 + 1e-13, 0.0)],
        ];
        assert_eq!(rank(&f, &m, 2), 1);
    }

    #[test]
    fn independent_rows_greedy() {
        let f = ExactField::new(1).unwrap();
        let r = |v: &[i64]| v.iter().map(|&x| f.from_i64(x)).collect::<Vec<_>>();
        let m = vec![r(&[1, 0, 1]), r(&[2, 0, 2]), r(&[0, 1, 0]), r(&[1, 1, 1]), r(&[0, 0, 1])];
        assert_eq!(independent_rows(&f, &m, 3), vec![0, 2, 4]);
    }
}
