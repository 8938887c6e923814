//! Hand-built flat surfaces used as seeds for tests and examples.

use num_complex::Complex64;
use num_rational::BigRational;

use crate::combmap::CombinatorialMap;
use crate::ddiff_surface::{from_triangles, DDiffSurface, DStructure, GeomConfig, SurfaceError};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn build(d: usize, faces: &[[Complex64; 3]], pairs: &[(usize, usize)]) -> DDiffSurface {
    exactify(from_triangles(d, faces, pairs, &GeomConfig::default()).expect("fixture is valid"))
}

/// Same surface with exact sides when every coordinate is a dyadic rational
/// with small denominator.
pub fn exactify(s: DDiffSurface) -> DDiffSurface {
    let dyadic = |x: f64| (x * 1024.0).fract() == 0.0 && x.abs() < 1e6;
    if s.exact_sides().is_some() || !s.sides().iter().all(|z| dyadic(z.re) && dyadic(z.im)) {
        return s;
    }
    let q = |x: f64| BigRational::from_float(x).expect("finite");
    let exact = s.sides().iter().map(|z| (q(z.re), q(z.im))).collect();
    DDiffSurface::new_exact(s.structure().clone(), exact, &GeomConfig::default()).unwrap_or(s)
}

/// Torus `ℂ/(uℤ + vℤ)` cut along the diagonal `u + v`; `Im(ū v) > 0`.
pub fn parallelogram_torus(u: Complex64, v: Complex64) -> DDiffSurface {
    build(1, &[[u, v, -u - v], [-u, -v, u + v]], &[(0, 3), (1, 4), (2, 5)])
}

/// Unit square torus.
pub fn square_torus() -> DDiffSurface {
    parallelogram_torus(c(1.0, 0.0), c(0.0, 1.0))
}

/// `w × h` rectangle torus with horizontal side `w`.
pub fn rectangle_torus(w: f64, h: f64) -> DDiffSurface {
    parallelogram_torus(c(w, 0.0), c(0.0, h))
}

/// Hexagonal torus of area 1.
pub fn equilateral_torus() -> DDiffSurface {
    let s = (2.0 / 3f64.sqrt()).sqrt();
    parallelogram_torus(c(s, 0.0), Complex64::from_polar(s, 2.0 * std::f64::consts::FRAC_PI_3))
}

/// Two unit squares glued along their boundary: a sphere with four cone
/// points of angle π.
pub fn pillowcase() -> DDiffSurface {
    let front = [[c(1.0, 0.0), c(0.0, 1.0), c(-1.0, -1.0)], [c(1.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]];
    let back = [[c(-1.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)], [c(0.0, 1.0), c(-1.0, 0.0), c(1.0, -1.0)]];
    let faces = [front[0], front[1], back[0], back[1]];
    build(2, &faces, &[(2, 3), (6, 11), (0, 8), (1, 7), (4, 10), (5, 9)])
}

/// Double of the triangle with vertices `0, 1, apex`: a sphere with three
/// cone points of twice the triangle's angles. The angles must be multiples
/// of `π/d`.
pub fn pillow(d: usize, apex: Complex64) -> Result<DDiffSurface, SurfaceError> {
    let one = c(1.0, 0.0);
    let front = [one, apex - one, -apex];
    let back = [apex.conj(), one - apex.conj(), -one];
    from_triangles(d, &[front, back], &[(0, 5), (1, 4), (2, 3)], &GeomConfig::default()).map(exactify)
}

/// Double equilateral triangle, `d = 3`, `κ = (−2, −2, −2)`.
pub fn triangle_pillow_d3() -> DDiffSurface {
    pillow(3, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3)).expect("fixture is valid")
}

/// Double right isosceles triangle, `d = 4`, `κ = (−2, −3, −3)`.
pub fn right_isosceles_pillow_d4() -> DDiffSurface {
    pillow(4, c(0.0, 1.0)).expect("fixture is valid")
}

/// Double 30-60-90 triangle, `d = 6`, `κ = (−3, −4, −5)`.
pub fn thirty_sixty_pillow_d6() -> DDiffSurface {
    pillow(6, c(0.0, 3f64.sqrt())).expect("fixture is valid")
}

/// Double golden triangle, `d = 5`, `κ = (−3, −3, −4)`.
pub fn golden_pillow_d5() -> DDiffSurface {
    let h = 0.5 * (2.0 * std::f64::consts::PI / 5.0).tan();
    pillow(5, c(0.5, h)).expect("fixture is valid")
}

/// Square-tiled translation surface: square `i` has `right[i]` to its right
/// and `up[i]` above it. Each square is cut along its rising diagonal.
pub fn square_tiled(right: &[usize], up: &[usize]) -> Result<DDiffSurface, SurfaceError> {
    let n = right.len();
    let lower = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, -1.0)];
    let upper = [c(1.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
    let faces: Vec<[Complex64; 3]> = (0..n).flat_map(|_| [lower, upper]).collect();
    let mut pairs = Vec::with_capacity(3 * n);
    for i in 0..n {
        pairs.push((6 * i + 2, 6 * i + 3));
        pairs.push((6 * i + 1, 6 * right[i] + 5));
        pairs.push((6 * i + 4, 6 * up[i]));
    }
    from_triangles(1, &faces, &pairs, &GeomConfig::default()).map(exactify)
}

/// Three-square L: genus 2, one zero of order 2.
pub fn l_shape() -> DDiffSurface {
    square_tiled(&[1, 0, 2], &[2, 1, 0]).expect("fixture is valid")
}

/// Four squares in a row with a twisted top: genus 2, two simple zeros.
pub fn four_square_h11() -> DDiffSurface {
    square_tiled(&[1, 2, 3, 0], &[1, 0, 3, 2]).expect("fixture is valid")
}

/// Every face an equilateral triangle with unit sides; a 6-differential with
/// `kᵢ = deg(sᵢ) − 6`, reduced to its primitive part.
pub fn equilateral_surface(map: &CombinatorialMap) -> Result<DDiffSurface, SurfaceError> {
    let w = |j: i64| crate::scalar::root_c64(3, j);
    let mut side = vec![c(0.0, 0.0); map.num_darts()];
    for f in map.faces() {
        for (j, &e) in f.iter().enumerate() {
            side[e] = w(j as i64);
        }
    }
    let rot: Vec<i64> = map
        .edge_darts()
        .into_iter()
        .map(|e| crate::ddiff_surface::rotation_class(6, side[e], side[map.opp(e)]))
        .collect();
    let structure = DStructure::new(map.clone(), 6, &rot)?;
    let config = GeomConfig::default();
    DDiffSurface::new(structure, side, &config)?.primitive_part(&config)
}

/// All hand-built seeds, one or more per `d ∈ {1, 2, 3, 4, 6}`.
pub fn geometric_seeds() -> Vec<DDiffSurface> {
    let config = GeomConfig::default();
    let pillow_marked = pillowcase().with_marked_point(0, [1.0, 2.0, 3.0], &config).expect("fixture is valid");
    let d3_marked = triangle_pillow_d3().with_marked_point(1, [2.0, 1.0, 1.0], &config).expect("fixture is valid");
    vec![
        square_torus(),
        equilateral_torus(),
        l_shape(),
        four_square_h11(),
        pillowcase(),
        pillow_marked,
        triangle_pillow_d3(),
        d3_marked,
        right_isosceles_pillow_d4(),
        thirty_sixty_pillow_d6(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(v: &[i64]) -> Vec<i64> {
        let mut v = v.to_vec();
        v.sort();
        v
    }

    #[test]
    fn seed_orders() {
        assert_eq!(sorted(triangle_pillow_d3().kappa()), vec![-2, -2, -2]);
        assert_eq!(sorted(right_isosceles_pillow_d4().kappa()), vec![-3, -3, -2]);
        assert_eq!(sorted(thirty_sixty_pillow_d6().kappa()), vec![-5, -4, -3]);
        assert_eq!(l_shape().kappa(), &[2]);
        assert_eq!(l_shape().genus(), 2);
        assert_eq!(sorted(four_square_h11().kappa()), vec![1, 1]);
        for s in [triangle_pillow_d3(), right_isosceles_pillow_d4(), thirty_sixty_pillow_d6()] {
            assert!(s.primitivity().surjective(), "d = {}", s.d());
        }
    }

    #[test]
    fn marked_point_has_order_zero() {
        let s = pillowcase().with_marked_point(0, [1.0, 1.0, 1.0], &GeomConfig::default()).unwrap();
        assert_eq!(sorted(s.kappa()), vec![-1, -1, -1, -1, 0]);
        assert!((s.area() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn equilateral_torus_is_translation() {
        let s = equilateral_surface(square_torus().map()).unwrap();
        assert_eq!(s.d(), 1);
        assert!((s.area() - 3f64.sqrt() / 2.0).abs() < 1e-12);
        let s = equilateral_torus();
        assert!((s.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equilateral_pillow_reduces_to_d3() {
        let s = equilateral_surface(triangle_pillow_d3().map()).unwrap();
        assert_eq!(s.d(), 3);
        assert_eq!(sorted(s.kappa()), vec![-2, -2, -2]);
    }

    #[test]
    fn linear_image_of_torus() {
        let s = square_torus().linear_image([[2.0, 1.0], [0.0, 0.5]], &GeomConfig::default()).unwrap().unwrap();
        assert!((s.area() - 1.0).abs() < 1e-12);
        assert!(triangle_pillow_d3().linear_image([[1.0, 0.0], [0.0, 1.0]], &GeomConfig::default()).is_none());
    }
}
