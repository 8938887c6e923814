//! Text format for surfaces.
//!
//! A surface file is a JSON object:
//!
//! ```text
//! {
//!   "d": 2,
//!   "sigma0": [...],
//!   "sigma1": [...],
//!   "sides": [["1", "0"], ["-1/2", "1"], ...],
//!   "rot": [...],
//!   "kappa_expected": [...]
//! }
//! ```
//!
//! `sides` has one `[re, im]` pair per dart. Entries are integers, rationals
//! `p/q`, or decimals; a file without decimals is read exactly. `rot` has one
//! class per undirected edge, in order of the smaller dart. `kappa_expected`
//! is optional.

use std::str::FromStr;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combmap::CombinatorialMap;
use crate::ddiff_surface::{DDiffSurface, DStructure, GaussRat, GeomConfig, SurfaceError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("field \"{field}\"{}: {message}", index.map(|i| format!(" entry {i}")).unwrap_or_default())]
    Field { field: &'static str, index: Option<usize>, message: String },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("kappa is {found:?}, file expects {expected:?}")]
    KappaMismatch { expected: Vec<i64>, found: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceFile {
    pub d: usize,
    pub sigma0: Vec<usize>,
    pub sigma1: Vec<usize>,
    pub sides: Vec<[String; 2]>,
    pub rot: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_expected: Option<Vec<i64>>,
}

enum Number {
    Exact(BigRational),
    Float(f64),
}

fn parse_number(s: &str) -> Option<Number> {
    let t = s.trim();
    if t.contains(['.', 'e', 'E']) {
        return t.parse::<f64>().ok().filter(|x| x.is_finite()).map(Number::Float);
    }
    let q = BigRational::from_str(t).ok()?;
    Some(Number::Exact(q))
}

fn render_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl SurfaceFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        serde_json::from_str(text).map_err(|e| FormatError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string().split(" at line").next().unwrap_or_default().to_string(),
        })
    }

    pub fn of_surface(s: &DDiffSurface) -> Self {
        let sides = match s.exact_sides() {
            Some(ex) => ex.iter().map(|(a, b)| [render_rational(a), render_rational(b)]).collect(),
            None => s.sides().iter().map(|z| [format!("{:?}", z.re + 0.0), format!("{:?}", z.im + 0.0)]).collect(),
        };
        Self {
            d: s.d(),
            sigma0: s.map().sigma0().to_vec(),
            sigma1: s.map().sigma1().to_vec(),
            sides,
            rot: s.structure().rot_per_edge(),
            kappa_expected: Some(s.kappa().to_vec()),
        }
    }

    pub fn to_surface(&self, config: &GeomConfig) -> Result<DDiffSurface, FormatError> {
        let map = CombinatorialMap::new(self.sigma0.clone(), self.sigma1.clone())
            .map_err(|e| FormatError::Field { field: "sigma0/sigma1", index: None, message: e.to_string() })?;
        if self.sides.len() != map.num_darts() {
            return Err(FormatError::Field {
                field: "sides",
                index: None,
                message: format!("expected {} entries, found {}", map.num_darts(), self.sides.len()),
            });
        }
        if self.rot.len() != map.num_edges() {
            return Err(FormatError::Field {
                field: "rot",
                index: None,
                message: format!("expected {} entries, found {}", map.num_edges(), self.rot.len()),
            });
        }
        if self.d == 0 {
            return Err(FormatError::Field { field: "d", index: None, message: "must be positive".into() });
        }
        let mut nums = Vec::with_capacity(self.sides.len());
        for (i, pair) in self.sides.iter().enumerate() {
            let parse = |s: &str| {
                parse_number(s).ok_or_else(|| FormatError::Field {
                    field: "sides",
                    index: Some(i),
                    message: format!("cannot read \"{s}\" as a number"),
                })
            };
            nums.push((parse(&pair[0])?, parse(&pair[1])?));
        }
        let structure = DStructure::new(map, self.d, &self.rot)?;
        let exact: Option<Vec<GaussRat>> = nums
            .iter()
            .map(|(a, b)| match (a, b) {
                (Number::Exact(a), Number::Exact(b)) => Some((a.clone(), b.clone())),
                _ => None,
            })
            .collect();
        let surface = match exact {
            Some(ex) => DDiffSurface::new_exact(structure, ex, config)?,
            None => {
                let f = |n: &Number| match n {
                    Number::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
                    Number::Float(x) => *x,
                };
                let side = nums.iter().map(|(a, b)| Complex64::new(f(a), f(b))).collect();
                DDiffSurface::new(structure, side, config)?
            }
        };
        if let Some(k) = &self.kappa_expected {
            if k.as_slice() != surface.kappa() {
                return Err(FormatError::KappaMismatch { expected: k.clone(), found: surface.kappa().to_vec() });
            }
        }
        Ok(surface)
    }

    /// Canonical text: one key per line, arrays on one line.
    pub fn render(&self) -> String {
        let j = |v: &dyn erased::Ser| v.json();
        let mut out = String::from("{\n");
        out += &format!("  \"d\": {},\n", self.d);
        out += &format!("  \"sigma0\": {},\n", j(&self.sigma0));
        out += &format!("  \"sigma1\": {},\n", j(&self.sigma1));
        out += &format!("  \"sides\": {},\n", j(&self.sides));
        out += &format!("  \"rot\": {}", j(&self.rot));
        if let Some(k) = &self.kappa_expected {
            out += &format!(",\n  \"kappa_expected\": {}", j(k));
        }
        out += "\n}\n";
        out
    }
}

mod erased {
    pub trait Ser {
        fn json(&self) -> String;
    }
    impl<T: serde::Serialize> Ser for T {
        fn json(&self) -> String {
            serde_json::to_string(self).expect("plain data serializes")
        }
    }
}

pub fn read_surface(text: &str, config: &GeomConfig) -> Result<DDiffSurface, FormatError> {
    SurfaceFile::parse(text)?.to_surface(config)
}

pub fn write_surface(s: &DDiffSurface) -> String {
    SurfaceFile::of_surface(s).render()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn round_trip_is_byte_identical() {
        let config = GeomConfig::default();
        for s in fixtures::geometric_seeds() {
            let text = write_surface(&s);
            let back = read_surface(&text, &config).unwrap();
            assert_eq!(back.kappa(), s.kappa());
            assert_eq!(write_surface(&back), text);
        }
    }

    #[test]
    fn pillowcase_reads_exactly() {
        let text = write_surface(&fixtures::pillowcase());
        let s = read_surface(&text, &GeomConfig::default()).unwrap();
        assert!(s.exact_sides().is_some());
        assert_eq!(s.kappa(), &[-1, -1, -1, -1]);
    }

    #[test]
    fn errors_name_their_location() {
        let config = GeomConfig::default();
        let mut f = SurfaceFile::of_surface(&fixtures::pillowcase());
        f.rot[2] += 1;
        match f.to_surface(&config) {
            Err(FormatError::Surface(SurfaceError::GluingMismatch { edge, .. })) => assert_eq!(edge, 2),
            other => panic!("{other:?}"),
        }
        let mut f = SurfaceFile::of_surface(&fixtures::pillowcase());
        f.sides[3][1] = "x".into();
        assert!(matches!(f.to_surface(&config), Err(FormatError::Field { field: "sides", index: Some(3), .. })));
        let mut f = SurfaceFile::of_surface(&fixtures::square_torus());
        f.kappa_expected = Some(vec![1]);
        assert!(matches!(f.to_surface(&config), Err(FormatError::KappaMismatch { .. })));
        match read_surface("{\n  \"d\": 1,\n  \"sigma0\": [0,\n}", &config) {
            Err(FormatError::Syntax { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn decimals_are_read_in_floating_point() {
        let s = fixtures::pillowcase();
        let mut f = SurfaceFile::of_surface(&s);
        for p in &mut f.sides {
            for x in p.iter_mut() {
                *x = format!("{:?}", BigRational::from_str(x).unwrap().to_f64().unwrap());
            }
        }
        let t = f.to_surface(&GeomConfig::default()).unwrap();
        assert!(t.exact_sides().is_none());
        assert_eq!(write_surface(&t), f.render());
    }
}
