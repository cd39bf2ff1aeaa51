//! Polynomial maps `S^2 -> R^2` in ambient coordinates, linear perturbation
//! families `f0 + eps * g`, and the exactly odd difference field
//! `F(x) = f(x) - f(-x)`.
//!
//! Terms are kept sorted lexicographically by exponent triple and every
//! summation runs in that order, so evaluation is bit-reproducible.

use std::cmp::Ordering;

use nalgebra::{Matrix2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{tangent_frame, SpherePoint, TangentFrame};

/// Largest total degree a polynomial may have.
pub const MAX_DEGREE: u32 = 31;

const POW_LEN: usize = MAX_DEGREE as usize + 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub exps: [u32; 3],
}

impl Term {
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_odd(&self) -> bool {
        self.degree() % 2 == 1
    }
}

/// `x^i`, `y^j`, `z^k` tables for one evaluation point.
struct Powers {
    x: [f64; POW_LEN],
    y: [f64; POW_LEN],
    z: [f64; POW_LEN],
}

impl Powers {
    fn new(p: &Vector3<f64>, degree: u32) -> Self {
        let mut pw = Powers {
            x: [1.0; POW_LEN],
            y: [1.0; POW_LEN],
            z: [1.0; POW_LEN],
        };
        for n in 1..=degree as usize {
            pw.x[n] = pw.x[n - 1] * p.x;
            pw.y[n] = pw.y[n - 1] * p.y;
            pw.z[n] = pw.z[n - 1] * p.z;
        }
        pw
    }

    #[inline]
    fn monomial(&self, [i, j, k]: [u32; 3]) -> f64 {
        self.x[i as usize] * self.y[j as usize] * self.z[k as usize]
    }
}

/// A real polynomial in `x, y, z` in canonical merged form.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "Vec<(f64, u32, u32, u32)>", try_from = "Vec<[f64; 4]>")]
pub struct Poly3 {
    terms: Vec<Term>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a polynomial from arbitrary terms: sorts by exponents, merges
    /// duplicates in input order and drops zero coefficients.
    pub fn from_terms<I: IntoIterator<Item = Term>>(terms: I) -> Result<Self> {
        let mut terms: Vec<Term> = terms.into_iter().collect();
        if let Some(t) = terms.iter().find(|t| t.degree() > MAX_DEGREE) {
            return Err(Error::DegreeTooLarge {
                degree: t.degree(),
                max: MAX_DEGREE,
            });
        }
        if let Some(t) = terms.iter().find(|t| !t.coeff.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite coefficient {}", t.coeff)));
        }
        terms.sort_by_key(|t| t.exps);
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.exps == t.exps => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        Ok(Poly3 { terms: merged })
    }

    pub fn monomial(coeff: f64, exps: [u32; 3]) -> Result<Self> {
        Self::from_terms([Term { coeff, exps }])
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, [0, 0, 0]).expect("degree 0")
    }

    pub fn x() -> Self {
        Self::monomial(1.0, [1, 0, 0]).expect("degree 1")
    }

    pub fn y() -> Self {
        Self::monomial(1.0, [0, 1, 0]).expect("degree 1")
    }

    pub fn z() -> Self {
        Self::monomial(1.0, [0, 0, 1]).expect("degree 1")
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Term::degree).max().unwrap_or(0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.iter().all(Term::is_odd)
    }

    pub fn is_even(&self) -> bool {
        self.terms.iter().all(|t| !t.is_odd())
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero();
        }
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff * s,
                exps: t.exps,
            })
            .filter(|t| t.coeff != 0.0)
            .collect();
        Poly3 { terms }
    }

    /// Term-wise sum of two canonical polynomials.
    pub fn add(&self, other: &Poly3) -> Self {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].exps.cmp(&b[j].exps) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let c = a[i].coeff + b[j].coeff;
                    if c != 0.0 {
                        out.push(Term {
                            coeff: c,
                            exps: a[i].exps,
                        });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Poly3 { terms: out }
    }

    pub fn sub(&self, other: &Poly3) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Poly3) -> Result<Self> {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Term {
                    coeff: a.coeff * b.coeff,
                    exps: [a.exps[0] + b.exps[0], a.exps[1] + b.exps[1], a.exps[2] + b.exps[2]],
                });
            }
        }
        Self::from_terms(terms)
    }

    /// Splits into the odd-total-degree part and the rest.
    pub fn odd_even_split(&self) -> (Poly3, Poly3) {
        let (odd, even): (Vec<Term>, Vec<Term>) = self.terms.iter().partition(|t| t.is_odd());
        (Poly3 { terms: odd }, Poly3 { terms: even })
    }

    pub fn eval(&self, p: &Vector3<f64>) -> f64 {
        self.eval_with(&Powers::new(p, self.degree()))
    }

    fn eval_with(&self, pw: &Powers) -> f64 {
        self.terms
            .iter()
            .fold(0.0, |acc, t| acc + t.coeff * pw.monomial(t.exps))
    }

    /// Ambient gradient, differentiated term by term.
    pub fn gradient(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.gradient_with(&Powers::new(p, self.degree()))
    }

    fn gradient_with(&self, pw: &Powers) -> Vector3<f64> {
        let mut g = [0.0; 3];
        for t in &self.terms {
            for (axis, slot) in g.iter_mut().enumerate() {
                let e = t.exps[axis];
                if e == 0 {
                    continue;
                }
                let mut d = t.exps;
                d[axis] -= 1;
                *slot += t.coeff * f64::from(e) * pw.monomial(d);
            }
        }
        Vector3::from(g)
    }

    /// Sum of absolute coefficient values.
    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }
}

impl From<Poly3> for Vec<(f64, u32, u32, u32)> {
    fn from(p: Poly3) -> Self {
        p.terms
            .iter()
            .map(|t| (t.coeff, t.exps[0], t.exps[1], t.exps[2]))
            .collect()
    }
}

impl TryFrom<Vec<[f64; 4]>> for Poly3 {
    type Error = Error;

    fn try_from(raw: Vec<[f64; 4]>) -> Result<Self> {
        let exponent = |e: f64| -> Result<u32> {
            if e >= 0.0 && e.fract() == 0.0 && e <= f64::from(MAX_DEGREE) {
                Ok(e as u32)
            } else {
                Err(Error::InvalidArgument(format!("bad exponent {e}")))
            }
        };
        let terms = raw
            .into_iter()
            .map(|[c, i, j, k]| {
                Ok(Term {
                    coeff: c,
                    exps: [exponent(i)?, exponent(j)?, exponent(k)?],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Poly3::from_terms(terms)
    }
}

/// A map `S^2 -> R^2` given by two polynomials.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PolyMap2 {
    pub comp1: Poly3,
    pub comp2: Poly3,
}

impl PolyMap2 {
    pub fn new(comp1: Poly3, comp2: Poly3) -> Self {
        Self { comp1, comp2 }
    }

    pub fn degree(&self) -> u32 {
        self.comp1.degree().max(self.comp2.degree())
    }

    pub fn add(&self, other: &PolyMap2) -> Self {
        Self::new(self.comp1.add(&other.comp1), self.comp2.add(&other.comp2))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.comp1.scale(s), self.comp2.scale(s))
    }

    pub fn is_even(&self) -> bool {
        self.comp1.is_even() && self.comp2.is_even()
    }
}

pub fn eval_map(f: &PolyMap2, p: &SpherePoint) -> Vector2<f64> {
    let pw = Powers::new(p.coords(), f.degree());
    Vector2::new(f.comp1.eval_with(&pw), f.comp2.eval_with(&pw))
}

pub fn odd_even_split(q: &Poly3) -> (Poly3, Poly3) {
    q.odd_even_split()
}

/// `f0 + eps * g` at a current parameter value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MapFamily {
    pub base: PolyMap2,
    pub direction: PolyMap2,
    #[serde(default)]
    pub epsilon: f64,
}

impl MapFamily {
    pub fn new(base: PolyMap2, direction: PolyMap2, epsilon: f64) -> Self {
        Self {
            base,
            direction,
            epsilon,
        }
    }

    /// A family that does not depend on the parameter.
    pub fn constant(base: PolyMap2) -> Self {
        Self::new(base, PolyMap2::default(), 0.0)
    }

    pub fn at(&self, eps: f64) -> PolyMap2 {
        instantiate(self, eps)
    }

    pub fn current(&self) -> PolyMap2 {
        instantiate(self, self.epsilon)
    }
}

pub fn instantiate(family: &MapFamily, eps: f64) -> PolyMap2 {
    family.base.add(&family.direction.scale(eps))
}

/// The antipodal difference field. Every stored monomial has odd total
/// degree, so `F(-p) == -F(p)` holds bit-for-bit in floating point.
#[derive(Debug, Clone, PartialEq)]
pub struct OddField {
    comp: [Poly3; 2],
    degree: u32,
}

impl OddField {
    pub fn new(comp1: Poly3, comp2: Poly3) -> Result<Self> {
        for c in [&comp1, &comp2] {
            if let Some(t) = c.terms().iter().find(|t| !t.is_odd()) {
                return Err(Error::NotOdd { degree: t.degree() });
            }
        }
        let degree = comp1.degree().max(comp2.degree());
        Ok(Self {
            comp: [comp1, comp2],
            degree,
        })
    }

    pub fn components(&self) -> &[Poly3; 2] {
        &self.comp
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.comp.iter().all(Poly3::is_zero)
    }

    pub fn eval(&self, p: &SpherePoint) -> Vector2<f64> {
        self.eval_ambient(p.coords())
    }

    pub fn eval_ambient(&self, v: &Vector3<f64>) -> Vector2<f64> {
        let pw = Powers::new(v, self.degree);
        Vector2::new(self.comp[0].eval_with(&pw), self.comp[1].eval_with(&pw))
    }

    /// Value and tangent Jacobian in `frame` at one point.
    pub fn eval_with_jacobian(&self, frame: &TangentFrame) -> (Vector2<f64>, Matrix2<f64>) {
        let pw = Powers::new(frame.base().coords(), self.degree);
        let value = Vector2::new(self.comp[0].eval_with(&pw), self.comp[1].eval_with(&pw));
        let g0 = self.comp[0].gradient_with(&pw);
        let g1 = self.comp[1].gradient_with(&pw);
        let (e1, e2) = (frame.e1(), frame.e2());
        let jac = Matrix2::new(g0.dot(e1), g0.dot(e2), g1.dot(e1), g1.dot(e2));
        (value, jac)
    }

    /// `F(x) - v * (axis . x)`: an odd perturbation of the field.
    pub fn shifted_linear(&self, v: Vector2<f64>, axis: Vector3<f64>) -> OddField {
        let linear = |s: f64| {
            Poly3::from_terms([
                Term {
                    coeff: -s * axis.x,
                    exps: [1, 0, 0],
                },
                Term {
                    coeff: -s * axis.y,
                    exps: [0, 1, 0],
                },
                Term {
                    coeff: -s * axis.z,
                    exps: [0, 0, 1],
                },
            ])
            .expect("degree 1")
        };
        OddField::new(self.comp[0].add(&linear(v.x)), self.comp[1].add(&linear(v.y)))
            .expect("sum of odd polynomials is odd")
    }
}

/// `f(x) - f(-x)`, computed exactly as twice the odd part of `f`.
pub fn difference_field(f: &PolyMap2) -> OddField {
    let odd = |q: &Poly3| q.odd_even_split().0.scale(2.0);
    OddField::new(odd(&f.comp1), odd(&f.comp2)).expect("odd part is odd")
}

/// `M[a][b] = grad F_a(p) . e_b` in the deterministic frame at `p`.
pub fn jacobian_tangent(field: &OddField, p: &SpherePoint) -> Matrix2<f64> {
    field.eval_with_jacobian(&tangent_frame(*p)).1
}
