//! Hori-Vafa mirror curves of the resolved `X_{p,q}`.
//!
//! A Newton polynomial is a list of monomials `e^{a u + b v}` with
//! coefficients that are complex numbers plus formal combinations of named
//! moduli. Everything that matters for genus and puncture counts is the
//! support, so the symbolic part only needs to know when a coefficient is
//! identically zero.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::{
    affine_unimodular_map, boundary_lattice_count, build_fan, convex_hull, interior_lattice_points,
    lattice_width, AffineMap, LatticePoint2, LensSpace,
};

/// `constant + sum_k weight_k * symbol_k`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    #[serde(with = "crate::serde_complex::scalar")]
    pub constant: Complex64,
    #[serde(with = "crate::serde_complex::map")]
    pub symbols: BTreeMap<String, Complex64>,
}

impl Coefficient {
    pub fn value(c: Complex64) -> Self {
        Self { constant: c, symbols: BTreeMap::new() }
    }

    pub fn real(x: f64) -> Self {
        Self::value(Complex64::new(x, 0.0))
    }

    pub fn symbol(name: impl Into<String>) -> Self {
        let mut symbols = BTreeMap::new();
        symbols.insert(name.into(), Complex64::new(1.0, 0.0));
        Self { constant: Complex64::new(0.0, 0.0), symbols }
    }

    pub fn is_zero(&self) -> bool {
        self.constant == Complex64::new(0.0, 0.0) && self.symbols.values().all(|w| *w == Complex64::new(0.0, 0.0))
    }

    pub fn add(&mut self, other: &Coefficient) {
        self.constant += other.constant;
        for (k, w) in &other.symbols {
            *self.symbols.entry(k.clone()).or_default() += *w;
        }
        self.symbols.retain(|_, w| *w != Complex64::new(0.0, 0.0));
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.constant != Complex64::new(0.0, 0.0) || self.symbols.is_empty() {
            parts.push(fmt_complex(self.constant));
        }
        for (k, w) in &self.symbols {
            if *w == Complex64::new(1.0, 0.0) {
                parts.push(k.clone());
            } else {
                parts.push(format!("{}*{k}", fmt_complex(*w)));
            }
        }
        write!(f, "{}", parts.join(" + "))
    }
}

fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("({}{:+}i)", z.re, z.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    /// `(a, b)` for the monomial `e^{a u + b v}`.
    pub exponent: [i64; 2],
    pub coefficient: Coefficient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonPolynomial {
    pub terms: Vec<Term>,
}

impl NewtonPolynomial {
    /// Merge equal exponents, drop vanishing coefficients, sort by exponent.
    pub fn from_terms(raw: impl IntoIterator<Item = ([i64; 2], Coefficient)>) -> Self {
        let mut merged: BTreeMap<[i64; 2], Coefficient> = BTreeMap::new();
        for (e, c) in raw {
            merged.entry(e).or_default().add(&c);
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exponent, coefficient)| Term { exponent, coefficient })
            .collect();
        Self { terms }
    }

    pub fn support(&self) -> Vec<LatticePoint2> {
        self.terms.iter().map(|t| LatticePoint2::new(t.exponent[0], t.exponent[1])).collect()
    }

    pub fn coefficient(&self, exponent: [i64; 2]) -> Option<&Coefficient> {
        self.terms.iter().find(|t| t.exponent == exponent).map(|t| &t.coefficient)
    }

    /// Evaluate with numeric values substituted for every symbol.
    pub fn eval(&self, u: Complex64, v: Complex64, symbols: &BTreeMap<String, Complex64>) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mut c = t.coefficient.constant;
            for (k, w) in &t.coefficient.symbols {
                match symbols.get(k) {
                    Some(x) => c += w * x,
                    None => return invalid(format!("no value for symbol {k}")),
                }
            }
            acc += c * (u * t.exponent[0] as f64 + v * t.exponent[1] as f64).exp();
        }
        Ok(acc)
    }

    /// Affine-unimodular map from this support onto the fan points of `ls`.
    pub fn map_to_fan(&self, ls: LensSpace) -> Option<AffineMap> {
        affine_unimodular_map(&self.support(), &build_fan(ls).points)
    }
}

impl fmt::Display for NewtonPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                let [a, b] = t.exponent;
                let mono = match (a, b) {
                    (0, 0) => String::new(),
                    _ => {
                        let mut s = Vec::new();
                        if a != 0 {
                            s.push(if a == 1 { "u".to_string() } else { format!("{a}u") });
                        }
                        if b != 0 {
                            s.push(if b == 1 { "v".to_string() } else { format!("{b}v") });
                        }
                        format!(" e^{{{}}}", s.join("+"))
                    }
                };
                format!("({}){mono}", t.coefficient)
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Symbolic moduli `d_1, ..., d_p`.
pub fn symbolic_moduli(p: u32) -> BTreeMap<u32, Coefficient> {
    (1..=p).map(|j| (j, Coefficient::symbol(format!("d_{j}")))).collect()
}

/// `(e^{pu+qv} - 1)(e^v - 1) + d_p + sum_{j<p} d_j e^{ju + (q - [(p-j)q/p]) v}`.
pub fn newton_polynomial(ls: LensSpace, coeffs: &BTreeMap<u32, Coefficient>) -> Result<NewtonPolynomial> {
    let (p, q) = (ls.p() as i64, ls.q() as i64);
    for j in 1..=ls.p() {
        if !coeffs.contains_key(&j) {
            return invalid(format!("missing coefficient d_{j}"));
        }
    }
    let mut raw = vec![
        ([p, q + 1], Coefficient::real(1.0)),
        ([p, q], Coefficient::real(-1.0)),
        ([0, 1], Coefficient::real(-1.0)),
        ([0, 0], Coefficient::real(1.0)),
        ([0, 0], coeffs[&ls.p()].clone()),
    ];
    for j in 1..p {
        raw.push(([j, q - ((p - j) * q).div_euclid(p)], coeffs[&(j as u32)].clone()));
    }
    Ok(NewtonPolynomial::from_terms(raw))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveInvariants {
    pub genus: u64,
    pub punctures: u64,
    pub hyperelliptic_family: bool,
}

pub fn curve_invariants(np: &NewtonPolynomial) -> CurveInvariants {
    let support = np.support();
    let hull = convex_hull(&support);
    CurveInvariants {
        genus: interior_lattice_points(&support).len() as u64,
        punctures: boundary_lattice_count(&hull) as u64,
        hyperelliptic_family: lattice_width(&support) <= 2,
    }
}

/// `(e^v - 1)(e^{pu+v} - 1) + e^t - 1 + e^v sum_{n=1}^{p-1} d_n e^{nu}`.
pub fn q1_specialization(p: u32, t: f64, d: &[Coefficient]) -> Result<NewtonPolynomial> {
    if p < 1 {
        return invalid("p must be positive");
    }
    if d.len() != p as usize - 1 {
        return invalid(format!("expected {} coefficients, got {}", p - 1, d.len()));
    }
    let p = p as i64;
    let mut raw = vec![
        ([p, 2], Coefficient::real(1.0)),
        ([p, 1], Coefficient::real(-1.0)),
        ([0, 1], Coefficient::real(-1.0)),
        ([0, 0], Coefficient::real(1.0)),
        ([0, 0], Coefficient::real(t.exp() - 1.0)),
    ];
    for (n, c) in d.iter().enumerate() {
        raw.push(([n as i64 + 1, 1], c.clone()));
    }
    Ok(NewtonPolynomial::from_terms(raw))
}
