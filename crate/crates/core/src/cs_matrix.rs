//! Eigenvalue-integral representations of the lens space partition function,
//! evaluated by nested adaptive quadrature and by Monte Carlo, and the
//! unitary-matrix chain closed by the Itzykson-Zuber formula.
//!
//! Couplings are real and positive. The single-group integral uses the same
//! coupling as `g_s^2` of the exact sum; the grouped integral uses half of it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::LensSpace;
use crate::quad::integrate_box;
use crate::sum::CompensatedSum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    /// One eigenvalue group, `m` entering through phases.
    Mmcs,
    /// `p` groups, sizes given by the multiplicities in `m`.
    Mmcs2,
    /// Trivial sector only, `sinh(x/2q) sinh(x/2)` measure.
    Mmcs1a,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixModelSpec {
    pub ls: LensSpace,
    pub n: usize,
    pub g_s: f64,
    pub m: Vec<i64>,
    pub representation: Representation,
}

impl MatrixModelSpec {
    pub fn new(ls: LensSpace, n: usize, g_s: f64, m: Vec<i64>, representation: Representation) -> Self {
        Self { ls, n, g_s, m, representation }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return invalid("N must be at least 1");
        }
        if self.m.len() != self.n {
            return invalid(format!("m has {} entries, expected N = {}", self.m.len(), self.n));
        }
        if !(self.g_s > 0.0 && self.g_s.is_finite()) {
            return invalid("g_s must be a positive real number");
        }
        if self.representation == Representation::Mmcs1a && self.reduced_m().iter().any(|&x| x != 0) {
            return invalid("the unitary-model form is only defined for m = 0");
        }
        Ok(())
    }

    /// `m` with entries reduced to `{0, ..., p-1}`.
    pub fn reduced_m(&self) -> Vec<i64> {
        let p = self.ls.p() as i64;
        self.m.iter().map(|x| x.rem_euclid(p)).collect()
    }

    /// Group sizes `N_I`, `I = 0..p`.
    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.ls.p() as usize];
        for x in self.reduced_m() {
            sizes[x as usize] += 1;
        }
        sizes
    }

    /// Coefficient `a` of the Gaussian `e^{-a x.x}`.
    pub fn gaussian_coefficient(&self) -> f64 {
        let (p, q, g) = (self.ls.p() as f64, self.ls.q() as f64, self.g_s);
        match self.representation {
            Representation::Mmcs => g * p,
            Representation::Mmcs2 => p / (2.0 * g),
            Representation::Mmcs1a => p / (g * q),
        }
    }

    /// Exponential growth rate of the `sinh` product along one coordinate.
    fn growth_rate(&self) -> f64 {
        let (q, g, n) = (self.ls.q() as f64, self.g_s, self.n as f64);
        match self.representation {
            Representation::Mmcs => g * (n - 1.0),
            Representation::Mmcs2 => n - 1.0,
            Representation::Mmcs1a => (n - 1.0) * (0.5 / q + 0.5),
        }
    }

    /// Imaginary shift of the integration contour. Only the single-group form
    /// with `m != 0` is shifted, onto the line where its Gaussian is centred.
    pub fn contour_shift(&self) -> Vec<f64> {
        let (p, g) = (self.ls.p() as f64, self.g_s);
        match self.representation {
            Representation::Mmcs => self.reduced_m().iter().map(|&m| 2.0 * PI * m as f64 / (g * p)).collect(),
            _ => vec![0.0; self.n],
        }
    }

    /// Factor restoring the `m`-dependent constants dropped on the way from
    /// the exact sum, so that `prefactor * integral` is proportional to the
    /// exact sector value with an `m`-independent constant.
    pub fn sector_prefactor(&self) -> Complex64 {
        let (p, q, g) = (self.ls.p() as f64, self.ls.q() as f64, self.g_s);
        let m2: f64 = self.reduced_m().iter().map(|&x| (x * x) as f64).sum();
        let e = match self.representation {
            Representation::Mmcs => -4.0 * PI * PI * (q - 1.0) * m2 / (g * p),
            Representation::Mmcs2 => -2.0 * PI * PI * q * m2 / (g * p),
            Representation::Mmcs1a => 0.0,
        };
        Complex64::new(e.exp(), 0.0)
    }
}

/// Integrand at a complex point.
pub fn integrand_at(spec: &MatrixModelSpec, x: &[Complex64]) -> Complex64 {
    let (p, q, g) = (spec.ls.p() as f64, spec.ls.q() as f64, spec.g_s);
    let m = spec.reduced_m();
    let n = spec.n;
    let i = Complex64::i();
    let xx: Complex64 = x.iter().map(|z| z * z).sum();
    let mut acc = match spec.representation {
        Representation::Mmcs => {
            let mx: Complex64 = (0..n).map(|k| x[k] * m[k] as f64).sum();
            (-xx * (g * p) + i * (4.0 * PI) * mx).exp()
        }
        Representation::Mmcs2 => (-xx * (p / (2.0 * g))).exp(),
        Representation::Mmcs1a => (-xx * (p / (g * q))).exp(),
    };
    for a in 0..n {
        for b in a + 1..n {
            let d = x[a] - x[b];
            let mab = (m[a] - m[b]) as f64;
            acc *= match spec.representation {
                Representation::Mmcs => {
                    let delta = d * (g / 2.0);
                    (delta + i * (PI * (q - 1.0) * mab / p)).sinh() * delta.sinh()
                }
                Representation::Mmcs2 => {
                    let h = d * 0.5;
                    (h + i * (PI * mab / p)).sinh() * (h + i * (PI * q * mab / p)).sinh()
                }
                Representation::Mmcs1a => (d / (2.0 * q)).sinh() * (d * 0.5).sinh(),
            };
        }
    }
    acc
}

/// Integrand on the real axis.
pub fn integrand(spec: &MatrixModelSpec, x: &[f64]) -> Complex64 {
    let z: Vec<Complex64> = x.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    integrand_at(spec, &z)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    /// The integral itself.
    #[serde(with = "crate::serde_complex::scalar")]
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub evaluations: u64,
    pub converged: bool,
    /// See [`MatrixModelSpec::sector_prefactor`].
    #[serde(with = "crate::serde_complex::scalar")]
    pub sector_prefactor: Complex64,
}

impl QuadratureResult {
    pub fn sector_value(&self) -> Complex64 {
        self.value * self.sector_prefactor
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub max_evals: u64,
    /// Tail bound used for the truncation length.
    pub tail: f64,
    pub max_n: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, max_evals: 200_000_000, tail: 1e-14, max_n: 3 }
    }
}

/// Half-width `L` such that `e^{-a L^2 + c L} <= tail`.
pub fn truncation(a: f64, c: f64, tail: f64) -> f64 {
    let ln = (1.0 / tail).ln();
    (c + (c * c + 4.0 * a * ln).sqrt()) / (2.0 * a)
}

pub fn z_quadrature(spec: &MatrixModelSpec) -> Result<QuadratureResult> {
    z_quadrature_with(spec, &QuadOptions::default())
}

pub fn z_quadrature_with(spec: &MatrixModelSpec, opts: &QuadOptions) -> Result<QuadratureResult> {
    spec.validate()?;
    if spec.n > opts.max_n {
        return Err(Error::Budget(format!("tensor quadrature limited to N <= {}", opts.max_n)));
    }
    let a = spec.gaussian_coefficient();
    let l = truncation(a, spec.growth_rate(), opts.tail);
    let shift = spec.contour_shift();
    let f = |y: &[f64]| {
        let z: Vec<Complex64> = y.iter().zip(&shift).map(|(&t, &s)| Complex64::new(t, s)).collect();
        integrand_at(spec, &z)
    };
    // Absolute floor, so that sectors whose integral vanishes still
    // terminate: a small fraction of the typical integrand size times the
    // Gaussian volume.
    let sigma = (0.5 / a).sqrt();
    let mut peak: f64 = 0.0;
    for code in 0..3usize.pow(spec.n as u32) {
        let y: Vec<f64> = (0..spec.n).map(|k| ((code / 3usize.pow(k as u32)) % 3) as f64 - 1.0).map(|s| s * sigma * 1.3).collect();
        let y: Vec<f64> = y.iter().enumerate().map(|(k, v)| v * (1.0 + 0.1 * k as f64)).collect();
        peak = peak.max(f(&y).norm());
    }
    let scale = peak * (PI / a).powf(spec.n as f64 / 2.0);
    let out = integrate_box(&f, spec.n, l, opts.rel_tol * 1e-3 * scale, opts.rel_tol, opts.max_evals);
    Ok(QuadratureResult {
        value: out.value,
        abs_error_estimate: out.error,
        evaluations: out.evaluations,
        converged: out.converged,
        sector_prefactor: spec.sector_prefactor(),
    })
}

/// Importance sampling with the Gaussian factor as proposal, on the same
/// contour as the quadrature. Deterministic in `seed`.
pub fn z_monte_carlo(spec: &MatrixModelSpec, samples: u64, seed: u64) -> Result<QuadratureResult> {
    spec.validate()?;
    if samples == 0 {
        return invalid("samples must be at least 1");
    }
    const BATCH: u64 = 8192;
    let n = spec.n;
    let a = spec.gaussian_coefficient();
    let sigma = (0.5 / a).sqrt();
    let norm = (PI / a).powf(n as f64 / 2.0);
    let shift = spec.contour_shift();
    let batches = samples.div_ceil(BATCH);
    let partial: Vec<(Complex64, f64, u64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = BATCH.min(samples - b * BATCH);
            let mut sum = CompensatedSum::default();
            let mut sq = 0.0;
            let mut z = vec![Complex64::new(0.0, 0.0); n];
            for _ in 0..count {
                let mut yy = 0.0;
                for k in 0..n {
                    let y: f64 = StandardNormal.sample(&mut rng);
                    let y = y * sigma;
                    yy += y * y;
                    z[k] = Complex64::new(y, shift[k]);
                }
                let w = integrand_at(spec, &z) * ((a * yy).exp() * norm);
                sum.add(w);
                sq += w.norm_sqr();
            }
            (sum.value(), sq, count)
        })
        .collect();
    let mut total = CompensatedSum::default();
    let mut sq = 0.0;
    for (s, q, _) in &partial {
        total.add(*s);
        sq += q;
    }
    let nf = samples as f64;
    let mean = total.value() / nf;
    let var = if samples > 1 { ((sq / nf) - mean.norm_sqr()).max(0.0) * nf / (nf - 1.0) } else { f64::INFINITY };
    Ok(QuadratureResult {
        value: mean,
        abs_error_estimate: (var / nf).sqrt(),
        evaluations: samples,
        converged: true,
        sector_prefactor: spec.sector_prefactor(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IZInput {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(with = "crate::serde_complex::scalar")]
    pub beta: Complex64,
}

/// `prod_{i<j} (v_j - v_i)`.
pub fn vandermonde(v: &[f64]) -> f64 {
    let mut acc = 1.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            acc *= v[j] - v[i];
        }
    }
    acc
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn complex_det(mut m: Vec<Vec<Complex64>>) -> Complex64 {
    let n = m.len();
    let mut det = Complex64::new(1.0, 0.0);
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[i][c].norm().total_cmp(&m[j][c].norm())).unwrap();
        if m[piv][c].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != c {
            m.swap(piv, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                let t = m[c][k];
                m[r][k] -= f * t;
            }
        }
    }
    det
}

/// `int_{U(N)} dU e^{beta Tr(U A U^+ B)}` over normalized Haar measure, by the
/// Itzykson-Zuber formula.
pub fn iz_integral(inp: &IZInput) -> Result<Complex64> {
    let n = inp.a.len();
    if n == 0 || inp.b.len() != n {
        return invalid("a and b must be nonempty and of equal length");
    }
    let (da, db) = (vandermonde(&inp.a), vandermonde(&inp.b));
    if da == 0.0 || db == 0.0 {
        return invalid("entries of a and of b must be distinct");
    }
    if inp.beta == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let cn: f64 = (1..n).map(|k| (1..=k).product::<usize>() as f64).product();
    let mat = (0..n).map(|i| (0..n).map(|j| (inp.beta * (inp.a[i] * inp.b[j])).exp()).collect()).collect();
    let mpairs = (n * (n - 1) / 2) as i32;
    Ok(complex_det(mat) * cn / (inp.beta.powi(mpairs) * da * db))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum AppendixConstants {
    /// Constants re-derived so the chain equals the unitary-model integral.
    #[default]
    Rederived,
    /// The constants as printed in the source derivation.
    Printed,
}

/// Unitary-matrix form of the trivial-sector partition function: an IZ
/// integral with `A = diag(1..N)` times explicit Gaussian constants.
pub fn z_unitary_chain(ls: LensSpace, n: usize, g_s: f64, constants: AppendixConstants) -> Result<Complex64> {
    if n < 1 {
        return invalid("N must be at least 1");
    }
    if n > 3 {
        return Err(Error::Budget("unitary chain checked for N <= 3".into()));
    }
    if !(g_s > 0.0) {
        return invalid("g_s must be positive");
    }
    let (p, q, g) = (ls.p() as f64, ls.q() as f64, g_s);
    let nf = n as f64;
    let mp = (n * (n - 1) / 2) as f64;
    let a: Vec<f64> = (1..=n).map(|j| j as f64).collect();
    let tr_a: f64 = a.iter().sum();
    let tr_a2: f64 = a.iter().map(|x| x * x).sum();
    let iz = iz_integral(&IZInput { a: a.clone(), b: a.clone(), beta: Complex64::new(g / (2.0 * p), 0.0) })?;
    let value = match constants {
        AppendixConstants::Rederived => {
            let fact: f64 = (1..=n).map(|j| (1..=j).product::<usize>() as f64).product();
            let omega = PI.powf(mp) / fact;
            let cn: f64 = (1..n).map(|k| (1..=k).product::<usize>() as f64).product();
            let k1 = 4f64.powf(-mp) * vandermonde(&a).powi(2) / (cn * cn) * q.powf(-mp) / omega;
            let gauss = (PI * g * q / p).powf(nf / 2.0) * (PI * g * q / (2.0 * p)).powf(mp);
            let expo = g / (8.0 * p * q)
                * (nf * (nf + 1.0).powi(2) * (q + 1.0).powi(2) / 2.0 + 2.0 * (q * q + 1.0) * tr_a2
                    - 2.0 * (nf + 1.0) * (q + 1.0).powi(2) * tr_a);
            iz * (k1 * gauss * expo.exp())
        }
        AppendixConstants::Printed => {
            let nfact: f64 = (1..=n).product::<usize>() as f64;
            let pref = nfact / (4.0 * PI * q).powf(mp);
            let expo = g / (8.0 * p * q)
                * (((nf - 1.0) / 4.0).powi(2) * nf * (q + 1.0).powi(2) + (q * q + 1.0) * tr_a2
                    - (nf - 1.0) * (q + 1.0).powi(2) * tr_a);
            iz * (pref * expo.exp())
        }
    };
    Ok(value)
}
