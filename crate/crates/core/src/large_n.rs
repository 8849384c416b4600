//! Large-N analysis of the grouped eigenvalue model.
//!
//! The finite-N saddle point is found with a damped Newton iteration on the
//! real part of the force. The `q = 1` spectral curve
//! `g(Z)^2 - 4 e^t Z^p`, `g(Z) = sum_n d_n Z^n`, is built by matching
//! A-periods to filling fractions, and the two are compared eigenvalue cut by
//! eigenvalue cut.
//!
//! Eigenvalues of group `I` sit at `z = lambda + 2 pi i I / p` on the
//! cylinder, and the resolvent is
//! `omega(z) = t int coth((z - lambda)/2) rho(lambda)` with `rho` of unit
//! mass, so `omega -> -t` as `Re z -> -inf`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{build_fan, fan_automorphism, gcd, LensSpace};
use crate::mirror::{curve_invariants, newton_polynomial, q1_specialization, symbolic_moduli, Coefficient, NewtonPolynomial};
use crate::poly;
use crate::quad::integrate;

/// 't Hooft coupling and filling fractions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TooftData {
    pub t: f64,
    pub fillings: Vec<f64>,
}

impl TooftData {
    pub fn new(t: f64, fillings: Vec<f64>) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return invalid("t must be positive");
        }
        if fillings.is_empty() || fillings.iter().any(|s| !(*s >= 0.0)) {
            return invalid("fillings must be a nonempty list of nonnegative numbers");
        }
        let sum: f64 = fillings.iter().sum();
        if (sum - t).abs() > 1e-9 * t {
            return invalid(format!("fillings sum to {sum}, expected t = {t}"));
        }
        Ok(Self { t, fillings })
    }

    /// `S_0 = s0`, `S_1 = ... = S_{p-1} = (t - s0)/(p - 1)`.
    pub fn symmetric(p: u32, t: f64, s0: f64) -> Result<Self> {
        if p == 0 {
            return invalid("p must be positive");
        }
        if p == 1 {
            return Self::new(t, vec![t]);
        }
        if !(s0 > 0.0 && s0 < t) {
            return invalid("need 0 < S0 < t");
        }
        let rest = (t - s0) / (p - 1) as f64;
        let mut f = vec![rest; p as usize];
        f[0] = s0;
        Self::new(t, f)
    }

    pub fn p(&self) -> usize {
        self.fillings.len()
    }

    pub fn is_symmetric(&self) -> bool {
        let f = &self.fillings;
        f.len() < 3 || f[1..].iter().all(|s| (s - f[1]).abs() <= 1e-12 * self.t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleProblem {
    pub p: u32,
    pub q: u32,
    pub n: usize,
    pub data: TooftData,
    pub tol: f64,
    pub max_iter: usize,
}

impl SaddleProblem {
    pub fn new(p: u32, q: u32, n: usize, data: TooftData) -> Self {
        Self { p, q, n, data, tol: 1e-10, max_iter: 200 }
    }

    pub fn symmetric(p: u32, q: u32, n: usize, t: f64, s0: f64) -> Result<Self> {
        Ok(Self::new(p, q, n, TooftData::symmetric(p, t, s0)?))
    }

    /// `N_I = round(N S_I / t)`.
    pub fn group_sizes(&self) -> Vec<usize> {
        self.data.fillings.iter().map(|s| (self.n as f64 * s / self.data.t).round() as usize).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.p < 1 || self.q < 1 || gcd(self.p as i64, self.q as i64) != 1 {
            return invalid(format!("({}, {}) is not a coprime pair", self.p, self.q));
        }
        if self.data.p() != self.p as usize {
            return invalid(format!("expected {} fillings, got {}", self.p, self.data.p()));
        }
        if self.n < 2 * self.p as usize {
            return invalid("need N >= 2p");
        }
        if !(self.tol > 0.0) {
            return invalid("tolerance must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumConfig {
    pub p: u32,
    pub q: u32,
    pub n: usize,
    pub t: f64,
    /// Sorted eigenvalues of each group.
    pub groups: Vec<Vec<f64>>,
    /// Max norm of the real saddle equations.
    pub residual: f64,
    /// Max norm of the imaginary part of the force, which a genuine real
    /// saddle must cancel.
    pub imaginary_residual: f64,
    /// `(t/N) N_I`.
    pub realized_fillings: Vec<f64>,
    pub iterations: usize,
}

impl EquilibriumConfig {
    /// Largest `|lambda_k + lambda_{n-1-k}|` over all groups.
    pub fn parity_defect(&self) -> f64 {
        self.groups
            .iter()
            .flat_map(|g| (0..g.len()).map(move |k| (g[k] + g[g.len() - 1 - k]).abs()))
            .fold(0.0, f64::max)
    }

    /// The filling data the solved configuration actually realises.
    pub fn realized_data(&self) -> TooftData {
        TooftData { t: self.realized_fillings.iter().sum(), fillings: self.realized_fillings.clone() }
    }
}

/// `(F, dF/dDelta, Im F)` for the pair force between eigenvalues in groups
/// separated by the phase `phi`; `phi = 0` is the same-group `coth(Delta/2)`.
fn pair_kernel(delta: f64, phi1: f64, phiq: f64, same: bool) -> (f64, f64, f64) {
    if same {
        let s = (0.5 * delta).sinh();
        return (1.0 / (0.5 * delta).tanh(), -0.5 / (s * s), 0.0);
    }
    let (ch, sh) = (delta.cosh(), delta.sinh());
    let mut out = (0.0, 0.0, 0.0);
    for phi in [phi1, phiq] {
        let den = ch - phi.cos();
        out.0 += 0.5 * sh / den;
        out.1 += 0.5 * (1.0 - ch * phi.cos()) / (den * den);
        out.2 -= 0.5 * phi.sin() / den;
    }
    out
}

struct Forces {
    residual: DVector<f64>,
    jacobian: DMatrix<f64>,
    imaginary: Vec<f64>,
}

fn forces(lam: &[f64], grp: &[usize], p: u32, q: u32, c: f64) -> Forces {
    let n = lam.len();
    let pf = p as f64;
    let rows: Vec<(f64, Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; n];
            let (mut f, mut df_sum, mut im) = (0.0, 0.0, 0.0);
            for j in 0..n {
                if j == i {
                    continue;
                }
                let dij = grp[i] as f64 - grp[j] as f64;
                let (phi1, phiq) = (2.0 * PI * dij / pf, 2.0 * PI * q as f64 * dij / pf);
                let (k, dk, ik) = pair_kernel(lam[i] - lam[j], phi1, phiq, grp[i] == grp[j]);
                f += k;
                im += ik;
                df_sum += dk;
                row[j] = c * dk;
            }
            row[i] = pf - c * df_sum;
            (pf * lam[i] - c * f, row, c * im)
        })
        .collect();
    let mut jacobian = DMatrix::zeros(n, n);
    let mut residual = DVector::zeros(n);
    let mut imaginary = vec![0.0; n];
    for (i, (r, row, im)) in rows.into_iter().enumerate() {
        residual[i] = r;
        imaginary[i] = im;
        for (j, v) in row.into_iter().enumerate() {
            jacobian[(i, j)] = v;
        }
    }
    Forces { residual, jacobian, imaginary }
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Quantiles `(k + 1/2)/n` of the semicircle law on `[-1, 1]`.
fn semicircle_quantiles(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let u = (k as f64 + 0.5) / n as f64;
            let (mut lo, mut hi) = (-1.0f64, 1.0f64);
            for _ in 0..60 {
                let m = 0.5 * (lo + hi);
                let cdf = 0.5 + (m * (1.0 - m * m).sqrt() + m.asin()) / PI;
                if cdf < u {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

fn ordered(lam: &[f64], grp: &[usize]) -> bool {
    lam.windows(2).zip(grp.windows(2)).all(|(l, g)| g[0] != g[1] || l[0] < l[1])
}

pub fn saddle_solve(problem: &SaddleProblem) -> Result<EquilibriumConfig> {
    problem.validate()?;
    let sizes = problem.group_sizes();
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return invalid("all groups are empty");
    }
    let c = problem.data.t / problem.n as f64;
    let realized: Vec<f64> = sizes.iter().map(|&k| c * k as f64).collect();
    let mut lam = Vec::with_capacity(total);
    let mut grp = Vec::with_capacity(total);
    for (i, &k) in sizes.iter().enumerate() {
        let r = 2.0 * (realized[i] / problem.p as f64).sqrt();
        lam.extend(semicircle_quantiles(k).into_iter().map(|u| r * u));
        grp.extend(std::iter::repeat_n(i, k));
    }
    let mut f = forces(&lam, &grp, problem.p, problem.q, c);
    let mut res = max_abs(&f.residual);
    let mut damping = 1.0f64;
    let mut iterations = 0;
    while res >= problem.tol {
        if iterations >= problem.max_iter {
            return Err(Error::Numeric(format!("saddle solver stalled at residual {res:.3e} after {iterations} iterations")));
        }
        iterations += 1;
        let step = f
            .jacobian
            .clone()
            .lu()
            .solve(&f.residual)
            .ok_or_else(|| Error::Numeric("singular Jacobian in saddle solver".into()))?;
        let mut s = damping;
        loop {
            let trial: Vec<f64> = lam.iter().zip(step.iter()).map(|(x, d)| x - s * d).collect();
            if ordered(&trial, &grp) {
                let ft = forces(&trial, &grp, problem.p, problem.q, c);
                let rt = max_abs(&ft.residual);
                if rt.is_finite() && rt < res {
                    lam = trial;
                    f = ft;
                    res = rt;
                    break;
                }
            }
            s *= 0.5;
            if s < 1e-12 {
                return Err(Error::Numeric("eigenvalue collision: damping exhausted".into()));
            }
        }
        damping = (2.0 * s).min(1.0);
    }
    let mut groups = vec![Vec::new(); problem.p as usize];
    for (x, g) in lam.iter().zip(&grp) {
        groups[*g].push(*x);
    }
    Ok(EquilibriumConfig {
        p: problem.p,
        q: problem.q,
        n: problem.n,
        t: problem.data.t,
        groups,
        residual: res,
        imaginary_residual: f.imaginary.iter().fold(0.0, |m, x| m.max(x.abs())),
        realized_fillings: realized,
        iterations,
    })
}

/// An eigenvalue density of one group, sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Density {
    pub group: usize,
    pub support: (f64, f64),
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// The mass the density is normalised to.
    pub filling: f64,
}

impl Density {
    /// Sample `f` on `n` equally spaced points of `support`.
    pub fn from_fn(group: usize, support: (f64, f64), n: usize, f: impl Fn(f64) -> f64, filling: f64) -> Self {
        let grid: Vec<f64> = (0..n).map(|k| support.0 + (support.1 - support.0) * k as f64 / (n - 1) as f64).collect();
        let values = grid.iter().map(|&x| f(x)).collect();
        Self { group, support, grid, values, filling }
    }

    /// Piecewise-linear interpolation, zero off the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let g = &self.grid;
        if g.is_empty() || x < g[0] || x > g[g.len() - 1] {
            return 0.0;
        }
        let k = g.partition_point(|&y| y <= x).clamp(1, g.len() - 1);
        let (x0, x1) = (g[k - 1], g[k]);
        if x1 == x0 {
            return self.values[k];
        }
        let s = (x - x0) / (x1 - x0);
        self.values[k - 1] * (1.0 - s) + self.values[k] * s
    }

    /// Trapezoid rule on the grid.
    pub fn integral(&self) -> f64 {
        self.grid.windows(2).zip(self.values.windows(2)).map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1])).sum()
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.support.1 - self.support.0)
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.support.0 + self.support.1)
    }
}

const AIRY_ZEROS: [f64; 5] = [2.338_107_410_5, 4.087_949_444_1, 5.520_559_828_1, 6.786_708_090_1, 7.944_133_587_1];

/// Soft-edge estimate from the five outermost eigenvalues `y_1 > y_2 > ...`:
/// least-squares fit of `y_k = a - c alpha_k + e alpha_k^2`, `alpha_k` the
/// Airy zeros.
fn airy_edge(y: &[f64]) -> f64 {
    let a = DMatrix::from_fn(5, 3, |k, j| AIRY_ZEROS[k].powi(j as i32));
    let b = DVector::from_row_slice(&y[..5]);
    let ata = a.transpose() * &a;
    let atb = a.transpose() * b;
    match ata.lu().solve(&atb) {
        Some(x) => x[0],
        None => y[0],
    }
}

/// Spacing estimate `rho = (t/N)/(lambda_{k+1} - lambda_k)` at midpoints,
/// vanishing at the extrapolated edges, normalised to the realised filling.
pub fn empirical_density(cfg: &EquilibriumConfig, group: usize) -> Result<Density> {
    let xs = cfg.groups.get(group).ok_or_else(|| Error::InvalidInput(format!("no group {group}")))?;
    if xs.len() < 2 {
        return invalid(format!("group {group} has fewer than two eigenvalues"));
    }
    let n = xs.len();
    let (lo, hi) = if n >= 6 {
        let right: Vec<f64> = xs.iter().rev().take(5).copied().collect();
        let left: Vec<f64> = xs.iter().take(5).map(|x| -x).collect();
        (-airy_edge(&left), airy_edge(&right))
    } else {
        (xs[0] - 0.5 * (xs[1] - xs[0]), xs[n - 1] + 0.5 * (xs[n - 1] - xs[n - 2]))
    };
    let c = cfg.t / cfg.n as f64;
    let mut grid = vec![lo];
    let mut values = vec![0.0];
    for w in xs.windows(2) {
        grid.push(0.5 * (w[0] + w[1]));
        values.push(c / (w[1] - w[0]));
    }
    grid.push(hi);
    values.push(0.0);
    let filling = cfg.realized_fillings[group];
    let mut d = Density { group, support: (lo, hi), grid, values, filling };
    let scale = filling / d.integral();
    d.values.iter_mut().for_each(|v| *v *= scale);
    Ok(d)
}

/// The `q = 1` spectral curve with palindromic real coefficients
/// `d_0 = d_p = 1`, `d_n = d_{p-n}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralCurveQ1 {
    pub p: u32,
    pub t: f64,
    /// `d_0, ..., d_p`.
    pub d: Vec<f64>,
    /// The fillings the coefficients were matched to.
    pub fillings: Vec<f64>,
}

/// One branch cut, given by its two branch points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub group: usize,
    /// Branch points in the `Z` plane, inner one first.
    #[serde(with = "crate::serde_complex::pair")]
    pub branch_points: [Complex64; 2],
    /// The same points on the cylinder, `z = log Z` with `Im z` near `2 pi I/p`.
    #[serde(with = "crate::serde_complex::pair")]
    pub ends: [Complex64; 2],
}

impl Cut {
    pub fn center(&self) -> Complex64 {
        0.5 * (self.ends[0] + self.ends[1])
    }

    pub fn half(&self) -> Complex64 {
        0.5 * (self.ends[1] - self.ends[0])
    }
}

/// Cuts plus the sign fixing the physical square-root branch.
#[derive(Clone, Debug)]
pub struct CurveSheet {
    pub cuts: Vec<Cut>,
    sign: f64,
    g: Vec<Complex64>,
    t: f64,
}

impl SpectralCurveQ1 {
    fn from_coefficients(p: u32, t: f64, d: Vec<f64>, fillings: Vec<f64>) -> Self {
        Self { p, t, d, fillings }
    }

    /// Moduli `d_1..d_{p-1}` of the `q = 1` Newton polynomial with the same
    /// zero set. The Newton form carries the opposite sign.
    pub fn mirror_coefficients(&self) -> Vec<f64> {
        self.d[1..self.p as usize].iter().map(|x| -x).collect()
    }

    pub fn mirror_polynomial(&self) -> Result<NewtonPolynomial> {
        let d: Vec<Coefficient> = self.mirror_coefficients().into_iter().map(Coefficient::real).collect();
        q1_specialization(self.p, self.t, &d)
    }

    pub fn g_coefficients(&self) -> Vec<Complex64> {
        self.d.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    /// `g^2 - 4 e^t Z^p`.
    pub fn discriminant(&self) -> Vec<Complex64> {
        let g = self.g_coefficients();
        let mut d = poly::mul(&g, &g);
        d[self.p as usize] -= 4.0 * self.t.exp();
        d
    }

    /// Pair the `2p` branch points to cuts by nearest ray `arg Z = 2 pi I/p`.
    pub fn sheet(&self) -> Result<CurveSheet> {
        let p = self.p as usize;
        let roots = poly::roots(&self.discriminant())?;
        let mut by_cut: Vec<Vec<Complex64>> = vec![Vec::new(); p];
        for r in roots {
            let ray = 2.0 * PI / p as f64;
            let k = (r.arg().rem_euclid(2.0 * PI) / ray).round() as usize % p;
            by_cut[k].push(r);
        }
        let mut cuts = Vec::with_capacity(p);
        for (i, mut pts) in by_cut.into_iter().enumerate() {
            if pts.len() != 2 {
                return Err(Error::Numeric(format!("branch points do not pair up: cut {i} has {}", pts.len())));
            }
            pts.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
            let base = 2.0 * PI * i as f64 / p as f64;
            let ends = [0, 1].map(|k| {
                let z = pts[k];
                let off = (z.arg() - base + PI).rem_euclid(2.0 * PI) - PI;
                Complex64::new(z.norm().ln(), base + off)
            });
            if (ends[1] - ends[0]).norm() < 1e-12 {
                return Err(Error::Numeric(format!("cut {i} has collapsed")));
            }
            cuts.push(Cut { group: i, branch_points: [pts[0], pts[1]], ends });
        }
        let mut sheet = CurveSheet { cuts, sign: 1.0, g: self.g_coefficients(), t: self.t };
        let s0 = sheet.sqrt(Complex64::new(0.0, 0.0));
        sheet.sign = if s0.re >= 0.0 { 1.0 } else { -1.0 };
        Ok(sheet)
    }

    /// `(1/4 pi i) oint omega dz` around every cut.
    pub fn a_periods(&self) -> Result<Vec<f64>> {
        let sheet = self.sheet()?;
        (0..self.p as usize).map(|i| sheet.a_period(i).map(|v| v.re)).collect()
    }
}

impl CurveSheet {
    /// The square root of the discriminant with cuts on the straight segments
    /// between paired branch points and value `+1` at `Z = 0`.
    pub fn sqrt(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(self.sign, 0.0);
        for c in &self.cuts {
            let m = 0.5 * (c.branch_points[0] + c.branch_points[1]);
            let h = 0.5 * (c.branch_points[1] - c.branch_points[0]);
            let w = h / (z - m);
            acc *= (z - m) * (1.0 - w * w).sqrt();
        }
        acc
    }

    pub fn g(&self, z: Complex64) -> Complex64 {
        poly::eval(&self.g, z)
    }

    /// `e^{omega/2} = e^{-t/2} (g + sqrt)/2` at the cylinder point `z`.
    pub fn half_exp_omega(&self, z: Complex64) -> Complex64 {
        let big = z.exp();
        (-0.5 * self.t).exp() * 0.5 * (self.g(big) + self.sqrt(big))
    }

    /// Counter-clockwise contour integral `(1/4 pi i) oint omega dz` on a
    /// confocal ellipse around cut `i`, trapezoid rule with node doubling.
    pub fn a_period(&self, i: usize) -> Result<Complex64> {
        let cut = self.cuts.get(i).ok_or_else(|| Error::InvalidInput(format!("no cut {i}")))?;
        let p = self.cuts.len() as f64;
        let (c, hv) = (cut.center(), cut.half());
        let rho0 = (0.5 * (PI / p) / hv.norm()).min(1.0).asinh();
        let rule = |n: usize| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut prev_im: Option<f64> = None;
            for k in 0..n {
                let th = 2.0 * PI * k as f64 / n as f64;
                let w = Complex64::new(rho0, th);
                let z = c + hv * w.cosh();
                let dz = hv * Complex64::i() * w.sinh();
                let mut l = self.half_exp_omega(z).ln();
                if let Some(pi_) = prev_im {
                    l.im += 2.0 * PI * ((pi_ - l.im) / (2.0 * PI)).round();
                }
                prev_im = Some(l.im);
                acc += 2.0 * l * dz;
            }
            acc * (2.0 * PI / n as f64) / (4.0 * PI * Complex64::i())
        };
        let mut n = 64;
        let mut prev = rule(n);
        while n < 1 << 18 {
            n *= 2;
            let next = rule(n);
            if (next - prev).norm() <= 1e-14 * next.norm() + 1e-16 {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::Numeric(format!("A-period of cut {i} did not converge")))
    }

    /// `rho(x) = |arg((g + s)/(g - s))| / (2 pi)` on the cut, `s^2` the
    /// discriminant. Branch-free, so it can be evaluated on the cut itself.
    pub fn density_at(&self, z: Complex64) -> f64 {
        let big = z.exp();
        let g = self.g(big);
        let s = (g * g - 4.0 * self.t.exp() * big.powu(self.cuts.len() as u32)).sqrt();
        ((g + s) / (g - s)).arg().abs() / (2.0 * PI)
    }

    /// Mass on cut `i`, by adaptive quadrature in `x = c - h cos theta`.
    pub fn cut_mass(&self, i: usize) -> Result<f64> {
        let cut = self.cuts.get(i).ok_or_else(|| Error::InvalidInput(format!("no cut {i}")))?;
        let (c, hv) = (cut.center(), cut.half());
        let out = integrate(
            |th| {
                let z = c - hv * th.cos();
                Complex64::new(self.density_at(z) * hv.norm() * th.sin(), 0.0)
            },
            0.0,
            PI,
            &[],
            1e-15,
            1e-13,
            1_000_000,
        );
        Ok(out.value.re)
    }

    /// Largest jump of `e^{omega/2} + Z^p e^{-omega/2}` across cut `i`,
    /// sampled at `samples` interior points with offset `eps`.
    pub fn single_valuedness_defect(&self, i: usize, samples: usize, eps: f64) -> Result<f64> {
        let cut = self.cuts.get(i).ok_or_else(|| Error::InvalidInput(format!("no cut {i}")))?;
        let (c, hv) = (cut.center(), cut.half());
        let normal = Complex64::i() * hv / hv.norm();
        let p = self.cuts.len() as i32;
        let mut worst: f64 = 0.0;
        for k in 1..=samples {
            let s = -1.0 + 2.0 * k as f64 / (samples + 1) as f64;
            let z = c + hv * s;
            let side = |z: Complex64| {
                let x = self.half_exp_omega(z);
                x + z.exp().powi(p) / x
            };
            let (up, down) = (side(z + normal * eps), side(z - normal * eps));
            worst = worst.max((up - down).norm() / up.norm().max(1.0));
        }
        Ok(worst)
    }
}

fn palindromic(p: usize, x: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; p + 1];
    d[0] = 1.0;
    d[p] = 1.0;
    for (k, v) in x.iter().enumerate() {
        d[k + 1] = *v;
        d[p - k - 1] = *v;
    }
    d
}

/// Curve with symmetric fillings `S_0 = s0`, `S_I = (t - s0)/(p - 1)`.
pub fn build_curve_q1(p: u32, t: f64, s0: f64) -> Result<SpectralCurveQ1> {
    build_curve_q1_fillings(&TooftData::symmetric(p, t, s0)?)
}

/// Curve matched to fillings with `S_I = S_{p-I}`, by Newton iteration on the
/// independent coefficients `d_1..d_{[p/2]}` and continuation from the
/// democratic point `d = 0`.
pub fn build_curve_q1_fillings(data: &TooftData) -> Result<SpectralCurveQ1> {
    let p = data.p();
    let t = data.t;
    let f = &data.fillings;
    for i in 1..p {
        if (f[i] - f[p - i]).abs() > 1e-12 * t {
            return invalid("fillings must satisfy S_I = S_{p-I}");
        }
    }
    if f.iter().any(|&s| s <= 0.0) {
        return invalid("every filling must be positive");
    }
    let k = p / 2;
    let demo = t / p as f64;
    let periods = |x: &[f64]| -> Result<Vec<f64>> {
        let curve = SpectralCurveQ1::from_coefficients(p as u32, t, palindromic(p, x), vec![]);
        let sheet = curve.sheet()?;
        (1..=k).map(|i| sheet.a_period(i).map(|v| v.re)).collect()
    };
    let mut x = vec![0.0; k];
    let mut lam = 0.0f64;
    let mut h = 0.25f64;
    while lam < 1.0 {
        let next = (lam + h).min(1.0);
        let target: Vec<f64> = (1..=k).map(|i| demo + next * (f[i] - demo)).collect();
        match newton_periods(&periods, &x, &target, t) {
            Ok(y) => {
                x = y;
                lam = next;
                h = (2.0 * h).min(0.5);
            }
            Err(e) => {
                h *= 0.5;
                if h < 1e-4 {
                    return Err(Error::Numeric(format!("curve Newton iteration diverged: {e}")));
                }
            }
        }
    }
    Ok(SpectralCurveQ1::from_coefficients(p as u32, t, palindromic(p, &x), f.clone()))
}

fn newton_periods(periods: &dyn Fn(&[f64]) -> Result<Vec<f64>>, x0: &[f64], target: &[f64], t: f64) -> Result<Vec<f64>> {
    let k = x0.len();
    let resid = |x: &[f64]| -> Result<DVector<f64>> {
        let s = periods(x)?;
        Ok(DVector::from_iterator(k, s.iter().zip(target).map(|(a, b)| a - b)))
    };
    let mut x = x0.to_vec();
    let mut r = resid(&x)?;
    let tol = 1e-12 * t.max(1e-2);
    for _ in 0..40 {
        let norm = r.amax();
        if norm < tol {
            return Ok(x);
        }
        let mut jac = DMatrix::zeros(k, k);
        for j in 0..k {
            let step = 1e-6 * x[j].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += step;
            xm[j] -= step;
            let col = (resid(&xp)? - resid(&xm)?) / (2.0 * step);
            jac.set_column(j, &col);
        }
        let dx = jac.lu().solve(&r).ok_or_else(|| Error::Numeric("singular period Jacobian".into()))?;
        let mut s = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, b)| a - s * b).collect();
            if let Ok(rt) = resid(&trial) {
                if rt.amax() < norm {
                    x = trial;
                    r = rt;
                    break;
                }
            }
            s *= 0.5;
            if s < 1e-6 {
                return Err(Error::Numeric(format!("line search failed at residual {norm:.3e}")));
            }
        }
    }
    Err(Error::Numeric("period matching did not converge".into()))
}

/// Density on cut `group`, sampled on a cosine grid between the branch points.
pub fn density_from_curve(curve: &SpectralCurveQ1, group: usize) -> Result<Density> {
    let sheet = curve.sheet()?;
    let cut = *sheet.cuts.get(group).ok_or_else(|| Error::InvalidInput(format!("no cut {group}")))?;
    let (c, hv) = (cut.center(), cut.half());
    let m = 400;
    let mut grid = Vec::with_capacity(m + 1);
    let mut values = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let z = c - hv * (PI * k as f64 / m as f64).cos();
        grid.push(z.re);
        values.push(if k == 0 || k == m { 0.0 } else { sheet.density_at(z) });
    }
    let filling = curve.fillings.get(group).copied().unwrap_or_else(|| sheet.cut_mass(group).unwrap_or(f64::NAN));
    Ok(Density { group, support: (cut.ends[0].re, cut.ends[1].re), grid, values, filling })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QPair {
    pub q_a: u32,
    pub q_b: u32,
    /// Largest endpoint shift over groups, relative to the cut half-width.
    pub endpoint_discrepancy: f64,
    /// Largest density difference on the middle 80% of each cut, relative to
    /// the peak density.
    pub density_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QIndependenceReport {
    pub p: u32,
    pub n: usize,
    pub data: TooftData,
    pub q_list: Vec<u32>,
    pub pairs: Vec<QPair>,
    pub max_endpoint_discrepancy: f64,
    pub max_density_distance: f64,
    pub max_residual: f64,
    pub max_imaginary_residual: f64,
    /// `None` off the symmetric slice, where nothing is asserted.
    pub pass: Option<bool>,
}

pub const ENDPOINT_TOLERANCE: f64 = 0.01;
pub const DENSITY_TOLERANCE: f64 = 0.02;

fn compare_densities(a: &[Density], b: &[Density]) -> (f64, f64) {
    let mut ends: f64 = 0.0;
    let mut dist: f64 = 0.0;
    for (da, db) in a.iter().zip(b) {
        let hw = da.half_width();
        ends = ends.max((da.support.0 - db.support.0).abs() / hw).max((da.support.1 - db.support.1).abs() / hw);
        let peak = da.values.iter().fold(0.0f64, |m, v| m.max(*v));
        let (lo, hi) = (da.center() - 0.8 * hw, da.center() + 0.8 * hw);
        for k in 0..=200 {
            let x = lo + (hi - lo) * k as f64 / 200.0;
            dist = dist.max((da.eval(x) - db.eval(x)).abs() / peak);
        }
    }
    (ends, dist)
}

fn q_report(p: u32, q_list: &[u32], n: usize, data: TooftData, assert: bool) -> Result<QIndependenceReport> {
    if q_list.is_empty() {
        return invalid("q list is empty");
    }
    let solved: Vec<(u32, EquilibriumConfig)> = q_list
        .iter()
        .map(|&q| saddle_solve(&SaddleProblem::new(p, q, n, data.clone())).map(|c| (q, c)))
        .collect::<Result<_>>()?;
    let mut densities = Vec::new();
    for (_, cfg) in &solved {
        let d: Vec<Density> = (0..p as usize)
            .filter(|&i| cfg.groups[i].len() >= 2)
            .map(|i| empirical_density(cfg, i))
            .collect::<Result<_>>()?;
        densities.push(d);
    }
    let mut pairs = Vec::new();
    for a in 0..solved.len() {
        for b in a + 1..solved.len() {
            let (e, d) = compare_densities(&densities[a], &densities[b]);
            pairs.push(QPair { q_a: solved[a].0, q_b: solved[b].0, endpoint_discrepancy: e, density_distance: d });
        }
    }
    let max_e = pairs.iter().map(|x| x.endpoint_discrepancy).fold(0.0, f64::max);
    let max_d = pairs.iter().map(|x| x.density_distance).fold(0.0, f64::max);
    Ok(QIndependenceReport {
        p,
        n,
        data,
        q_list: q_list.to_vec(),
        max_endpoint_discrepancy: max_e,
        max_density_distance: max_d,
        max_residual: solved.iter().map(|(_, c)| c.residual).fold(0.0, f64::max),
        max_imaginary_residual: solved.iter().map(|(_, c)| c.imaginary_residual).fold(0.0, f64::max),
        pass: assert.then_some(max_e < ENDPOINT_TOLERANCE && max_d < DENSITY_TOLERANCE),
        pairs,
    })
}

/// Solve at every `q` with the same symmetric fillings and compare.
pub fn q_independence_test(p: u32, q_list: &[u32], n: usize, t: f64, s0: f64) -> Result<QIndependenceReport> {
    q_report(p, q_list, n, TooftData::symmetric(p, t, s0)?, true)
}

/// Same comparison at arbitrary fillings; reports numbers only.
pub fn q_independence_explore(p: u32, q_list: &[u32], n: usize, data: TooftData) -> Result<QIndependenceReport> {
    let symmetric = data.is_symmetric();
    q_report(p, q_list, n, data, symmetric)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SokhotskiReport {
    pub eps: Vec<f64>,
    /// `max |C_+ + C_- - 2 pv|` per `eps`.
    pub sum_errors: Vec<f64>,
    /// `max |C_+ - C_- + 2 pi i rho(x0)|` per `eps`.
    pub delta_errors: Vec<f64>,
    /// Both errors after linear extrapolation to `eps = 0`.
    pub extrapolated: f64,
}

pub const SOKHOTSKI_EPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Check the regularised `coth(x0 - y +- i eps)` convolutions against a
/// density against the principal value and delta-function limits.
pub fn sokhotski_check(density: &Density, points: &[f64]) -> SokhotskiReport {
    let nodes: Vec<f64> = density.grid.clone();
    sokhotski_check_fn(&|x| density.eval(x), density.support, &nodes, points)
}

/// As [`sokhotski_check`] for a density given as a function on `support`.
pub fn sokhotski_check_fn(f: &dyn Fn(f64) -> f64, support: (f64, f64), nodes: &[f64], points: &[f64]) -> SokhotskiReport {
    let (a, b) = support;
    let eps = SOKHOTSKI_EPS.to_vec();
    let mut sum_errors = vec![0.0f64; eps.len()];
    let mut delta_errors = vec![0.0f64; eps.len()];
    let mut extrapolated: f64 = 0.0;
    for &x0 in points {
        let f0 = f(x0);
        let mut breaks: Vec<f64> = nodes.iter().copied().filter(|&y| y > a && y < b).collect();
        breaks.push(x0);
        let conv = |kernel: &dyn Fn(f64) -> Complex64| {
            integrate(|y| kernel(y) * (f(y) - f0), a, b, &breaks, 1e-15, 1e-13, 20_000_000).value
        };
        let pv = conv(&|y| Complex64::new(1.0 / (x0 - y).tanh(), 0.0))
            + f0 * ((x0 - a).sinh().abs().ln() - (x0 - b).sinh().abs().ln());
        let mut sums = Vec::new();
        let mut deltas = Vec::new();
        for (k, &e) in eps.iter().enumerate() {
            let side = |s: f64| {
                let ie = Complex64::new(0.0, s * e);
                conv(&|y| 1.0 / (Complex64::new(x0 - y, 0.0) + ie).tanh())
                    + f0 * ((Complex64::new(x0 - a, 0.0) + ie).sinh().ln() - (Complex64::new(x0 - b, 0.0) + ie).sinh().ln())
            };
            let (plus, minus) = (side(1.0), side(-1.0));
            let s = plus + minus - 2.0 * pv;
            let d = plus - minus + Complex64::new(0.0, 2.0 * PI * f0);
            sum_errors[k] = sum_errors[k].max(s.norm());
            delta_errors[k] = delta_errors[k].max(d.norm());
            sums.push(s);
            deltas.push(d);
        }
        let m = eps.len();
        let (e1, e2) = (eps[m - 2], eps[m - 1]);
        for v in [&sums, &deltas] {
            let lim = (e1 * v[m - 1] - e2 * v[m - 2]) / (e1 - e2);
            extrapolated = extrapolated.max(lim.norm());
        }
    }
    SokhotskiReport { eps, sum_errors, delta_errors, extrapolated }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "DUALITY-CONSISTENT")]
    DualityConsistent,
    #[serde(rename = "OBSTRUCTED")]
    Obstructed,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::DualityConsistent => "DUALITY-CONSISTENT",
            Verdict::Obstructed => "OBSTRUCTED",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim1Report {
    pub p: u32,
    pub q: u32,
    pub mirror_genus: u64,
    pub mirror_punctures: u64,
    pub mirror_width: u64,
    pub mirror_hyperelliptic: bool,
    /// Genus and width of the `q`-independent constrained curve family.
    pub constrained_genus: u64,
    pub constrained_width: u64,
    /// Whether the fan of `L(p,q)` is lattice-equivalent to that of `L(p,1)`.
    pub equivalent_to_q1: bool,
    pub verdict: Verdict,
}

/// The constrained large-N curve is hyperelliptic of genus `p - 1` for every
/// `q`; the mirror of `L(p,q)` contains such a family only if its Newton
/// polygon has lattice width at most two.
pub fn claim1_report(p: u32, q: u32) -> Result<Claim1Report> {
    let ls = LensSpace::new(p, q)?;
    let np = newton_polynomial(ls, &symbolic_moduli(p))?;
    let inv = curve_invariants(&np);
    let width = crate::lattice::lattice_width(&np.support());
    let d: Vec<Coefficient> = (1..p).map(|n| Coefficient::symbol(format!("d_{n}"))).collect();
    let constrained = q1_specialization(p, 1.0, &d)?;
    let cinv = curve_invariants(&constrained);
    let cwidth = crate::lattice::lattice_width(&constrained.support());
    let equivalent = fan_automorphism(&build_fan(ls), &build_fan(LensSpace::new(p, 1)?)).is_some();
    let consistent = inv.hyperelliptic_family && inv.genus == cinv.genus;
    Ok(Claim1Report {
        p,
        q,
        mirror_genus: inv.genus,
        mirror_punctures: inv.punctures,
        mirror_width: width,
        mirror_hyperelliptic: inv.hyperelliptic_family,
        constrained_genus: cinv.genus,
        constrained_width: cwidth,
        equivalent_to_q1: equivalent,
        verdict: if consistent { Verdict::DualityConsistent } else { Verdict::Obstructed },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tooft_data_checks() {
        assert!(TooftData::new(1.0, vec![0.5, 0.4]).is_err());
        assert!(TooftData::symmetric(3, 1.0, 1.5).is_err());
        let d = TooftData::symmetric(5, 1.0, 0.2).unwrap();
        assert!(d.is_symmetric());
        assert!(!TooftData::new(1.0, vec![0.2, 0.5, 0.3]).unwrap().is_symmetric());
    }

    #[test]
    fn kernel_derivative_matches_difference() {
        for (d, phi, same) in [(0.7, 0.0, true), (-0.3, 1.2, false), (1.5, 2.5, false)] {
            let h = 1e-6;
            let (_, dk, _) = pair_kernel(d, phi, phi, same);
            let fd = (pair_kernel(d + h, phi, phi, same).0 - pair_kernel(d - h, phi, phi, same).0) / (2.0 * h);
            assert!((dk - fd).abs() < 1e-7, "{dk} {fd}");
        }
    }

    #[test]
    fn one_group_solve_is_symmetric() {
        let cfg = saddle_solve(&SaddleProblem::new(1, 1, 40, TooftData::new(1.0, vec![1.0]).unwrap())).unwrap();
        assert!(cfg.residual < 1e-10);
        assert!(cfg.parity_defect() < 1e-9);
        let d = empirical_density(&cfg, 0).unwrap();
        assert!((d.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_group_is_allowed() {
        let data = TooftData::new(1.0, vec![1.0, 0.0]).unwrap();
        let cfg = saddle_solve(&SaddleProblem::new(2, 1, 30, data)).unwrap();
        assert!(cfg.groups[1].is_empty());
        assert!(cfg.residual < 1e-10);
        assert!(empirical_density(&cfg, 1).is_err());
    }

    #[test]
    fn p2_curve_matches_closed_form() {
        let curve = build_curve_q1(2, 0.5, 0.25).unwrap();
        assert!(curve.d[1].abs() < 1e-12);
        let sheet = curve.sheet().unwrap();
        let a = (0.25f64).exp().acosh();
        assert!((sheet.cuts[0].ends[1].re - a).abs() < 1e-12);
        let curve = build_curve_q1(2, 1.0, 0.3).unwrap();
        let g = curve.d[1];
        let sheet = curve.sheet().unwrap();
        let a = ((0.5f64).exp() - g / 2.0).acosh();
        assert!((sheet.cuts[0].ends[1].re - a).abs() < 1e-10);
        let x = 0.3 * a;
        let closed = ((2.0 * x.cosh() + g) / (2.0 * (0.5f64).exp())).acos() / PI;
        assert!((sheet.density_at(Complex64::new(x, 0.0)) - closed).abs() < 1e-12);
    }

    #[test]
    fn periods_round_trip() {
        for (p, t, s0) in [(2, 1.0, 0.3), (3, 1.0, 0.5), (4, 0.8, 0.1), (5, 1.0, 0.4)] {
            let curve = build_curve_q1(p, t, s0).unwrap();
            let per = curve.a_periods().unwrap();
            for (a, b) in per.iter().zip(&curve.fillings) {
                assert!((a - b).abs() < 1e-9, "p={p}: {per:?} vs {:?}", curve.fillings);
            }
            let sheet = curve.sheet().unwrap();
            for i in 0..p as usize {
                assert!((sheet.cut_mass(i).unwrap() - curve.fillings[i]).abs() < 1e-8);
                let sv = sheet.single_valuedness_defect(i, 9, 1e-6).unwrap();
                assert!(sv < 1e-4, "{sv}");
            }
        }
    }

    #[test]
    fn small_t_degenerates() {
        let curve = build_curve_q1(3, 1e-4, 6e-5).unwrap();
        assert!(curve.d[1].abs() < 1e-2);
        let sheet = curve.sheet().unwrap();
        assert!(sheet.cuts.iter().all(|c| c.half().norm() < 0.05));
    }

    #[test]
    fn claim1_examples() {
        assert_eq!(claim1_report(5, 1).unwrap().verdict, Verdict::DualityConsistent);
        let r = claim1_report(5, 2).unwrap();
        assert_eq!(r.verdict, Verdict::Obstructed);
        assert_eq!((r.mirror_width, r.mirror_genus), (3, 4));
        assert_eq!(claim1_report(5, 4).unwrap().verdict, Verdict::DualityConsistent);
        assert_eq!(r.constrained_width, 2);
    }

    #[test]
    fn zero_density_has_no_sokhotski_error() {
        let d = Density::from_fn(0, (-1.0, 1.0), 11, |_| 0.0, 0.0);
        let r = sokhotski_check(&d, &[0.0, 0.3]);
        assert_eq!(r.extrapolated, 0.0);
    }
}
