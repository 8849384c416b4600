//! Complex polynomial roots by the Aberth-Ehrlich iteration, polished with
//! Newton steps.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// `sum_k c[k] z^k` and its derivative.
pub fn eval_with_derivative(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

pub fn eval(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// Product of two polynomials in ascending coefficient order.
pub fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// All roots of `sum_k c[k] z^k`, coefficients in ascending order.
pub fn roots(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut c = c.to_vec();
    while c.last().is_some_and(|x| *x == Complex64::new(0.0, 0.0)) {
        c.pop();
    }
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return invalid("polynomial has no roots");
    }
    let lead = c[deg];
    let c: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    // Cauchy-type radius for the starting circle.
    let radius = c[..deg].iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-300);
    let r0 = (radius.powf(1.0 / deg as f64)).clamp(1e-3, 1e3);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(r0, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64 + 0.4))
        .collect();
    let mut done = false;
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..deg {
            let (p, dp) = eval_with_derivative(&c, z[i]);
            if p == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..deg).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            z[i] -= w;
            max_step = max_step.max(w.norm() / z[i].norm().max(1.0));
        }
        if max_step < 1e-15 {
            done = true;
            break;
        }
    }
    if !done && z.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("root iteration diverged".into()));
    }
    for x in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval_with_derivative(&c, *x);
            if dp == Complex64::new(0.0, 0.0) {
                break;
            }
            let step = p / dp;
            if !step.is_finite() {
                break;
            }
            *x -= step;
        }
    }
    Ok(z)
}
