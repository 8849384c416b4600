use std::f64::consts::PI;

use lenscs_core::large_n::SOKHOTSKI_EPS;
use lenscs_core::*;

/// Action whose stationary points are the saddle equations:
/// `(p/2) sum lambda^2 - (t/N) sum_{i<j} w_ij` with the pair weight `w`
/// depending on the phase between the two groups.
fn pair_weight_derivatives(delta: f64, phi1: f64, phiq: f64, same: bool) -> (f64, f64) {
    if same {
        let s = (0.5 * delta).sinh();
        return ((0.5 * delta).cosh() / s, -0.5 / (s * s));
    }
    let (ch, sh) = (delta.cosh(), delta.sinh());
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for phi in [phi1, phiq] {
        let den = ch - phi.cos();
        d1 += 0.5 * sh / den;
        d2 += 0.5 * (ch * den - sh * sh) / (den * den);
    }
    (d1, d2)
}

/// Nonlinear Gauss-Seidel: minimise the action one eigenvalue at a time with
/// safeguarded Newton steps, starting from an equally spaced configuration.
fn minimise_action(p: u32, q: u32, n: usize, sizes: &[usize], t: f64) -> Vec<Vec<f64>> {
    let c = t / n as f64;
    let mut lam = Vec::new();
    let mut grp = Vec::new();
    for (g, &k) in sizes.iter().enumerate() {
        for j in 0..k {
            lam.push(-1.0 + 2.0 * (j as f64 + 0.5) / k as f64);
            grp.push(g);
        }
    }
    let total = lam.len();
    let pf = p as f64;
    for _sweep in 0..20_000 {
        let mut worst: f64 = 0.0;
        for i in 0..total {
            let (mut g1, mut g2) = (pf * lam[i], pf);
            for j in 0..total {
                if j == i {
                    continue;
                }
                let dg = grp[i] as f64 - grp[j] as f64;
                let (phi1, phiq) = (2.0 * PI * dg / pf, 2.0 * PI * q as f64 * dg / pf);
                let (d1, d2) = pair_weight_derivatives(lam[i] - lam[j], phi1, phiq, grp[i] == grp[j]);
                g1 -= c * d1;
                g2 -= c * d2;
            }
            worst = worst.max(g1.abs());
            let mut step = -g1 / g2.max(pf);
            // Stay strictly between same-group neighbours.
            for j in 0..total {
                if j != i && grp[j] == grp[i] {
                    let gap = lam[j] - lam[i];
                    if gap.signum() == step.signum() && step.abs() > 0.5 * gap.abs() {
                        step = 0.5 * gap;
                    }
                }
            }
            lam[i] += step;
        }
        if worst < 1e-11 {
            break;
        }
    }
    let mut out = vec![Vec::new(); sizes.len()];
    for (x, g) in lam.into_iter().zip(grp) {
        out[g].push(x);
    }
    for g in out.iter_mut() {
        g.sort_by(f64::total_cmp);
    }
    out
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn newton_saddle_matches_action_minimiser() {
    for (p, q, n, t, s0) in [(1u32, 1u32, 30usize, 1.0, 1.0), (2, 1, 60, 0.5, 0.25), (3, 2, 36, 1.0, 1.0 / 3.0)] {
        let prob = SaddleProblem::symmetric(p, q, n, t, s0).unwrap();
        let cfg = saddle_solve(&prob).unwrap();
        assert!(cfg.residual < 1e-10);
        let oracle = minimise_action(p, q, n, &prob.group_sizes(), t);
        let d = max_diff(&cfg.groups, &oracle);
        assert!(d < 1e-8, "p={p} q={q}: {d:.2e}");
    }
}

#[test]
fn asymmetric_fillings_also_match_the_minimiser() {
    let data = TooftData::new(0.8, vec![0.5, 0.3]).unwrap();
    let prob = SaddleProblem::new(2, 1, 40, data);
    let cfg = saddle_solve(&prob).unwrap();
    let oracle = minimise_action(2, 1, 40, &prob.group_sizes(), 0.8);
    assert!(max_diff(&cfg.groups, &oracle) < 1e-8);
}

#[test]
fn single_group_density_approaches_the_gaussian_model_at_weak_coupling() {
    // For t -> 0 the sinh repulsion is Vandermonde-like and the density is a
    // semicircle of radius 2 sqrt(t/p).
    let t = 0.01;
    let cfg = saddle_solve(&SaddleProblem::symmetric(1, 1, 200, t, t).unwrap()).unwrap();
    let d = empirical_density(&cfg, 0).unwrap();
    let r = 2.0 * t.sqrt();
    assert!((d.support.1 - r).abs() < 0.01 * r, "{:?} vs {r}", d.support);
    for x in [-0.5 * r, 0.0, 0.3 * r] {
        let want = (r * r - x * x).sqrt() / (2.0 * PI);
        assert!((d.eval(x) - want).abs() < 0.03 * want, "{x}: {} vs {want}", d.eval(x));
    }
}

#[test]
fn endpoints_converge_as_n_doubles() {
    let edge = |n: usize| {
        let cfg = saddle_solve(&SaddleProblem::symmetric(2, 1, n, 0.5, 0.25).unwrap()).unwrap();
        empirical_density(&cfg, 0).unwrap().support
    };
    let (a, b, c) = (edge(40), edge(80), edge(160));
    let d1 = (a.1 - b.1).abs();
    let d2 = (b.1 - c.1).abs();
    assert!(d2 < d1, "{d1:.3e} {d2:.3e}");
    assert!(d2 < 0.01 * (c.1 - c.0));
}

#[test]
fn curve_endpoints_agree_with_large_saddle() {
    let cfg = saddle_solve(&SaddleProblem::symmetric(2, 1, 160, 0.5, 0.25).unwrap()).unwrap();
    let curve = build_curve_q1_fillings(&cfg.realized_data()).unwrap();
    for g in 0..2 {
        let e = empirical_density(&cfg, g).unwrap();
        let c = density_from_curve(&curve, g).unwrap();
        let hw = c.half_width();
        assert!((e.support.0 - c.support.0).abs() < 0.01 * hw);
        assert!((e.support.1 - c.support.1).abs() < 0.01 * hw);
        assert!((c.integral() - c.filling).abs() < 1e-3 * c.filling);
    }
}

#[test]
fn curve_periods_reproduce_fillings() {
    for (p, t, s0) in [(2u32, 0.5, 0.25), (3, 1.0, 0.2), (4, 1.2, 0.3)] {
        let curve = build_curve_q1(p, t, s0).unwrap();
        let sheet = curve.sheet().unwrap();
        for (i, s) in curve.fillings.iter().enumerate() {
            assert!((sheet.cut_mass(i).unwrap() - s).abs() < 1e-9, "p={p} cut {i}");
            assert!(sheet.single_valuedness_defect(i, 64, 1e-6).unwrap() < 1e-4);
        }
        // Palindromic coefficients.
        for k in 0..=p as usize {
            assert!((curve.d[k] - curve.d[p as usize - k]).abs() < 1e-12);
        }
        let np = curve.mirror_polynomial().unwrap();
        let inv = curve_invariants(&np);
        assert_eq!(inv.genus, p as u64 - 1);
        assert!(inv.hyperelliptic_family);
    }
}

#[test]
fn q_independence_on_the_democratic_point() {
    let r = q_independence_test(3, &[1, 2], 60, 1.0, 1.0 / 3.0).unwrap();
    assert_eq!(r.pass, Some(true));
    assert!(r.max_endpoint_discrepancy < 1e-10);
}

#[test]
fn exploration_off_the_symmetric_slice_asserts_nothing() {
    let data = TooftData::new(1.0, vec![0.5, 0.3, 0.2]).unwrap();
    let r = q_independence_explore(3, &[1, 2], 30, data).unwrap();
    assert_eq!(r.pass, None);
    assert!(r.max_residual < 1e-9);
}

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

#[test]
fn sokhotski_limits_for_a_smooth_bump() {
    let nodes: Vec<f64> = (1..40).map(|k| -1.0 + k as f64 / 20.0).collect();
    let r = sokhotski_check_fn(&bump, (-1.0, 1.0), &nodes, &[-0.37, 0.013, 0.41, 0.78]);
    assert_eq!(r.eps, SOKHOTSKI_EPS.to_vec());
    assert!(r.extrapolated < 1e-4, "{r:?}");
    for w in r.delta_errors.windows(2) {
        assert!(w[1] < w[0], "{r:?}");
    }
    assert!(r.sum_errors[2] < 1e-3 && r.delta_errors[2] < 1e-3);
}

#[test]
fn sokhotski_on_a_solved_density() {
    let cfg = saddle_solve(&SaddleProblem::symmetric(1, 1, 120, 1.0, 1.0).unwrap()).unwrap();
    let d = empirical_density(&cfg, 0).unwrap();
    let c = d.center();
    let hw = d.half_width();
    let r = sokhotski_check(&d, &[c - 0.5 * hw, c, c + 0.3 * hw]);
    assert!(r.extrapolated < 1e-4, "{r:?}");
}

#[test]
fn validation_errors() {
    assert!(SaddleProblem::symmetric(3, 3, 30, 1.0, 0.3).and_then(|p| saddle_solve(&p)).is_err());
    assert!(SaddleProblem::symmetric(3, 1, 4, 1.0, 0.3).and_then(|p| saddle_solve(&p)).is_err());
    assert!(TooftData::new(1.0, vec![0.7, 0.7]).is_err());
    assert!(build_curve_q1(3, 1.0, 1.2).is_err());
}
