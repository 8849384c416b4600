//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p lenscs-core --test acceptance`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use lenscs_core::cs_exact::{homeomorphic, summed_sectors};
use lenscs_core::large_n::build_curve_q1_fillings;
use lenscs_core::lattice::orient;
use lenscs_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn ls(p: u32, q: u32) -> LensSpace {
    LensSpace::new(p, q).unwrap()
}

fn coprime_pairs(p_max: u32) -> Vec<LensSpace> {
    (2..=p_max).flat_map(LensSpace::all_with_p).collect()
}

fn lattice_census() -> Outcome {
    let mut bad = Vec::new();
    let mut count = 0;
    for l in coprime_pairs(50) {
        let p = l.p() as usize;
        let fan = build_fan(l);
        let tri = triangulate(&fan).unwrap();
        let top = topology(&fan, &tri);
        let unit = tri.simplices.iter().all(|s| orient(fan.points[s[0]], fan.points[s[1]], fan.points[s[2]]).abs() == 1);
        let ok = interior_points(&fan).len() == p - 1 && tri.simplices.len() == 2 * p && unit && top.b2 == p as i64 && top.b4 == p as i64 - 1;
        if !ok {
            bad.push(format!("({},{})", l.p(), l.q()));
        }
        count += 1;
    }
    Outcome { pass: bad.is_empty(), detail: format!("{count} pairs, failures: {bad:?}") }
}

fn mirror_invariants() -> Outcome {
    let mut bad = Vec::new();
    let mut count = 0;
    for l in coprime_pairs(30) {
        let (p, q) = (l.p(), l.q());
        let np = newton_polynomial(l, &lenscs_core::mirror::symbolic_moduli(p)).unwrap();
        let inv = curve_invariants(&np);
        let generic_q = q > 1 && q < p - 1;
        let ok = inv.genus == (p - 1) as u64
            && inv.punctures == 4
            && inv.hyperelliptic_family != generic_q
            && (lattice_width(&np.support()) >= 3) == generic_q;
        if !ok {
            bad.push(format!("({p},{q})"));
        }
        count += 1;
    }
    Outcome { pass: bad.is_empty(), detail: format!("{count} pairs, failures: {bad:?}") }
}

fn q_reflection() -> Outcome {
    let mut bad = Vec::new();
    let mut count = 0;
    for l in coprime_pairs(30) {
        let (p, q) = (l.p(), l.q());
        let (f1, f2) = (build_fan(l), build_fan(ls(p, p - q)));
        let ok = match fan_automorphism(&f1, &f2) {
            Some(m) => {
                let image: std::collections::BTreeSet<_> = f1.points.iter().map(|&v| m.apply(v)).collect();
                m.det().abs() == 1 && image == f2.points.iter().copied().collect()
            }
            None => false,
        };
        if !ok {
            bad.push(format!("({p},{q})"));
        }
        count += 1;
    }
    Outcome { pass: bad.is_empty(), detail: format!("{count} pairs, failures: {bad:?}") }
}

fn weyl_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        for _ in 0..100 {
            let phi: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
            let s = weyl_sum(n, &phi).unwrap();
            let p = weyl_product(n, &phi).unwrap();
            worst = worst.max((s - p).norm() / p.norm());
        }
    }
    Outcome { pass: worst <= 1e-10, detail: format!("max relative deviation {worst:.2e} (tol 1e-10)") }
}

fn exact_vs_integral() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let mut failures = Vec::new();
    for p in [2u32, 3] {
        for l in LensSpace::all_with_p(p) {
            for n in [1usize, 2] {
                for g in [0.3, 0.6] {
                    let sectors = flat_connections(p, n);
                    let mut pairs = Vec::new();
                    for fc in &sectors {
                        let ex = z_exact(&ExactCSInput::new(l, n, Coupling::from_gs_squared(Complex64::new(g, 0.0)), fc.m.clone()))
                            .unwrap()
                            .value;
                        let spec = MatrixModelSpec::new(l, n, g, fc.m.clone(), Representation::Mmcs);
                        let qd = z_quadrature(&spec).unwrap();
                        if !qd.converged {
                            failures.push(format!("no convergence L({p},{}) N={n} g={g} m={:?}", l.q(), fc.m));
                        }
                        pairs.push((fc.m.clone(), ex, qd.sector_value()));
                    }
                    // All pairwise ratios agree iff quad/exact is the same for every sector.
                    for (ma, ea, qa) in &pairs {
                        for (mb, eb, qb) in &pairs {
                            let dev = (cdiv(cdiv(*qa, *ea), cdiv(*qb, *eb)) - 1.0).norm();
                            cases += 1;
                            worst = worst.max(dev);
                            if !(dev <= 1e-5) {
                                failures.push(format!("L({p},{}) N={n} g={g} {ma:?}/{mb:?}: {dev:.2e}", l.q()));
                            }
                        }
                    }
                }
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!("{cases} ratio pairs, max relative deviation {worst:.2e} (tol 1e-5){}", summarize(&failures)),
    }
}

/// Complex division that survives `|b|^2` underflowing; sector values go
/// down to about `1e-305`.
fn cdiv(a: Complex64, b: Complex64) -> Complex64 {
    let s = b.norm();
    (a / s) / (b / s)
}

fn summarize(f: &[String]) -> String {
    if f.is_empty() {
        String::new()
    } else {
        format!("; {} failures, first: {}", f.len(), f[0])
    }
}

fn summed_invariance() -> Outcome {
    let opts = FullSumOptions::default();
    let mut worst: f64 = 0.0;
    for (a, b) in [(ls(5, 2), ls(5, 3)), (ls(7, 2), ls(7, 4))] {
        assert!(homeomorphic(a, b));
        for k in [3i64, 4, 5] {
            let za = z_full(a, 2, k, &opts).unwrap().value.norm();
            let zb = z_full(b, 2, k, &opts).unwrap().value.norm();
            worst = worst.max((za - zb).abs());
        }
    }
    // Sector mixing: some fixed-m sector must differ between presentations.
    let mut mixing: f64 = 0.0;
    for (a, b) in [(ls(5, 2), ls(5, 3)), (ls(7, 2), ls(7, 4))] {
        for k in [3i64, 4, 5] {
            for fc in summed_sectors(a.p(), 2, GaugeGroup::SpecialUnitary) {
                let c = Coupling::from_level(k, 2).unwrap();
                let za = z_exact(&ExactCSInput::new(a, 2, c, fc.m.clone())).unwrap().value.norm();
                let zb = z_exact(&ExactCSInput::new(b, 2, c, fc.m.clone())).unwrap().value.norm();
                if za.max(zb) > 0.0 {
                    mixing = mixing.max((za - zb).abs() / za.max(zb));
                }
            }
        }
    }
    Outcome {
        pass: worst <= 1e-8 && mixing > 1e-3,
        detail: format!("max | |Z_a| - |Z_b| | = {worst:.2e} (tol 1e-8); largest fixed-sector difference {mixing:.3} (need > 1e-3)"),
    }
}

/// Haar average over U(2) of `exp(beta Tr(U A U^+ B))` for diagonal `A`, `B`.
/// With `U = e^{i a}[[e^{i psi} cos th, e^{i phi} sin th], [-e^{-i phi} sin th, e^{-i psi} cos th]]`
/// the Haar density is `sin(2 th)` on `[0, pi/2] x [0, 2pi)^3` and the trace
/// depends on `th` only; composite Simpson in `th`.
fn u2_average(a: [f64; 2], b: [f64; 2], beta: Complex64) -> Complex64 {
    let n = 4000;
    let h = 0.5 * PI / n as f64;
    let f = |th: f64| {
        let (c2, s2) = (th.cos().powi(2), th.sin().powi(2));
        let tr = c2 * (a[0] * b[0] + a[1] * b[1]) + s2 * (a[1] * b[0] + a[0] * b[1]);
        (beta * tr).exp() * (2.0 * th).sin()
    };
    let mut acc = f(0.0) + f(0.5 * PI);
    for k in 1..n {
        acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

fn appendix_chain() -> Outcome {
    let mut worst: f64 = 0.0;
    for (p, q) in [(2u32, 1u32), (3, 2)] {
        for n in [1usize, 2] {
            let ratios: Vec<f64> = [0.2, 0.4, 0.8]
                .iter()
                .map(|&g| {
                    let chain = z_unitary_chain(ls(p, q), n, g, AppendixConstants::Rederived).unwrap();
                    let quad = z_quadrature(&MatrixModelSpec::new(ls(p, q), n, g, vec![0; n], Representation::Mmcs1a)).unwrap();
                    (chain / quad.value).re
                })
                .collect();
            for r in &ratios {
                worst = worst.max((r / ratios[0] - 1.0).abs());
            }
        }
    }
    let mut iz_worst: f64 = 0.0;
    for (a, b, beta) in [
        ([1.0, 2.0], [0.0, 1.0], Complex64::new(1.0, 0.0)),
        ([0.3, -1.1], [2.0, 0.5], Complex64::new(0.7, 0.4)),
        ([1.0, 2.0], [1.0, 2.0], Complex64::new(0.25, 0.0)),
    ] {
        let iz = iz_integral(&IZInput { a: a.to_vec(), b: b.to_vec(), beta }).unwrap();
        let direct = u2_average(a, b, beta);
        iz_worst = iz_worst.max((iz - direct).norm() / direct.norm());
    }
    Outcome {
        pass: worst <= 1e-5 && iz_worst <= 1e-8,
        detail: format!("chain/quadrature g-variation {worst:.2e} (tol 1e-5); IZ vs U(2) quadrature {iz_worst:.2e} (tol 1e-8)"),
    }
}

fn q_independence() -> Outcome {
    let r = q_independence_test(5, &[1, 2, 3, 4], 100, 1.0, 0.2).unwrap();
    Outcome {
        pass: r.pass == Some(true),
        detail: format!(
            "endpoint discrepancy {:.2e} (tol 1e-2), density distance {:.2e} (tol 2e-2), residual {:.1e}",
            r.max_endpoint_discrepancy, r.max_density_distance, r.max_residual
        ),
    }
}

fn consistency_triangle() -> Outcome {
    let mut period_err: f64 = 0.0;
    let mut endpoint_err: f64 = 0.0;
    let mut density_err: f64 = 0.0;
    for (p, t, s0) in [(2u32, 0.5, 0.25), (3, 1.0, 1.0 / 3.0)] {
        let cfg = saddle_solve(&SaddleProblem::symmetric(p, 1, 80, t, s0).unwrap()).unwrap();
        let curve = build_curve_q1_fillings(&cfg.realized_data()).unwrap();
        for (a, b) in curve.a_periods().unwrap().iter().zip(&curve.fillings) {
            period_err = period_err.max((a - b).abs());
        }
        let sheet = curve.sheet().unwrap();
        for i in 0..p as usize {
            let emp = empirical_density(&cfg, i).unwrap();
            let cut = sheet.cuts[i];
            let hw = 0.5 * (cut.ends[1].re - cut.ends[0].re);
            endpoint_err = endpoint_err
                .max((emp.support.0 - cut.ends[0].re).abs() / hw)
                .max((emp.support.1 - cut.ends[1].re).abs() / hw);
            let cd = density_from_curve(&curve, i).unwrap();
            let peak = cd.values.iter().fold(0.0f64, |m, v| m.max(*v));
            for k in 0..=100 {
                let x = -0.8 * hw + 1.6 * hw * k as f64 / 100.0;
                density_err = density_err.max((cd.eval(x) - emp.eval(x)).abs() / peak);
            }
        }
    }
    Outcome {
        pass: period_err <= 1e-6 && endpoint_err < 0.01,
        detail: format!(
            "A-period round trip {period_err:.1e} (tol 1e-6); branch points vs N=80 edges {:.2}% (tol 1%); interior density distance {:.2}%",
            100.0 * endpoint_err,
            100.0 * density_err
        ),
    }
}

fn claim1_verdicts() -> Outcome {
    let mut bad = Vec::new();
    let mut count = 0;
    for l in coprime_pairs(20) {
        let (p, q) = (l.p(), l.q());
        let want = if q == 1 || q == p - 1 { Verdict::DualityConsistent } else { Verdict::Obstructed };
        if claim1_report(p, q).unwrap().verdict != want {
            bad.push(format!("({p},{q})"));
        }
        count += 1;
    }
    Outcome { pass: bad.is_empty(), detail: format!("{count} pairs, failures: {bad:?}") }
}

fn main() {
    let criteria: Vec<(&str, Duration, fn() -> Outcome)> = vec![
        ("lattice census", Duration::from_secs(5), lattice_census),
        ("mirror invariants", Duration::from_secs(5), mirror_invariants),
        ("q <-> p-q automorphism", Duration::from_secs(10), q_reflection),
        ("Weyl formula", Duration::from_secs(1), weyl_formula),
        ("exact vs integral ratios", Duration::from_secs(120), exact_vs_integral),
        ("summed topological invariance", Duration::from_secs(60), summed_invariance),
        ("unitary-matrix chain", Duration::from_secs(60), appendix_chain),
        ("large-N q-independence", Duration::from_secs(120), q_independence),
        ("curve / solver triangle", Duration::from_secs(120), consistency_triangle),
        ("Claim 1 verdicts", Duration::from_secs(5), claim1_verdicts),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let pass = out.pass && took <= limit;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<30} {}  [{:.2}s / {}s]  {}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs(),
            out.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
