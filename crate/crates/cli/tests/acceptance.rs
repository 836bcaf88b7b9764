//! One PASS/FAIL line per acceptance criterion.
//!
//! Lines go straight to the process stdout so they appear in `cargo test`
//! output without `--nocapture`.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use blocksep::catalog::{calogero4, oscillators, pendula, CaseI, CaseII, CatalogEntry, E3Family};
use blocksep::dynamics::{block_clock, estimate_frequency, integrate_full, phase_point, IntegratorConfig};
use blocksep::expr::{EvalPoint, Expression};
use blocksep::geometry::{
    block_eisenhart_residual, block_eisenhart_residual_against, block_levi_civita_residual, characteristic_condition, haantjes,
    killing_residual, poisson_bracket, tsn_residuals, PhaseScalar,
};
use blocksep::linalg::Mat;
use blocksep::sampling::{rejection_sample, rng, CoordinateBox};
use blocksep::{Dual, PhasePoint, TwistedSystem};
use blocksep_cli::commands;
use blocksep_cli::config::load_config;
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Runs one criterion, prints its line and returns whether it passed.
fn criterion(id: usize, title: &str, limit: Option<f64>, body: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = body();
    let secs = start.elapsed().as_secs_f64();
    let in_time = limit.is_none_or(|l| secs < l);
    let pass = v.pass && in_time;
    let budget = limit.map(|l| format!(", limit {l} s")).unwrap_or_default();
    let line = format!(
        "[{}] {id:>2}. {title}: {} ({secs:.3} s{budget}{})\n",
        if pass { "PASS" } else { "FAIL" },
        v.detail,
        if in_time { "" } else { ", over time" }
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    pass
}

fn preset(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.ini"))
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn pendula_constants() -> Verdict {
    let e = pendula();
    let p0 = PhasePoint::new(vec![0.2, -0.2, 0.0], vec![0.0; 3]);
    let got = e.system.first_integrals(&p0).unwrap();
    let want: [f64; 3] = [0.09494666248, 0.0916913483, -0.3797866499];
    let err = max_of(got.iter().zip(want).map(|(a, b)| (a - b).abs()));
    verdict(err <= 1e-8, format!("(H, K2, K3) = ({:.10}, {:.10}, {:.10}), max error {err:.1e} <= 1e-8", got[0], got[1], got[2]))
}

fn determinant_expansion() -> Verdict {
    let sys = pendula().system;
    let origin = [0.0f64; 3];
    let mut grad = [0.0; 3];
    let mut det = f64::NAN;
    for k in 0..3 {
        let q: Vec<Dual<f64>> = origin.iter().enumerate().map(|(i, &x)| if i == k { Dual::variable(x) } else { Dual::constant(x) }).collect();
        let d = sys.stackel_at(&q).unwrap().det();
        det = d.re;
        grad[k] = d.eps;
    }
    // finite-difference oracle for the gradient
    let h = 1e-6;
    let f = |q: [f64; 3]| sys.stackel_at(&q).unwrap().det();
    let fd: Vec<f64> = (0..3)
        .map(|k| {
            let (mut a, mut b) = (origin, origin);
            a[k] += h;
            b[k] -= h;
            (f(a) - f(b)) / (2.0 * h)
        })
        .collect();
    let want: [f64; 3] = [5.0, -6.0, 2.0];
    let err = max_of(grad.iter().zip(want).map(|(g, w)| (g - w).abs())).max((det - 5.0).abs());
    let fd_err = max_of(grad.iter().zip(&fd).map(|(g, d)| (g - d).abs()));
    verdict(
        err <= 1e-12 && fd_err <= 1e-8,
        format!("det = {det}, gradient = {grad:?}, error {err:.1e} <= 1e-12, FD agreement {fd_err:.1e}"),
    )
}

fn orbit_projection() -> Verdict {
    let mut cfg = load_config(&preset("pendula")).unwrap();
    cfg.block = 0;
    cfg.t_span = (0.0, 30.0);
    let mut run = |rtol: f64, atol: f64| {
        cfg.integrator = IntegratorConfig::with_tolerances(rtol, atol);
        let (rep, _) = commands::compare(&cfg).unwrap();
        assert_eq!(rep.labels, ["q1", "p1"]);
        max_of(rep.sup.iter().copied())
    };
    let coarse = run(1e-10, 1e-12);
    let fine = run(1e-12, 1e-14);
    verdict(
        coarse <= 1e-6 && coarse >= 5.0 * fine,
        format!("sup discrepancy {coarse:.2e} at rtol 1e-10 (<= 1e-6), {fine:.2e} at rtol 1e-12, ratio {:.1} (>= 5)", coarse / fine),
    )
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let s: f64 = (0..=n)
        .map(|k| {
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            w * f(a + k as f64 * h)
        })
        .sum();
    s * h / 3.0
}

fn time_scaling() -> Verdict {
    let e = pendula();
    let sys = &e.system;
    let t_end = 30.0;
    let traj = integrate_full(sys, &e.initial, (0.0, t_end), &IntegratorConfig::default()).unwrap();
    let clock = block_clock(sys, &traj, 0).unwrap();
    let alpha1 = |t: f64| sys.alpha(&phase_point(sys, &traj.interpolate(t)).q).unwrap()[0];
    let slope = clock.tau(t_end) / t_end;
    let grid: Vec<f64> = (0..=3000).map(|k| t_end * k as f64 / 3000.0).collect();
    let deviation = max_of(grid.iter().map(|&t| (clock.tau(t) - slope * t).abs()));
    // reference clock by composite Simpson on the dense output, every 0.5 time units
    let marks: Vec<f64> = (1..=60).map(|k| 0.5 * k as f64).collect();
    let quad: Vec<f64> = marks.iter().map(|&t| simpson(alpha1, 0.0, t, 2 * (t * 100.0) as usize)).collect();
    let clock_err = max_of(marks.iter().zip(&quad).map(|(&t, q)| (clock.tau(t) - q).abs()));
    let ref_slope = quad.last().unwrap() / t_end;
    let ref_deviation = max_of(marks.iter().zip(&quad).map(|(&t, q)| (q - ref_slope * t).abs()));
    verdict(
        deviation >= 0.01 && ref_deviation >= 0.01 && clock_err <= 1e-8,
        format!(
            "max |tau1(t) - (tau1(T)/T) t| = {deviation:.4} (>= 0.01); quadrature reference {ref_deviation:.4}, clock vs quadrature {clock_err:.1e}"
        ),
    )
}

fn oscillator_closed_form() -> Verdict {
    let omega = [1.0, 2.0, 3.0];
    let e = oscillators(&omega, &[1.0, 0.5, 1.0 / 3.0]).unwrap();
    let sol = e.solution.clone().unwrap();
    let p0 = PhasePoint::new(vec![0.3, -0.2, 0.1], vec![0.1, 0.4, -0.3]);
    let period = 2.0 * PI;
    let traj = integrate_full(&e.system, &p0, (0.0, period), &IntegratorConfig::default()).unwrap();
    let sup = max_of((0..=628).flat_map(|k| {
        let t = period * k as f64 / 628.0;
        let y = phase_point(&e.system, &traj.interpolate(t));
        let x = sol.at(&p0, t);
        (0..3).map(move |i| (y.q[i] - x.q[i]).abs())
    }));

    let k = 1.5;
    let alpha: Vec<f64> = omega.iter().map(|w| k / w).collect();
    let e = oscillators(&omega, &alpha).unwrap();
    let traj = integrate_full(&e.system, &e.initial, (0.0, 20.0), &IntegratorConfig::default()).unwrap();
    let nu: Vec<f64> = (0..3).map(|i| estimate_frequency(&traj, i).unwrap_or(f64::NAN)).collect();
    let nu_err = nu.iter().map(|v| (v - k).abs() / k).fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
    verdict(
        sup <= 1e-7 && nu_err <= 1e-6,
        format!("sup |q - closed form| over one period {sup:.1e} (<= 1e-7); fitted frequencies {nu:.9?}, relative error {nu_err:.1e} (<= 1e-6)"),
    )
}

fn involution_defect(e: &CatalogEntry) -> f64 {
    let n = e.system.n_blocks();
    let f: Vec<PhaseScalar> = (0..n).map(|a| PhaseScalar::integral(e.system.clone(), a)).collect();
    let pts = e.domain.sample_phase(100, 42, 1.0);
    assert_eq!(pts.len(), 100);
    max_of(pts.iter().flat_map(|pt| {
        let f = &f;
        (0..n).flat_map(move |a| (a + 1..n).map(move |b| poisson_bracket(&f[a], &f[b], pt).unwrap().abs()))
    }))
}

fn involution() -> Verdict {
    let p = involution_defect(&pendula());
    let c = involution_defect(&calogero4());
    verdict(p <= 1e-8 && c <= 1e-8, format!("max bracket pendula {p:.1e}, calogero4 {c:.1e} (<= 1e-8, 100 points each)"))
}

fn calogero_points(count: usize, seed: u64) -> Vec<PhasePoint> {
    let e = calogero4();
    let reference = e.cartesian.unwrap();
    let xs = rejection_sample(&CoordinateBox::new(vec![(-2.0, 2.0); 4]), count, seed, |x| reference.regular(x));
    let ps = rejection_sample(&CoordinateBox::new(vec![(-1.0, 1.0); 4]), count, seed + 1, |_| true);
    xs.into_iter().zip(ps).map(|(q, p)| PhasePoint::new(q, p)).collect()
}

fn calogero_identity() -> Verdict {
    let e = calogero4();
    let region = CoordinateBox::new(vec![(0.5, 2.0), (0.1, PI - 0.1), (0.1, PI - 0.1), (-PI, PI)]);
    let identity = max_of(rejection_sample(&region, 100, 42, |_| true).iter().map(|q| {
        let (r, s) = (q[0], q[1].sin().powi(2));
        let printed = Mat::from_rows(&[
            vec![1.0, 1.0 / (r * r), 1.0 / (r * r * s)],
            vec![0.0, 1.0, (1.0 - 2.0 * s) / s],
            vec![0.0, 1.0, 1.0 / s],
        ]);
        (&e.system.stackel_at(q).unwrap() * &printed).sub(&Mat::identity(3)).max_abs()
    }));
    let reference = e.cartesian.clone().unwrap();
    let pts = calogero_points(200, 11);
    let agreement = max_of(pts.iter().flat_map(|pt| {
        let cart = reference.integrals_at(pt).unwrap();
        let k = e.system.first_integrals(&reference.to_spherical(pt)).unwrap();
        (0..3).map(move |a| (k[a] - cart[a]).abs() / cart[a].abs())
    }));
    verdict(
        identity <= 1e-12 && agreement <= 1e-9 && pts.len() == 200,
        format!("max |S S^-1 - I| {identity:.1e} (<= 1e-12, 100 points); Cartesian vs spherical (H, K2, K3) relative {agreement:.1e} (<= 1e-9, 200 points)"),
    )
}

fn killing_normality() -> Verdict {
    let e = calogero4();
    let reference = e.cartesian.unwrap();
    let pts = calogero_points(100, 42);
    let (mut killing, mut charc, mut haan, mut tsn) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for pt in &pts {
        let x = &pt.q;
        for k in [&reference.k1, &reference.k2] {
            killing = killing.max(killing_residual(&reference.metric, k, x).unwrap());
            charc = charc.max(characteristic_condition(k, &reference.potential, Some(&reference.metric), x).unwrap());
            tsn = tsn.max(max_of(tsn_residuals(k, &reference.metric, x).unwrap()));
        }
        haan = haan.max(haantjes(&reference.k2, Some(&reference.metric), x).unwrap().condition_residual);
    }
    verdict(
        killing <= 1e-10 && charc <= 1e-8 && haan <= 1e-8 && tsn <= 1e-8,
        format!("Killing {killing:.1e} (<= 1e-10), d(k dV) {charc:.1e}, Haantjes(k2) {haan:.1e}, TSN {tsn:.1e} (<= 1e-8), 100 regular points"),
    )
}

fn corrupt(sys: &TwistedSystem, r: usize, a: usize, delta: f64) -> TwistedSystem {
    let e = sys.stackel().entry(r, a);
    let bumped = Expression::parse(&format!("({e}) + ({delta})")).unwrap();
    sys.with_stackel(sys.stackel().with_entry(r, a, bumped)).unwrap()
}

fn block_equations() -> Verdict {
    let mut worst = Vec::new();
    let mut corrupted = Vec::new();
    for (e, r, a) in [(pendula(), 0, 1), (calogero4(), 2, 1)] {
        let n = e.system.n_blocks();
        let pts = e.domain.sample(100, 42);
        let w = max_of(pts.iter().flat_map(|q| {
            let sys = &e.system;
            let lc = block_levi_civita_residual(sys, q).unwrap();
            (1..n).map(move |a| block_eisenhart_residual(sys, a, q).unwrap()).chain([lc.metric, lc.potential])
        }));
        worst.push(w);
        let bad = corrupt(&e.system, r, a, 0.1);
        corrupted.push(max_of(pts.iter().take(20).flat_map(|q| {
            let (sys, bad) = (&e.system, &bad);
            (1..n).map(move |b| block_eisenhart_residual_against(sys, bad, b, q).unwrap())
        })));
    }
    verdict(
        worst.iter().all(|w| *w <= 1e-7) && corrupted.iter().all(|c| *c >= 1e-3),
        format!(
            "residuals pendula {:.1e}, calogero4 {:.1e} (<= 1e-7); with S entry +0.1: {:.2e}, {:.2e} (>= 1e-3)",
            worst[0], worst[1], corrupted[0], corrupted[1]
        ),
    )
}

fn curvature() -> Verdict {
    let riemann = |fam: &E3Family| max_of(fam.sample(50, None).iter().map(|q| fam.riemann_max(q).unwrap()));
    let r_flat = riemann(&CaseI::flat());
    let (sphere, plane) = (CaseII::sphere(), CaseII::plane());
    let (r_sphere, r_plane) = (riemann(&sphere), riemann(&plane));
    let leaf_rel = max_of(sphere.sample(50, None).iter().map(|q| {
        let (got, want) = (sphere.leaf_scalar_curvature(q).unwrap(), sphere.expected_leaf_curvature(q).unwrap());
        (got - want).abs() / want.abs()
    }));
    // c1 = 0: the predicted leaf curvature vanishes, so the comparison is absolute
    let leaf_abs = max_of(plane.sample(50, None).iter().map(|q| plane.leaf_scalar_curvature(q).unwrap().abs()));
    verdict(
        r_flat.max(r_sphere).max(r_plane) <= 1e-6 && leaf_rel <= 1e-6 && leaf_abs <= 1e-6,
        format!(
            "max |Riemann| case i {r_flat:.1e}, case ii sphere {r_sphere:.1e}, plane {r_plane:.1e} (<= 1e-6); leaf R vs 2 l^2 c1^2: relative {leaf_rel:.1e}, plane |R| {leaf_abs:.1e} (<= 1e-6)"
        ),
    )
}

const VARS: [&str; 3] = ["x", "y", "z"];

/// Random smooth expression over `x, y, z`; bounded on `[-1, 1]^3`.
fn random_expression(r: &mut impl Rng, depth: usize) -> String {
    if depth == 0 || r.random_bool(0.25) {
        return if r.random_bool(0.6) {
            VARS[r.random_range(0..3)].to_string()
        } else {
            format!("{:.3}", r.random_range(0.5..2.0))
        };
    }
    let a = random_expression(r, depth - 1);
    match r.random_range(0..12) {
        0 => format!("({a}) + ({})", random_expression(r, depth - 1)),
        1 => format!("({a}) - ({})", random_expression(r, depth - 1)),
        2 | 3 => format!("({a}) * ({})", random_expression(r, depth - 1)),
        4 => format!("({a}) / (1 + ({})^2)", random_expression(r, depth - 1)),
        5 => format!("({a})^{}", r.random_range(2..5)),
        6 => format!("sin({a})"),
        7 => format!("cos({a})"),
        8 => format!("exp(sin({a}))"),
        9 => format!("ln(1 + ({a})^2)"),
        10 => format!("sqrt(1 + ({a})^2)"),
        _ => format!("tan(0.5*cos({a}))"),
    }
}

fn derivative_oracles() -> Verdict {
    let mut r = rng(2024);
    let mut worst1 = 0.0f64;
    let mut worst2 = 0.0f64;
    let mut checked = 0;
    for _ in 0..50 {
        let src = random_expression(&mut r, 4);
        let e = Expression::parse(&src).unwrap();
        for _ in 0..3 {
            let x: [f64; 3] = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
            let at = |y: [f64; 3]| EvalPoint::new().with("x", y[0]).with("y", y[1]).with("z", y[2]);
            let f = |y: [f64; 3]| e.evaluate(&at(y)).unwrap();
            let shift = |y: [f64; 3], k: usize, h: f64| {
                let mut z = y;
                z[k] += h;
                z
            };
            for k in 0..3 {
                let h = 1e-6f64.max(1e-6 * x[k].abs());
                let fd = (f(shift(x, k, h)) - f(shift(x, k, -h))) / (2.0 * h);
                let ad = e.derivative(&at(x), VARS[k]).unwrap();
                worst1 = worst1.max((ad - fd).abs() / fd.abs().max(1.0));
                let h = 1e-4;
                for l in k..3 {
                    let fd = if k == l {
                        (f(shift(x, k, h)) - 2.0 * f(x) + f(shift(x, k, -h))) / (h * h)
                    } else {
                        let c = |a: f64, b: f64| f(shift(shift(x, k, a), l, b));
                        (c(h, h) - c(h, -h) - c(-h, h) + c(-h, -h)) / (4.0 * h * h)
                    };
                    let ad = e.second_derivative(&at(x), VARS[k], VARS[l]).unwrap();
                    worst2 = worst2.max((ad - fd).abs() / fd.abs().max(1.0));
                }
            }
            checked += 1;
        }
    }
    verdict(
        worst1 <= 1e-6 && worst2 <= 1e-6,
        format!("50 seeded expressions x 3 points ({checked} cases): first {worst1:.1e}, second {worst2:.1e} (<= 1e-6 relative, floor 1)"),
    )
}

#[test]
fn acceptance_criteria() {
    let results = [
        criterion(1, "pendula constants", Some(1.0), pendula_constants),
        criterion(2, "determinant expansion", Some(1.0), determinant_expansion),
        criterion(3, "orbit projection (compare, block 1)", Some(10.0), orbit_projection),
        criterion(4, "time-scaling contrast", None, time_scaling),
        criterion(5, "oscillator closed form", Some(5.0), oscillator_closed_form),
        criterion(6, "involution suite", Some(5.0), involution),
        criterion(7, "Calogero matrix identity", None, calogero_identity),
        criterion(8, "Killing/normality suite", None, killing_normality),
        criterion(9, "block-Eisenhart / block-Levi-Civita", None, block_equations),
        criterion(10, "E3 curvature", Some(10.0), curvature),
        criterion(11, "derivative oracles", None, derivative_oracles),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, p)| !**p).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
