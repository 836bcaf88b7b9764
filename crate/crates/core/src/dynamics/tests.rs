use super::*;
use crate::catalog::{oscillators, pendula};

fn fd_field(sys: &TwistedSystem, pt: &PhasePoint) -> Vec<f64> {
    let n = pt.dim();
    let h = 1e-6;
    let mut out = vec![0.0; 2 * n];
    for k in 0..n {
        let shift = |dq: f64, dp: f64| {
            let mut s = pt.clone();
            s.q[k] += dq;
            s.p[k] += dp;
            sys.hamiltonian(&s).unwrap()
        };
        out[k] = (shift(0.0, h) - shift(0.0, -h)) / (2.0 * h);
        out[n + k] = -(shift(h, 0.0) - shift(-h, 0.0)) / (2.0 * h);
    }
    out
}

#[test]
fn oscillator_field_at_unit_displacement() {
    let e = oscillators(&[1.0], &[1.0]).unwrap();
    let f = full_field(&e.system, &PhasePoint::new(vec![1.0], vec![0.0])).unwrap();
    assert_eq!(&f[..2], &[0.0, -1.0]);
}

#[test]
fn pendula_field_matches_finite_differences() {
    let e = pendula();
    for pt in e.domain.sample_phase(10, 7, 1.0) {
        let f = full_field(&e.system, &pt).unwrap();
        let g = fd_field(&e.system, &pt);
        for (a, b) in f.iter().zip(&g) {
            assert!((a - b).abs() < 1e-7 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}

#[test]
fn full_field_is_twisted_block_field() {
    let e = pendula();
    let sys = &e.system;
    for pt in e.domain.sample_phase(10, 3, 1.0) {
        let c = sys.separation_constants(&pt).unwrap();
        let alpha = sys.alpha(&pt.q).unwrap();
        let f = full_field(sys, &pt).unwrap();
        for r in 0..3 {
            let red = reduced_field(sys, r, &c, &block_state(sys, r, &pt)).unwrap();
            assert!((f[r] - alpha[r] * red[0]).abs() < 1e-10);
            assert!((f[3 + r] - alpha[r] * red[1]).abs() < 1e-10);
        }
    }
}

#[test]
fn reduced_pendulum_field() {
    let e = pendula();
    let sys = &e.system;
    let pt = PhasePoint::new(vec![0.3, -0.1, 0.2], vec![0.4, 0.1, -0.2]);
    let c = sys.separation_constants(&pt).unwrap();
    // S row 2 = (3, q2, q2^3 + 2)
    let (q, p) = (-0.1f64, 0.1);
    let red = reduced_field(sys, 1, &c, &[q, p]).unwrap();
    let shift = c[1] + 3.0 * q * q * c[2];
    assert!((red[0] - p).abs() < 1e-15);
    assert!((red[1] - (-0.5 * q.sin() + shift)).abs() < 1e-14);
}

#[test]
fn constant_twist_clock_is_linear() {
    let e = oscillators(&[1.0, 2.0], &[0.5, 2.0]).unwrap();
    let traj = integrate_full(&e.system, &e.initial, (0.0, 3.0), &IntegratorConfig::default()).unwrap();
    for r in 0..2 {
        let clock = block_clock(&e.system, &traj, r).unwrap();
        let a = [0.5, 2.0][r];
        for t in [0.5, 1.7, 3.0] {
            assert!((clock.tau(t) - a * t).abs() < 1e-10);
        }
        assert!(!clock.changed_sign());
    }
}

#[test]
fn clock_matches_quadrature() {
    let e = pendula();
    let sys = &e.system;
    let traj = integrate_full(sys, &e.initial, (0.0, 2.0), &IntegratorConfig::default()).unwrap();
    let clock = block_clock(sys, &traj, 0).unwrap();
    let alpha0 = |t: f64| sys.alpha(&phase_point(sys, &traj.interpolate(t)).q).unwrap()[0];
    let n = 400;
    let h = 2.0 / n as f64;
    let simpson: f64 = (0..=n)
        .map(|k| {
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            w * alpha0(k as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0;
    assert!((clock.tau(2.0) - simpson).abs() < 1e-8);
}

#[test]
fn energy_and_integrals_are_conserved() {
    let e = pendula();
    let sys = &e.system;
    let traj = integrate_full(sys, &e.initial, (0.0, 10.0), &IntegratorConfig::default()).unwrap();
    let k0 = sys.first_integrals(&e.initial).unwrap();
    let k1 = sys.first_integrals(&phase_point(sys, traj.last_state())).unwrap();
    for (a, b) in k0.iter().zip(&k1) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn oscillator_orbit_matches_closed_form() {
    let e = oscillators(&[1.0, 2.0, 3.0], &[1.0, 0.5, 1.0 / 3.0]).unwrap();
    let sol = e.solution.clone().unwrap();
    let p0 = PhasePoint::new(vec![0.3, -0.2, 0.1], vec![0.1, 0.4, -0.3]);
    let traj = integrate_full(&e.system, &p0, (0.0, 10.0), &IntegratorConfig::default()).unwrap();
    for t in [1.0, 4.5, 10.0] {
        let y = phase_point(&e.system, &traj.interpolate(t));
        let x = sol.at(&p0, t);
        for i in 0..3 {
            assert!((y.q[i] - x.q[i]).abs() < 1e-8);
            assert!((y.p[i] - x.p[i]).abs() < 1e-8);
        }
    }
}

#[test]
fn pendula_orbits_project_onto_reduced_orbits() {
    let e = pendula();
    let cfg = CompareConfig::default();
    for r in 0..3 {
        let rep = compare_block_orbits(&e.system, &e.initial, r, (0.0, 30.0), &cfg).unwrap();
        assert!(rep.max_sup() <= 1e-6, "block {r}: {}", rep.max_sup());
        assert_eq!(rep.samples, 1000);
    }
}

#[test]
fn pendula_first_twist_changes_sign() {
    let e = pendula();
    let traj = integrate_full(&e.system, &e.initial, (0.0, 30.0), &IntegratorConfig::default()).unwrap();
    let clock = block_clock(&e.system, &traj, 0).unwrap();
    let ts = clock.first_sign_change().expect("α^1 changes sign");
    assert!((ts - 15.78).abs() < 0.05, "{ts}");
    let cfg = CompareConfig { policy: SignChangePolicy::RestrictToInitialSegment, ..Default::default() };
    let rep = compare_block_orbits(&e.system, &e.initial, 0, (0.0, 30.0), &cfg).unwrap();
    assert!(rep.restricted);
    assert!((rep.t_compared - ts).abs() < 1e-12);
}

#[test]
fn bad_block_index() {
    let e = pendula();
    let err = compare_block_orbits(&e.system, &e.initial, 3, (0.0, 1.0), &CompareConfig::default()).unwrap_err();
    assert_eq!(err, DynamicsError::NoSuchBlock { block: 3, n: 3 });
}

#[test]
fn fitted_frequencies_equal_common_rate() {
    let omega = [1.0, 2.0, 3.0];
    let alpha: Vec<f64> = omega.iter().map(|w| 1.5 / w).collect();
    let e = oscillators(&omega, &alpha).unwrap();
    let traj = integrate_full(&e.system, &e.initial, (0.0, 20.0), &IntegratorConfig::default()).unwrap();
    for i in 0..3 {
        let nu = estimate_frequency(&traj, i).unwrap();
        assert!((nu - 1.5).abs() <= 1e-6 * 1.5, "{nu}");
    }
}
