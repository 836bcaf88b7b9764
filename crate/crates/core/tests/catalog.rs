use std::f64::consts::PI;

use blocksep::catalog::{
    calogero4, e3_case_i, e3_case_ii, lookup, oscillators, pendula, CaseI, CaseII, Entry, PointMap, NAMES,
};
use blocksep::geometry::{characteristic_condition, killing_residual, relative_eigenvalues, spectrum};
use blocksep::linalg::Mat;
use blocksep::sampling::{rejection_sample, CoordinateBox};
use blocksep::{Dual, Expression, PhasePoint};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

fn cartesian_points(count: usize, seed: u64) -> Vec<PhasePoint> {
    let e = calogero4();
    let reference = e.cartesian.unwrap();
    let region = CoordinateBox::new(vec![(-2.0, 2.0); 4]);
    let momenta = rejection_sample(&CoordinateBox::new(vec![(-1.0, 1.0); 4]), count, seed + 1, |_| true);
    rejection_sample(&region, count, seed, |x| reference.regular(x))
        .into_iter()
        .zip(momenta)
        .map(|(q, p)| PhasePoint::new(q, p))
        .collect()
}

#[test]
fn catalog_names_resolve() {
    for name in NAMES {
        lookup(name).unwrap();
    }
    assert!(lookup("nope").is_err());
    assert!(matches!(lookup("e3-case-ii").unwrap(), Entry::Metric(_)));
}

#[test]
fn oscillator_parameters_are_checked() {
    assert!(oscillators(&[1.0, 2.0], &[1.0]).is_err());
    assert!(oscillators(&[1.0], &[0.0]).is_err());
    let e = oscillators(&[1.0, 2.0], &[0.5, 2.0]).unwrap();
    let alpha = e.system.alpha(&[0.3f64, 0.1]).unwrap();
    assert!((alpha[0] - 0.5).abs() < 1e-15 && (alpha[1] - 2.0).abs() < 1e-15);
    // K_1 = H_2
    let pt = PhasePoint::new(vec![0.3, 0.1], vec![0.2, -0.4]);
    let k1: f64 = e.system.first_integral(1, &pt).unwrap();
    assert!((k1 - 0.5 * (0.16 + 4.0 * 0.01)).abs() < 1e-15);
}

#[test]
fn pendula_domain_avoids_vanishing_twist() {
    let e = pendula();
    assert!(!e.domain.contains(&[0.0, 0.0, 0.0]));
    for q in e.domain.sample(50, 1) {
        assert!(e.system.alpha(&q).unwrap().iter().all(|a| a.abs() >= 0.05));
    }
}

#[test]
fn jacobi_stage_is_orthogonal() {
    let e = calogero4();
    let reference = e.cartesian.unwrap();
    let a = reference.transform.map.0.matrix();
    let ata = &a.transpose() * a;
    assert!(ata.sub(&Mat::identity(4)).max_abs() <= 1e-15);
}

#[test]
fn equal_positions_map_to_the_axis() {
    let e = calogero4();
    let reference = e.cartesian.unwrap();
    let z = reference.transform.map.0.forward(&[1.0f64, 1.0, 1.0, 1.0]);
    for (zi, want) in z.iter().zip([0.0, 0.0, 0.0, 2.0]) {
        assert!((zi - want).abs() < 1e-15);
    }
    let s = reference.transform.map.forward(&[1.0f64, 1.0, 1.0, 1.0]);
    assert!((s[0] - 2.0).abs() < 1e-15);
    assert!(!reference.regular(&[1.0, 1.0, 1.0, 1.0]));
}

#[test]
fn printed_stackel_inverse() {
    let e = calogero4();
    let region = CoordinateBox::new(vec![(0.5, 2.0), (0.1, PI - 0.1), (0.1, PI - 0.1), (-PI, PI)]);
    for q in rejection_sample(&region, 100, 5, |_| true) {
        let (r, s) = (q[0], q[1].sin().powi(2));
        let inv = Mat::from_rows(&[
            vec![1.0, 1.0 / (r * r), 1.0 / (r * r * s)],
            vec![0.0, 1.0, (1.0 - 2.0 * s) / s],
            vec![0.0, 1.0, 1.0 / s],
        ]);
        let prod = &e.system.stackel_at(&q).unwrap() * &inv;
        assert!(prod.sub(&Mat::identity(3)).max_abs() <= 1e-12);
    }
}

#[test]
fn cartesian_and_spherical_integrals_agree() {
    let e = calogero4();
    let reference = e.cartesian.clone().unwrap();
    let pts = cartesian_points(200, 11);
    assert_eq!(pts.len(), 200);
    for pt in pts {
        let cart = reference.integrals_at(&pt).unwrap();
        let sph = reference.to_spherical(&pt);
        let k = e.system.first_integrals(&sph).unwrap();
        for a in 0..3 {
            assert!(rel(k[a], cart[a]) <= 1e-9, "K_{a}: {} vs {}", k[a], cart[a]);
        }
    }
}

#[test]
fn transform_round_trip_and_canonicity() {
    let e = calogero4();
    let reference = e.cartesian.unwrap();
    for pt in cartesian_points(20, 3) {
        let back = reference.to_cartesian(&reference.to_spherical(&pt)).unwrap();
        for i in 0..4 {
            assert!((back.q[i] - pt.q[i]).abs() < 1e-12);
            assert!((back.p[i] - pt.p[i]).abs() < 1e-12);
        }
        // Jacobian M of (q, p) ↦ (q', p'); canonical iff Mᵀ Ω M = Ω
        let state = pt.to_state();
        let mut m = Mat::zeros(8, 8);
        for k in 0..8 {
            let seeded: Vec<Dual<f64>> =
                state.iter().enumerate().map(|(i, &x)| if i == k { Dual::variable(x) } else { Dual::constant(x) }).collect();
            let img = reference.transform.to_new(&PhasePoint::from_state(&seeded, 4)).to_state();
            for (row, d) in img.iter().enumerate() {
                m[(row, k)] = d.eps;
            }
        }
        let omega = Mat::from_fn(8, 8, |i, j| match (i < 4, j < 4) {
            (true, false) if j == i + 4 => 1.0,
            (false, true) if i == j + 4 => -1.0,
            _ => 0.0,
        });
        let defect = (&(&m.transpose() * &omega) * &m).sub(&omega).max_abs();
        assert!(defect < 1e-10, "{defect}");
    }
}

#[test]
fn calogero_killing_tensors() {
    let e = calogero4();
    let reference = e.cartesian.unwrap();
    for pt in cartesian_points(100, 17) {
        for k in [&reference.k1, &reference.k2] {
            assert!(killing_residual(&reference.metric, k, &pt.q).unwrap() <= 1e-10);
            let c = characteristic_condition(k, &reference.potential, Some(&reference.metric), &pt.q).unwrap();
            let scale = 1.0 + reference.potential.bind(reference.metric.names()).unwrap().eval(&pt.q).unwrap();
            assert!(c <= 1e-8 * scale * scale, "{c}");
        }
    }
}

#[test]
fn calogero_killing_spectra() {
    let e = calogero4();
    let reference = e.cartesian.unwrap();
    let g = Mat::identity(4);
    for pt in cartesian_points(20, 23) {
        let x = &pt.q;
        let norm: f64 = x.iter().map(|v| v * v).sum();
        let pairs: f64 = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).map(|(i, j)| x[i] * x[j]).sum();
        let s2 = spectrum(&relative_eigenvalues(&reference.k2.eval(x).unwrap(), &g).unwrap());
        assert_eq!(s2.multiplicities(), vec![1, 3]);
        assert!(s2.values()[0].abs() < 1e-10 && rel(s2.values()[1], norm) < 1e-10);
        let mut want = vec![0.0, norm, pairs - 0.5 * norm, pairs - 0.5 * norm];
        want.sort_by(f64::total_cmp);
        let mut got = relative_eigenvalues(&reference.k1.eval(x).unwrap(), &g).unwrap();
        got.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-9 * (1.0 + norm), "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn sphere_potential_factorises() {
    let e = calogero4();
    let reference = e.cartesian.unwrap();
    let v = reference.potential.bind(reference.metric.names()).unwrap();
    for q in e.domain.sample(50, 29) {
        let v3 = e.system.block_potential(2, &q).unwrap();
        for (r, phi1) in [(q[0], q[1]), (0.7, 1.0), (1.9, 2.3)] {
            let x = reference.transform.map.backward(&[r, phi1, q[2], q[3]]);
            let w = r * r * phi1.sin().powi(2) * v.eval(&x).unwrap();
            assert!(rel(w, v3) <= 1e-8, "{w} vs {v3}");
        }
    }
}

#[test]
fn case_i_presets_are_flat() {
    for fam in [CaseI::flat(), CaseI::curved()] {
        for q in fam.sample(50, None) {
            assert!(fam.riemann_max(&q).unwrap() <= 1e-6);
            for (label, r) in fam.residuals(&q).unwrap() {
                assert!(r.abs() <= 1e-9, "{label}: {r}");
            }
            assert!(fam.leaf_scalar_curvature(&q).unwrap().abs() <= 1e-9);
        }
    }
}

#[test]
fn case_i_exponential_f_fails_reduced_equations() {
    let fam = e3_case_i(0.0, 0.0, 1.0, 0.0, Expression::parse("exp(v)").unwrap()).unwrap();
    let q = [0.1, 0.2, -0.3];
    let res = fam.residuals(&q).unwrap();
    let get = |name: &str| res.iter().find(|(l, _)| l == name).unwrap().1;
    // l constant: the leaf equation holds, f_vv = e^v does not vanish
    assert!(get("l leaf").abs() < 1e-15);
    assert!((get("reduced vv") - 0.2f64.exp()).abs() < 1e-12);
    assert!((get("reduced ww") + 0.0).abs() < 1e-12);
    assert!(fam.riemann_max(&q).unwrap() >= 1e-3);
}

#[test]
fn case_ii_presets_are_flat_with_curved_leaves() {
    for fam in [CaseII::sphere(), CaseII::plane()] {
        for q in fam.sample(50, None) {
            assert!(fam.riemann_max(&q).unwrap() <= 1e-6);
            for (label, r) in fam.residuals(&q).unwrap() {
                assert!(r.abs() <= 1e-9, "{label}: {r}");
            }
            let got = fam.leaf_scalar_curvature(&q).unwrap();
            let want = fam.expected_leaf_curvature(&q).unwrap();
            assert!((got - want).abs() <= 1e-6 * want.abs().max(1e-3), "{got} vs {want}");
            let got = fam.leaf_mixed_component(&q).unwrap();
            let want = fam.expected_leaf_mixed_component(&q).unwrap();
            assert!((got - want).abs() <= 1e-6 * want.abs().max(1e-3), "{got} vs {want}");
        }
    }
}

#[test]
fn case_ii_wrong_f_is_curved() {
    let fam = CaseII::sphere().with_f(Expression::parse("1 + v^2").unwrap()).unwrap();
    let q = [1.0, 0.3, 0.2];
    assert!(fam.residuals(&q).unwrap().iter().any(|(_, r)| r.abs() > 1e-3));
    assert!(fam.riemann_max(&q).unwrap() >= 1e-3);
}

#[test]
fn e3_parameters_are_checked() {
    assert!(e3_case_i(0.0, 0.0, 0.0, 0.0, Expression::constant(1.0)).is_err());
    assert!(e3_case_ii(0.0, 0.0, Expression::constant(1.0)).is_err());
    assert!(e3_case_ii(1.0, 0.0, Expression::parse("u").unwrap()).is_err());
}
