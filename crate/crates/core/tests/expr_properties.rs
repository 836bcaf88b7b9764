use blocksep::expr::{EvalPoint, Expression};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

const VARS: [&str; 3] = ["x", "y", "z"];

/// Smooth expressions over `x, y, z`, bounded on `[-1, 1]^3`.
fn expr_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        prop::sample::select(VARS.to_vec()).prop_map(str::to_string),
        (0.5f64..2.0).prop_map(|c| format!("{c:.3}")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) * ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) / (1 + ({b})^2)")),
            (inner.clone(), 2u32..4).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(sin({a}))")),
            inner.clone().prop_map(|a| format!("ln(1 + ({a})^2)")),
            inner.clone().prop_map(|a| format!("sqrt(1 + ({a})^2)")),
            inner.prop_map(|a| format!("tan(0.5*sin({a}))")),
        ]
    })
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    [-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0]
}

fn at(x: [f64; 3]) -> EvalPoint {
    EvalPoint::new().with("x", x[0]).with("y", x[1]).with("z", x[2])
}

fn shifted(x: [f64; 3], k: usize, h: f64) -> [f64; 3] {
    let mut y = x;
    y[k] += h;
    y
}

fn config() -> Config {
    Config { cases: 200, rng_seed: RngSeed::Fixed(42), ..Config::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn printed_form_reparses_to_the_same_function(src in expr_source(), pts in prop::collection::vec(point(), 5)) {
        let e = Expression::parse(&src).unwrap();
        let again = Expression::parse(&e.to_string()).unwrap();
        for x in pts {
            let (a, b) = (e.evaluate(&at(x)).unwrap(), again.evaluate(&at(x)).unwrap());
            prop_assert_eq!(a.to_bits(), b.to_bits(), "{} vs {}", e, again);
        }
    }

    #[test]
    fn derivative_is_linear(a in expr_source(), b in expr_source(), s in -2.0f64..2.0, t in -2.0f64..2.0, x in point()) {
        let (ea, eb) = (Expression::parse(&a).unwrap(), Expression::parse(&b).unwrap());
        let combo = Expression::parse(&format!("({s:?})*({a}) + ({t:?})*({b})")).unwrap();
        for v in VARS {
            let lhs = combo.derivative(&at(x), v).unwrap();
            let rhs = s * ea.derivative(&at(x), v).unwrap() + t * eb.derivative(&at(x), v).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn second_derivative_is_symmetric(src in expr_source(), x in point()) {
        let e = Expression::parse(&src).unwrap();
        for u in VARS {
            for v in VARS {
                let a = e.second_derivative(&at(x), u, v).unwrap();
                let b = e.second_derivative(&at(x), v, u).unwrap();
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn derivatives_match_central_differences(src in expr_source(), x in point()) {
        let e = Expression::parse(&src).unwrap();
        let f = |y: [f64; 3]| e.evaluate(&at(y)).unwrap();
        for (k, v) in VARS.iter().enumerate() {
            let h = 1e-6f64.max(1e-6 * x[k].abs());
            let fd = (f(shifted(x, k, h)) - f(shifted(x, k, -h))) / (2.0 * h);
            let ad = e.derivative(&at(x), v).unwrap();
            prop_assert!((ad - fd).abs() <= 1e-6 * fd.abs().max(1.0), "d/d{v} {src}: {ad} vs {fd}");
        }
        let h = 1e-4;
        for k in 0..3 {
            for l in k..3 {
                let fd = if k == l {
                    (f(shifted(x, k, h)) - 2.0 * f(x) + f(shifted(x, k, -h))) / (h * h)
                } else {
                    let c = |a: f64, b: f64| f(shifted(shifted(x, k, a), l, b));
                    (c(h, h) - c(h, -h) - c(-h, h) + c(-h, -h)) / (4.0 * h * h)
                };
                let ad = e.second_derivative(&at(x), VARS[k], VARS[l]).unwrap();
                prop_assert!((ad - fd).abs() <= 1e-6 * fd.abs().max(1.0), "d2/d{}d{} {src}: {ad} vs {fd}", VARS[k], VARS[l]);
            }
        }
    }
}

#[test]
fn spec_examples() {
    let e = Expression::parse("(q3)^2+1").unwrap();
    let p = EvalPoint::new().with("q3", 0.5);
    assert_eq!(e.evaluate(&p).unwrap(), 1.25);
    let p = EvalPoint::new().with("q3", 2.0);
    let d = e.derivative(&p, "q3").unwrap();
    let h = 1e-6;
    let fd = (e.evaluate(&EvalPoint::new().with("q3", 2.0 + h)).unwrap() - e.evaluate(&EvalPoint::new().with("q3", 2.0 - h)).unwrap())
        / (2.0 * h);
    assert_eq!(d, 4.0);
    assert!((d - fd).abs() <= 1e-8);
    assert_eq!(Expression::parse("cos(q1)").unwrap().derivative(&EvalPoint::new().with("q1", 0.3), "q5").unwrap(), 0.0);
}

#[test]
fn quartic_second_derivatives_match_differences() {
    let e = Expression::parse("3*x^4 - 2*x^3*y + x^2*y^2 - 5*x*y^3 + 0.5*y^4 + x*y - 7").unwrap();
    let f = |x: f64, y: f64| e.evaluate(&EvalPoint::new().with("x", x).with("y", y)).unwrap();
    let (x, y, h) = (0.7, -0.4, 1e-4);
    let p = EvalPoint::new().with("x", x).with("y", y);
    let cases = [
        ("x", "x", (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h)),
        ("y", "y", (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h)),
        ("x", "y", (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h)),
    ];
    for (u, v, fd) in cases {
        let ad = e.second_derivative(&p, u, v).unwrap();
        assert!((ad - fd).abs() <= 1e-6 * fd.abs().max(1.0), "{u}{v}: {ad} vs {fd}");
    }
}
