use super::*;
use proptest::prelude::*;
use std::f64::consts::{E, PI};

fn r() -> SmoothFn {
    SmoothFn::identity()
}

fn gaussian() -> SmoothFn {
    SmoothFn::exp(&SmoothFn::polynomial(vec![0.0, 0.0, -1.0]))
}

/// Composite Simpson rule, used as an independent quadrature oracle.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// RK4 integration of f' = 2 W f + 1 from (r0, f0) to r1.
fn rk4_linear(w: impl Fn(f64) -> f64, r0: f64, f0: f64, r1: f64, steps: usize) -> f64 {
    let h = (r1 - r0) / steps as f64;
    let rhs = |r: f64, f: f64| 2.0 * w(r) * f + 1.0;
    let (mut t, mut f) = (r0, f0);
    for _ in 0..steps {
        let k1 = rhs(t, f);
        let k2 = rhs(t + h / 2.0, f + h * k1 / 2.0);
        let k3 = rhs(t + h / 2.0, f + h * k2 / 2.0);
        let k4 = rhs(t + h, f + h * k3);
        f += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        t += h;
    }
    f
}

fn central_difference(f: &SmoothFn, x: f64, h: f64) -> f64 {
    (f.eval(x + h).unwrap() - f.eval(x - h).unwrap()) / (2.0 * h)
}

#[test]
fn polynomial_evaluation() {
    let sq = SmoothFn::polynomial(vec![0.0, 0.0, 1.0]);
    assert_eq!(sq.eval(3.0).unwrap(), 9.0);
}

#[test]
fn linear_superpotential_and_its_derivative() {
    // W = (beta/2)(r - 2 alpha / beta) with beta = 2, alpha = 0
    let w = SmoothFn::polynomial(vec![0.0, 1.0]);
    assert_eq!(w.eval(1.0).unwrap(), 1.0);
    assert_eq!(w.derivative().as_constant(), Some(1.0));
}

#[test]
fn lambda_at_base_point_and_its_derivative() {
    let parts = SmoothFn::riccati_lambda(&r(), 2.0, 0.0, Interval::REAL_LINE).unwrap();
    let lam = &parts.lambda;
    assert!((lam.eval(0.0).unwrap() - 0.5).abs() < 1e-15);
    let dl = lam.derivative();
    assert!((dl.eval(0.0).unwrap() + 0.25).abs() < 1e-15);
    let fd = central_difference(lam, 0.0, 1e-5);
    assert!((fd + 0.25).abs() < 1e-8, "fd = {fd}");
}

#[test]
fn lambda_matches_independent_ode_solution() {
    // f' - 2 r f = 1, f(0) = C; lambda = 1/f
    let c = 2.0;
    let parts = SmoothFn::riccati_lambda(&r(), c, 0.0, Interval::REAL_LINE).unwrap();
    for &x in &[-2.0, -1.0, -0.3, 0.7, 1.5, 2.5] {
        let f = rk4_linear(|t| t, 0.0, c, x, 20_000);
        let lam = parts.lambda.eval(x).unwrap();
        assert!((lam * f - 1.0).abs() < 1e-9, "x = {x}: {lam} vs 1/{f}");
        let f_node = parts.f.eval(x).unwrap();
        assert!((f_node - f).abs() <= 1e-9 * f.abs().max(1.0));
    }
}

#[test]
fn antiderivative_derivative_is_the_integrand_node() {
    let g = gaussian();
    let big_g = g.antiderivative(0.0).unwrap();
    let back = big_g.derivative();
    assert!(back.ptr_eq(&g));
    for x in Interval::REAL_LINE.probe_points(10) {
        assert_eq!(back.eval(x).unwrap(), g.eval(x).unwrap());
    }
}

#[test]
fn additive_inverse_collapses_to_zero() {
    let z = r().add(&r().neg());
    assert!(z.is_zero());
    for x in [-3.0, 0.0, 7.5] {
        assert_eq!(z.eval(x).unwrap(), 0.0);
    }
}

#[test]
fn partner_potential_from_arithmetic() {
    let w = r();
    let v1 = w.mul(&w).add(&w.derivative());
    assert_eq!(v1.eval(1.0).unwrap(), 2.0);
}

#[test]
fn reciprocal_of_gaussian() {
    let inv = gaussian().recip().unwrap();
    assert!((inv.eval(1.0).unwrap() - E).abs() < 1e-15);
    // derivative of 1/g follows the quotient rule: (e^{r^2})' = 2 r e^{r^2}
    assert!((inv.derivative().eval(1.0).unwrap() - 2.0 * E).abs() < 1e-14);
}

#[test]
fn reciprocal_rejects_sign_change() {
    assert!(matches!(r().recip(), Err(Error::SignChange { .. })));
    assert!(SmoothFn::polynomial(vec![1.0, 0.0, 1.0]).recip().is_ok());
    assert!(matches!(
        SmoothFn::zero().recip(),
        Err(Error::SignChange { .. })
    ));
}

#[test]
fn antiderivative_of_constant_and_base_point() {
    let f = SmoothFn::one().antiderivative(0.0).unwrap();
    assert!((f.eval(5.0).unwrap() - 5.0).abs() < 1e-13);
    let g = gaussian().antiderivative(0.4).unwrap();
    assert_eq!(g.eval(0.4).unwrap(), 0.0);
}

#[test]
fn gaussian_integral_against_simpson_oracle() {
    let oracle = simpson(|s| (-s * s).exp(), 0.0, 8.0, 40_000);
    assert!((oracle - PI.sqrt() / 2.0).abs() < 1e-13);
    let big_g = gaussian().antiderivative(0.0).unwrap();
    let v = big_g.eval(8.0).unwrap();
    assert!((v - oracle).abs() < 1e-12, "{v} vs {oracle}");
    assert!((v - 0.886_226_925).abs() < 1e-9);
}

#[test]
fn domain_and_non_finite_errors() {
    let inv_r = SmoothFn::power(1.0, -1.0);
    assert!(matches!(inv_r.eval(0.0), Err(Error::Domain { .. })));
    assert!(matches!(inv_r.eval(-1.0), Err(Error::Domain { .. })));
    let blow = SmoothFn::exp(&SmoothFn::polynomial(vec![0.0, 0.0, 1.0]));
    assert!(matches!(blow.eval(30.0), Err(Error::NonFinite { r }) if r == 30.0));
    assert!(SmoothFn::power_on(1.0, -1.0, Interval::REAL_LINE).is_err());
    assert!(SmoothFn::power_on(1.0, 0.5, Interval::open(-1.0, -0.5)).is_err());
}

#[test]
fn power_rule_and_integer_powers() {
    let p = SmoothFn::power(3.0, -2.0);
    let d = p.derivative();
    assert!((d.eval(2.0).unwrap() - (-6.0 / 8.0)).abs() < 1e-15);
    assert_eq!(
        SmoothFn::power(2.0, 3.0).as_polynomial(),
        Some(&[0.0, 0.0, 0.0, 2.0][..])
    );
    let s = SmoothFn::sqrt(&SmoothFn::polynomial(vec![0.0, 4.0])).unwrap();
    assert!((s.eval(9.0).unwrap() - 6.0).abs() < 1e-15);
}

#[test]
fn composition_chain_rule() {
    // sin-free check: (1 + r^2)^(1/2) composed, derivative r / sqrt(1 + r^2)
    let inner = SmoothFn::polynomial(vec![1.0, 0.0, 1.0]);
    let f = SmoothFn::sqrt(&inner).unwrap();
    assert_eq!(f.kind_name(), "compose");
    for x in [-2.0f64, 0.3, 1.7] {
        let want = x / (1.0 + x * x).sqrt();
        assert!((f.derivative().eval(x).unwrap() - want).abs() < 1e-15);
    }
}

#[test]
fn composition_reports_outer_domain_violation() {
    let outer = SmoothFn::power(1.0, -1.0);
    let f = SmoothFn::polynomial(vec![-1.0, 1.0]).compose(&outer);
    assert!(f.eval(2.0).is_ok());
    assert!(matches!(f.eval(0.5), Err(Error::Domain { .. })));
}

#[test]
fn restricted_functions_keep_domain_through_derivatives() {
    let f = gaussian().restrict(Interval::closed(0.0, 1.0));
    assert!(f.eval(2.0).is_err());
    assert!(f.derivative().eval(2.0).is_err());
    assert!(f.derivative().eval(0.5).is_ok());
    let s = f.add(&SmoothFn::one());
    assert!(s.eval(2.0).is_err());
}

#[test]
fn quadratic_flow_solves_the_change_of_variable() {
    // A = 1 + x^2, x(0) = 0  =>  x(r) = sinh r
    let x = QuadraticFlow::build([1.0, 0.0, 1.0], 0.0, Interval::REAL_LINE).unwrap();
    for t in [-1.5, -0.2, 0.0, 0.9, 2.0] {
        assert!((x.eval(t).unwrap() - t.sinh()).abs() < 1e-11);
        assert!((x.derivative().eval(t).unwrap() - t.cosh()).abs() < 1e-9);
        // x'' = A'(x)/2 = x
        assert!((x.nth_derivative(2).eval(t).unwrap() - t.sinh()).abs() < 1e-10);
    }
    // A = x on (0, inf), x(0) = 1  =>  x(r) = (r/2 + 1)^2 on (-2, inf)
    let y = QuadraticFlow::build([0.0, 1.0, 0.0], 1.0, Interval::POSITIVE).unwrap();
    assert!((y.domain().lo + 2.0).abs() < 1e-8);
    for t in [-1.0, 0.5, 3.0] {
        let want = (t / 2.0 + 1.0) * (t / 2.0 + 1.0);
        assert!((y.eval(t).unwrap() - want).abs() < 1e-10);
    }
}

#[test]
fn concurrent_evaluation_is_pure() {
    let parts = SmoothFn::riccati_lambda(&r(), 2.0, 0.0, Interval::REAL_LINE).unwrap();
    let lam = parts.lambda;
    let pts: Vec<f64> = (0..40).map(|i| -4.0 + 0.2 * i as f64).collect();
    let results: Vec<Vec<f64>> = std::thread::scope(|s| {
        let hs: Vec<_> = (0..6)
            .map(|k| {
                let lam = lam.clone();
                let pts = pts.clone();
                s.spawn(move || {
                    let mut v: Vec<(usize, f64)> = Vec::new();
                    // vary visiting order between threads
                    for i in 0..pts.len() {
                        let i = if k % 2 == 0 { i } else { pts.len() - 1 - i };
                        let j = (i + 7 * k) % pts.len();
                        v.push((j, lam.derivative().eval(pts[j]).unwrap()));
                    }
                    v.sort_by_key(|p| p.0);
                    v.into_iter().map(|p| p.1).collect()
                })
            })
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let fresh = SmoothFn::riccati_lambda(&r(), 2.0, 0.0, Interval::REAL_LINE)
        .unwrap()
        .lambda;
    let serial: Vec<f64> = pts
        .iter()
        .map(|&x| fresh.derivative().eval(x).unwrap())
        .collect();
    for rs in results {
        assert_eq!(rs, serial);
    }
}

#[test]
fn antiderivative_is_additive_over_subintervals() {
    let g = SmoothFn::exp(&SmoothFn::polynomial(vec![0.3, -0.5, -0.7]));
    let cases = [(-3.0, -0.4, 2.2), (-1.1, 0.9, 5.3), (0.0, 1.25, 1.3)];
    for (a, b, c) in cases {
        let fa = g.antiderivative(a).unwrap();
        let fb = g.antiderivative(b).unwrap();
        let whole = fa.eval(c).unwrap();
        let split = fa.eval(b).unwrap() + fb.eval(c).unwrap();
        assert!((whole - split).abs() < 1e-11, "{whole} vs {split}");
    }
}

// ---- property tests -----------------------------------------------------

/// Random expression trees over the real line.
fn arb_fn() -> impl Strategy<Value = SmoothFn> {
    let leaf = prop_oneof![
        prop::collection::vec(-2.0..2.0f64, 1..4).prop_map(SmoothFn::polynomial),
        (-1.0..1.0f64, -0.6..-0.05f64)
            .prop_map(|(b, a)| SmoothFn::exp(&SmoothFn::polynomial(vec![0.0, b, a]))),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(&b)),
            (inner.clone(), -3.0..3.0f64).prop_map(|(a, c)| a.scale(c)),
            inner.clone().prop_map(|a| SmoothFn::exp(&a.scale(0.1))),
            inner
                .clone()
                .prop_map(|a| SmoothFn::exp(&a.scale(0.2)).recip().unwrap()),
            inner.prop_map(|a| {
                SmoothFn::polynomial(vec![0.5, 0.0, 0.3])
                    .mul(&SmoothFn::exp(&a.scale(0.05)))
                    .antiderivative(0.0)
                    .unwrap()
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn derivative_matches_central_difference(f in arb_fn(), seed in 0.0..1.0f64) {
        let d = f.derivative();
        for t in crate::interval::golden_sequence(50, seed) {
            let x = -2.0 + 4.0 * t;
            let h = 1e-5;
            let fd = central_difference(&f, x, h);
            let exact = d.eval(x).unwrap();
            let scale = exact.abs().max(f.eval(x).unwrap().abs()).max(1.0);
            prop_assert!((exact - fd).abs() <= 1e-6 * scale, "x={} exact={} fd={}", x, exact, fd);
        }
    }

    #[test]
    fn riccati_identity_holds_exactly(slope in 0.2..3.0f64, shift in -1.0..1.0f64, c_mag in 4.0..50.0f64, neg in any::<bool>()) {
        let w = SmoothFn::polynomial(vec![shift, slope]);
        let c = if neg { -c_mag } else { c_mag };
        // |C| above the full-line integral of exp(-2 int W) keeps the denominator signed
        let bound = (PI / slope).sqrt() * (shift * shift / slope).exp();
        prop_assume!(c_mag > bound);
        let parts = SmoothFn::riccati_lambda(&w, c, 0.0, Interval::REAL_LINE).unwrap();
        let lam = &parts.lambda;
        let dl = lam.derivative();
        for t in crate::interval::golden_sequence(25, 0.1) {
            let x = -3.0 + 6.0 * t;
            let l = lam.eval(x).unwrap();
            let res = dl.eval(x).unwrap() + l * l + 2.0 * w.eval(x).unwrap() * l;
            prop_assert!(res.abs() < 1e-10);
            prop_assert!((l * parts.f.eval(x).unwrap() - 1.0).abs() < 1e-10);
        }
    }
}
