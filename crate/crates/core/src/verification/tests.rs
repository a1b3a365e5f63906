use super::*;
use crate::deformation::deform_system;
use crate::master_system::catalog_lookup;
use crate::master_system::CatalogParams;
use crate::operator_calculus::{first_order_pair, partner_hamiltonians};

fn ex1(beta: f64) -> MasterSystem {
    catalog_lookup(
        "oscillator-like",
        CatalogParams {
            alpha: 0.0,
            beta,
            m: 0,
        },
    )
    .unwrap()
}

fn ex2() -> MasterSystem {
    catalog_lookup(
        "radial-oscillator-like",
        CatalogParams {
            alpha: 0.5,
            beta: 4.0,
            m: 1,
        },
    )
    .unwrap()
}

fn poly(c: &[f64]) -> SmoothFn {
    SmoothFn::polynomial(c.to_vec())
}

#[test]
fn grid_validation() {
    assert!(GridSpec::new(-1.0, 1.0, 63).is_err());
    assert!(GridSpec::new(1.0, 1.0, 100).is_err());
    assert!(GridSpec::new(-1.0, 1.0, 100)
        .unwrap()
        .with_order(3)
        .is_err());
    let g = GridSpec::new(0.0, 1.0, 99).unwrap();
    assert!((g.step() - 0.01).abs() < 1e-15);
    assert_eq!(g.nodes().len(), 99);
    assert!((g.refined().step() - 0.005).abs() < 1e-15);
    let h = GridSpec::for_system(&ex2(), 500).unwrap();
    assert_eq!((h.r_min, h.r_max), (1e-3, 7.0));
    let f = GridSpec::for_system(&ex1(4.0), 500).unwrap();
    assert_eq!((f.r_min, f.r_max), (-6.0, 6.0));
}

#[test]
fn oscillator_spectra() {
    let g = GridSpec::new(-10.0, 10.0, 2000).unwrap();
    let h2 = discretize_and_eigen(&poly(&[-1.0, 0.0, 1.0]), &g, 5).unwrap();
    for (j, e) in h2.eigenvalues.iter().enumerate() {
        assert!((e - 2.0 * j as f64).abs() < 2e-3, "{e}");
    }
    let h1 = discretize_and_eigen(&poly(&[1.0, 0.0, 1.0]), &g, 5).unwrap();
    for (j, e) in h1.eigenvalues.iter().enumerate() {
        assert!((e - 2.0 - 2.0 * j as f64).abs() < 2e-3, "{e}");
    }
    assert!(h1.eigenvalues.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn radial_spectrum_is_equidistant() {
    let v = SmoothFn::power(2.0, -2.0).add(&poly(&[-4.0, 0.0, 1.0]));
    let g = GridSpec::new(1e-3, 12.0, 2000).unwrap();
    let e = discretize_and_eigen(&v, &g, 6).unwrap().eigenvalues;
    for w in e.windows(2) {
        assert!((w[1] - w[0] - 4.0).abs() < 5e-3, "{:?}", e);
    }
}

#[test]
fn fourth_order_stencil_is_sharper() {
    let v = poly(&[-1.0, 0.0, 1.0]);
    let g2 = GridSpec::new(-8.0, 8.0, 300).unwrap();
    let g4 = g2.with_order(4).unwrap();
    let e2 = discretize_and_eigen(&v, &g2, 3).unwrap().eigenvalues;
    let e4 = discretize_and_eigen(&v, &g4, 3).unwrap().eigenvalues;
    for j in 0..3 {
        let exact = 2.0 * j as f64;
        assert!((e4[j] - exact).abs() < 0.05 * (e2[j] - exact).abs());
    }
}

#[test]
fn second_order_convergence() {
    let g = GridSpec::new(-8.5, 8.5, 255).unwrap();
    let p = convergence_order(&poly(&[-1.0, 0.0, 1.0]), &g).unwrap();
    assert!((1.7..=2.3).contains(&p), "{p}");
}

#[test]
fn singular_potential_is_reported() {
    let g = GridSpec::new(-1.0, 1.0, 65).unwrap();
    assert!(discretize_and_eigen(&SmoothFn::power(1.0, -1.0), &g, 1).is_err());
}

#[test]
fn spectrum_checks_per_family() {
    let e = spectrum_check(
        &ex1(2.0),
        &GridSpec::for_system(&ex1(2.0), 2000).unwrap(),
        6,
        5e-3,
    )
    .unwrap();
    assert!(e.pass && e.residual < 5e-3, "{}", e.residual);
    let s1 = ex1(1.0);
    let e = spectrum_check(&s1, &GridSpec::for_system(&s1, 2000).unwrap(), 5, 5e-3).unwrap();
    let gaps: Vec<f64> = serde_json::from_value(e.metadata["gaps"].clone()).unwrap();
    assert!(gaps.iter().all(|g| (g - 1.0).abs() < 5e-3));
    let e = spectrum_check(
        &ex2(),
        &GridSpec::for_system(&ex2(), 2000).unwrap(),
        6,
        1e-2,
    )
    .unwrap();
    assert!(e.pass, "{}", e.residual);
}

#[test]
fn deformed_oscillator_is_isospectral() {
    let sys = ex1(2.0);
    let g = GridSpec::for_system(&sys, 2000).unwrap();
    let p = deform_system(&sys, 2.0).unwrap();
    let (e, iso) = isospectrality_check(&p, &g, 6, 5e-3).unwrap();
    assert!(e.pass, "{}", e.residual);
    assert!(iso.matched.iter().all(|m| *m));
    for (j, h) in iso.h1.iter().enumerate() {
        assert!((h - 2.0 * (j + 1) as f64).abs() < 5e-3);
    }
    let extra = iso.extra_bound_state.expect("extra state");
    assert!(extra.abs() < 5e-3);
    assert_eq!(iso.rows().len(), 6);
}

#[test]
fn huge_constant_reduces_to_partner() {
    let sys = ex1(2.0);
    let g = GridSpec::for_system(&sys, 2000).unwrap();
    let p = deform_system(&sys, 1e12).unwrap();
    let (_, iso) = isospectrality_check(&p, &g, 6, 5e-3).unwrap();
    for (j, h) in iso.hprime.iter().enumerate() {
        assert!((h - 2.0 * j as f64).abs() < 5e-3);
    }
}

#[test]
fn corrupted_partner_is_detected() {
    let sys = ex1(2.0);
    let g = GridSpec::for_system(&sys, 2000).unwrap();
    let p = deform_system(&sys, 2.0).unwrap();
    let w = &p.w;
    let v1 = w.square().add(&w.derivative());
    let bad = p.deformed_potential().add(&poly(&[0.0, 0.1]));
    let iso = isospectrality_from_potentials(&v1, &bad, &g, 6).unwrap();
    assert!(iso.residual > 1e-2, "{}", iso.residual);
}

#[test]
fn residual_normalization() {
    assert_eq!(
        pointwise_residual_1d(&DiffOp1D::zero(), &[0.0, 1.0], 1.0).unwrap(),
        0.0
    );
    assert_eq!(
        pointwise_residual_2d(&DiffOp2D::zero(), &[(0.0, 1.0)], 1.0).unwrap(),
        0.0
    );
    let w = ex1(2.0).superpotential().unwrap().w;
    let (ap, _) = first_order_pair(&w);
    let (_, h2) = partner_hamiltonians(&w).unwrap();
    let pts: Vec<f64> = (0..30).map(|i| -3.0 + 0.2 * i as f64).collect();
    let r = commutator_residual_1d(&h2, &ap, &ap.scale(2.0), &pts).unwrap();
    assert!(r < 1e-10);
    // a wrong step leaves a residual that does not depend on global scaling
    let a = commutator_residual_1d(&h2, &ap, &ap.scale(1.0), &pts).unwrap();
    let b = commutator_residual_1d(&h2.scale(3.0), &ap.scale(5.0), &ap.scale(15.0), &pts).unwrap();
    assert!(a > 1e-3);
    assert!((a - b).abs() < 1e-12 * a);
}

#[test]
fn report_summary_and_round_trip() {
    let ok = CheckEntry::new("a", 1e-12, 1e-10, serde_json::json!({"x": 0.1}));
    let bad = CheckEntry::new(
        "b",
        0.5,
        1e-3,
        serde_json::json!({"note": "z", "v": [1.0, 2.5e-300]}),
    );
    let nan = CheckEntry::new("c", f64::NAN, 1.0, serde_json::json!({}));
    assert!(!nan.pass);
    let single = VerificationReport::new(serde_json::json!({"s": 1}), vec![ok.clone()]).unwrap();
    assert!(single.summary.pass);
    let mixed = VerificationReport::with_timestamp(
        serde_json::json!({"s": 1}),
        vec![ok, bad, nan],
        "t".into(),
    )
    .unwrap();
    assert!(!mixed.summary.pass);
    assert_eq!(
        mixed.summary.failing,
        vec!["b".to_string(), "c".to_string()]
    );
    let text = mixed.to_json().unwrap();
    let again = read_report(&text).unwrap().to_json().unwrap();
    assert_eq!(text, again);
    assert!(VerificationReport::new(serde_json::json!({}), vec![]).is_err());
}

#[test]
fn full_precision_in_json() {
    let v = 0.1 + 0.2;
    let e = CheckEntry::new("p", v, 1.0, serde_json::json!({}));
    let r = VerificationReport::with_timestamp(serde_json::json!({}), vec![e], "t".into()).unwrap();
    let back = read_report(&r.to_json().unwrap()).unwrap();
    assert_eq!(back.checks[0].residual.to_bits(), v.to_bits());
}

#[test]
fn csv_tables() {
    let sys = ex1(2.0);
    let g = GridSpec::for_system(&sys, 500).unwrap();
    let p = deform_system(&sys, 2.0).unwrap();
    let (_, iso) = isospectrality_check(&p, &g, 4, 5e-3).unwrap();
    let mut buf = Vec::new();
    write_eigen_csv(&mut buf, &iso.rows()).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,eigenvalue_H1,eigenvalue_Hprime,matched");
    assert_eq!(lines.len(), 1 + 4);
    let rows = profile_table(&p, &[-1.0, 0.0, 1.0]).unwrap();
    assert!((rows[1].lambda - 0.5).abs() < 1e-12);
    assert!((rows[1].vprime + 0.5).abs() < 1e-12);
    let mut buf = Vec::new();
    write_profile_csv(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("r,v2,vprime,lambda,omega\n"));
    assert_eq!(text.lines().count(), 4);
}
