use msf_core::master_system::{catalog_lookup, CatalogParams};
use msf_core::verification::{admissible_band, run_suite, SuiteOptions};
use msf_core::Error;

#[test]
fn oscillator_suite_passes() {
    let sys = catalog_lookup(
        "oscillator-like",
        CatalogParams {
            alpha: 0.0,
            beta: 2.0,
            m: 0,
        },
    )
    .unwrap();
    let report = run_suite(&sys, &SuiteOptions::default()).unwrap();
    for c in &report.checks {
        println!(
            "{:28} {:>12.3e} {:>8.1e} {}",
            c.name, c.residual, c.tolerance, c.pass
        );
    }
    assert!(report.summary.pass, "{:?}", report.summary.failing);
}

#[test]
fn radial_suite_records_ladder_failure() {
    let sys = catalog_lookup(
        "radial-oscillator-like",
        CatalogParams {
            alpha: 0.5,
            beta: 4.0,
            m: 1,
        },
    )
    .unwrap();
    let band = admissible_band(&sys, None).unwrap();
    let opts = SuiteOptions {
        c: band.excluded_hi + 1.0,
        ..SuiteOptions::default()
    };
    let report = run_suite(&sys, &opts).unwrap();
    for c in &report.checks {
        println!(
            "{:28} {:>12.3e} {:>8.1e} {} {}",
            c.name, c.residual, c.tolerance, c.pass, c.metadata
        );
    }
    for name in [
        "riccati_lambda",
        "riccati_omega",
        "spectrum_gaps",
        "isospectrality",
        "hs_k_commutator",
    ] {
        assert!(report.check(name).unwrap().pass, "{name}");
    }
    assert!(!report.check("ladder_x_plus").unwrap().pass);
    assert!(!report.summary.pass);
}

#[test]
fn inadmissible_constant_stops_the_suite() {
    let sys = catalog_lookup(
        "oscillator-like",
        CatalogParams {
            alpha: 0.0,
            beta: 2.0,
            m: 0,
        },
    )
    .unwrap();
    let err = run_suite(
        &sys,
        &SuiteOptions {
            c: 0.5,
            ..SuiteOptions::default()
        },
    )
    .unwrap_err();
    assert!(matches!(err, Error::InadmissibleConstant { .. }));
}

#[test]
fn suite_is_deterministic() {
    let sys = catalog_lookup(
        "oscillator-like",
        CatalogParams {
            alpha: 0.3,
            beta: 2.0,
            m: 0,
        },
    )
    .unwrap();
    let opts = SuiteOptions {
        c: -1.5,
        ..SuiteOptions::default()
    };
    let mut a = run_suite(&sys, &opts).unwrap();
    let mut b = run_suite(&sys, &opts).unwrap();
    a.timestamp.clear();
    b.timestamp.clear();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}
