use super::{
    commutator_residual_1d, commutator_residual_2d, convergence_order, isospectrality_check,
    spectrum_check, CheckEntry, GridSpec, VerificationReport, DEFAULT_GRID_N,
};
use crate::deformation::{default_frame, regularity_bounds, solve_deformation, DeformationProfile};
use crate::error::{Error, Result};
use crate::master_system::{partner_potentials, Family, MasterSystem};
use crate::operator_calculus::{DiffOp1D, DiffOp2D};
use crate::superintegrable_assembly::{assemble_with, fit_proportionality, AssembledSystem};
use serde_json::{json, Value};

/// Names of every check `run_suite` produces, in report order.
pub const CHECK_NAMES: [&str; 17] = [
    "superpotential_closed_form",
    "vm_identity",
    "riccati_lambda",
    "riccati_omega",
    "admissible_constant",
    "ladder_x_plus",
    "ladder_x_minus",
    "ladder_y_plus",
    "ladder_y_minus",
    "hs_k_commutator",
    "hs_a1_commutator",
    "hs_a2_commutator",
    "k_a1_proportionality",
    "integral_orders",
    "spectrum_gaps",
    "isospectrality",
    "fd_convergence_order",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub c: f64,
    /// Base point of the deformation; the family default when `None`.
    pub r0: Option<f64>,
    /// Dirichlet box; the family default when `None`.
    pub grid: Option<GridSpec>,
    pub k: usize,
    pub probes_1d: usize,
    pub probes_2d: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            c: 2.0,
            r0: None,
            grid: None,
            k: 6,
            probes_1d: 200,
            probes_2d: 100,
        }
    }
}

/// Orders of `(K, A1, A2)` stated for the catalog families.
fn claimed_orders(family: Family) -> Option<[usize; 3]> {
    match family {
        Family::OscillatorLike => Some([2, 3, 4]),
        Family::RadialOscillatorLike => Some([2, 7, 8]),
        Family::Generic => None,
    }
}

fn entry(name: &str, tol: f64, f: impl FnOnce() -> Result<(f64, Value)>) -> CheckEntry {
    match f() {
        Ok((res, meta)) => CheckEntry::new(name, res, tol, meta),
        Err(e) => CheckEntry::errored(name, tol, &e),
    }
}

/// The deformation profile a suite run uses; fails with
/// `InadmissibleConstant` before any check is attempted.
pub fn suite_profile(sys: &MasterSystem, opts: &SuiteOptions) -> Result<DeformationProfile> {
    let (r0, domain) = default_frame(sys.family);
    let w = sys.superpotential()?.w;
    solve_deformation(&w, opts.c, opts.r0.unwrap_or(r0), domain)
}

fn closed_form_checks(
    sys: &MasterSystem,
    profile: &DeformationProfile,
    opts: &SuiteOptions,
) -> Vec<CheckEntry> {
    let mut out = Vec::new();
    let w = profile.w.clone();
    out.push(entry("superpotential_closed_form", 1e-12, || {
        let composed = sys.superpotential_composed()?;
        let pts = w.domain().intersect(&composed.domain()).probe_points(100);
        let mut res = 0.0f64;
        for &r in &pts {
            let (a, b) = (w.eval(r)?, composed.eval(r)?);
            res = res.max((a - b).abs() / (1.0 + a.abs()));
        }
        Ok((res, json!({ "points": pts.len() })))
    }));
    out.push(entry("vm_identity", 1e-9, || {
        let vm = sys.potential_vm()?;
        let (v1, _) = partner_potentials(&sys.superpotential()?);
        let pts = v1.domain().intersect(&vm.domain()).probe_points(100);
        let mut res = 0.0f64;
        for &r in &pts {
            let (a, b) = (vm.eval(r)?, v1.eval(r)?);
            res = res.max((a - b).abs() / (1.0 + b.abs()));
        }
        Ok((res, json!({ "points": pts.len() })))
    }));
    let pts = profile.domain.probe_points(opts.probes_1d);
    match profile.riccati_residual(&pts) {
        Ok(r) => {
            out.push(CheckEntry::new(
                "riccati_lambda",
                r.lambda_form,
                1e-10,
                json!({ "points": pts.len() }),
            ));
            out.push(CheckEntry::new(
                "riccati_omega",
                r.omega_form,
                1e-10,
                json!({ "points": pts.len() }),
            ));
        }
        Err(e) => {
            out.push(CheckEntry::errored("riccati_lambda", 1e-10, &e));
            out.push(CheckEntry::errored("riccati_omega", 1e-10, &e));
        }
    }
    let band = profile.admissible;
    let admitted = band.map_or(true, |b| b.admits(profile.c));
    out.push(CheckEntry::new(
        "admissible_constant",
        if admitted { 0.0 } else { 1.0 },
        0.0,
        json!({ "c": profile.c, "r0": profile.r0, "band": band }),
    ));
    out
}

fn ladder_check(name: &str, h: &DiffOp1D, x: &DiffOp1D, step: f64, n: usize) -> CheckEntry {
    entry(name, 1e-9, || {
        let pts = h.domain().intersect(&x.domain()).probe_points(n);
        let res = commutator_residual_1d(h, x, &x.scale(step), &pts)?;
        Ok((
            res,
            json!({ "ladder_order": x.leading_order()?, "step": step }),
        ))
    })
}

fn algebra_checks(a: &AssembledSystem, opts: &SuiteOptions) -> Vec<CheckEntry> {
    let b = a.ladder_x.spacing;
    let by = a.ladder_y.spacing;
    let n = opts.probes_1d;
    let mut out = vec![
        ladder_check("ladder_x_plus", &a.h_r, &a.ladder_x.plus, b, n),
        ladder_check("ladder_x_minus", &a.h_r, &a.ladder_x.minus, -b, n),
        ladder_check("ladder_y_plus", &a.h_rp, &a.ladder_y.plus, by, n),
        ladder_check("ladder_y_minus", &a.h_rp, &a.ladder_y.minus, -by, n),
    ];
    let probes = a.probes(opts.probes_2d);
    let zero = DiffOp2D::zero();
    for (name, op, tol) in [
        ("hs_k_commutator", &a.k, 1e-11),
        ("hs_a1_commutator", &a.a1, 1e-8),
        ("hs_a2_commutator", &a.a2, 1e-8),
    ] {
        out.push(entry(name, tol, || {
            Ok((
                commutator_residual_2d(&a.hs, op, &zero, &probes)?,
                json!({ "points": probes.len() }),
            ))
        }));
    }
    out.push(entry("k_a1_proportionality", 1e-8, || {
        let lhs = a.k.commutator(&a.a1)?;
        let (c, res) = fit_proportionality(&lhs, &a.a2, &probes)?;
        let scale = a.k.max_abs_on(&probes)? * a.a1.max_abs_on(&probes)?;
        Ok((
            res / scale,
            json!({ "fitted_c": c, "points": probes.len() }),
        ))
    }));
    let measured = [a.orders.k, a.orders.a1, a.orders.a2];
    let claimed = claimed_orders(a.system.family);
    let residual = claimed.map_or(f64::NAN, |c| {
        measured
            .iter()
            .zip(&c)
            .map(|(m, c)| m.abs_diff(*c))
            .sum::<usize>() as f64
    });
    out.push(CheckEntry::new(
        "integral_orders",
        residual,
        0.0,
        json!({
            "measured": measured,
            "claimed": claimed,
            "a1_cancellation": a.a1_cancellation,
            "resonance": a.resonance,
        }),
    ));
    out
}

fn joined<T>(r: std::thread::Result<Result<T>>) -> Result<T> {
    r.unwrap_or_else(|_| Err(Error::Eigen("worker panicked".into())))
}

fn spectral_checks(
    sys: &MasterSystem,
    profile: &DeformationProfile,
    grid: &GridSpec,
    k: usize,
) -> Vec<CheckEntry> {
    // the half-line box edge at 1e-3 shifts levels of barrier-free partners
    let gap_tol = if sys.family.is_half_line() {
        1e-2
    } else {
        5e-3
    };
    let (spectrum, iso, conv) = std::thread::scope(|s| {
        let a = s.spawn(|| spectrum_check(sys, grid, k, gap_tol));
        let b = s.spawn(|| isospectrality_check(profile, grid, k, gap_tol));
        let c = s.spawn(|| -> Result<f64> {
            let coarse = GridSpec { n: 255, ..*grid };
            let (_, v2) = partner_potentials(&sys.superpotential()?);
            convergence_order(&v2, &coarse)
        });
        (joined(a.join()), joined(b.join()), joined(c.join()))
    });
    vec![
        spectrum.unwrap_or_else(|e| CheckEntry::errored("spectrum_gaps", gap_tol, &e)),
        iso.map(|(e, _)| e)
            .unwrap_or_else(|e| CheckEntry::errored("isospectrality", gap_tol, &e)),
        match conv {
            Ok(p) => CheckEntry::new(
                "fd_convergence_order",
                (p - 2.0).abs(),
                0.3,
                json!({ "order": p }),
            ),
            Err(e) => CheckEntry::errored("fd_convergence_order", 0.3, &e),
        },
    ]
}

pub fn system_descriptor(
    sys: &MasterSystem,
    profile: &DeformationProfile,
    grid: &GridSpec,
) -> Value {
    json!({
        "descriptor": sys.descriptor(),
        "family": sys.family,
        "alpha": sys.alpha,
        "beta": sys.beta,
        "m": sys.m,
        "c": profile.c,
        "r0": profile.r0,
        "grid": grid,
    })
}

/// Runs every check on a catalog system deformed with `opts.c`. An
/// inadmissible constant is an error; failures of individual checks are
/// recorded in the report.
pub fn run_suite(sys: &MasterSystem, opts: &SuiteOptions) -> Result<VerificationReport> {
    let profile = suite_profile(sys, opts)?;
    let grid = match opts.grid {
        Some(g) => g,
        None => GridSpec::for_system(sys, DEFAULT_GRID_N)?,
    };
    let (mut checks, algebra, spectral) = std::thread::scope(|s| {
        let alg = s.spawn(|| match assemble_with(sys, profile.clone()) {
            Ok(a) => algebra_checks(&a, opts),
            Err(e) => vec![CheckEntry::errored("assembly", 0.0, &e)],
        });
        let spec = s.spawn(|| spectral_checks(sys, &profile, &grid, opts.k));
        let closed = closed_form_checks(sys, &profile, opts);
        let failed = |name: &str| {
            vec![CheckEntry::errored(
                name,
                0.0,
                &Error::Report("worker panicked".into()),
            )]
        };
        (
            closed,
            alg.join().unwrap_or_else(|_| failed("assembly")),
            spec.join().unwrap_or_else(|_| failed("spectra")),
        )
    });
    checks.extend(algebra);
    checks.extend(spectral);
    VerificationReport::new(system_descriptor(sys, &profile, &grid), checks)
}

/// Admissible band of a system without building a profile.
pub fn admissible_band(
    sys: &MasterSystem,
    r0: Option<f64>,
) -> Result<crate::deformation::AdmissibleSet> {
    let (r0_default, domain) = default_frame(sys.family);
    regularity_bounds(&sys.superpotential()?.w, domain, r0.unwrap_or(r0_default))
}
