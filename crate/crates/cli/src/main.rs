mod config;

use clap::{Parser, Subcommand};
use config::{Resolved, RunFlags};
use msf_core::deformation::AdmissibleSet;
use msf_core::master_system::{catalog_constraints, CATALOG_NAMES};
use msf_core::superintegrable_assembly::assemble_with;
use msf_core::verification::{
    isospectrality_from_potentials, profile_table, run_suite, suite_profile, write_eigen_csv,
    write_profile_csv, SuiteOptions, VerificationReport,
};
use msf_core::Error;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INADMISSIBLE: u8 = 3;
const PROFILE_POINTS: usize = 201;

#[derive(Parser)]
#[command(name = "msf", version, about = "Shape-invariant systems, Riccati deformations and their superintegrable extensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog families and their parameter constraints
    Catalog,
    /// Construct W, lambda, omega, H_s and the integrals; write the operator summary JSON
    Build(RunFlags),
    /// Diagonalize H1 and H' and write the eigenvalue CSV
    Spectrum(RunFlags),
    /// Run the full check suite and write the verification report
    Verify(RunFlags),
}

enum Failure {
    Config(String),
    Inadmissible(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InadmissibleConstant { c, excluded_lo, excluded_hi } => {
                Failure::Inadmissible(inadmissible_message(c, excluded_lo, excluded_hi))
            }
            Error::UnknownFamily(_) | Error::InvalidParameter(_) | Error::Grid(_) => {
                Failure::Config(e.to_string())
            }
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn inadmissible_message(c: f64, lo: f64, hi: f64) -> String {
    if (lo + hi).abs() <= 1e-9 * hi.abs() {
        format!("C = {c} is inadmissible: admissible |C| > {hi:.9}")
    } else {
        format!("C = {c} is inadmissible: admissible C < {lo:.9} or C > {hi:.9}")
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

/// Runs `f` against the output file, or stdout when no path is given.
fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<(), Failure>) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let file = std::fs::File::create(p).map_err(|e| io_err(p, e))?;
            let mut w = std::io::BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(|e| io_err(p, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)
        }
    }
}

fn catalog() {
    for name in CATALOG_NAMES {
        println!("{name}");
        if let Some(c) = catalog_constraints(name) {
            println!("    {c}");
        }
    }
}

fn write_profile(run: &Resolved, profile: &msf_core::deformation::DeformationProfile) -> Result<(), Failure> {
    let Some(path) = &run.profile_csv else { return Ok(()) };
    let (a, b) = profile.domain.probe_window();
    let pts: Vec<f64> =
        (0..PROFILE_POINTS).map(|i| a + (b - a) * i as f64 / (PROFILE_POINTS - 1) as f64).collect();
    let rows = profile_table(profile, &pts)?;
    with_output(Some(path), |w| Ok(write_profile_csv(w, &rows)?))
}

fn suite_options(run: &Resolved) -> Result<SuiteOptions, Failure> {
    let sys = run.system()?;
    Ok(SuiteOptions {
        c: run.c,
        r0: run.r0,
        grid: Some(run.grid_spec(&sys)?),
        k: run.k,
        ..SuiteOptions::default()
    })
}

fn band_json(band: &Option<AdmissibleSet>) -> serde_json::Value {
    serde_json::to_value(band).unwrap_or(serde_json::Value::Null)
}

fn build(run: &Resolved) -> Result<(), Failure> {
    let sys = run.system()?;
    let opts = suite_options(run)?;
    let profile = suite_profile(&sys, &opts)?;
    let assembled = assemble_with(&sys, profile.clone())?;
    let doc = serde_json::json!({
        "system": sys.descriptor(),
        "deformation": {
            "c": profile.c,
            "r0": profile.r0,
            "domain": profile.domain,
            "admissible": band_json(&profile.admissible),
        },
        "assembly": assembled.summary()?,
    });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Runtime(e.to_string()))?;
    with_output(run.report.as_deref(), |w| {
        writeln!(w, "{text}").map_err(|e| Failure::Runtime(e.to_string()))
    })?;
    write_profile(run, &profile)
}

fn spectrum(run: &Resolved) -> Result<(), Failure> {
    let sys = run.system()?;
    let opts = suite_options(run)?;
    let profile = suite_profile(&sys, &opts)?;
    let w = &profile.w;
    let v1 = w.square().add(&w.derivative());
    let grid = opts.grid.expect("grid is always resolved");
    let iso = isospectrality_from_potentials(&v1, &profile.deformed_potential(), &grid, run.k)?;
    with_output(run.report.as_deref(), |out| Ok(write_eigen_csv(out, &iso.rows())?))?;
    match iso.extra_bound_state {
        Some(e) => eprintln!("extra bound state of H' at {e:.9}"),
        None => eprintln!("no extra bound state of H' below the H1 ground level"),
    }
    write_profile(run, &profile)
}

fn verify(run: &Resolved) -> Result<bool, Failure> {
    let sys = run.system()?;
    let opts = suite_options(run)?;
    let mut report = run_suite(&sys, &opts)?;
    if !run.checks.is_empty() {
        let kept = report.checks.into_iter().filter(|c| run.checks.contains(&c.name)).collect();
        report = VerificationReport::with_timestamp(report.system, kept, report.timestamp)?;
    }
    with_output(run.report.as_deref(), |w| Ok(report.write_json(w)?))?;
    for c in &report.checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        eprintln!("{tag} {:<28} residual {:.3e} tolerance {:.1e}", c.name, c.residual, c.tolerance);
    }
    if run.profile_csv.is_some() {
        write_profile(run, &suite_profile(&sys, &opts)?)?;
    }
    Ok(report.summary.pass)
}

fn apply_env() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("MSF_QUAD_TOL") {
        let tol: f64 = v.trim().parse().map_err(|_| Failure::Config(format!("MSF_QUAD_TOL = `{v}` is not a number")))?;
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Failure::Config(format!("MSF_QUAD_TOL must be positive, got {tol}")));
        }
        msf_core::quadrature::set_default_tolerance(tol);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    apply_env()?;
    match cli.command {
        Command::Catalog => {
            catalog();
            Ok(true)
        }
        Command::Build(f) => build(&f.resolve().map_err(Failure::Config)?).map(|_| true),
        Command::Spectrum(f) => spectrum(&f.resolve().map_err(Failure::Config)?).map(|_| true),
        Command::Verify(f) => verify(&f.resolve().map_err(Failure::Config)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Inadmissible(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_INADMISSIBLE)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}
