use crate::deformation::DeformationProfile;
use crate::error::{Error, Result};
use crate::function_algebra::Evaluator;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use std::io::Write;

/// Non-finite values are written as `null` and read back as NaN.
mod lossless_f64 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    #[serde(with = "lossless_f64")]
    pub residual: f64,
    #[serde(with = "lossless_f64")]
    pub tolerance: f64,
    pub pass: bool,
    pub metadata: Value,
}

impl CheckEntry {
    /// `pass` is `residual <= tolerance`; a NaN residual fails.
    pub fn new(name: &str, residual: f64, tolerance: f64, metadata: Value) -> CheckEntry {
        CheckEntry {
            name: name.to_string(),
            residual,
            tolerance,
            pass: residual <= tolerance,
            metadata,
        }
    }

    /// An entry for a check that could not be evaluated.
    pub fn errored(name: &str, tolerance: f64, err: &Error) -> CheckEntry {
        CheckEntry::new(
            name,
            f64::NAN,
            tolerance,
            serde_json::json!({ "error": err.to_string() }),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub pass: bool,
    pub n_checks: usize,
    pub n_failed: usize,
    pub failing: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub system: Value,
    pub checks: Vec<CheckEntry>,
    pub summary: ReportSummary,
    pub timestamp: String,
}

impl VerificationReport {
    pub fn new(system: Value, checks: Vec<CheckEntry>) -> Result<VerificationReport> {
        Self::with_timestamp(
            system,
            checks,
            chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        )
    }

    pub fn with_timestamp(
        system: Value,
        checks: Vec<CheckEntry>,
        timestamp: String,
    ) -> Result<VerificationReport> {
        if checks.is_empty() {
            return Err(Error::Report("a report needs at least one check".into()));
        }
        let failing: Vec<String> = checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.clone())
            .collect();
        let summary = ReportSummary {
            pass: failing.is_empty(),
            n_checks: checks.len(),
            n_failed: failing.len(),
            failing,
        };
        Ok(VerificationReport {
            system,
            checks,
            summary,
            timestamp,
        })
    }

    pub fn check(&self, name: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Report(e.to_string()))
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        let s = self.to_json()?;
        out.write_all(s.as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|e| Error::Report(e.to_string()))
    }
}

pub fn read_report(json: &str) -> Result<VerificationReport> {
    serde_json::from_str(json).map_err(|e| Error::Report(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenRow {
    pub index: usize,
    pub eigenvalue_h1: f64,
    pub eigenvalue_hprime: f64,
    pub matched: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub r: f64,
    pub v2: f64,
    pub vprime: f64,
    pub lambda: f64,
    pub omega: f64,
}

fn full(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Report(e.to_string())
}

pub fn write_eigen_csv<W: Write>(out: W, rows: &[EigenRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "eigenvalue_H1", "eigenvalue_Hprime", "matched"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.index.to_string(),
            full(r.eigenvalue_h1),
            full(r.eigenvalue_hprime),
            r.matched.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn write_profile_csv<W: Write>(out: W, rows: &[ProfileRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "v2", "vprime", "lambda", "omega"])
        .map_err(csv_err)?;
    for p in rows {
        w.write_record([
            full(p.r),
            full(p.v2),
            full(p.vprime),
            full(p.lambda),
            full(p.omega),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

/// `v2 = W^2 - W'`, the deformed potential, `lambda` and `omega` at the
/// given points.
pub fn profile_table(profile: &DeformationProfile, points: &[f64]) -> Result<Vec<ProfileRow>> {
    let w = &profile.w;
    let v2 = w.square().sub(&w.derivative());
    let vp = profile.deformed_potential();
    points
        .iter()
        .map(|&r| {
            let mut ev = Evaluator::new(r);
            Ok(ProfileRow {
                r,
                v2: ev.eval(&v2)?,
                vprime: ev.eval(&vp)?,
                lambda: ev.eval(&profile.lambda)?,
                omega: ev.eval(&profile.omega)?,
            })
        })
        .collect()
}
