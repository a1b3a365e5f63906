//! One-parameter deformation of a superpotential.
//!
//! Given `W` and a constant `C`, `f` solves `f' - 2 W f = 1` through the
//! integrating factor
//!
//! ```text
//! f(r) = exp(2 Phi(r)) (C + int_{r0}^r exp(-2 Phi(s)) ds),   Phi(r) = int_{r0}^r W
//! ```
//!
//! and `lambda = 1/f` solves `lambda' + lambda^2 + 2 W lambda = 0`. The new
//! superpotential is `omega = W + lambda` and the deformed partner
//! Hamiltonian is `B+ B- = -d^2 + omega^2 - omega'`, whose potential is
//! `W^2 - W' - 2 lambda'`.

use crate::error::{Error, Result};
use crate::function_algebra::SmoothFn;
use crate::interval::Interval;
use crate::master_system::{Family, MasterSystem};
use serde::Serialize;

/// Left edge of the certified domain for half-line families.
pub const HALF_LINE_EPSILON: f64 = 1e-3;

const TAIL_TARGET: f64 = 1e-15;
const MAX_TAIL_STEPS: usize = 400;

/// Values of `C` for which `C + int_{r0}^r exp(-2 Phi)` has no zero: the
/// complement of `[excluded_lo, excluded_hi] = [-I_plus, -I_minus]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibleSet {
    pub i_minus: f64,
    pub i_plus: f64,
    pub excluded_lo: f64,
    pub excluded_hi: f64,
    /// Radii beyond which tails were bounded instead of integrated.
    pub truncation: (f64, f64),
    /// Sum of the tail bounds folded into the excluded band.
    pub tail_margin: f64,
}

impl AdmissibleSet {
    pub fn admits(&self, c: f64) -> bool {
        c.is_finite() && (c < self.excluded_lo || c > self.excluded_hi)
    }
}

#[derive(Debug, Clone)]
pub struct DeformationProfile {
    pub w: SmoothFn,
    pub c: f64,
    pub r0: f64,
    /// `None` for profiles assembled from an arbitrary `lambda`.
    pub f: Option<SmoothFn>,
    pub lambda: SmoothFn,
    pub omega: SmoothFn,
    pub admissible: Option<AdmissibleSet>,
    pub domain: Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiccatiResidual {
    /// `max |lambda' + lambda^2 + 2 W lambda|`
    pub lambda_form: f64,
    /// `max |omega^2 + omega' - W^2 - W'|`
    pub omega_form: f64,
}

impl RiccatiResidual {
    pub fn max(&self) -> f64 {
        self.lambda_form.max(self.omega_form)
    }
}

/// Base point and certified domain used for a family.
pub fn default_frame(family: Family) -> (f64, Interval) {
    if family.is_half_line() {
        (1.0, Interval::from_closed(HALF_LINE_EPSILON))
    } else {
        (0.0, Interval::REAL_LINE)
    }
}

/// Bound on `int_R^{+-inf} exp(-2 Phi)` valid when `W` keeps the sign it
/// has at `R` and grows in magnitude outward: `exp(-2 Phi(R)) / (2 |W(R)|)`.
fn tail_bound(
    w: &SmoothFn,
    dw: &SmoothFn,
    phi: &SmoothFn,
    r: f64,
    dir: f64,
) -> Result<Option<f64>> {
    let wr = w.eval(r)?;
    if wr * dir <= 0.0 {
        return Ok(None);
    }
    // outward monotonicity of |W|, checked on a stretch beyond R
    for k in 0..=16 {
        let s = r + dir * (k as f64) * (1.0 + r.abs()) / 4.0;
        if !w.domain().contains(s) {
            break;
        }
        match dw.eval(s) {
            Ok(v) if v >= 0.0 => {}
            Ok(_) => return Ok(None),
            Err(Error::NonFinite { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    let e = (-2.0 * phi.eval(r)?).exp();
    Ok(Some(e / (2.0 * wr.abs())))
}

/// Range of `int_{r0}^r exp(-2 int_{r0} W)` over `domain`, as an admissible
/// set for `C`. Infinite ends are marched outward until the tail bound is
/// negligible; the bound is added to the excluded band.
pub fn regularity_bounds(w: &SmoothFn, domain: Interval, r0: f64) -> Result<AdmissibleSet> {
    let parts = SmoothFn::riccati_lambda(w, 1.0, r0, domain)?;
    let (phi, integral) = (parts.phi, parts.integral);
    let dw = w.derivative();
    let domain = w.domain().intersect(&domain);

    let side = |end: f64, dir: f64| -> Result<(f64, f64, f64)> {
        if end.is_finite() {
            return Ok((integral.eval(end)?, end, 0.0));
        }
        let mut r = r0;
        let mut step = 0.5;
        for _ in 0..MAX_TAIL_STEPS {
            r += dir * step;
            step = (step * 1.25).min(4.0);
            if let Some(b) = tail_bound(w, &dw, &phi, r, dir)? {
                let i = integral.eval(r)?;
                if b <= TAIL_TARGET * (1.0 + i.abs()) {
                    return Ok((i + dir * b, r, b));
                }
            }
        }
        Err(Error::TailBound {
            side: if dir > 0.0 { "upper" } else { "lower" },
            reason: format!("no decaying tail found up to r = {r}"),
        })
    };
    let (i_minus, r_lo, b_lo) = side(domain.lo, -1.0)?;
    let (i_plus, r_hi, b_hi) = side(domain.hi, 1.0)?;
    Ok(AdmissibleSet {
        i_minus,
        i_plus,
        excluded_lo: -i_plus,
        excluded_hi: -i_minus,
        truncation: (r_lo, r_hi),
        tail_margin: b_lo + b_hi,
    })
}

/// Builds the deformation for an admissible `C`, certifying that the
/// denominator has no zero on `domain`.
pub fn solve_deformation(
    w: &SmoothFn,
    c: f64,
    r0: f64,
    domain: Interval,
) -> Result<DeformationProfile> {
    let bounds = regularity_bounds(w, domain, r0)?;
    if !bounds.admits(c) {
        return Err(Error::InadmissibleConstant {
            c,
            excluded_lo: bounds.excluded_lo,
            excluded_hi: bounds.excluded_hi,
        });
    }
    let parts = SmoothFn::riccati_lambda(w, c, r0, domain)?;
    let domain = parts.lambda.domain();
    // the denominator is increasing; sampling guards against a wrong tail
    let (lo, hi) = (
        if domain.lo.is_finite() {
            domain.lo
        } else {
            bounds.truncation.0
        },
        if domain.hi.is_finite() {
            domain.hi
        } else {
            bounds.truncation.1
        },
    );
    let sign = c + bounds.i_plus;
    for i in 0..1024 {
        let r = lo + (hi - lo) * (i as f64 + 0.5) / 1024.0;
        let d = c + parts.integral.eval(r)?;
        if d == 0.0 || d.signum() != sign.signum() {
            return Err(Error::SignChange { r });
        }
    }
    let omega = w.add(&parts.lambda);
    Ok(DeformationProfile {
        w: w.clone(),
        c,
        r0,
        f: Some(parts.f),
        lambda: parts.lambda,
        omega,
        admissible: Some(bounds),
        domain,
    })
}

/// [`solve_deformation`] with the family's base point and domain.
pub fn deform_system(sys: &MasterSystem, c: f64) -> Result<DeformationProfile> {
    let (r0, domain) = default_frame(sys.family);
    let w = sys.superpotential()?.w;
    solve_deformation(&w, c, r0, domain)
}

impl DeformationProfile {
    /// A profile with a caller-supplied `lambda`, bypassing the Riccati
    /// construction. Used for limits and for detector checks.
    pub fn with_lambda(w: &SmoothFn, lambda: &SmoothFn, c: f64, r0: f64) -> DeformationProfile {
        let domain = w.domain().intersect(&lambda.domain());
        DeformationProfile {
            w: w.clone(),
            c,
            r0,
            f: None,
            lambda: lambda.clone(),
            omega: w.add(lambda),
            admissible: None,
            domain,
        }
    }

    /// `W^2 - W' - 2 lambda'`, the potential of `H' = B+ B-`.
    pub fn deformed_potential(&self) -> SmoothFn {
        let w = &self.w;
        SmoothFn::sum_of(&[
            w.square(),
            w.derivative().neg(),
            self.lambda.derivative().scale(-2.0),
        ])
    }

    /// `omega^2 - omega'`, equal to [`Self::deformed_potential`] when the
    /// Riccati equation holds.
    pub fn deformed_potential_from_omega(&self) -> SmoothFn {
        self.omega.square().sub(&self.omega.derivative())
    }

    pub fn riccati_residual(&self, points: &[f64]) -> Result<RiccatiResidual> {
        let w = &self.w;
        let l = &self.lambda;
        let lam_form = SmoothFn::sum_of(&[l.derivative(), l.square(), w.mul(l).scale(2.0)]);
        let om = &self.omega;
        let om_form = SmoothFn::sum_of(&[
            om.square(),
            om.derivative(),
            w.square().neg(),
            w.derivative().neg(),
        ]);
        let mut out = RiccatiResidual {
            lambda_form: 0.0,
            omega_form: 0.0,
        };
        for &r in points {
            out.lambda_form = out.lambda_form.max(lam_form.eval(r)?.abs());
            out.omega_form = out.omega_form.max(om_form.eval(r)?.abs());
        }
        Ok(out)
    }
}
