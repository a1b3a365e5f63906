use super::eval::PointCache;
use super::{Kind, SmoothFn};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::quadrature;
use std::sync::Arc;

/// Solution `x(r)` of `dx/dr = sqrt(A(x))`, `x(0) = x0`, for a quadratic
/// `A(x) = a0 + a1 x + a2 x^2` positive on the open `x` interval.
///
/// Evaluation inverts `r(x) = int_{x0}^x ds / sqrt(A(s))` by safeguarded
/// Newton iteration on adaptive quadrature.
pub struct QuadraticFlow;

impl QuadraticFlow {
    /// Returns `x(r)` as a function node on its natural `r` domain.
    pub fn build(a: [f64; 3], x0: f64, x_domain: Interval) -> Result<SmoothFn> {
        let poly = |x: f64| a[0] + x * (a[1] + x * a[2]);
        if !x_domain.contains(x0) || poly(x0) <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "flow start x0 = {x0} must be interior with A(x0) > 0"
            )));
        }
        let tol = 1e-12;
        let inv_sqrt = move |s: f64| {
            let v = poly(s);
            if v <= 0.0 {
                Err(Error::NegativeMasterFunction { x: s })
            } else {
                Ok(1.0 / v.sqrt())
            }
        };
        let end = |e: f64| -> Result<f64> {
            if !e.is_finite() {
                return Ok(e.signum() * f64::INFINITY);
            }
            let slope = a[1] + 2.0 * a[2] * e;
            if poly(e).abs() < 1e-300 && slope.abs() < 1e-300 {
                // double root: the travel time diverges logarithmically
                return Ok((e - x0).signum() * f64::INFINITY);
            }
            Ok(quadrature::integrate(inv_sqrt, x0, e, 1e-10)?.value)
        };
        let r_domain = Interval::open(end(x_domain.lo)?, end(x_domain.hi)?);
        let core = FlowCore {
            a,
            x0,
            x_domain,
            tol,
            points: PointCache::new(),
        };
        Ok(SmoothFn::from_kind(
            Kind::Flow {
                core: Arc::new(core),
                speed: false,
            },
            r_domain,
        ))
    }
}

pub(super) struct FlowCore {
    a: [f64; 3],
    x0: f64,
    x_domain: Interval,
    tol: f64,
    points: PointCache,
}

impl FlowCore {
    pub(super) fn coefficients(&self) -> [f64; 3] {
        self.a
    }

    fn master(&self, x: f64) -> f64 {
        self.a[0] + x * (self.a[1] + x * self.a[2])
    }

    fn travel(&self, from: f64, to: f64) -> Result<f64> {
        let f = |s: f64| {
            let v = self.master(s);
            if v <= 0.0 {
                Err(Error::NegativeMasterFunction { x: s })
            } else {
                Ok(1.0 / v.sqrt())
            }
        };
        Ok(quadrature::integrate(f, from, to, self.tol)?.value)
    }

    pub(super) fn position(&self, r: f64) -> Result<f64> {
        if let Some(v) = self.points.get(r) {
            return Ok(v);
        }
        let mut x = self.x0;
        let mut rx = 0.0;
        for _ in 0..200 {
            let resid = rx - r;
            if resid.abs() <= 1e-13 * r.abs().max(1.0) {
                self.points.put(r, x);
                return Ok(x);
            }
            let mut step = -resid * self.master(x).sqrt();
            // halve until the trial point stays inside the x interval
            let mut trial = x + step;
            let mut guard = 0;
            while !(self.x_domain.contains(trial) && self.master(trial) > 0.0) {
                step *= 0.5;
                trial = x + step;
                guard += 1;
                if guard > 200 {
                    return Err(Error::Domain {
                        r,
                        domain: self.x_domain,
                    });
                }
            }
            rx += self.travel(x, trial)?;
            x = trial;
        }
        Err(Error::Quadrature {
            a: self.x0,
            b: x,
            tol: self.tol,
            estimate: (rx - r).abs(),
        })
    }

    pub(super) fn speed(&self, r: f64) -> Result<f64> {
        Ok(self.master(self.position(r)?).sqrt())
    }
}
