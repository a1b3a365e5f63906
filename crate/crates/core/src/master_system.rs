//! Master-function systems: a quadratic master function `A(x)` and a weight
//! `w(x)` generate a shape-invariant Schrodinger problem in the variable `r`
//! with `dx/dr = sqrt(A(x))`.
//!
//! Everything here is built as [`SmoothFn`] nodes. The catalog families have
//! closed-form maps and superpotentials; the same quantities are also
//! available through the general route (expressions in `x` composed with
//! `x(r)`), which is what generic systems use.

use crate::error::{Error, Result};
use crate::function_algebra::{QuadraticFlow, SmoothFn};
use crate::interval::Interval;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Catalog entries and the generic escape hatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `A = 1`, `w = exp(-beta x^2 / 2)`, `x = r - 2 alpha / beta`.
    OscillatorLike,
    /// `A = x`, `w = x^alpha exp(-beta x)`, `x = r^2 / 4`.
    RadialOscillatorLike,
    /// User-supplied quadratic `A` and weight.
    Generic,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::OscillatorLike => "oscillator-like",
            Family::RadialOscillatorLike => "radial-oscillator-like",
            Family::Generic => "generic",
        }
    }

    pub fn is_half_line(self) -> bool {
        self == Family::RadialOscillatorLike
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Names accepted by [`catalog_lookup`].
pub const CATALOG_NAMES: [&str; 3] = [
    "oscillator-like",
    "radial-oscillator-like",
    "shifted-oscillator",
];

/// Human-readable parameter constraints of each catalog name.
pub fn catalog_constraints(name: &str) -> Option<&'static str> {
    match name {
        "oscillator-like" => Some(
            "A(x) = 1, w(x) = exp(-beta x^2/2), x in (-inf, inf); beta > 0, alpha real, m >= 0",
        ),
        "radial-oscillator-like" => Some(
            "A(x) = x, w(x) = x^alpha exp(-beta x), x in [0, inf); beta > 0, alpha > -1, m >= 0",
        ),
        "shifted-oscillator" => Some("alias of oscillator-like with omega -> beta, b -> alpha"),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightSpec {
    /// `exp(-beta x^2 / 2)`
    Gaussian { beta: f64 },
    /// `x^alpha exp(-beta x)`
    PowerExponential { alpha: f64, beta: f64 },
    /// `x^power exp(p(x))` with `p` given by ascending coefficients.
    Custom { power: f64, exponent: Vec<f64> },
}

impl WeightSpec {
    /// `x^power` and the coefficients of the exponent polynomial.
    fn normal_form(&self) -> (f64, Vec<f64>) {
        match self {
            WeightSpec::Gaussian { beta } => (0.0, vec![0.0, 0.0, -beta / 2.0]),
            WeightSpec::PowerExponential { alpha, beta } => (*alpha, vec![0.0, -beta]),
            WeightSpec::Custom { power, exponent } => (*power, exponent.clone()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (p, e) = self.normal_form();
        let poly = e.iter().rev().fold(0.0, |acc, c| acc * x + c);
        x.powf(p) * poly.exp()
    }
}

/// Input parameters of a catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatalogParams {
    pub alpha: f64,
    pub beta: f64,
    pub m: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MasterSystem {
    pub family: Family,
    /// `A(x) = a[0] + a[1] x + a[2] x^2`.
    pub a: [f64; 3],
    pub weight: WeightSpec,
    pub x_interval: Interval,
    pub alpha: f64,
    pub beta: f64,
    pub m: u32,
}

/// `x(r)` and the `r` interval it is defined on.
#[derive(Debug, Clone)]
pub struct ChangeOfVariable {
    pub x_of_r: SmoothFn,
    pub r_domain: Interval,
}

#[derive(Debug, Clone)]
pub struct SuperpotentialProfile {
    pub w: SmoothFn,
    pub m: u32,
    pub system: MasterSystem,
}

/// Looks up a catalog entry. `shifted-oscillator` reads `beta` as the
/// frequency and `alpha` as the shift.
pub fn catalog_lookup(name: &str, p: CatalogParams) -> Result<MasterSystem> {
    let sys = match name {
        "oscillator-like" | "shifted-oscillator" => MasterSystem {
            family: Family::OscillatorLike,
            a: [1.0, 0.0, 0.0],
            weight: WeightSpec::Gaussian { beta: p.beta },
            x_interval: Interval::REAL_LINE,
            alpha: p.alpha,
            beta: p.beta,
            m: p.m,
        },
        "radial-oscillator-like" => MasterSystem {
            family: Family::RadialOscillatorLike,
            a: [0.0, 1.0, 0.0],
            weight: WeightSpec::PowerExponential {
                alpha: p.alpha,
                beta: p.beta,
            },
            x_interval: Interval::from_closed(0.0),
            alpha: p.alpha,
            beta: p.beta,
            m: p.m,
        },
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    sys.validate()?;
    Ok(sys)
}

fn horner(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl MasterSystem {
    /// A system outside the catalog. `alpha` and `beta` are carried for
    /// reporting only.
    pub fn generic(
        a: [f64; 3],
        weight: WeightSpec,
        x_interval: Interval,
        m: u32,
    ) -> Result<MasterSystem> {
        let sys = MasterSystem {
            family: Family::Generic,
            a,
            weight,
            x_interval,
            alpha: 0.0,
            beta: 0.0,
            m,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            Family::OscillatorLike | Family::RadialOscillatorLike => {
                if !(self.beta > 0.0 && self.beta.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "beta must be positive, got {}",
                        self.beta
                    )));
                }
                if !self.alpha.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "alpha must be finite, got {}",
                        self.alpha
                    )));
                }
                if self.family == Family::RadialOscillatorLike && self.alpha <= -1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "alpha must exceed -1, got {}",
                        self.alpha
                    )));
                }
            }
            Family::Generic => {
                let (p, e) = self.weight.normal_form();
                if p != 0.0 && self.x_interval.lo < 0.0 {
                    return Err(Error::InvalidParameter(
                        "x^power weight needs x >= 0".into(),
                    ));
                }
                if e.iter().chain(std::iter::once(&p)).any(|c| !c.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "weight coefficients must be finite".into(),
                    ));
                }
            }
        }
        if self.x_interval.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "empty x interval {}",
                self.x_interval
            )));
        }
        let (lo, hi) = self.interior().probe_window();
        let mut xs: Vec<f64> = (0..=256)
            .map(|i| lo + (hi - lo) * i as f64 / 256.0)
            .collect();
        xs.extend(
            [self.x_interval.lo, self.x_interval.hi]
                .iter()
                .filter(|v| v.is_finite()),
        );
        for x in xs {
            if self.master(x) < 0.0 {
                return Err(Error::NegativeMasterFunction { x });
            }
        }
        Ok(())
    }

    pub fn is_catalog(&self) -> bool {
        self.family != Family::Generic
    }

    pub fn master(&self, x: f64) -> f64 {
        horner(&self.a, x)
    }

    pub fn interior(&self) -> Interval {
        Interval::open(self.x_interval.lo, self.x_interval.hi)
    }

    /// The same system with the catalog parameter shift applied, i.e. the
    /// parameters `a1(a0)` in `v1(r; a0) = v2(r; a1) + R`.
    pub fn shifted(&self) -> Result<MasterSystem> {
        match self.family {
            Family::OscillatorLike => Ok(self.clone()),
            Family::RadialOscillatorLike => {
                // alpha + m -> alpha + m + 1
                let mut s = self.clone();
                s.alpha += 1.0;
                s.weight = WeightSpec::PowerExponential {
                    alpha: s.alpha,
                    beta: s.beta,
                };
                Ok(s)
            }
            Family::Generic => Err(Error::NotCatalog(
                "no parameter shift rule for generic systems",
            )),
        }
    }

    fn point_of_origin(&self) -> f64 {
        let d = self.interior();
        match (d.lo.is_finite(), d.hi.is_finite()) {
            (false, false) => 0.0,
            (true, false) => d.lo + 1.0,
            (false, true) => d.hi - 1.0,
            (true, true) => 0.5 * (d.lo + d.hi),
        }
    }

    // ---- expressions in x ----------------------------------------------

    fn master_x(&self) -> SmoothFn {
        SmoothFn::polynomial(self.a.to_vec())
    }

    fn inv_master_x(&self) -> Result<SmoothFn> {
        let d = self.interior();
        match self.a {
            [c, 0.0, 0.0] => Ok(SmoothFn::constant(1.0 / c)),
            [0.0, c, 0.0] => SmoothFn::power_on(1.0 / c, -1.0, d),
            _ => Ok(self.master_x().recip_on(d)),
        }
    }

    fn sqrt_master_x(&self) -> Result<SmoothFn> {
        Ok(SmoothFn::sqrt(&self.master_x())?.restrict(self.interior()))
    }

    /// `w'(x) / w(x)`.
    fn log_weight_derivative_x(&self) -> Result<SmoothFn> {
        let (p, e) = self.weight.normal_form();
        let poly = SmoothFn::polynomial(e).derivative();
        if p == 0.0 {
            return Ok(poly);
        }
        Ok(poly.add(&SmoothFn::power_on(p, -1.0, self.interior())?))
    }

    /// `A(x) w'(x) / w(x)`, multiplied out when it is a polynomial.
    fn aw_ratio_x(&self) -> Result<SmoothFn> {
        let (p, e) = self.weight.normal_form();
        let poly_part = self.master_x().mul(&SmoothFn::polynomial(e).derivative());
        if p == 0.0 {
            return Ok(poly_part);
        }
        // A p / x is polynomial when A(0) = 0
        let pole = if self.a[0] == 0.0 {
            SmoothFn::polynomial(vec![p * self.a[1], p * self.a[2]])
        } else {
            self.master_x()
                .mul(&SmoothFn::power_on(p, -1.0, self.interior())?)
        };
        Ok(poly_part.add(&pole).restrict(self.interior()))
    }

    /// The superpotential formula as a function of `x`.
    pub fn superpotential_x(&self) -> Result<SmoothFn> {
        let g = self.aw_ratio_x()?;
        let a1 = self.master_x().derivative();
        let num = g
            .scale(0.5)
            .add(&a1.scale((2.0 * self.m as f64 - 1.0) / 4.0));
        let inv_sqrt = self.sqrt_master_x()?.recip_on(self.interior());
        Ok(num.mul(&inv_sqrt).neg())
    }

    /// The shape-invariant potential `v_m` as a function of `x`.
    pub fn potential_x(&self) -> Result<SmoothFn> {
        let m = self.m as f64;
        let g = self.aw_ratio_x()?;
        let inv_a = self.inv_master_x()?;
        let a1 = self.master_x().derivative();
        let a2 = a1.derivative();
        let terms = [
            g.derivative().scale(-0.5),
            a2.scale(-(2.0 * m - 1.0) / 4.0),
            g.square().mul(&inv_a).scale(0.25),
            a1.mul(&self.log_weight_derivative_x()?).scale(m / 2.0),
            a1.square().mul(&inv_a).scale((4.0 * m * m - 1.0) / 16.0),
        ];
        Ok(SmoothFn::sum_of(&terms).restrict(self.interior()))
    }

    // ---- expressions in r ----------------------------------------------

    pub fn change_of_variable(&self) -> Result<ChangeOfVariable> {
        match self.family {
            Family::OscillatorLike => Ok(ChangeOfVariable {
                x_of_r: SmoothFn::polynomial(vec![-2.0 * self.alpha / self.beta, 1.0]),
                r_domain: Interval::REAL_LINE,
            }),
            Family::RadialOscillatorLike => Ok(ChangeOfVariable {
                x_of_r: SmoothFn::polynomial(vec![0.0, 0.0, 0.25]).restrict(Interval::POSITIVE),
                r_domain: Interval::POSITIVE,
            }),
            Family::Generic => {
                let x = QuadraticFlow::build(self.a, self.point_of_origin(), self.interior())?;
                let r_domain = x.domain();
                Ok(ChangeOfVariable {
                    x_of_r: x,
                    r_domain,
                })
            }
        }
    }

    /// Composes a function of `x` with `x(r)`.
    pub fn in_r(&self, g: &SmoothFn) -> Result<SmoothFn> {
        let cv = self.change_of_variable()?;
        Ok(cv.x_of_r.compose_on(g, cv.r_domain))
    }

    /// Superpotential in `r`, closed form for catalog entries.
    pub fn superpotential(&self) -> Result<SuperpotentialProfile> {
        let w = match self.family {
            Family::OscillatorLike => SmoothFn::polynomial(vec![-self.alpha, self.beta / 2.0]),
            Family::RadialOscillatorLike => {
                let a = self.alpha + self.m as f64 - 0.5;
                SmoothFn::power(-a, -1.0).add(&SmoothFn::polynomial(vec![0.0, self.beta / 4.0]))
            }
            Family::Generic => self.superpotential_composed()?,
        };
        Ok(SuperpotentialProfile {
            w,
            m: self.m,
            system: self.clone(),
        })
    }

    /// Superpotential from the general formula composed with `x(r)`.
    pub fn superpotential_composed(&self) -> Result<SmoothFn> {
        self.in_r(&self.superpotential_x()?)
    }

    pub fn potential_vm(&self) -> Result<SmoothFn> {
        self.in_r(&self.potential_x()?)
    }

    /// `E(n, m) = -(n - m + 1) [ (A w'/w)' + (n + m) A'' / 2 ]`, with the
    /// bracket checked to be constant over the interval.
    pub fn energy(&self, n: i64, m: i64) -> Result<f64> {
        if m < 0 || n < m - 1 {
            return Err(Error::InvalidParameter(format!(
                "energy needs n >= m - 1 >= -1, got n = {n}, m = {m}"
            )));
        }
        let bracket = self
            .aw_ratio_x()?
            .derivative()
            .add(&SmoothFn::constant(0.5 * (n + m) as f64 * 2.0 * self.a[2]));
        let value = match bracket.as_constant() {
            Some(c) => c,
            None => {
                let vals = bracket.eval_many(&self.interior().probe_points(64))?;
                let (lo, hi) = vals
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
                        (l.min(*v), h.max(*v))
                    });
                let spread = hi - lo;
                if spread > 1e-12 * (1.0 + lo.abs().max(hi.abs())) {
                    return Err(Error::NonConstantBracket { spread });
                }
                vals[0]
            }
        };
        Ok(-((n - m + 1) as f64) * value)
    }

    /// Level spacing `E(n+1, m) - E(n, m)` of a catalog system.
    pub fn ladder_spacing(&self) -> Result<f64> {
        if !self.is_catalog() {
            return Err(Error::NotCatalog(
                "level spacing is only known for catalog systems",
            ));
        }
        let m = self.m as i64;
        Ok(self.energy(m + 1, m)? - self.energy(m, m)?)
    }

    /// Compares `v1(r; a0)` with `v2(r; a1)` under the catalog shift rule.
    pub fn shape_invariance_check(&self) -> Result<ShapeInvariance> {
        shape_invariance_between(self, &self.shifted()?)
    }

    /// One-line description for reports.
    pub fn descriptor(&self) -> String {
        format!(
            "{} A = [{}, {}, {}], alpha = {}, beta = {}, m = {}",
            self.family, self.a[0], self.a[1], self.a[2], self.alpha, self.beta, self.m
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeInvariance {
    pub is_shape_invariant: bool,
    /// Mean of `v1(a0) - v2(a1)` over the grid.
    pub r: f64,
    pub std_dev: f64,
}

/// Shape-invariance test of `v1(r; a0) - v2(r; a1)` on 256 points, with the
/// shifted system supplied by the caller.
pub fn shape_invariance_between(a0: &MasterSystem, a1: &MasterSystem) -> Result<ShapeInvariance> {
    let (v1, _) = partner_potentials(&a0.superpotential()?);
    let (_, v2) = partner_potentials(&a1.superpotential()?);
    let domain = v1.domain().intersect(&v2.domain());
    let (lo, hi) = domain.probe_window();
    let n = 256;
    let diffs: Vec<f64> = (0..n)
        .map(|i| {
            let r = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
            Ok(v1.eval(r)? - v2.eval(r)?)
        })
        .collect::<Result<_>>()?;
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n as f64;
    let std_dev = var.sqrt();
    Ok(ShapeInvariance {
        is_shape_invariant: std_dev < 1e-9 * (1.0 + mean.abs()),
        r: mean,
        std_dev,
    })
}

/// `(v1, v2) = (W^2 + W', W^2 - W')`.
pub fn partner_potentials(prof: &SuperpotentialProfile) -> (SmoothFn, SmoothFn) {
    let w = &prof.w;
    let sq = w.square();
    let d = w.derivative();
    (sq.add(&d), sq.sub(&d))
}
