//! A derivative-closed algebra of smooth real functions of one variable.
//!
//! Functions are immutable DAG nodes behind an [`Arc`]. Every node knows its
//! exact derivative as another node (memoized after the first request), so
//! operator coefficients built from products and sums of these functions
//! can be differentiated any number of times without finite differences.
//!
//! Two node kinds are quadrature-backed: [`SmoothFn::antiderivative`] and
//! the Riccati deformation term built by [`SmoothFn::riccati_lambda`]. Their
//! derivatives are still exact: the integrand, and `-lambda^2 - 2 W lambda`.

mod eval;
mod flow;

pub use eval::Evaluator;
pub use flow::QuadraticFlow;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::quadrature;
use eval::{Cumulative, LambdaCore};
use flow::FlowCore;
use std::fmt;
use std::sync::{Arc, OnceLock};

/// Spacing of the memoized checkpoint grid of antiderivative nodes.
pub const CHECKPOINT_STEP: f64 = 0.5;

#[derive(Clone)]
pub struct SmoothFn(Arc<Node>);

struct Node {
    kind: Kind,
    domain: Interval,
    derivative: OnceLock<SmoothFn>,
}

enum Kind {
    /// Coefficients in ascending order; never empty.
    Polynomial(Vec<f64>),
    /// `coeff * r^exponent` on a domain excluding zero.
    Power {
        coeff: f64,
        exponent: f64,
    },
    Exp(SmoothFn),
    Sum(Vec<SmoothFn>),
    Product(Vec<SmoothFn>),
    Scale(f64, SmoothFn),
    Reciprocal(SmoothFn),
    Compose {
        outer: SmoothFn,
        inner: SmoothFn,
    },
    Antiderivative(Arc<Cumulative>),
    RiccatiLambda(Arc<LambdaCore>),
    Flow {
        core: Arc<FlowCore>,
        speed: bool,
    },
    /// The child with a narrower domain.
    Restrict(SmoothFn),
}

/// Structural sign of a function over its whole domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

/// The pieces produced when building a Riccati deformation term.
#[derive(Clone, Debug)]
pub struct LambdaParts {
    /// `lambda = exp(-2 phi) / (C + integral)`.
    pub lambda: SmoothFn,
    /// `phi(r) = int_{r0}^r W`.
    pub phi: SmoothFn,
    /// `int_{r0}^r exp(-2 phi(s)) ds`.
    pub integral: SmoothFn,
    /// `f = 1 / lambda = exp(2 phi) (C + integral)`.
    pub f: SmoothFn,
}

fn trim(mut c: Vec<f64>) -> Vec<f64> {
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    if c.is_empty() {
        c.push(0.0);
    }
    c
}

fn is_nonneg_integer(p: f64) -> bool {
    p >= 0.0 && p.fract() == 0.0
}

impl SmoothFn {
    fn from_kind(kind: Kind, domain: Interval) -> SmoothFn {
        SmoothFn(Arc::new(Node {
            kind,
            domain,
            derivative: OnceLock::new(),
        }))
    }

    // ---- leaves -----------------------------------------------------------

    pub fn constant(c: f64) -> SmoothFn {
        Self::polynomial(vec![c])
    }

    pub fn zero() -> SmoothFn {
        Self::constant(0.0)
    }

    pub fn one() -> SmoothFn {
        Self::constant(1.0)
    }

    /// The identity map `r -> r`.
    pub fn identity() -> SmoothFn {
        Self::polynomial(vec![0.0, 1.0])
    }

    /// `c[0] + c[1] r + c[2] r^2 + ...`
    pub fn polynomial(coeffs: Vec<f64>) -> SmoothFn {
        Self::from_kind(Kind::Polynomial(trim(coeffs)), Interval::REAL_LINE)
    }

    /// `coeff * r^exponent` on the positive half-line.
    pub fn power(coeff: f64, exponent: f64) -> SmoothFn {
        Self::power_on(coeff, exponent, Interval::POSITIVE)
            .expect("positive half-line is always valid")
    }

    /// `coeff * r^exponent` on `domain`. Negative exponents need a domain
    /// excluding zero; fractional ones need a domain inside `(0, inf)`.
    pub fn power_on(coeff: f64, exponent: f64, domain: Interval) -> Result<SmoothFn> {
        if !exponent.is_finite() || !coeff.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "power {coeff} r^{exponent}"
            )));
        }
        if coeff == 0.0 {
            return Ok(Self::zero());
        }
        if is_nonneg_integer(exponent) {
            let mut c = vec![0.0; exponent as usize + 1];
            c[exponent as usize] = coeff;
            return Ok(Self::polynomial(c));
        }
        let ok = if exponent.fract() == 0.0 {
            domain.excludes_zero() && (domain.lo >= 0.0 || domain.hi <= 0.0)
        } else {
            domain.lo >= 0.0 && domain.excludes_zero()
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "r^{exponent} needs a domain bounded away from zero, got {domain}"
            )));
        }
        Ok(Self::from_kind(Kind::Power { coeff, exponent }, domain))
    }

    pub fn exp(arg: &SmoothFn) -> SmoothFn {
        if let Some(c) = arg.as_constant() {
            return Self::constant(c.exp());
        }
        Self::from_kind(Kind::Exp(arg.clone()), arg.domain())
    }

    /// `sqrt(f)`, reduced to a power node when `f` is a constant or a
    /// positive monomial of degree one.
    pub fn sqrt(f: &SmoothFn) -> Result<SmoothFn> {
        if let Some(c) = f.as_constant() {
            if c < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "sqrt of negative constant {c}"
                )));
            }
            return Ok(Self::constant(c.sqrt()));
        }
        if let Some(p) = f.as_polynomial() {
            if p.len() == 2 && p[0] == 0.0 && p[1] > 0.0 {
                return Self::power_on(p[1].sqrt(), 0.5, Interval::POSITIVE.intersect(&f.domain()));
            }
        }
        let outer = Self::power(1.0, 0.5);
        Ok(f.compose(&outer))
    }

    // ---- arithmetic -------------------------------------------------------

    pub fn add(&self, other: &SmoothFn) -> SmoothFn {
        Self::sum_of(&[self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &SmoothFn) -> SmoothFn {
        Self::sum_of(&[self.clone(), other.scale(-1.0)])
    }

    pub fn mul(&self, other: &SmoothFn) -> SmoothFn {
        Self::product_of(&[self.clone(), other.clone()])
    }

    pub fn neg(&self) -> SmoothFn {
        self.scale(-1.0)
    }

    pub fn square(&self) -> SmoothFn {
        self.mul(self)
    }

    pub fn scale(&self, c: f64) -> SmoothFn {
        if c == 1.0 {
            return self.clone();
        }
        if c == 0.0 {
            return Self::zero();
        }
        match &self.0.kind {
            Kind::Polynomial(p) => Self::polynomial(p.iter().map(|a| a * c).collect()),
            Kind::Scale(d, g) => g.scale(c * d),
            Kind::Power { coeff, exponent } => Self::from_kind(
                Kind::Power {
                    coeff: coeff * c,
                    exponent: *exponent,
                },
                self.domain(),
            ),
            _ => Self::from_kind(Kind::Scale(c, self.clone()), self.domain()),
        }
    }

    /// Flattened, simplified sum: polynomial terms are merged and zeros dropped.
    pub fn sum_of(terms: &[SmoothFn]) -> SmoothFn {
        let mut poly: Option<Vec<f64>> = None;
        let mut rest: Vec<SmoothFn> = Vec::new();
        let mut stack: Vec<SmoothFn> = terms.iter().rev().cloned().collect();
        while let Some(t) = stack.pop() {
            match &t.0.kind {
                Kind::Sum(children) => stack.extend(children.iter().rev().cloned()),
                Kind::Polynomial(p) => {
                    let acc = poly.get_or_insert_with(Vec::new);
                    if acc.len() < p.len() {
                        acc.resize(p.len(), 0.0);
                    }
                    for (a, b) in acc.iter_mut().zip(p) {
                        *a += b;
                    }
                }
                _ => rest.push(t),
            }
        }
        let mut rest = Self::collect_like_terms(rest);
        if let Some(p) = poly {
            let p = Self::polynomial(p);
            if !p.is_zero() || rest.is_empty() {
                rest.push(p);
            }
        }
        match rest.len() {
            0 => Self::zero(),
            1 => rest.pop().unwrap(),
            _ => {
                let domain = rest
                    .iter()
                    .fold(Interval::REAL_LINE, |d, t| d.intersect(&t.domain()));
                Self::from_kind(Kind::Sum(rest), domain)
            }
        }
    }

    /// Merges `a g + b g` into `(a + b) g` for terms sharing the node `g`,
    /// and power terms with the same exponent and domain. Zero results are
    /// dropped; first-occurrence order is kept.
    fn collect_like_terms(terms: Vec<SmoothFn>) -> Vec<SmoothFn> {
        use std::collections::HashMap;
        if terms.len() < 2 {
            return terms;
        }
        enum Base {
            Node(SmoothFn),
            Power(f64, Interval),
        }
        let mut slots: Vec<(f64, Base)> = Vec::with_capacity(terms.len());
        let mut index: HashMap<usize, usize> = HashMap::new();
        for t in terms {
            match &t.0.kind {
                Kind::Power { coeff, exponent } => {
                    let dom = t.domain();
                    let hit = slots.iter().position(
                        |(_, b)| matches!(b, Base::Power(e, d) if e == exponent && *d == dom),
                    );
                    match hit {
                        Some(i) => slots[i].0 += coeff,
                        None => slots.push((*coeff, Base::Power(*exponent, dom))),
                    }
                }
                _ => {
                    let (c, g) = match &t.0.kind {
                        Kind::Scale(c, g) => (*c, g.clone()),
                        _ => (1.0, t.clone()),
                    };
                    let key = Arc::as_ptr(&g.0) as usize;
                    match index.get(&key) {
                        Some(&i) => slots[i].0 += c,
                        None => {
                            index.insert(key, slots.len());
                            slots.push((c, Base::Node(g)));
                        }
                    }
                }
            }
        }
        slots
            .into_iter()
            .filter(|(c, _)| *c != 0.0)
            .map(|(c, b)| match b {
                Base::Node(g) => g.scale(c),
                Base::Power(e, d) => Self::from_kind(
                    Kind::Power {
                        coeff: c,
                        exponent: e,
                    },
                    d,
                ),
            })
            .collect()
    }

    /// Flattened, simplified product: polynomial factors are multiplied out,
    /// constant factors become a scale node.
    pub fn product_of(factors: &[SmoothFn]) -> SmoothFn {
        let mut poly = vec![1.0];
        let mut scale = 1.0;
        let mut rest: Vec<SmoothFn> = Vec::new();
        let mut stack: Vec<SmoothFn> = factors.iter().rev().cloned().collect();
        while let Some(t) = stack.pop() {
            match &t.0.kind {
                Kind::Product(children) => stack.extend(children.iter().rev().cloned()),
                Kind::Scale(c, g) => {
                    scale *= c;
                    stack.push(g.clone());
                }
                Kind::Polynomial(p) => {
                    if p.len() == 1 {
                        scale *= p[0];
                    } else {
                        poly = poly_mul(&poly, p);
                    }
                }
                _ => rest.push(t),
            }
        }
        if scale == 0.0 {
            return Self::zero();
        }
        let poly_fn = Self::polynomial(poly);
        if rest.is_empty() {
            return poly_fn.scale(scale);
        }
        if poly_fn.as_constant() != Some(1.0) {
            rest.insert(0, poly_fn);
        }
        let prod = if rest.len() == 1 {
            rest.pop().unwrap()
        } else {
            let domain = rest
                .iter()
                .fold(Interval::REAL_LINE, |d, t| d.intersect(&t.domain()));
            Self::from_kind(Kind::Product(rest), domain)
        };
        prod.scale(scale)
    }

    /// `1 / self`, certified nonvanishing either structurally (exponentials,
    /// same-signed sums and products) or by dense sampling of the domain.
    pub fn recip(&self) -> Result<SmoothFn> {
        if let Some(c) = self.as_constant() {
            if c == 0.0 {
                return Err(Error::SignChange { r: 0.0 });
            }
            return Ok(Self::constant(1.0 / c));
        }
        if let Kind::Power { coeff, exponent } = &self.0.kind {
            return Self::power_on(1.0 / coeff, -exponent, self.domain());
        }
        if self.structural_sign().is_none() {
            self.certify_by_sampling(1024)?;
        }
        Ok(Self::from_kind(
            Kind::Reciprocal(self.clone()),
            self.domain(),
        ))
    }

    /// `1 / self` on a caller-certified `domain` where `self` has no zero.
    pub fn recip_on(&self, domain: Interval) -> SmoothFn {
        if let Some(c) = self.as_constant() {
            if c != 0.0 {
                return Self::constant(1.0 / c);
            }
        }
        if let Kind::Power { coeff, exponent } = &self.0.kind {
            if let Ok(p) = Self::power_on(1.0 / coeff, -exponent, self.domain().intersect(&domain))
            {
                return p;
            }
        }
        Self::from_kind(
            Kind::Reciprocal(self.clone()),
            self.domain().intersect(&domain),
        )
    }

    /// `outer(self(r))`, with the domain of `self`.
    pub fn compose(&self, outer: &SmoothFn) -> SmoothFn {
        self.compose_on(outer, self.domain())
    }

    /// `outer(self(r))` restricted to `domain`. Points of `domain` mapped
    /// outside `outer`'s domain are reported as errors on evaluation.
    pub fn compose_on(&self, outer: &SmoothFn, domain: Interval) -> SmoothFn {
        if let Some(c) = outer.as_constant() {
            return Self::constant(c);
        }
        if let Some(p) = outer.as_polynomial() {
            if p.len() == 2 && p[0] == 0.0 && p[1] == 1.0 {
                return self.clone();
            }
        }
        if let Some(p) = self.as_polynomial() {
            if p.len() == 2 && p[0] == 0.0 && p[1] == 1.0 && domain == outer.domain() {
                return outer.clone();
            }
        }
        Self::from_kind(
            Kind::Compose {
                outer: outer.clone(),
                inner: self.clone(),
            },
            self.domain().intersect(&domain),
        )
    }

    /// `F(r) = int_{r0}^r self`, with the process-default tolerance.
    pub fn antiderivative(&self, r0: f64) -> Result<SmoothFn> {
        self.antiderivative_with(r0, quadrature::default_tolerance())
    }

    pub fn antiderivative_with(&self, r0: f64, tol: f64) -> Result<SmoothFn> {
        if !self.domain().contains(r0) {
            return Err(Error::Domain {
                r: r0,
                domain: self.domain(),
            });
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let core = Cumulative::new(self.clone(), r0, CHECKPOINT_STEP, tol);
        Ok(Self::from_kind(
            Kind::Antiderivative(Arc::new(core)),
            self.domain(),
        ))
    }

    /// The deformation term `lambda = exp(-2 int W) / (C + int exp(-2 int W))`
    /// with base point `r0`, solving `lambda' + lambda^2 + 2 W lambda = 0`.
    ///
    /// The caller is responsible for choosing `C` so that the denominator has
    /// no zero on `domain`; evaluation reports a zero denominator as an error.
    pub fn riccati_lambda(w: &SmoothFn, c: f64, r0: f64, domain: Interval) -> Result<LambdaParts> {
        let domain = w.domain().intersect(&domain);
        if !domain.contains(r0) {
            return Err(Error::Domain { r: r0, domain });
        }
        let tol = quadrature::default_tolerance();
        let phi = match w.as_polynomial() {
            Some(p) => {
                let mut q = vec![0.0];
                q.extend(p.iter().enumerate().map(|(k, a)| a / (k + 1) as f64));
                let base = SmoothFn::polynomial(q.clone()).eval(r0)?;
                q[0] = -base;
                Self::polynomial(q)
            }
            None => w.antiderivative_with(r0, tol)?,
        };
        let decay = Self::exp(&phi.scale(-2.0));
        let integral = decay.antiderivative_with(r0, tol)?;
        let core = LambdaCore::new(w.clone(), c, phi.clone(), integral.clone());
        let lambda = Self::from_kind(Kind::RiccatiLambda(Arc::new(core)), domain);
        let f = Self::exp(&phi.scale(2.0)).mul(&Self::constant(c).add(&integral));
        Ok(LambdaParts {
            lambda,
            phi,
            integral,
            f,
        })
    }

    // ---- derivatives -----------------------------------------------------

    /// Exact derivative, memoized on the node.
    pub fn derivative(&self) -> SmoothFn {
        self.0
            .derivative
            .get_or_init(|| self.compute_derivative().restrict(self.domain()))
            .clone()
    }

    pub fn nth_derivative(&self, k: usize) -> SmoothFn {
        let mut f = self.clone();
        for _ in 0..k {
            f = f.derivative();
        }
        f
    }

    fn compute_derivative(&self) -> SmoothFn {
        match &self.0.kind {
            Kind::Polynomial(p) => {
                if p.len() == 1 {
                    return Self::zero();
                }
                Self::polynomial(
                    p.iter()
                        .enumerate()
                        .skip(1)
                        .map(|(k, a)| k as f64 * a)
                        .collect(),
                )
            }
            Kind::Power { coeff, exponent } => {
                let c = coeff * exponent;
                let e = exponent - 1.0;
                if e == 0.0 {
                    Self::constant(c)
                } else {
                    Self::from_kind(
                        Kind::Power {
                            coeff: c,
                            exponent: e,
                        },
                        self.domain(),
                    )
                }
            }
            Kind::Exp(arg) => {
                let again = Self::from_kind(Kind::Exp(arg.clone()), self.domain());
                arg.derivative().mul(&again)
            }
            Kind::Sum(terms) => {
                Self::sum_of(&terms.iter().map(|t| t.derivative()).collect::<Vec<_>>())
            }
            Kind::Product(factors) => {
                let mut terms = Vec::with_capacity(factors.len());
                for i in 0..factors.len() {
                    let d = factors[i].derivative();
                    if d.is_zero() {
                        continue;
                    }
                    let mut fs: Vec<SmoothFn> = factors.clone();
                    fs[i] = d;
                    terms.push(Self::product_of(&fs));
                }
                Self::sum_of(&terms)
            }
            Kind::Scale(c, g) => g.derivative().scale(*c),
            Kind::Reciprocal(g) => {
                let again = Self::from_kind(Kind::Reciprocal(g.clone()), self.domain());
                Self::product_of(&[g.derivative(), again.clone(), again]).scale(-1.0)
            }
            Kind::Compose { outer, inner } => {
                let outer_d = Self::from_kind(
                    Kind::Compose {
                        outer: outer.derivative(),
                        inner: inner.clone(),
                    },
                    self.domain(),
                );
                if outer_d.is_zero() {
                    return Self::zero();
                }
                outer_d.mul(&inner.derivative())
            }
            Kind::Antiderivative(core) => core.integrand().clone(),
            Kind::RiccatiLambda(core) => {
                // lambda' = -lambda^2 - 2 W lambda
                let l = Self::from_kind(Kind::RiccatiLambda(core.clone()), self.domain());
                let w = core.superpotential().clone();
                Self::sum_of(&[l.square().neg(), w.mul(&l).scale(-2.0)])
            }
            Kind::Restrict(g) => g.derivative(),
            Kind::Flow { core, speed } => {
                let pos = Self::from_kind(
                    Kind::Flow {
                        core: core.clone(),
                        speed: false,
                    },
                    self.domain(),
                );
                if *speed {
                    // d/dr sqrt(A(x(r))) = A'(x(r)) / 2
                    let [_, a1, a2] = core.coefficients();
                    Self::sum_of(&[Self::constant(0.5 * a1), pos.scale(a2)])
                } else {
                    Self::from_kind(
                        Kind::Flow {
                            core: core.clone(),
                            speed: true,
                        },
                        self.domain(),
                    )
                }
            }
        }
    }

    // ---- evaluation ------------------------------------------------------

    pub fn eval(&self, r: f64) -> Result<f64> {
        Evaluator::new(r).eval(self)
    }

    /// Values at several points, stopping at the first error.
    pub fn eval_many(&self, points: &[f64]) -> Result<Vec<f64>> {
        points.iter().map(|&r| self.eval(r)).collect()
    }

    // ---- inspection ------------------------------------------------------

    pub fn domain(&self) -> Interval {
        self.0.domain
    }

    /// Same function with its domain narrowed to `domain`.
    pub fn restrict(&self, domain: Interval) -> SmoothFn {
        let d = self.domain().intersect(&domain);
        if d == self.domain() {
            return self.clone();
        }
        if let Kind::Restrict(inner) = &self.0.kind {
            return Self::from_kind(Kind::Restrict(inner.clone()), d);
        }
        Self::from_kind(Kind::Restrict(self.clone()), d)
    }

    pub fn as_constant(&self) -> Option<f64> {
        match &self.0.kind {
            Kind::Polynomial(p) if p.len() == 1 => Some(p[0]),
            _ => None,
        }
    }

    pub fn as_polynomial(&self) -> Option<&[f64]> {
        match &self.0.kind {
            Kind::Polynomial(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    pub fn ptr_eq(&self, other: &SmoothFn) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Short name of the node kind.
    pub fn kind_name(&self) -> &'static str {
        match &self.0.kind {
            Kind::Polynomial(_) => "polynomial",
            Kind::Power { .. } => "power",
            Kind::Exp(_) => "exp",
            Kind::Sum(_) => "sum",
            Kind::Product(_) => "product",
            Kind::Scale(..) => "scale",
            Kind::Reciprocal(_) => "reciprocal",
            Kind::Compose { .. } => "compose",
            Kind::Antiderivative(_) => "antiderivative",
            Kind::RiccatiLambda(_) => "riccati-lambda",
            Kind::Flow { speed: false, .. } => "flow",
            Kind::Flow { speed: true, .. } => "flow-speed",
            Kind::Restrict(_) => "restrict",
        }
    }

    /// For an antiderivative node: the integrand and base point.
    pub fn antiderivative_parts(&self) -> Option<(&SmoothFn, f64)> {
        match &self.0.kind {
            Kind::Antiderivative(core) => Some((core.integrand(), core.base())),
            _ => None,
        }
    }

    /// For a Riccati deformation node: the superpotential and constant `C`.
    pub fn lambda_parts(&self) -> Option<(&SmoothFn, f64)> {
        match &self.0.kind {
            Kind::RiccatiLambda(core) => Some((core.superpotential(), core.constant())),
            _ => None,
        }
    }

    /// A sign valid over the whole domain, if one follows from the structure
    /// of the node alone.
    pub fn structural_sign(&self) -> Option<Sign> {
        match &self.0.kind {
            Kind::Polynomial(p) if p.len() == 1 => match p[0] {
                c if c > 0.0 => Some(Sign::Positive),
                c if c < 0.0 => Some(Sign::Negative),
                _ => None,
            },
            Kind::Polynomial(_) => None,
            Kind::Exp(_) => Some(Sign::Positive),
            Kind::Power { coeff, .. } if self.domain().lo >= 0.0 => Some(if *coeff > 0.0 {
                Sign::Positive
            } else {
                Sign::Negative
            }),
            Kind::Power { .. } => None,
            Kind::Scale(c, g) => g
                .structural_sign()
                .map(|s| if *c < 0.0 { s.flip() } else { s }),
            Kind::Reciprocal(g) | Kind::Restrict(g) => g.structural_sign(),
            Kind::Sum(terms) => {
                let first = terms.first()?.structural_sign()?;
                terms
                    .iter()
                    .all(|t| t.structural_sign() == Some(first))
                    .then_some(first)
            }
            Kind::Product(factors) => factors.iter().try_fold(Sign::Positive, |acc, f| {
                f.structural_sign()
                    .map(|s| if s == Sign::Negative { acc.flip() } else { acc })
            }),
            _ => None,
        }
    }

    fn certify_by_sampling(&self, n: usize) -> Result<()> {
        let d = self.domain();
        let mut sign = 0.0f64;
        for i in 0..n {
            let u = (i as f64 + 0.5) / n as f64;
            let r = map_unit_to_domain(u, &d);
            if !d.contains(r) {
                continue;
            }
            let v = self.eval(r)?;
            if v == 0.0 || (sign != 0.0 && v.signum() != sign) {
                return Err(Error::SignChange { r });
            }
            sign = v.signum();
        }
        Ok(())
    }

    /// Identity of the underlying node, stable while any clone is alive.
    pub fn node_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub(crate) fn cache_key(&self) -> usize {
        match &self.0.kind {
            Kind::RiccatiLambda(core) => Arc::as_ptr(core) as usize,
            Kind::Flow { core, speed } => Arc::as_ptr(core) as usize + usize::from(*speed),
            _ => Arc::as_ptr(&self.0) as usize,
        }
    }
}

/// Maps `u` in (0,1) onto `domain`, using a tangent map for infinite ends.
fn map_unit_to_domain(u: f64, d: &Interval) -> f64 {
    use std::f64::consts::PI;
    match (d.lo.is_finite(), d.hi.is_finite()) {
        (true, true) => d.lo + u * (d.hi - d.lo),
        (true, false) => d.lo + u / (1.0 - u),
        (false, true) => d.hi - (1.0 - u) / u,
        (false, false) => (PI * (u - 0.5)).tan(),
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(n: &SmoothFn, depth: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if depth > 4 {
                return write!(f, "..");
            }
            match &n.0.kind {
                Kind::Polynomial(p) => write!(f, "poly{p:?}"),
                Kind::Power { coeff, exponent } => write!(f, "{coeff}*r^{exponent}"),
                Kind::Exp(a) => {
                    write!(f, "exp(")?;
                    go(a, depth + 1, f)?;
                    write!(f, ")")
                }
                Kind::Sum(ts) | Kind::Product(ts) => {
                    let sep = if matches!(n.0.kind, Kind::Sum(_)) {
                        " + "
                    } else {
                        " * "
                    };
                    write!(f, "(")?;
                    for (i, t) in ts.iter().enumerate() {
                        if i > 0 {
                            write!(f, "{sep}")?;
                        }
                        go(t, depth + 1, f)?;
                    }
                    write!(f, ")")
                }
                Kind::Scale(c, g) => {
                    write!(f, "{c}*")?;
                    go(g, depth + 1, f)
                }
                Kind::Reciprocal(g) => {
                    write!(f, "1/")?;
                    go(g, depth + 1, f)
                }
                Kind::Compose { outer, inner } => {
                    go(outer, depth + 1, f)?;
                    write!(f, "∘")?;
                    go(inner, depth + 1, f)
                }
                _ => write!(f, "{}", n.kind_name()),
            }
        }
        go(self, 0, f)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $call:ident) => {
        impl std::ops::$tr<&SmoothFn> for &SmoothFn {
            type Output = SmoothFn;
            fn $m(self, rhs: &SmoothFn) -> SmoothFn {
                SmoothFn::$call(self, rhs)
            }
        }
        impl std::ops::$tr<SmoothFn> for SmoothFn {
            type Output = SmoothFn;
            fn $m(self, rhs: SmoothFn) -> SmoothFn {
                SmoothFn::$call(&self, &rhs)
            }
        }
    };
}
binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);

impl std::ops::Mul<&SmoothFn> for f64 {
    type Output = SmoothFn;
    fn mul(self, rhs: &SmoothFn) -> SmoothFn {
        rhs.scale(self)
    }
}

impl std::ops::Neg for &SmoothFn {
    type Output = SmoothFn;
    fn neg(self) -> SmoothFn {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests;
