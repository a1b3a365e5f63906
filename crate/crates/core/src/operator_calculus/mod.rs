//! Variable-coefficient differential operators with exact coefficient
//! algebra.
//!
//! Composition uses the Leibniz rule
//!
//! ```text
//! (sum_i p_i D^i)(sum_j q_j D^j) = sum_{i,j} sum_{l<=i} C(i,l) p_i q_j^(i-l) D^(j+l)
//! ```
//!
//! with every derivative taken exactly by the function algebra, so
//! commutators of ladder operators cancel to rounding level. Vanishing of a
//! coefficient that is not structurally zero is decided by sampling.

mod ladders;
mod test_functions;
mod two_d;

pub use ladders::{
    deformed_hamiltonian, first_order_pair, m_r_ladders, make_s_ladder, partner_hamiltonians,
    s_ladders, MrLadders,
};
pub use test_functions::{GaussianPoly, TestFunction};
pub use two_d::{eval_separable, Axis, DiffOp2D, Order2D, SeparablePair};

use crate::error::{Error, Result};
use crate::function_algebra::{Evaluator, SmoothFn};
use crate::interval::Interval;
use serde::Serialize;

/// Highest operator order any composition may produce.
pub const MAX_ORDER: usize = 12;

/// Relative threshold below which a sampled coefficient counts as zero when
/// measuring order.
pub const ORDER_THRESHOLD: f64 = 1e-12;

/// Relative threshold for dropping trailing coefficients.
pub const TRIM_THRESHOLD: f64 = 1e-13;

const ORDER_PROBES: usize = 64;
const TRIM_PROBES: usize = 32;

/// Sign selector for `-+ d/dr + W`: `Plus` gives `-d/dr + W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Pm {
    Plus,
    Minus,
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `sum_k c_k(r) d^k/dr^k`.
#[derive(Clone, Debug)]
pub struct DiffOp1D {
    coeffs: Vec<SmoothFn>,
}

/// Term table of an operator with coefficient values at a few probe points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorSummary {
    pub order: usize,
    pub probes: Vec<Vec<f64>>,
    pub terms: Vec<TermSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermSummary {
    pub i: usize,
    pub j: usize,
    pub values: Vec<f64>,
}

fn structural_trim(mut c: Vec<SmoothFn>) -> Vec<SmoothFn> {
    while c.last().is_some_and(|f| f.is_zero()) {
        c.pop();
    }
    c
}

/// `-d/dr + w` for `Plus`, `d/dr + w` for `Minus`.
pub fn make_first_order(w: &SmoothFn, sign: Pm) -> DiffOp1D {
    let d = match sign {
        Pm::Plus => -1.0,
        Pm::Minus => 1.0,
    };
    DiffOp1D {
        coeffs: vec![w.clone(), SmoothFn::constant(d)],
    }
}

impl DiffOp1D {
    pub fn new(coeffs: Vec<SmoothFn>) -> Result<DiffOp1D> {
        let coeffs = structural_trim(coeffs);
        if coeffs.len() > MAX_ORDER + 1 {
            return Err(Error::OrderCap(coeffs.len() - 1));
        }
        Ok(DiffOp1D { coeffs })
    }

    pub fn zero() -> DiffOp1D {
        DiffOp1D { coeffs: Vec::new() }
    }

    pub fn identity() -> DiffOp1D {
        Self::multiplication(&SmoothFn::one())
    }

    /// Multiplication by `f`.
    pub fn multiplication(f: &SmoothFn) -> DiffOp1D {
        DiffOp1D {
            coeffs: structural_trim(vec![f.clone()]),
        }
    }

    /// `d/dr`.
    pub fn d() -> DiffOp1D {
        DiffOp1D {
            coeffs: vec![SmoothFn::zero(), SmoothFn::one()],
        }
    }

    pub fn coeffs(&self) -> &[SmoothFn] {
        &self.coeffs
    }

    /// Coefficient of `d^k`, zero beyond the stored range.
    pub fn coeff(&self, k: usize) -> SmoothFn {
        self.coeffs.get(k).cloned().unwrap_or_else(SmoothFn::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest stored power of `d/dr` (0 for the zero operator).
    pub fn formal_order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn domain(&self) -> Interval {
        self.coeffs
            .iter()
            .fold(Interval::REAL_LINE, |d, c| d.intersect(&c.domain()))
    }

    pub fn add(&self, other: &DiffOp1D) -> DiffOp1D {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k).add(&other.coeff(k))).collect();
        DiffOp1D {
            coeffs: structural_trim(coeffs),
        }
    }

    pub fn sub(&self, other: &DiffOp1D) -> DiffOp1D {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> DiffOp1D {
        DiffOp1D {
            coeffs: structural_trim(self.coeffs.iter().map(|f| f.scale(c)).collect()),
        }
    }

    pub fn neg(&self) -> DiffOp1D {
        self.scale(-1.0)
    }

    /// The product `self * q`.
    pub fn compose(&self, q: &DiffOp1D) -> Result<DiffOp1D> {
        if self.is_zero() || q.is_zero() {
            return Ok(Self::zero());
        }
        let order = self.formal_order() + q.formal_order();
        if order > MAX_ORDER {
            return Err(Error::OrderCap(order));
        }
        let mut buckets: Vec<Vec<SmoothFn>> = vec![Vec::new(); order + 1];
        for (i, p) in self.coeffs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for (j, qj) in q.coeffs.iter().enumerate() {
                for l in 0..=i {
                    let dq = qj.nth_derivative(i - l);
                    if dq.is_zero() {
                        continue;
                    }
                    buckets[j + l].push(p.mul(&dq).scale(binomial(i, l)));
                }
            }
        }
        Self::new(buckets.iter().map(|b| SmoothFn::sum_of(b)).collect())
    }

    /// `self^n`, the identity for `n = 0`.
    pub fn pow(&self, n: usize) -> Result<DiffOp1D> {
        let mut acc = Self::identity();
        for _ in 0..n {
            acc = acc.compose(self)?;
        }
        Ok(acc)
    }

    /// `[self, q] = self q - q self`, with numerically vanishing top
    /// coefficients dropped.
    pub fn commutator(&self, q: &DiffOp1D) -> Result<DiffOp1D> {
        self.compose(q)?.sub(&q.compose(self)?).trimmed()
    }

    /// The function `sum_k c_k f^(k)`.
    pub fn act(&self, f: &SmoothFn) -> SmoothFn {
        let terms: Vec<SmoothFn> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.mul(&f.nth_derivative(k)))
            .collect();
        SmoothFn::sum_of(&terms)
    }

    /// `sum_k c_k(r) phi^(k)(r)` using the test function's own derivatives.
    pub fn apply(&self, phi: &dyn TestFunction, r: f64) -> Result<f64> {
        let d = phi.derivatives(r, self.formal_order())?;
        let c = self.coefficient_values(r)?;
        Ok(c.iter().zip(&d).map(|(a, b)| a * b).sum())
    }

    pub fn coefficient_values(&self, r: f64) -> Result<Vec<f64>> {
        let mut ev = Evaluator::new(r);
        self.coeffs.iter().map(|c| ev.eval(c)).collect()
    }

    /// Default probe points inside the operator's domain.
    pub fn probes(&self, n: usize) -> Vec<f64> {
        self.domain().probe_points(n)
    }

    /// `max_k max_p |c_k(p)|`.
    pub fn max_abs_on(&self, probes: &[f64]) -> Result<f64> {
        let mut m = 0.0f64;
        for &r in probes {
            for v in self.coefficient_values(r)? {
                m = m.max(v.abs());
            }
        }
        Ok(m)
    }

    /// Per-order maxima of `|c_k|` over the probes.
    fn column_maxima(&self, probes: &[f64]) -> Result<Vec<f64>> {
        let mut cols = vec![0.0f64; self.coeffs.len()];
        for &r in probes {
            for (k, v) in self.coefficient_values(r)?.into_iter().enumerate() {
                cols[k] = cols[k].max(v.abs());
            }
        }
        Ok(cols)
    }

    /// Highest `k` whose coefficient is not negligible relative to the
    /// largest coefficient, over 64 probe points.
    pub fn leading_order(&self) -> Result<usize> {
        let cols = self.column_maxima(&self.probes(ORDER_PROBES))?;
        let scale = cols.iter().cloned().fold(0.0, f64::max);
        if scale == 0.0 {
            return Ok(0);
        }
        Ok(cols
            .iter()
            .rposition(|c| *c > ORDER_THRESHOLD * scale)
            .unwrap_or(0))
    }

    /// Drops trailing coefficients that vanish (relative to the operator's
    /// scale) at 32 probe points.
    pub fn trimmed(&self) -> Result<DiffOp1D> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let cols = self.column_maxima(&self.probes(TRIM_PROBES))?;
        let scale = cols.iter().cloned().fold(0.0, f64::max);
        let keep = cols
            .iter()
            .rposition(|c| *c > TRIM_THRESHOLD * scale)
            .map_or(0, |k| k + 1);
        Ok(DiffOp1D {
            coeffs: self.coeffs[..keep].to_vec(),
        })
    }

    /// Term table with coefficient values at the first five default probes.
    pub fn summary(&self) -> Result<OperatorSummary> {
        let probes = self.probes(5);
        let mut terms = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            terms.push(TermSummary {
                i: k,
                j: 0,
                values: c.eval_many(&probes)?,
            });
        }
        Ok(OperatorSummary {
            order: self.leading_order()?,
            probes: probes.iter().map(|p| vec![*p]).collect(),
            terms,
        })
    }
}
