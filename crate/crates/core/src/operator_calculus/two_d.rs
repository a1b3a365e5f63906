use super::{
    binomial, DiffOp1D, OperatorSummary, TermSummary, TestFunction, MAX_ORDER, ORDER_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::function_algebra::{Evaluator, SmoothFn};
use crate::interval::Interval;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    R,
    RPrime,
}

/// `cx(r) * cy(r')`.
pub type SeparablePair = (SmoothFn, SmoothFn);

/// Sum of separable terms `cx(r) cy(r') d_r^i d_r'^j`, keyed by `(i, j)`.
#[derive(Clone, Debug, Default)]
pub struct DiffOp2D {
    terms: BTreeMap<(usize, usize), Vec<SeparablePair>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Order2D {
    pub total: usize,
    pub max_i: usize,
    pub max_j: usize,
}

/// Merges pairs sharing a factor and drops structural zeros. Constant
/// factors are moved to the `r'` side.
fn canonical_pairs(pairs: Vec<SeparablePair>) -> Vec<SeparablePair> {
    // group by the r factor; None stands for the constant 1
    let mut by_x: Vec<(Option<SmoothFn>, Vec<SmoothFn>)> = Vec::new();
    let mut index: HashMap<Option<usize>, usize> = HashMap::new();
    for (cx, cy) in pairs {
        if cx.is_zero() || cy.is_zero() {
            continue;
        }
        let (x, y) = match cx.as_constant() {
            Some(c) => (None, cy.scale(c)),
            None => (Some(cx), cy),
        };
        let key = x.as_ref().map(|f| f.node_id());
        match index.get(&key) {
            Some(&i) => by_x[i].1.push(y),
            None => {
                index.insert(key, by_x.len());
                by_x.push((x, vec![y]));
            }
        }
    }
    // then by the r' factor
    let mut by_y: Vec<(SmoothFn, Vec<SmoothFn>)> = Vec::new();
    let mut index: HashMap<usize, usize> = HashMap::new();
    for (x, ys) in by_x {
        let y = SmoothFn::sum_of(&ys);
        if y.is_zero() {
            continue;
        }
        let x = x.unwrap_or_else(SmoothFn::one);
        let (x, y) = match y.as_constant() {
            Some(d) if x.as_constant().is_none() => (x.scale(d), SmoothFn::one()),
            _ => (x, y),
        };
        let key = y.node_id();
        let key = if y.as_constant() == Some(1.0) { 0 } else { key };
        match index.get(&key) {
            Some(&i) => by_y[i].1.push(x),
            None => {
                index.insert(key, by_y.len());
                by_y.push((y, vec![x]));
            }
        }
    }
    by_y.into_iter()
        .filter_map(|(y, xs)| {
            let x = SmoothFn::sum_of(&xs);
            (!x.is_zero()).then_some((x, y))
        })
        .collect()
}

impl DiffOp2D {
    pub fn zero() -> DiffOp2D {
        DiffOp2D::default()
    }

    fn from_map(raw: BTreeMap<(usize, usize), Vec<SeparablePair>>) -> DiffOp2D {
        let terms = raw
            .into_iter()
            .filter_map(|(k, v)| {
                let v = canonical_pairs(v);
                (!v.is_empty()).then_some((k, v))
            })
            .collect();
        DiffOp2D { terms }
    }

    /// Builds an operator from raw terms `(cx, cy, i, j)`.
    pub fn from_terms(terms: Vec<(SmoothFn, SmoothFn, usize, usize)>) -> Result<DiffOp2D> {
        let mut raw: BTreeMap<(usize, usize), Vec<SeparablePair>> = BTreeMap::new();
        for (cx, cy, i, j) in terms {
            if i + j > MAX_ORDER {
                return Err(Error::OrderCap(i + j));
            }
            raw.entry((i, j)).or_default().push((cx, cy));
        }
        Ok(Self::from_map(raw))
    }

    /// Embeds a one-variable operator acting on the given axis.
    pub fn lift(p: &DiffOp1D, axis: Axis) -> DiffOp2D {
        let mut raw: BTreeMap<(usize, usize), Vec<SeparablePair>> = BTreeMap::new();
        for (k, c) in p.coeffs().iter().enumerate() {
            let (key, pair) = match axis {
                Axis::R => ((k, 0), (c.clone(), SmoothFn::one())),
                Axis::RPrime => ((0, k), (SmoothFn::one(), c.clone())),
            };
            raw.entry(key).or_default().push(pair);
        }
        Self::from_map(raw)
    }

    /// `px(r) py(r')`: the product of operators acting on different axes.
    pub fn tensor(px: &DiffOp1D, py: &DiffOp1D) -> Result<DiffOp2D> {
        let order = px.formal_order() + py.formal_order();
        if order > MAX_ORDER {
            return Err(Error::OrderCap(order));
        }
        let mut raw: BTreeMap<(usize, usize), Vec<SeparablePair>> = BTreeMap::new();
        for (i, a) in px.coeffs().iter().enumerate() {
            for (j, b) in py.coeffs().iter().enumerate() {
                raw.entry((i, j)).or_default().push((a.clone(), b.clone()));
            }
        }
        Ok(Self::from_map(raw))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<SeparablePair>)> {
        self.terms.iter()
    }

    pub fn term(&self, i: usize, j: usize) -> &[SeparablePair] {
        self.terms.get(&(i, j)).map_or(&[], |v| v.as_slice())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `i + j` present in the term table.
    pub fn formal_order(&self) -> usize {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn add(&self, other: &DiffOp2D) -> DiffOp2D {
        let mut raw = self.terms.clone();
        for (k, v) in &other.terms {
            raw.entry(*k).or_default().extend(v.iter().cloned());
        }
        Self::from_map(raw)
    }

    pub fn scale(&self, c: f64) -> DiffOp2D {
        let raw = self
            .terms
            .iter()
            .map(|(k, v)| (*k, v.iter().map(|(x, y)| (x.clone(), y.scale(c))).collect()))
            .collect();
        Self::from_map(raw)
    }

    pub fn sub(&self, other: &DiffOp2D) -> DiffOp2D {
        self.add(&other.scale(-1.0))
    }

    /// The product `self * q`, by the Leibniz rule on each axis.
    pub fn compose(&self, q: &DiffOp2D) -> Result<DiffOp2D> {
        let order = self.formal_order() + q.formal_order();
        if order > MAX_ORDER && !self.is_zero() && !q.is_zero() {
            return Err(Error::OrderCap(order));
        }
        let mut raw: BTreeMap<(usize, usize), Vec<SeparablePair>> = BTreeMap::new();
        for (&(i, j), ps) in &self.terms {
            for (&(k, l), qs) in &q.terms {
                for (a, b) in ps {
                    for (c, d) in qs {
                        for p in 0..=i {
                            let dc = c.nth_derivative(i - p);
                            if dc.is_zero() {
                                continue;
                            }
                            let x = a.mul(&dc);
                            for s in 0..=j {
                                let dd = d.nth_derivative(j - s);
                                if dd.is_zero() {
                                    continue;
                                }
                                let y = b.mul(&dd).scale(binomial(i, p) * binomial(j, s));
                                raw.entry((p + k, s + l)).or_default().push((x.clone(), y));
                            }
                        }
                    }
                }
            }
        }
        Ok(Self::from_map(raw))
    }

    pub fn commutator(&self, q: &DiffOp2D) -> Result<DiffOp2D> {
        Ok(self.compose(q)?.sub(&q.compose(self)?))
    }

    pub fn x_domain(&self) -> Interval {
        self.all_pairs()
            .fold(Interval::REAL_LINE, |d, (x, _)| d.intersect(&x.domain()))
    }

    pub fn y_domain(&self) -> Interval {
        self.all_pairs()
            .fold(Interval::REAL_LINE, |d, (_, y)| d.intersect(&y.domain()))
    }

    fn all_pairs(&self) -> impl Iterator<Item = &SeparablePair> {
        self.terms.values().flatten()
    }

    /// `n` probe points `(r, r')` spread over both probe windows.
    pub fn probes(&self, n: usize) -> Vec<(f64, f64)> {
        probes_for(self.x_domain(), self.y_domain(), n)
    }

    /// Coefficient of each `(i, j)` at one point.
    pub fn coefficient_values(&self, r: f64, rp: f64) -> Result<Vec<((usize, usize), f64)>> {
        let mut ex = Evaluator::new(r);
        let mut ey = Evaluator::new(rp);
        let mut out = Vec::with_capacity(self.terms.len());
        for (k, pairs) in &self.terms {
            let mut acc = 0.0;
            for (x, y) in pairs {
                acc += ex.eval(x)? * ey.eval(y)?;
            }
            out.push((*k, acc));
        }
        Ok(out)
    }

    pub fn max_abs_on(&self, probes: &[(f64, f64)]) -> Result<f64> {
        let mut m = 0.0f64;
        for &(r, rp) in probes {
            for (_, v) in self.coefficient_values(r, rp)? {
                m = m.max(v.abs());
            }
        }
        Ok(m)
    }

    fn term_maxima(&self, probes: &[(f64, f64)]) -> Result<BTreeMap<(usize, usize), f64>> {
        let mut m: BTreeMap<(usize, usize), f64> = self.terms.keys().map(|k| (*k, 0.0)).collect();
        for &(r, rp) in probes {
            for (k, v) in self.coefficient_values(r, rp)? {
                let e = m.get_mut(&k).expect("key present");
                *e = e.max(v.abs());
            }
        }
        Ok(m)
    }

    /// Orders of the terms that do not vanish relative to the operator's
    /// largest coefficient, over 64 probe points.
    pub fn leading_order(&self) -> Result<Order2D> {
        let maxima = self.term_maxima(&self.probes(64))?;
        let scale = maxima.values().cloned().fold(0.0, f64::max);
        let live: Vec<(usize, usize)> = maxima
            .into_iter()
            .filter(|(_, v)| *v > ORDER_THRESHOLD * scale && *v > 0.0)
            .map(|(k, _)| k)
            .collect();
        Ok(Order2D {
            total: live.iter().map(|(i, j)| i + j).max().unwrap_or(0),
            max_i: live.iter().map(|(i, _)| *i).max().unwrap_or(0),
            max_j: live.iter().map(|(_, j)| *j).max().unwrap_or(0),
        })
    }

    /// Largest sampled coefficient magnitude among terms of total order
    /// `n`, relative to the largest coefficient of the operator.
    pub fn relative_weight_of_order(&self, n: usize) -> Result<f64> {
        let maxima = self.term_maxima(&self.probes(64))?;
        let scale = maxima.values().cloned().fold(0.0, f64::max);
        if scale == 0.0 {
            return Ok(0.0);
        }
        let top = maxima
            .iter()
            .filter(|((i, j), _)| i + j == n)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max);
        Ok(top / scale)
    }

    /// `sum cx(r) cy(r') g^(i)(r) h^(j)(r')`.
    pub fn apply(
        &self,
        g: &dyn TestFunction,
        h: &dyn TestFunction,
        r: f64,
        rp: f64,
    ) -> Result<f64> {
        let imax = self.terms.keys().map(|k| k.0).max().unwrap_or(0);
        let jmax = self.terms.keys().map(|k| k.1).max().unwrap_or(0);
        let dg = g.derivatives(r, imax)?;
        let dh = h.derivatives(rp, jmax)?;
        let mut acc = 0.0;
        for ((i, j), c) in self.coefficient_values(r, rp)? {
            acc += c * dg[i] * dh[j];
        }
        Ok(acc)
    }

    /// Symbolic action on a sum of separable functions `sum u(r) v(r')`.
    pub fn act(&self, f: &[SeparablePair]) -> Vec<SeparablePair> {
        let mut out = Vec::new();
        for (&(i, j), pairs) in &self.terms {
            for (a, b) in pairs {
                for (u, v) in f {
                    out.push((a.mul(&u.nth_derivative(i)), b.mul(&v.nth_derivative(j))));
                }
            }
        }
        out
    }

    pub fn summary(&self) -> Result<OperatorSummary> {
        let probes = self.probes(5);
        let mut terms = Vec::new();
        for &(i, j) in self.terms.keys() {
            let mut values = Vec::with_capacity(probes.len());
            for &(r, rp) in &probes {
                let vals = self.coefficient_values(r, rp)?;
                values.push(
                    vals.iter()
                        .find(|(k, _)| *k == (i, j))
                        .map_or(0.0, |(_, v)| *v),
                );
            }
            terms.push(TermSummary { i, j, values });
        }
        let order = self.leading_order()?.total;
        Ok(OperatorSummary {
            order,
            probes: probes.iter().map(|p| vec![p.0, p.1]).collect(),
            terms,
        })
    }
}

/// Evaluates a sum of separable functions at a point.
pub fn eval_separable(f: &[SeparablePair], r: f64, rp: f64) -> Result<f64> {
    let mut ex = Evaluator::new(r);
    let mut ey = Evaluator::new(rp);
    let mut acc = 0.0;
    for (u, v) in f {
        acc += ex.eval(u)? * ey.eval(v)?;
    }
    Ok(acc)
}

/// Points of the R2 low-discrepancy sequence mapped onto both probe windows.
pub(crate) fn probes_for(x: Interval, y: Interval, n: usize) -> Vec<(f64, f64)> {
    const RHO: f64 = 1.324_717_957_244_746;
    let (a1, a2) = (1.0 / RHO, 1.0 / (RHO * RHO));
    let (xa, xb) = x.probe_window();
    let (ya, yb) = y.probe_window();
    (1..=n)
        .map(|k| {
            let tx = 0.01 + 0.98 * (0.5 + a1 * k as f64).fract();
            let ty = 0.01 + 0.98 * (0.5 + a2 * k as f64).fract();
            (xa + (xb - xa) * tx, ya + (yb - ya) * ty)
        })
        .collect()
}
