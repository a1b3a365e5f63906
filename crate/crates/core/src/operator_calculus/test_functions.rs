use crate::error::{Error, Result};
use crate::function_algebra::SmoothFn;

/// A function that can report its own derivatives at a point.
pub trait TestFunction: Send + Sync {
    /// Values `phi(r), phi'(r), ..., phi^(k)(r)`.
    fn derivatives(&self, r: f64, k: usize) -> Result<Vec<f64>>;
}

/// `p(r) exp(-a (r - c)^2)`, differentiated in closed form through the
/// recurrence `p -> p' - 2 a (r - c) p`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPoly {
    pub poly: Vec<f64>,
    pub a: f64,
    pub center: f64,
}

const MAX_TEST_ORDER: usize = 24;

fn horner(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl GaussianPoly {
    pub fn new(poly: Vec<f64>, a: f64, center: f64) -> Self {
        GaussianPoly { poly, a, center }
    }

    fn next(&self, p: &[f64]) -> Vec<f64> {
        // p' - 2a (r - c) p
        let mut out = vec![0.0; p.len() + 1];
        for (k, c) in p.iter().enumerate().skip(1) {
            out[k - 1] += k as f64 * c;
        }
        for (k, c) in p.iter().enumerate() {
            out[k + 1] -= 2.0 * self.a * c;
            out[k] += 2.0 * self.a * self.center * c;
        }
        out
    }

    /// The same function as a node of the function algebra.
    pub fn as_smooth_fn(&self) -> SmoothFn {
        let (a, c) = (self.a, self.center);
        let g = SmoothFn::exp(&SmoothFn::polynomial(vec![-a * c * c, 2.0 * a * c, -a]));
        SmoothFn::polynomial(self.poly.clone()).mul(&g)
    }
}

impl TestFunction for GaussianPoly {
    fn derivatives(&self, r: f64, k: usize) -> Result<Vec<f64>> {
        if k > MAX_TEST_ORDER {
            return Err(Error::DerivativeOrder {
                requested: k,
                available: MAX_TEST_ORDER,
            });
        }
        let g = (-self.a * (r - self.center).powi(2)).exp();
        let mut p = self.poly.clone();
        let mut out = Vec::with_capacity(k + 1);
        for i in 0..=k {
            out.push(horner(&p, r) * g);
            if i < k {
                p = self.next(&p);
            }
        }
        Ok(out)
    }
}

impl TestFunction for SmoothFn {
    fn derivatives(&self, r: f64, k: usize) -> Result<Vec<f64>> {
        let mut f = self.clone();
        let mut out = Vec::with_capacity(k + 1);
        for i in 0..=k {
            out.push(f.eval(r)?);
            if i < k {
                f = f.derivative();
            }
        }
        Ok(out)
    }
}
