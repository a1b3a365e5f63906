//! Real intervals with optionally open or infinite endpoints.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    /// Whether `lo` itself is excluded. Ignored for infinite endpoints.
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_open: true,
        hi_open: true,
    };

    pub const POSITIVE: Interval = Interval {
        lo: 0.0,
        hi: f64::INFINITY,
        lo_open: true,
        hi_open: true,
    };

    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_open: true,
            hi_open: true,
        }
    }

    /// `[lo, +inf)`.
    pub fn from_closed(lo: f64) -> Self {
        Interval {
            lo,
            hi: f64::INFINITY,
            lo_open: false,
            hi_open: true,
        }
    }

    pub fn contains(&self, r: f64) -> bool {
        if r.is_nan() {
            return false;
        }
        let above = if self.lo_open {
            r > self.lo
        } else {
            r >= self.lo
        };
        let below = if self.hi_open {
            r < self.hi
        } else {
            r <= self.hi
        };
        above && below
    }

    /// True when zero is neither inside nor on a closed boundary.
    pub fn excludes_zero(&self) -> bool {
        !self.contains(0.0)
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_open) = if self.lo > other.lo {
            (self.lo, self.lo_open)
        } else if other.lo > self.lo {
            (other.lo, other.lo_open)
        } else {
            (self.lo, self.lo_open || other.lo_open)
        };
        let (hi, hi_open) = if self.hi < other.hi {
            (self.hi, self.hi_open)
        } else if other.hi < self.hi {
            (other.hi, other.hi_open)
        } else {
            (self.hi, self.hi_open || other.hi_open)
        };
        Interval {
            lo,
            hi,
            lo_open,
            hi_open,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_open || self.hi_open))
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// A bounded window inside the interval used for probing functions
    /// numerically. Infinite ends are cut at +-3 (or 4 units past a finite
    /// end); finite ends are pulled inward so singular endpoints are avoided.
    pub fn probe_window(&self) -> (f64, f64) {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (false, false) => (-3.0, 3.0),
            (true, false) => {
                let a = if self.lo_open {
                    self.lo + 0.5
                } else {
                    self.lo + 0.25
                };
                (a, a + 3.5)
            }
            (false, true) => {
                let b = if self.hi_open {
                    self.hi - 0.5
                } else {
                    self.hi - 0.25
                };
                (b - 3.5, b)
            }
            (true, true) => {
                let pad = 0.05 * (self.hi - self.lo);
                (self.lo + pad, self.hi - pad)
            }
        }
    }

    /// `n` deterministic points spread over the probe window (golden-ratio
    /// sequence, so prefixes are themselves well spread).
    pub fn probe_points(&self, n: usize) -> Vec<f64> {
        let (a, b) = self.probe_window();
        golden_sequence(n, 0.5)
            .into_iter()
            .map(|t| a + (b - a) * t)
            .collect()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_open || !self.lo.is_finite() {
            '('
        } else {
            '['
        };
        let r = if self.hi_open || !self.hi.is_finite() {
            ')'
        } else {
            ']'
        };
        write!(f, "{}{}, {}{}", l, self.lo, self.hi, r)
    }
}

/// Low-discrepancy points in (0, 1).
pub fn golden_sequence(n: usize, seed: f64) -> Vec<f64> {
    const PHI_FRAC: f64 = 0.618_033_988_749_894_9;
    (0..n)
        .map(|i| {
            let t = (seed + PHI_FRAC * (i as f64 + 1.0)).fract();
            // keep off the exact window edges
            0.01 + 0.98 * t
        })
        .collect()
}
