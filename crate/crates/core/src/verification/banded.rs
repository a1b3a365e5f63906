use crate::error::{Error, Result};

/// Symmetric banded matrix with half-bandwidth 1 or 2, stored by rows:
/// `band[i][k] = A[i][i + k]`.
#[derive(Debug, Clone)]
pub struct SymBand {
    band: Vec<[f64; 3]>,
    width: usize,
}

impl SymBand {
    pub fn new(n: usize, width: usize) -> Result<SymBand> {
        if !(1..=2).contains(&width) {
            return Err(Error::Eigen(format!(
                "half-bandwidth {width} not supported"
            )));
        }
        Ok(SymBand {
            band: vec![[0.0; 3]; n],
            width,
        })
    }

    pub fn len(&self) -> usize {
        self.band.len()
    }

    pub fn is_empty(&self) -> bool {
        self.band.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Sets `A[i][i + k]` (and its mirror); out-of-range entries are ignored.
    pub fn set(&mut self, i: usize, k: usize, v: f64) {
        if k <= self.width && i + k < self.band.len() {
            self.band[i][k] = v;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let k = j - i;
        if k > self.width {
            0.0
        } else {
            self.band[i][k]
        }
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let lo_j = i.saturating_sub(self.width);
            let hi_j = (i + self.width).min(n - 1);
            let rad: f64 = (lo_j..=hi_j)
                .filter(|&j| j != i)
                .map(|j| self.get(i, j).abs())
                .sum();
            let d = self.band[i][0];
            lo = lo.min(d - rad);
            hi = hi.max(d + rad);
        }
        (lo, hi)
    }

    /// Number of eigenvalues below `sigma`, from the inertia of the
    /// `L D L^T` factorization of `A - sigma I`.
    pub fn count_below(&self, sigma: f64) -> usize {
        let n = self.len();
        let p = self.width;
        let tiny = f64::EPSILON * (1.0 + sigma.abs());
        let mut d = vec![0.0; n];
        // l[i][t] = L[i][i - 1 - t]
        let mut l = vec![[0.0f64; 2]; n];
        let mut negatives = 0;
        for i in 0..n {
            for t in (0..p).rev() {
                let Some(j) = i.checked_sub(t + 1) else {
                    continue;
                };
                let mut a = self.get(j, i);
                for s in 0..p {
                    let Some(q) = j.checked_sub(s + 1) else {
                        continue;
                    };
                    if i - q > p {
                        continue;
                    }
                    a -= l[i][i - q - 1] * l[j][s] * d[q];
                }
                l[i][t] = a / d[j];
            }
            let mut di = self.band[i][0] - sigma;
            for t in 0..p {
                if let Some(j) = i.checked_sub(t + 1) {
                    di -= l[i][t] * l[i][t] * d[j];
                }
            }
            if di == 0.0 {
                di = -tiny;
            }
            if di < 0.0 {
                negatives += 1;
            }
            d[i] = di;
        }
        negatives
    }

    /// The `k` smallest eigenvalues in ascending order, by bisection on the
    /// inertia count.
    pub fn lowest_eigenvalues(&self, k: usize, tol: f64) -> Result<Vec<f64>> {
        let n = self.len();
        if k > n {
            return Err(Error::Eigen(format!(
                "{k} eigenvalues requested from a {n}x{n} matrix"
            )));
        }
        if self.band.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Eigen("matrix has non-finite entries".into()));
        }
        let (glo, ghi) = self.gershgorin();
        let mut out: Vec<f64> = Vec::with_capacity(k);
        for idx in 0..k {
            let mut lo = out.last().copied().unwrap_or(glo).min(ghi);
            let mut hi = ghi;
            let mut steps = 0;
            while hi - lo > tol * (1.0 + lo.abs().max(hi.abs())) {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.count_below(mid) > idx {
                    hi = mid;
                } else {
                    lo = mid;
                }
                steps += 1;
                if steps > 200 {
                    return Err(Error::Eigen(format!(
                        "bisection for eigenvalue {idx} did not converge"
                    )));
                }
            }
            out.push(0.5 * (lo + hi));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};

    fn random_band(n: usize, width: usize, seed: u64) -> SymBand {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut a = SymBand::new(n, width).unwrap();
        for i in 0..n {
            for k in 0..=width {
                a.set(i, k, rng.gen_range(-2.0..2.0));
            }
        }
        a
    }

    fn dense(a: &SymBand) -> DMatrix<f64> {
        DMatrix::from_fn(a.len(), a.len(), |i, j| a.get(i, j))
    }

    #[test]
    fn matches_dense_eigensolver() {
        for (width, seed) in [(1, 1), (2, 2), (2, 3), (1, 4)] {
            let a = random_band(40, width, seed);
            let mut ev: Vec<f64> = dense(&a).symmetric_eigenvalues().iter().cloned().collect();
            ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let ours = a.lowest_eigenvalues(10, 1e-14).unwrap();
            for (x, y) in ours.iter().zip(&ev) {
                assert!((x - y).abs() < 1e-11, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn inertia_counts_agree_with_dense() {
        let a = random_band(25, 2, 9);
        let ev: Vec<f64> = dense(&a).symmetric_eigenvalues().iter().cloned().collect();
        for sigma in [-3.0, -1.0, 0.0, 0.37, 2.5] {
            let expected = ev.iter().filter(|v| **v < sigma).count();
            assert_eq!(a.count_below(sigma), expected);
        }
    }

    #[test]
    fn laplacian_spectrum() {
        let n = 50;
        let mut a = SymBand::new(n, 1).unwrap();
        for i in 0..n {
            a.set(i, 0, 2.0);
            a.set(i, 1, -1.0);
        }
        let ev = a.lowest_eigenvalues(4, 1e-15).unwrap();
        for (j, v) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let a = random_band(5, 1, 0);
        assert!(a.lowest_eigenvalues(6, 1e-12).is_err());
        assert!(SymBand::new(5, 3).is_err());
        let mut b = random_band(5, 1, 0);
        b.set(2, 0, f64::NAN);
        assert!(b.lowest_eigenvalues(1, 1e-12).is_err());
    }
}
