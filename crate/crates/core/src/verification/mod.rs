//! Finite-difference spectra, isospectrality and operator-identity residuals,
//! collected into a serializable report.

mod banded;
mod report;
mod suite;

pub use banded::SymBand;
pub use report::{
    profile_table, read_report, write_eigen_csv, write_profile_csv, CheckEntry, EigenRow,
    ProfileRow, ReportSummary, VerificationReport,
};
pub use suite::{
    admissible_band, run_suite, suite_profile, system_descriptor, SuiteOptions, CHECK_NAMES,
};

use crate::error::{Error, Result};
use crate::function_algebra::SmoothFn;
use crate::master_system::{Family, MasterSystem};
use crate::operator_calculus::{DiffOp1D, DiffOp2D};
use serde::{Deserialize, Serialize};
use serde_json::json;

pub const DEFAULT_GRID_N: usize = 2000;
pub const MIN_GRID_N: usize = 64;
const EIGEN_TOL: f64 = 1e-13;

/// Dirichlet box `[r_min, r_max]` with `n` interior points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
    /// 2 for the three-point stencil, 4 for the five-point one.
    pub order: u8,
}

impl GridSpec {
    pub fn new(r_min: f64, r_max: f64, n: usize) -> Result<GridSpec> {
        let g = GridSpec {
            r_min,
            r_max,
            n,
            order: 2,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_order(mut self, order: u8) -> Result<GridSpec> {
        self.order = order;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_GRID_N {
            return Err(Error::Grid(format!(
                "n = {} is below the minimum {MIN_GRID_N}",
                self.n
            )));
        }
        if !(self.r_min.is_finite() && self.r_max.is_finite() && self.r_min < self.r_max) {
            return Err(Error::Grid(format!(
                "need r_min < r_max, got [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        if self.order != 2 && self.order != 4 {
            return Err(Error::Grid(format!(
                "stencil order {} (use 2 or 4)",
                self.order
            )));
        }
        Ok(())
    }

    /// Default box: `[c - 12 s, c + 12 s]` around the potential minimum
    /// `c = 2 alpha / beta` for the full line, `[1e-3, 14 s]` for the half
    /// line, with `s = 1/sqrt(beta)`.
    pub fn for_system(sys: &MasterSystem, n: usize) -> Result<GridSpec> {
        if sys.beta <= 0.0 {
            return Err(Error::Grid("default box needs beta > 0".into()));
        }
        let s = 1.0 / sys.beta.sqrt();
        match sys.family {
            Family::OscillatorLike => {
                let c = 2.0 * sys.alpha / sys.beta;
                GridSpec::new(c - 12.0 * s, c + 12.0 * s, n)
            }
            Family::RadialOscillatorLike => GridSpec::new(1e-3, 14.0 * s, n),
            Family::Generic => Err(Error::NotCatalog("default grid")),
        }
    }

    pub fn step(&self) -> f64 {
        (self.r_max - self.r_min) / (self.n + 1) as f64
    }

    /// Interior nodes.
    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        (1..=self.n).map(|i| self.r_min + h * i as f64).collect()
    }

    /// Same box with the step halved.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            n: 2 * self.n + 1,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub grid: GridSpec,
    pub order: u8,
}

/// Lowest `k` eigenvalues of `-d^2/dr^2 + v` with Dirichlet ends.
pub fn discretize_and_eigen(
    potential: &SmoothFn,
    grid: &GridSpec,
    k: usize,
) -> Result<SpectrumResult> {
    grid.validate()?;
    let nodes = grid.nodes();
    let v = potential.eval_many(&nodes)?;
    if let Some((r, _)) = nodes.iter().zip(&v).find(|(_, x)| !x.is_finite()) {
        return Err(Error::NonFinite { r: *r });
    }
    let h2 = grid.step().powi(2);
    let mut a = SymBand::new(grid.n, if grid.order == 2 { 1 } else { 2 })?;
    for (i, vi) in v.iter().enumerate() {
        if grid.order == 2 {
            a.set(i, 0, 2.0 / h2 + vi);
            a.set(i, 1, -1.0 / h2);
        } else {
            a.set(i, 0, 2.5 / h2 + vi);
            a.set(i, 1, -4.0 / (3.0 * h2));
            a.set(i, 2, 1.0 / (12.0 * h2));
        }
    }
    let eigenvalues = a.lowest_eigenvalues(k, EIGEN_TOL)?;
    Ok(SpectrumResult {
        eigenvalues,
        grid: *grid,
        order: grid.order,
    })
}

/// Observed convergence order of the ground-state eigenvalue from three
/// successively halved grids (no exact value needed).
pub fn convergence_order(potential: &SmoothFn, grid: &GridSpec) -> Result<f64> {
    let g1 = *grid;
    let g2 = g1.refined();
    let g3 = g2.refined();
    let e: Vec<f64> = [g1, g2, g3]
        .iter()
        .map(|g| Ok(discretize_and_eigen(potential, g, 1)?.eigenvalues[0]))
        .collect::<Result<_>>()?;
    Ok(((e[0] - e[1]) / (e[1] - e[2])).abs().log2())
}

/// Consecutive gaps of `v_m` compared with the ladder spacing.
pub fn spectrum_check(
    sys: &MasterSystem,
    grid: &GridSpec,
    k: usize,
    tolerance: f64,
) -> Result<CheckEntry> {
    let spacing = sys.ladder_spacing()?;
    let v = sys.potential_vm()?;
    let spec = discretize_and_eigen(&v, grid, k)?;
    let gaps: Vec<f64> = spec.eigenvalues.windows(2).map(|w| w[1] - w[0]).collect();
    let residual = gaps.iter().map(|g| (g - spacing).abs()).fold(0.0, f64::max);
    let m = sys.m as i64;
    let formula: Vec<f64> = (0..k as i64)
        .map(|j| sys.energy(m + j, m))
        .collect::<Result<_>>()?;
    Ok(CheckEntry::new(
        "spectrum_gaps",
        residual,
        tolerance,
        json!({
            "spacing": spacing,
            "eigenvalues": spec.eigenvalues,
            "gaps": gaps,
            "energy_formula": formula,
            "grid": grid,
        }),
    ))
}

/// Outcome of matching the levels of `H1` against those of `H'`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Isospectrality {
    pub h1: Vec<f64>,
    pub hprime: Vec<f64>,
    /// For each `H1` level, the index of the `H'` level assigned to it.
    pub assignment: Vec<Option<usize>>,
    pub matched: Vec<bool>,
    pub residual: f64,
    /// Per-level matching tolerance.
    pub match_tolerance: Vec<f64>,
    pub extra_bound_state: Option<f64>,
    pub unmatched_hprime: Vec<f64>,
}

impl Isospectrality {
    pub fn rows(&self) -> Vec<EigenRow> {
        self.h1
            .iter()
            .enumerate()
            .map(|(i, e)| EigenRow {
                index: i,
                eigenvalue_h1: *e,
                eigenvalue_hprime: self.assignment[i].map_or(f64::NAN, |j| self.hprime[j]),
                matched: self.matched[i],
            })
            .collect()
    }
}

/// Greedy nearest matching of the lowest `k` levels of `v1` against the
/// lowest `k + 1` levels of `vprime`. Each level's matching tolerance is ten
/// times a Richardson estimate of its discretization error.
pub fn isospectrality_from_potentials(
    v1: &SmoothFn,
    vprime: &SmoothFn,
    grid: &GridSpec,
    k: usize,
) -> Result<Isospectrality> {
    let h1 = discretize_and_eigen(v1, grid, k)?.eigenvalues;
    let hprime = discretize_and_eigen(vprime, grid, k + 1)?.eigenvalues;
    let fine = discretize_and_eigen(v1, &grid.refined(), k)?.eigenvalues;
    let match_tolerance: Vec<f64> = h1
        .iter()
        .zip(&fine)
        .map(|(c, f)| 10.0 * ((c - f).abs() * 4.0 / 3.0).max(1e-9))
        .collect();
    let mut taken = vec![false; hprime.len()];
    let mut assignment = Vec::with_capacity(k);
    let mut matched = Vec::with_capacity(k);
    let mut residual = 0.0f64;
    for (i, e) in h1.iter().enumerate() {
        let best = (0..hprime.len())
            .filter(|j| !taken[*j])
            .min_by(|a, b| (hprime[*a] - e).abs().total_cmp(&(hprime[*b] - e).abs()));
        match best {
            Some(j) => {
                let d = (hprime[j] - e).abs();
                taken[j] = true;
                assignment.push(Some(j));
                matched.push(d <= match_tolerance[i]);
                residual = residual.max(d);
            }
            None => {
                assignment.push(None);
                matched.push(false);
                residual = f64::INFINITY;
            }
        }
    }
    let unmatched_hprime: Vec<f64> = (0..hprime.len())
        .filter(|j| !taken[*j])
        .map(|j| hprime[j])
        .collect();
    let extra_bound_state = unmatched_hprime
        .iter()
        .copied()
        .find(|e| *e < h1[0] - match_tolerance[0]);
    Ok(Isospectrality {
        h1,
        hprime,
        assignment,
        matched,
        residual,
        match_tolerance,
        extra_bound_state,
        unmatched_hprime,
    })
}

pub fn isospectrality_check(
    profile: &crate::deformation::DeformationProfile,
    grid: &GridSpec,
    k: usize,
    tolerance: f64,
) -> Result<(CheckEntry, Isospectrality)> {
    let w = &profile.w;
    let v1 = w.square().add(&w.derivative());
    let iso = isospectrality_from_potentials(&v1, &profile.deformed_potential(), grid, k)?;
    let entry = CheckEntry::new(
        "isospectrality",
        iso.residual,
        tolerance,
        json!({
            "h1": iso.h1,
            "hprime": iso.hprime,
            "matched": iso.matched,
            "match_tolerance": iso.match_tolerance,
            "extra_bound_state": iso.extra_bound_state,
            "unmatched_hprime": iso.unmatched_hprime,
            "grid": grid,
        }),
    );
    Ok((entry, iso))
}

/// `max |c| / scale` over all coefficients at the probes; 0 for the zero
/// operator.
pub fn pointwise_residual_1d(op: &DiffOp1D, probes: &[f64], scale: f64) -> Result<f64> {
    if op.is_zero() {
        return Ok(0.0);
    }
    Ok(op.max_abs_on(probes)? / scale)
}

pub fn pointwise_residual_2d(op: &DiffOp2D, probes: &[(f64, f64)], scale: f64) -> Result<f64> {
    if op.is_zero() {
        return Ok(0.0);
    }
    Ok(op.max_abs_on(probes)? / scale)
}

/// `[p, q] - expected`, normalized by the product of the largest
/// coefficients of `p` and `q`.
pub fn commutator_residual_1d(
    p: &DiffOp1D,
    q: &DiffOp1D,
    expected: &DiffOp1D,
    probes: &[f64],
) -> Result<f64> {
    let scale = p.max_abs_on(probes)? * q.max_abs_on(probes)?;
    let diff = p.commutator(q)?.sub(expected);
    pointwise_residual_1d(&diff, probes, scale)
}

pub fn commutator_residual_2d(
    p: &DiffOp2D,
    q: &DiffOp2D,
    expected: &DiffOp2D,
    probes: &[(f64, f64)],
) -> Result<f64> {
    let scale = p.max_abs_on(probes)? * q.max_abs_on(probes)?;
    let diff = p.commutator(q)?.sub(expected);
    pointwise_residual_2d(&diff, probes, scale)
}

#[cfg(test)]
mod tests;
