//! Two-dimensional Hamiltonian `H_s = H2(r) + H'(r')` with the integrals
//! `K = H_r - H_r'` and
//!
//! ```text
//! A1 = X+^m(r) Y-^n(r') - X-^m(r) Y+^n(r')
//! A2 = X+^m(r) Y-^n(r') + X-^m(r) Y+^n(r')
//! ```
//!
//! built from ladder pairs on the two axes whose spacings satisfy
//! `m lx - n ly = 0`.

use crate::deformation::{deform_system, DeformationProfile};
use crate::error::{Error, Result};
use crate::master_system::{Family, MasterSystem};
use crate::operator_calculus::{
    deformed_hamiltonian, first_order_pair, m_r_ladders, partner_hamiltonians, s_ladders, Axis,
    DiffOp1D, DiffOp2D, OperatorSummary,
};
use serde::Serialize;
use std::collections::BTreeMap;

const RESONANCE_TOL: f64 = 1e-12;
const MAX_DENOMINATOR: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resonance {
    pub m: u32,
    pub n: u32,
    pub lx: f64,
    pub ly: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntegralOrders {
    pub k: usize,
    pub a1: usize,
    pub a2: usize,
}

/// Whether the naive top order of `A1` (sum of the ladder orders) survives
/// after cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cancellation {
    pub naive_order: usize,
    pub measured_order: usize,
    /// Largest top-order coefficient relative to the largest coefficient.
    pub top_relative_weight: f64,
    pub top_cancels: bool,
}

/// A raising/lowering pair acting on one axis.
#[derive(Debug, Clone)]
pub struct AxisLadder {
    pub plus: DiffOp1D,
    pub minus: DiffOp1D,
    pub axis: Axis,
    pub spacing: f64,
}

#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub system: MasterSystem,
    pub profile: DeformationProfile,
    pub h_r: DiffOp1D,
    pub h_rp: DiffOp1D,
    pub hs: DiffOp2D,
    pub k: DiffOp2D,
    pub a1: DiffOp2D,
    pub a2: DiffOp2D,
    pub ladder_x: AxisLadder,
    pub ladder_y: AxisLadder,
    pub resonance: Resonance,
    pub orders: IntegralOrders,
    pub a1_cancellation: Cancellation,
}

/// Serializable digest of an assembled system.
#[derive(Debug, Clone, Serialize)]
pub struct AssemblySummary {
    pub system: String,
    pub c: f64,
    pub r0: f64,
    pub resonance: Resonance,
    pub orders: IntegralOrders,
    pub a1_cancellation: Cancellation,
    pub operators: BTreeMap<String, OperatorSummary>,
}

/// `|m lx - n ly| <= 1e-12 max(|lx|, |ly|)`.
pub fn resonance_check(m: u32, n: u32, lx: f64, ly: f64) -> bool {
    (m as f64 * lx - n as f64 * ly).abs() <= RESONANCE_TOL * lx.abs().max(ly.abs())
}

/// Smallest positive `(m, n)` with `m lx = n ly`, searching `m <= 12`.
pub fn minimal_resonance(lx: f64, ly: f64) -> Option<Resonance> {
    if !(lx.is_finite() && ly.is_finite()) || lx == 0.0 || ly == 0.0 || lx.signum() != ly.signum() {
        return None;
    }
    (1..=MAX_DENOMINATOR).find_map(|m| {
        let n = (m as f64 * lx / ly).round();
        (n >= 1.0 && resonance_check(m, n as u32, lx, ly)).then_some(Resonance {
            m,
            n: n as u32,
            lx,
            ly,
        })
    })
}

/// `H2` of `sys_x` on `r` plus the deformed Hamiltonian of `profile_y` on
/// `r'`.
pub fn build_hs(sys_x: &MasterSystem, profile_y: &DeformationProfile) -> Result<DiffOp2D> {
    let w = sys_x.superpotential()?.w;
    let (_, h2) = partner_hamiltonians(&w)?;
    let hp = deformed_hamiltonian(profile_y)?;
    Ok(DiffOp2D::lift(&h2, Axis::R).add(&DiffOp2D::lift(&hp, Axis::RPrime)))
}

/// `K = H_r - H_r'`.
pub fn build_k(h_r: &DiffOp1D, h_rp: &DiffOp1D) -> DiffOp2D {
    DiffOp2D::lift(h_r, Axis::R).sub(&DiffOp2D::lift(h_rp, Axis::RPrime))
}

/// `(A1, A2)` from ladders on distinct axes.
pub fn build_integrals(
    x: &AxisLadder,
    y: &AxisLadder,
    m: u32,
    n: u32,
) -> Result<(DiffOp2D, DiffOp2D)> {
    if x.axis == y.axis {
        return Err(Error::SameAxis);
    }
    if m == 0 || n == 0 || !resonance_check(m, n, x.spacing, y.spacing) {
        return Err(Error::Resonance {
            m,
            n,
            lx: x.spacing,
            ly: y.spacing,
        });
    }
    // put the r-axis ladder first
    let (x, y, m, n) = if x.axis == Axis::R {
        (x, y, m, n)
    } else {
        (y, x, n, m)
    };
    let xp = x.plus.pow(m as usize)?;
    let xm = x.minus.pow(m as usize)?;
    let yp = y.plus.pow(n as usize)?;
    let ym = y.minus.pow(n as usize)?;
    let first = DiffOp2D::tensor(&xp, &ym)?;
    let second = DiffOp2D::tensor(&xm, &yp)?;
    Ok((first.sub(&second), first.add(&second)))
}

/// Ladders for the catalog families: first-order `A+-` with the deformed
/// `S+-` for the oscillator family, third-order `M+-` with `R+-` for the
/// radial family.
pub fn family_ladders(
    sys: &MasterSystem,
    profile: &DeformationProfile,
) -> Result<(AxisLadder, AxisLadder)> {
    let w = sys.superpotential()?.w;
    let spacing = sys.ladder_spacing()?;
    let ((xp, xm), (yp, ym)) = match sys.family {
        Family::OscillatorLike => (first_order_pair(&w), s_ladders(&w, profile)?),
        Family::RadialOscillatorLike => {
            let l = m_r_ladders(&w, profile)?;
            ((l.m_plus, l.m_minus), (l.r_plus, l.r_minus))
        }
        Family::Generic => return Err(Error::NotCatalog("ladder assembly")),
    };
    Ok((
        AxisLadder {
            plus: xp,
            minus: xm,
            axis: Axis::R,
            spacing,
        },
        AxisLadder {
            plus: yp,
            minus: ym,
            axis: Axis::RPrime,
            spacing,
        },
    ))
}

fn cancellation(op: &DiffOp2D, naive_order: usize) -> Result<Cancellation> {
    let measured_order = op.leading_order()?.total;
    let top_relative_weight = op.relative_weight_of_order(naive_order)?;
    Ok(Cancellation {
        naive_order,
        measured_order,
        top_relative_weight,
        top_cancels: measured_order < naive_order,
    })
}

/// Builds `H_s`, `K`, `A1`, `A2` for a catalog system deformed with `C`.
pub fn assemble(sys: &MasterSystem, c: f64) -> Result<AssembledSystem> {
    let profile = deform_system(sys, c)?;
    assemble_with(sys, profile)
}

pub fn assemble_with(sys: &MasterSystem, profile: DeformationProfile) -> Result<AssembledSystem> {
    let w = sys.superpotential()?.w;
    let (_, h_r) = partner_hamiltonians(&w)?;
    let h_rp = deformed_hamiltonian(&profile)?;
    let hs = build_hs(sys, &profile)?;
    let k = build_k(&h_r, &h_rp);
    let (ladder_x, ladder_y) = family_ladders(sys, &profile)?;
    let resonance =
        minimal_resonance(ladder_x.spacing, ladder_y.spacing).ok_or(Error::Resonance {
            m: 0,
            n: 0,
            lx: ladder_x.spacing,
            ly: ladder_y.spacing,
        })?;
    let (a1, a2) = build_integrals(&ladder_x, &ladder_y, resonance.m, resonance.n)?;
    let order = |op: &DiffOp2D| -> Result<usize> { Ok(op.leading_order()?.total) };
    let orders = IntegralOrders {
        k: order(&k)?,
        a1: order(&a1)?,
        a2: order(&a2)?,
    };
    let naive = resonance.m as usize
        * ladder_x
            .plus
            .formal_order()
            .max(ladder_x.minus.formal_order())
        + resonance.n as usize
            * ladder_y
                .plus
                .formal_order()
                .max(ladder_y.minus.formal_order());
    let a1_cancellation = cancellation(&a1, naive)?;
    Ok(AssembledSystem {
        system: sys.clone(),
        profile,
        h_r,
        h_rp,
        hs,
        k,
        a1,
        a2,
        ladder_x,
        ladder_y,
        resonance,
        orders,
        a1_cancellation,
    })
}

/// Least-squares `c` in `lhs = c rhs` over all term coefficients at the
/// probes, with the largest remaining coefficient of `lhs - c rhs`.
pub fn fit_proportionality(
    lhs: &DiffOp2D,
    rhs: &DiffOp2D,
    probes: &[(f64, f64)],
) -> Result<(f64, f64)> {
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for &(r, rp) in probes {
        let mut at: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
        for (k, v) in lhs.coefficient_values(r, rp)? {
            at.entry(k).or_default().0 = v;
        }
        for (k, v) in rhs.coefficient_values(r, rp)? {
            at.entry(k).or_default().1 = v;
        }
        rows.extend(at.into_values());
    }
    let den: f64 = rows.iter().map(|(_, y)| y * y).sum();
    let c = if den > 0.0 {
        rows.iter().map(|(x, y)| x * y).sum::<f64>() / den
    } else {
        0.0
    };
    let residual = rows
        .iter()
        .map(|(x, y)| (x - c * y).abs())
        .fold(0.0, f64::max);
    Ok((c, residual))
}

impl AssembledSystem {
    /// Probe points shared by the checks on this system.
    pub fn probes(&self, n: usize) -> Vec<(f64, f64)> {
        self.hs.probes(n)
    }

    pub fn summary(&self) -> Result<AssemblySummary> {
        let mut operators = BTreeMap::new();
        for (name, op) in [
            ("Hs", &self.hs),
            ("K", &self.k),
            ("A1", &self.a1),
            ("A2", &self.a2),
        ] {
            operators.insert(name.to_string(), op.summary()?);
        }
        Ok(AssemblySummary {
            system: self.system.descriptor(),
            c: self.profile.c,
            r0: self.profile.r0,
            resonance: self.resonance,
            orders: self.orders,
            a1_cancellation: self.a1_cancellation,
            operators,
        })
    }
}
