use super::{make_first_order, DiffOp1D, Pm};
use crate::deformation::DeformationProfile;
use crate::error::Result;
use crate::function_algebra::SmoothFn;

/// `(A+, A-) = (-d/dr + W, d/dr + W)`.
pub fn first_order_pair(w: &SmoothFn) -> (DiffOp1D, DiffOp1D) {
    (
        make_first_order(w, Pm::Plus),
        make_first_order(w, Pm::Minus),
    )
}

/// `H1 = A- A+` and `H2 = A+ A-`.
pub fn partner_hamiltonians(w: &SmoothFn) -> Result<(DiffOp1D, DiffOp1D)> {
    let (ap, am) = first_order_pair(w);
    Ok((am.compose(&ap)?, ap.compose(&am)?))
}

/// `H' = B+ B-` with `B+- = -+ d/dr + omega`.
pub fn deformed_hamiltonian(profile: &DeformationProfile) -> Result<DiffOp1D> {
    let (bp, bm) = first_order_pair(&profile.omega);
    bp.compose(&bm)
}

/// `S+- = B+ A+- B-`.
pub fn make_s_ladder(w: &SmoothFn, profile: &DeformationProfile, sign: Pm) -> Result<DiffOp1D> {
    let (bp, bm) = first_order_pair(&profile.omega);
    let a = make_first_order(w, sign);
    bp.compose(&a)?.compose(&bm)
}

/// `(S+, S-)`.
pub fn s_ladders(w: &SmoothFn, profile: &DeformationProfile) -> Result<(DiffOp1D, DiffOp1D)> {
    Ok((
        make_s_ladder(w, profile, Pm::Plus)?,
        make_s_ladder(w, profile, Pm::Minus)?,
    ))
}

/// Third-order ladders of the undeformed Hamiltonian and their fifth-order
/// intertwined versions.
#[derive(Clone, Debug)]
pub struct MrLadders {
    /// `A+^2 A-`
    pub m_plus: DiffOp1D,
    /// `A+ A-^2`
    pub m_minus: DiffOp1D,
    /// `B+ M+ B-`
    pub r_plus: DiffOp1D,
    /// `B+ M- B-`
    pub r_minus: DiffOp1D,
}

pub fn m_r_ladders(w: &SmoothFn, profile: &DeformationProfile) -> Result<MrLadders> {
    let (ap, am) = first_order_pair(w);
    let (bp, bm) = first_order_pair(&profile.omega);
    let m_plus = ap.compose(&ap)?.compose(&am)?;
    let m_minus = ap.compose(&am)?.compose(&am)?;
    let r_plus = bp.compose(&m_plus)?.compose(&bm)?;
    let r_minus = bp.compose(&m_minus)?.compose(&bm)?;
    Ok(MrLadders {
        m_plus,
        m_minus,
        r_plus,
        r_minus,
    })
}
