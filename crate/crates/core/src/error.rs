use crate::interval::Interval;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("r = {r} lies outside the domain {domain}")]
    Domain { r: f64, domain: Interval },

    #[error("non-finite value encountered at r = {r}")]
    NonFinite { r: f64 },

    #[error("quadrature on [{a}, {b}] did not reach tolerance {tol:e} (estimate {estimate:e})")]
    Quadrature {
        a: f64,
        b: f64,
        tol: f64,
        estimate: f64,
    },

    #[error("reciprocal of a function that changes sign or vanishes near r = {r}")]
    SignChange { r: f64 },

    #[error("unknown catalog family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("master function is negative at x = {x}")]
    NegativeMasterFunction { x: f64 },

    #[error("energy bracket is not constant (spread {spread:e}); the closed spectrum formula does not apply")]
    NonConstantBracket { spread: f64 },

    #[error("{0} is only defined for catalog families")]
    NotCatalog(&'static str),

    #[error(
        "C = {c} is inadmissible: the denominator vanishes for C in [{excluded_lo}, {excluded_hi}]"
    )]
    InadmissibleConstant {
        c: f64,
        excluded_lo: f64,
        excluded_hi: f64,
    },

    #[error("tail bound failed on the {side} side: {reason}")]
    TailBound { side: &'static str, reason: String },

    #[error("operator order {0} exceeds the cap of 12")]
    OrderCap(usize),

    #[error("test function provides derivatives up to order {available}, {requested} requested")]
    DerivativeOrder { requested: usize, available: usize },

    #[error("resonance condition m*lx - n*ly = 0 violated for m={m}, n={n}, lx={lx}, ly={ly}")]
    Resonance { m: u32, n: u32, lx: f64, ly: f64 },

    #[error("ladder pairs must act on different axes")]
    SameAxis,

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("report: {0}")]
    Report(String),
}
