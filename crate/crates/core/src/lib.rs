//! Solvable spectra for the one-dimensional Schrödinger equation with a
//! position-dependent effective mass (PDEM).
//!
//! The kinetic operator is `-d/dx (1/M(x)) d/dx` (units with `hbar = 2 m0 = 1`),
//! so a mass profile `M(x)` changes both the spectrum and the admissibility
//! condition on bound states: besides square integrability, a bound state must
//! satisfy `|psi|^2 / sqrt(M) -> 0` at the ends of the domain.
//!
//! The crate builds three catalogs of closed-form solvable potentials on such
//! backgrounds, mapped out by a point canonical transformation
//! `psi = f(x) F(g(x))`:
//!
//! * a Jacobi-polynomial family on `M = sech^2(qx)` (exactly solvable),
//! * a generalized-Laguerre family on `M = e^{-qx}` (exactly solvable),
//! * a quasi-exactly solvable family on `M = e^{-qx}` whose `F` are
//!   degree-`k` polynomials of nonhypergeometric type with `k + 1`
//!   closed-form levels.
//!
//! On top of the catalogs sit first-order SUSY intertwiners
//! `eta = M^{-1/2} d/dx + B(x)` producing partner potentials (shape-invariant
//! for the exactly solvable families, rational in `e^{qx}` for the
//! quasi-exactly solvable ones) and an independent verification engine:
//! a flux-form finite-difference discretization, a Sturm-sequence bisection
//! eigensolver, analytic residual evaluation, and node counting.

// Validation guards use `!(x > y)` on purpose: unlike `x <= y` the negated
// form also rejects NaN parameters.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod families;
pub mod numerics;
pub mod orthopoly;
pub mod pct_core;
pub mod qes_solver;
pub mod susy;

pub use families::{Family, FamilyKind, FamilySpec, LevelFunction};
pub use pct_core::{AmbiguityParams, BoundaryProbe, MassProfile, PctData};
pub use qes_solver::QesSolution;

/// Crate-wide error type.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("x outside family domain: x = {x}")]
    OutsideDomain { x: f64 },
    #[error("change of variable degenerate: g'({x}) = 0")]
    DegenerateChangeOfVariable { x: f64 },
    #[error("polynomial parameter inadmissible: {0}")]
    PolynomialParameter(String),
    #[error("inadmissible family parameter: {0}")]
    InadmissibleFamily(String),
    #[error("level outside QES window: n = {n}, known levels 0..={k}")]
    LevelOutsideQesWindow { n: usize, k: usize },
    #[error("polynomial equation degenerates for a = 0")]
    QesDegenerate,
    #[error("QES spectrum not simple/real for these parameters: {0}")]
    QesSpectrumNotReal(String),
    #[error("mass not positive on grid at x = {x}")]
    MassNotPositive { x: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("eigenvalue bisection did not converge (NaN input?)")]
    BisectionFailed,
    #[error("no closed form for QES partner with k = {k}; use the generic construction")]
    NoClosedForm { k: u32 },
    #[error("degenerate function: all samples are zero")]
    DegenerateFunction,
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
