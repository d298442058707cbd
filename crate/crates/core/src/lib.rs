//! Numerical toolkit for approximate quantum Markov chains.
//!
//! Dense complex linear algebra, entropy measures, pinching maps,
//! multivariate trace inequalities, rotated Petz recovery maps and a set of
//! exactly evaluated classical constructions. Every inequality is exposed as
//! a check returning a [`traceineq::CheckReport`].
//!
//! All logarithms are natural unless a function says otherwise.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod cli;
pub mod entropy;
pub mod examples;
pub mod generators;
pub mod linalg;
pub mod pinching;
pub mod quad;
pub mod recovery;
pub mod traceineq;

pub use linalg::{c64, CMat, QuantumState, Spectrum};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("matrix is not positive definite (min eigenvalue {0:e})")]
    NotPd(f64),
    #[error("function undefined on eigenvalue {0:e}")]
    Domain(f64),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("invalid subsystem shape: {0}")]
    Shape(String),
    #[error("theta must lie in [0,1), got {0}")]
    ThetaOutOfRange(f64),
    #[error("kappa must be positive, got {0}")]
    KappaNonpositive(f64),
    #[error("quadrature raw mass {mass} deviates from 1 by more than {tol:e}")]
    TailMassTooLarge { mass: f64, tol: f64 },
    #[error("non-finite integrand value at node {0}")]
    NonFinite(f64),
    #[error("Choi matrix is not PSD (min eigenvalue {0:e})")]
    ChoiNotPsd(f64),
    #[error("channel is not trace-preserving and completely positive: {0}")]
    NotTpcp(String),
    #[error("matrix is not column stochastic: {0}")]
    NotStochastic(String),
    #[error("support condition violated (mass outside support {0:e})")]
    SupportViolation(f64),
    #[error("supplied state is not invariant (defect {0:e})")]
    InvariantViolation(f64),
    #[error("reference state is not a Markov chain (CMI {0:e})")]
    NotMarkov(f64),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("dimension {0} exceeds the supported limit {1}")]
    DimTooLarge(usize, usize),
    #[error("input error: {0}")]
    Input(String),
}

impl Error {
    /// Stable machine-readable code used by the CLI on stderr.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotHermitian(_) => "NOT_HERMITIAN",
            Error::NotPsd(_) => "NOT_PSD",
            Error::NotPd(_) => "NOT_PD",
            Error::Domain(_) => "DOMAIN_ERROR",
            Error::DimMismatch(_) => "DIM_MISMATCH",
            Error::Shape(_) => "SHAPE_ERROR",
            Error::ThetaOutOfRange(_) => "THETA_OUT_OF_RANGE",
            Error::KappaNonpositive(_) => "KAPPA_NONPOSITIVE",
            Error::TailMassTooLarge { .. } => "TAIL_MASS_TOO_LARGE",
            Error::NonFinite(_) => "NON_FINITE_VALUE",
            Error::ChoiNotPsd(_) => "CHOI_NOT_PSD",
            Error::NotTpcp(_) => "NOT_TPCP",
            Error::NotStochastic(_) => "NOT_STOCHASTIC",
            Error::SupportViolation(_) => "SUPPORT_VIOLATION",
            Error::InvariantViolation(_) => "INVARIANT_VIOLATION",
            Error::NotMarkov(_) => "NOT_MARKOV",
            Error::Param(_) => "PARAM_ERROR",
            Error::DimTooLarge(..) => "DIM_TOO_LARGE",
            Error::Input(_) => "INPUT_ERROR",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
