//! Exact computation of dimensions and Hecke-operator traces for spaces of
//! holomorphic newforms of level N = S^2 T^3 with prescribed supercuspidal
//! local representation types.
//!
//! The trace of T_n on such a space is assembled from an identity term and a
//! short list of elliptic conjugacy classes, each contributing a global
//! measure factor times a product of local orbital integrals. All values are
//! carried exactly in cyclotomic fields; floating point appears only as a
//! shadow for sanity checks.
//!
//! Module layout:
//! - [`arith`]: integer and imaginary-quadratic arithmetic (factorization,
//!   class numbers, p-adic squareness)
//! - [`cyclotomic`]: the exact value type `CycNumber` in Q(zeta_L), plus the
//!   lightweight `RootOfUnity` fraction type
//! - [`residue`]: F_p and F_{p^2} contexts, characters, and the nebentypus
//! - [`local_reps`]: supercuspidal parameter records and their enumeration
//! - [`orbital`]: local orbital integral evaluators and the measure factor
//! - [`engine`]: relevant-class enumeration and global trace assembly
//! - [`closed_forms`]: specialized dimension/bias formulas used as oracles
//! - [`lmfdb`]: optional cross-validation against LMFDB newform data
//! - [`acceptance`]: the end-to-end validation suite behind `validate`

pub mod acceptance;
pub mod arith;
pub mod closed_forms;
pub mod cyclotomic;
pub mod engine;
pub mod lmfdb;
pub mod local_reps;
pub mod orbital;
pub mod residue;

use std::fmt;

/// Errors surfaced by the library. Internal consistency failures (e.g. a
/// non-integral dimension) are kept distinct from ordinary input errors so
/// the CLI can exit with a dedicated code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A discriminant that is not negative and 0 or 1 mod 4.
    BadDiscriminant(i64),
    /// The ambient cyclotomic conductor would exceed the supported cap.
    ConductorCap { needed: u64, cap: u64 },
    /// Division by zero in a cyclotomic field.
    DivisionByZero,
    /// sqrt_squarefree called on a non-squarefree argument.
    NotSquarefree(u64),
    /// A class that is hyperbolic at p reached an evaluator that requires
    /// ellipticity; the caller should have filtered it.
    HyperbolicAtP { p: u64 },
    /// Input violates a precondition (message describes which).
    Invalid(String),
    /// Tuple validation failed; the violations are listed.
    Validation(Vec<crate::local_reps::Violation>),
    /// A root number is not available (depth zero with nontrivial central
    /// character).
    RootNumberUnavailable { p: u64 },
    /// A trace that must rationalize to an integer did not. This is an
    /// internal consistency failure, never a user error.
    NonIntegralDimension(String),
    /// A dimension came out negative: internal consistency failure.
    NegativeDimension(String),
    /// LMFDB access failed (network, cache, or schema trouble).
    Lmfdb(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::BadDiscriminant(d) => {
                write!(f, "{d} is not a negative discriminant (0 or 1 mod 4)")
            }
            Error::ConductorCap { needed, cap } => write!(
                f,
                "cyclotomic conductor {needed} exceeds the supported cap {cap}"
            ),
            Error::DivisionByZero => write!(f, "division by zero in a cyclotomic field"),
            Error::NotSquarefree(m) => write!(f, "{m} is not squarefree"),
            Error::HyperbolicAtP { p } => {
                write!(f, "class is hyperbolic at p = {p}; evaluator requires ellipticity")
            }
            Error::Invalid(msg) => write!(f, "{msg}"),
            Error::Validation(v) => {
                write!(f, "tuple validation failed:")?;
                for violation in v {
                    write!(f, " [{violation}]")?;
                }
                Ok(())
            }
            Error::RootNumberUnavailable { p } => write!(
                f,
                "root number unavailable at p = {p} (depth zero with nontrivial central character)"
            ),
            Error::NonIntegralDimension(msg) => {
                write!(f, "internal consistency failure: non-integral dimension ({msg})")
            }
            Error::NegativeDimension(msg) => {
                write!(f, "internal consistency failure: negative dimension ({msg})")
            }
            Error::Lmfdb(msg) => write!(f, "lmfdb: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
