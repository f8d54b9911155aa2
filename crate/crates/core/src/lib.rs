//! Point counting on Jacobians of ordinary hyperelliptic curves (genus 1 and 2)
//! over finite fields of small odd characteristic.
//!
//! The pipeline canonically lifts a theta null point of level 2p to the p-adics,
//! takes a norm of a theta quotient to obtain the product of the unit Frobenius
//! eigenvalues, and reconstructs the Frobenius characteristic polynomial by
//! lattice reduction. Independent verification is provided by naive enumeration
//! and Cantor arithmetic on the Jacobian.

pub mod count;
pub mod ff;
pub mod jacobian;
pub mod lattice;
pub mod lift;
pub mod padic;
pub mod pipeline;
pub mod solver;
pub mod theta;

use std::fmt;

/// Errors surfaced by the counting pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed input: bad modulus, repeated branch points, schema violations.
    InvalidInput(String),
    /// A standing hypothesis of the method is violated (non-ordinary Jacobian,
    /// non-square Thomae product, no eliminant root of multiplicity p^g, ...).
    HypothesisViolation(String),
    /// A result could not be disambiguated (sign resolution inconclusive).
    Ambiguous(String),
    /// A computation exceeded its step or enumeration budget.
    BudgetExceeded(String),
    /// Arithmetic error (division by zero, inversion of a non-unit).
    Arithmetic(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(m) => write!(f, "invalid input: {m}"),
            Error::HypothesisViolation(m) => write!(f, "hypothesis violation: {m}"),
            Error::Ambiguous(m) => write!(f, "ambiguous result: {m}"),
            Error::BudgetExceeded(m) => write!(f, "budget exceeded: {m}"),
            Error::Arithmetic(m) => write!(f, "arithmetic error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
