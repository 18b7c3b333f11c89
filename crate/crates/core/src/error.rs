// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode index {mode} out of range for a space with {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("invalid mode specification for mode {mode}: {reason}")]
    InvalidMode { mode: usize, reason: String },

    #[error("occupation tuple has {got} entries, space has {expected} modes")]
    OccupationLength { got: usize, expected: usize },

    #[error("occupation {occupation} of mode {mode} exceeds cutoff {cutoff}")]
    OccupationExceedsCutoff {
        mode: usize,
        occupation: usize,
        cutoff: usize,
    },

    #[error("mode {mode} is fermionic; operation requires a boson")]
    FermionicMode { mode: usize },

    #[error("truncated tail weight {weight:e} exceeds tolerance {tolerance:e}")]
    TailWeightExceeded { weight: f64, tolerance: f64 },

    #[error("operands live on different Fock spaces")]
    SpaceMismatch,

    #[error("matrix is {rows}x{cols}, expected {expected}x{expected}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("invariant `{name}` violated: {detail}")]
    Invariant { name: &'static str, detail: String },

    #[error("time must be finite and nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("time grid must be sorted and nonnegative")]
    UnsortedTimes,

    #[error("commutation certificate failed for decay mode {mode}: defect {defect:e}")]
    CommutationCertificate { mode: usize, defect: f64 },

    #[error("state has support at total occupation {support}, beyond what the Kraus family covers ({k_max})")]
    SupportExceedsKraus { support: usize, k_max: usize },

    #[error("state has weight outside the exactly represented subspace")]
    SupportOutsideExactSubspace,

    #[error("observable is not Hermitian (defect {0:e})")]
    NonHermitian(f64),

    #[error("expectation value has imaginary residue {0:e}")]
    ImaginaryExpectation(f64),

    #[error("integration step must be positive and finite, got {0}")]
    NonPositiveStep(f64),

    #[error("time {time} is not a multiple of the integration step {step}")]
    TimeNotOnGrid { time: f64, step: f64 },

    #[error("series tail bound {bound:e} exceeds {tolerance:e} on the reporting subspace")]
    SeriesTailExceeded { bound: f64, tolerance: f64 },

    #[error("closed form unavailable: {0}")]
    ClosedFormUnavailable(String),

    #[error("operation requires exactly two flavour modes, space has {0}")]
    NotTwoFlavours(usize),

    #[error("mixed modes must share statistics and cutoff")]
    IncompatibleMixing,
}

pub type Result<T> = std::result::Result<T, Error>;
