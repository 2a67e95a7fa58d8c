use std::fmt;

use thiserror::Error;

use crate::gilbert::GilbertRun;

/// Density-matrix invariant that a validation step found violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    Shape,
    LocalDims,
    Finiteness,
    Hermiticity,
    Trace,
    Positivity,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Invariant::Shape => "shape",
            Invariant::LocalDims => "local_dims",
            Invariant::Finiteness => "finiteness",
            Invariant::Hermiticity => "hermiticity",
            Invariant::Trace => "trace",
            Invariant::Positivity => "positivity",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid state: {invariant} violated (deviation {deviation:.3e})")]
    InvalidState {
        invariant: Invariant,
        deviation: f64,
    },

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error(
        "hermitian eigensolver did not converge (dim {dim}, frobenius norm {frobenius:.3e}, \
         max |M - M^H| {asymmetry:.3e}, finite: {finite})"
    )]
    EigenNoConvergence {
        dim: usize,
        frobenius: f64,
        asymmetry: f64,
        finite: bool,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error(
        "certificate re-evaluation mismatch: stored {stored:.15e}, recomputed {recomputed:.15e}"
    )]
    CertificateMismatch { stored: f64, recomputed: f64 },

    #[error("gilbert run aborted at iteration {iteration}: {cause}")]
    Aborted {
        iteration: usize,
        cause: Box<Error>,
        partial: Box<GilbertRun>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
