//! Error type shared by all numerical modules.

use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by model construction and the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quadrature did not converge (partial estimate {partial}, error estimate {estimate})")]
    QuadratureNonConvergence { partial: Complex64, estimate: f64 },

    #[error("principal-value pole {pole} lies outside the truncation window [{lo}, {hi}]")]
    PoleOutsideWindow { pole: f64, lo: f64, hi: f64 },

    #[error("evaluation point {0} is not in the upper half-plane; use the second-sheet evaluator")]
    NotUpperHalfPlane(Complex64),

    #[error("evaluation point {0} is not in the lower half-plane")]
    NotLowerHalfPlane(Complex64),

    #[error("analytic continuation of the tabulated density is unreliable: {0}")]
    ContinuationUnreliable(String),

    #[error("no resonance: {0}")]
    NoResonance(String),

    #[error("root search found a zero in the upper half-plane at {0}; model violates the resonance assumption")]
    UpperHalfPlaneZero(Complex64),

    #[error("root search failed: {0}")]
    RootSearchFailed(String),

    #[error("factorization remainder is not unimodular (max deviation {deviation:.3e}); candidate extra zeros: {candidates:?}")]
    NonUnimodularRemainder {
        deviation: f64,
        candidates: Vec<Complex64>,
    },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("density has heavy zero sets; exclusion zones: {0:?}")]
    DensityZeroRegions(Vec<(f64, f64)>),

    #[error("free model: {0}")]
    FreeModel(String),
}

pub type Result<T> = std::result::Result<T, Error>;
