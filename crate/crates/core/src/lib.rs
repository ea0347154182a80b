//! # cvmem
//!
//! Continuous-variable simulation of a two-cell atomic quantum memory for
//! displaced two-mode squeezed light.
//!
//! Everything is phrased in the Gaussian formalism: a state is a mean vector
//! and covariance matrix over quadratures `(x_1, p_1, ..., x_N, p_N)` with the
//! vacuum normalised to `Var(x) = Var(p) = 1/2`. On top of the state algebra
//! the crate provides
//!
//! - the atom–light swap interaction and homodyne-feedback storage map,
//!   including the loss and added-noise model of the real device
//!   ([`memory`]),
//! - closed-form Gaussian overlaps and alphabet-averaged fidelities
//!   ([`fidelity`]),
//! - EPR/Duan entanglement diagnostics and an entanglement-of-formation
//!   lower bound ([`epr`]),
//! - classical measure-and-prepare benchmark estimators: an optimized
//!   Gaussian strategy and a truncated-Fock seesaw ([`benchmark`]),
//! - a truncated number-basis / Wigner-grid oracle used to validate the
//!   closed forms ([`fock`]).
//!
//! All types are immutable values and all operations are pure functions, so
//! evaluation is thread-safe without locking.

pub mod benchmark;
pub mod epr;
pub mod fidelity;
pub mod fock;
pub mod gaussian;
pub mod memory;

mod optim;
mod quad;

use thiserror::Error;

/// Errors produced by state constructors, channel maps and estimators.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("squeezing factor must be positive, got {0}")]
    NonPositiveSqueezing(f64),

    #[error("squeezing factor {0} exceeds the supported limit 1e6")]
    SqueezingTooLarge(f64),

    #[error("transmission must lie in [0, 1], got {0}")]
    InvalidTransmission(f64),

    #[error("mode index {mode} out of range for {n_modes}-mode state")]
    ModeOutOfRange { mode: usize, n_modes: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symplectic (max |S Omega S^T - Omega| = {0:.3e})")]
    NotSymplectic(f64),

    #[error("covariance matrix is not symmetric (max asymmetry {0:.3e})")]
    AsymmetricCovariance(f64),

    #[error("uncertainty relation violated (min symplectic eigenvalue {0})")]
    UncertaintyViolation(f64),

    #[error("coupling too strong: kappa^2 = {kappa2} exceeds Z^2 = {z2}")]
    CouplingTooStrong { kappa2: f64, z2: f64 },

    #[error("variance {value} outside physical range [{min}, {max}]")]
    VarianceOutOfRange { value: f64, min: f64, max: f64 },

    #[error("{what} below division guard 1e-9")]
    DivisionGuard { what: &'static str },

    #[error("Wigner grid extent {extent} smaller than required {required:.3} for this state")]
    GridTooSmall { extent: f64, required: f64 },

    #[error("Fock cutoff too small: truncation tail {tail:.3e} exceeds {limit:.1e}")]
    CutoffTooSmall { tail: f64, limit: f64 },

    #[error("quadrature did not converge: node doubling changed the result by {0:.3e}")]
    QuadratureNotConverged(f64),

    #[error("measurement noise is not a valid Gaussian POVM (min symplectic eigenvalue {0})")]
    InvalidPovm(f64),

    #[error("d_max values must be sorted ascending")]
    UnsortedInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Tolerance for the symplectic-eigenvalue (uncertainty) bound.
///
/// Chosen to absorb round-off accumulated over a chain of up to ~10
/// symplectic maps and loss channels; every validity check in the crate
/// uses this single constant.
pub const SYMPLECTIC_EIG_TOL: f64 = 1e-9;

/// Tolerance for covariance symmetry checks.
pub const COV_SYMMETRY_TOL: f64 = 1e-12;

/// Squeezing factors above this are rejected as numerically degenerate.
pub const MAX_SQUEEZING: f64 = 1e6;
