//! Entanglement diagnostics: Duan criterion, stored-pair and hybrid EPR
//! variances, and the entanglement-of-formation lower bound for symmetric
//! states.

use nalgebra::{DMatrix, DVector};

use crate::gaussian::{self, two_mode_squeezed, GaussianState};
use crate::memory::{var_op, var_ox, MemoryParams};
use crate::{Error, Result};

/// Which joint quadrature combinations enter the Duan sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignConvention {
    /// `Var(x1 + x2) + Var(p1 - p2)`
    PlusMinus,
    /// `Var(x1 - x2) + Var(p1 + p2)`
    MinusPlus,
}

/// Entanglement report: the Duan sum `E`, the separability verdict
/// (`E >= 2` is compatible with a separable state) and the
/// entanglement-of-formation lower bound in ebits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EprReport {
    pub e: f64,
    pub separable: bool,
    pub eof_lower_bound: f64,
}

impl EprReport {
    pub fn from_duan_sum(e: f64) -> Self {
        Self { e, separable: e >= 2.0, eof_lower_bound: eof_lower_bound(e) }
    }
}

/// Duan sum of a two-mode state under the chosen sign convention.
/// Local displacements do not enter.
pub fn duan_e(state: &GaussianState, convention: SignConvention) -> Result<f64> {
    if state.n_modes() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: state.n_modes() });
    }
    let (sx, sp) = match convention {
        SignConvention::PlusMinus => (1.0, -1.0),
        SignConvention::MinusPlus => (-1.0, 1.0),
    };
    let xcomb = DVector::from_column_slice(&[1.0, 0.0, sx, 0.0]);
    let pcomb = DVector::from_column_slice(&[0.0, 1.0, 0.0, sp]);
    Ok(state.combination_variance(&xcomb) + state.combination_variance(&pcomb))
}

/// Closed-form Duan sum between the stored upper sideband and the
/// propagating lower sideband:
/// `E = (1+G)^2/(2s) + (1-G)^2 s/2 + Var(O_x) + Var(O_p)`.
pub fn hybrid_e(params: &MemoryParams, s: f64) -> f64 {
    hybrid_e_formula(s, params.memory_gain(), var_ox(params), var_op(params))
}

pub fn hybrid_e_formula(s: f64, gain: f64, var_ox: f64, var_op: f64) -> f64 {
    (1.0 + gain).powi(2) / (2.0 * s) + (1.0 - gain).powi(2) * s / 2.0 + var_ox + var_op
}

/// Explicit two-mode Gaussian state of the hybrid protocol: mode 0 is the
/// atomic cell storing the upper sideband, mode 1 the propagating lower
/// sideband of the same two-mode squeezed input.
pub fn hybrid_state(params: &MemoryParams, s: f64) -> Result<GaussianState> {
    let tms = two_mode_squeezed(s)?;
    let g = params.memory_gain();
    // stored cell: x_A1 = G p_+ + n_x, p_A1 = -G x_+ + n_p, with
    // Var(n_x) = Var(n_p) = (Var O_x + Var O_p)/2; the propagating mode
    // passes through untouched
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(4, 4, &[
        0.0, g,   0.0, 0.0,
        -g,  0.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
    ]);
    let n = (var_ox(params) + var_op(params)) / 2.0;
    let noise = DMatrix::from_diagonal(&DVector::from_column_slice(&[n, n, 0.0, 0.0]));
    Ok(gaussian::apply_affine(&tms, &a, &noise))
}

/// Duan sum of the explicitly constructed hybrid state, with the stored
/// mode rotated back through the inverse of the memory's quadrature swap so
/// the witness reads in the (+,-) convention.
pub fn hybrid_e_from_state(params: &MemoryParams, s: f64) -> Result<f64> {
    let state = hybrid_state(params, s)?;
    // undo x_+ -> -p_A, p_+ -> x_A on the stored mode: x~ = -p_A1, p~ = x_A1
    let undo = crate::gaussian::SymplecticMap::rotation(2, 0, -90.0);
    let rotated = crate::gaussian::apply_symplectic(&state, &undo)?;
    duan_e(&rotated, SignConvention::PlusMinus)
}

/// Lower bound on the entanglement of formation of a symmetric two-mode
/// Gaussian state with Duan sum `E`, in ebits.
///
/// With `Delta = E/2`, `c_pm = (Delta^{1/2} +/- Delta^{-1/2})^2 / 4` and
/// `EoF = c_+ log2 c_+ - c_- log2 c_-` for `Delta < 1`, zero otherwise.
pub fn eof_lower_bound(e: f64) -> f64 {
    assert!(e >= 0.0, "Duan sum must be non-negative");
    let delta = e / 2.0;
    if delta >= 1.0 || delta == 0.0 {
        return 0.0;
    }
    let root = delta.sqrt();
    let c_plus = (root + 1.0 / root).powi(2) / 4.0;
    let c_minus = (root - 1.0 / root).powi(2) / 4.0;
    let term_minus = if c_minus > 0.0 { c_minus * c_minus.log2() } else { 0.0 };
    c_plus * c_plus.log2() - term_minus
}
