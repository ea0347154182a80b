//! Multimode Gaussian states and the maps that act on them.
//!
//! Conventions, fixed once for the whole crate:
//!
//! - quadrature ordering `(x_1, p_1, x_2, p_2, ...)`;
//! - vacuum variance 1/2, i.e. `cov(vacuum) = I/2`;
//! - the symplectic form is `Omega = diag([[0, 1], [-1, 0]], ...)` and a
//!   matrix `S` is symplectic when `S Omega S^T = Omega`;
//! - a covariance matrix is physical when all symplectic eigenvalues are
//!   `>= 1/2` (up to [`crate::SYMPLECTIC_EIG_TOL`]).
//!
//! Basis changes are always explicit [`SymplecticMap`] values; no operation
//! reorders quadratures implicitly.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, COV_SYMMETRY_TOL, MAX_SQUEEZING, SYMPLECTIC_EIG_TOL};

/// Mean vector and covariance matrix of an `N`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// Affine phase-space map `r -> S r + d` with symplectic `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    pub matrix: DMatrix<f64>,
    pub shift: DVector<f64>,
}

/// The three intensity transmissions of the optical path.
///
/// `eta_loss` covers propagation from the source to the memory cells,
/// `eta_ent` the cell entrance windows and `eta_det` everything between the
/// interaction and the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBudget {
    pub eta_loss: f64,
    pub eta_ent: f64,
    pub eta_det: f64,
}

/// Result of [`infer_total_loss`]: the transmission solving the squeezed-
/// quadrature equation, plus the residual of the antisqueezed equation as a
/// consistency diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferredLoss {
    pub eta: f64,
    pub antisqueezed_residual: f64,
}

impl LossBudget {
    pub fn new(eta_loss: f64, eta_ent: f64, eta_det: f64) -> Result<Self> {
        for eta in [eta_loss, eta_ent, eta_det] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::InvalidTransmission(eta));
            }
        }
        Ok(Self { eta_loss, eta_ent, eta_det })
    }

    /// Loss budget of the 2010 experiment: eta_loss = 0.80, eta_ent = 0.90,
    /// eta_det = 0.79.
    pub fn paper_2010() -> Self {
        Self { eta_loss: 0.80, eta_ent: 0.90, eta_det: 0.79 }
    }

    /// Lossless path.
    pub fn perfect() -> Self {
        Self { eta_loss: 1.0, eta_ent: 1.0, eta_det: 1.0 }
    }

    /// Total transmission eta_loss * eta_ent * eta_det.
    pub fn eta_tot(&self) -> f64 {
        self.eta_loss * self.eta_ent * self.eta_det
    }

    /// Memory gain G = sqrt(eta_loss * eta_ent), the ratio of stored to
    /// input mean values.
    pub fn memory_gain(&self) -> f64 {
        (self.eta_loss * self.eta_ent).sqrt()
    }
}

/// The standard symplectic form for `n_modes` modes.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for m in 0..n_modes {
        omega[(2 * m, 2 * m + 1)] = 1.0;
        omega[(2 * m + 1, 2 * m)] = -1.0;
    }
    omega
}

impl GaussianState {
    /// Build a state from explicit moments, validating symmetry and the
    /// uncertainty relation.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if !mean.len().is_multiple_of(2) || mean.is_empty() {
            return Err(Error::DimensionMismatch { expected: 2, got: mean.len() });
        }
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), got: cov.nrows() });
        }
        let asym = (&cov - cov.transpose()).abs().max();
        if asym > COV_SYMMETRY_TOL {
            return Err(Error::AsymmetricCovariance(asym));
        }
        let state = Self { mean, cov };
        let min_nu = state.symplectic_eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min_nu < 0.5 - SYMPLECTIC_EIG_TOL {
            return Err(Error::UncertaintyViolation(min_nu));
        }
        Ok(state)
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Variance of quadrature `i` in the flat `(x_1, p_1, ...)` ordering.
    pub fn var(&self, i: usize) -> f64 {
        self.cov[(i, i)]
    }

    /// Symplectic eigenvalues: moduli of the (purely imaginary) eigenvalues
    /// of `Omega V`, each returned once.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        symplectic_eigenvalues(&self.cov)
    }

    /// Purity proxy: det(2V), equal to 1 for pure states.
    pub fn det_2cov(&self) -> f64 {
        (2.0 * self.cov.clone()).determinant()
    }

    /// Tensor product with another state (modes of `other` appended).
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let n = self.mean.len() + other.mean.len();
        let mut mean = DVector::zeros(n);
        mean.rows_mut(0, self.mean.len()).copy_from(&self.mean);
        mean.rows_mut(self.mean.len(), other.mean.len()).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(n, n);
        cov.view_mut((0, 0), (self.mean.len(), self.mean.len())).copy_from(&self.cov);
        cov.view_mut(
            (self.mean.len(), self.mean.len()),
            (other.mean.len(), other.mean.len()),
        )
        .copy_from(&other.cov);
        GaussianState { mean, cov }
    }

    /// Marginal state of a single mode.
    pub fn marginal(&self, mode: usize) -> Result<GaussianState> {
        if mode >= self.n_modes() {
            return Err(Error::ModeOutOfRange { mode, n_modes: self.n_modes() });
        }
        let i = 2 * mode;
        Ok(GaussianState {
            mean: DVector::from_column_slice(&[self.mean[i], self.mean[i + 1]]),
            cov: self.cov.view((i, i), (2, 2)).into_owned(),
        })
    }

    /// Variance of the linear combination `c . r` of quadratures.
    pub fn combination_variance(&self, coeffs: &DVector<f64>) -> f64 {
        (coeffs.transpose() * &self.cov * coeffs)[(0, 0)]
    }
}

/// Moments-only constructor for internal channel outputs whose validity is
/// guaranteed by construction.
pub(crate) fn state_unchecked(mean: DVector<f64>, cov: DMatrix<f64>) -> GaussianState {
    GaussianState { mean, cov }
}

/// Symplectic eigenvalues of a covariance matrix.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Vec<f64> {
    let n_modes = cov.nrows() / 2;
    let omega_v = symplectic_form(n_modes) * cov;
    let mut mods: Vec<f64> = omega_v.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    mods.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // eigenvalues come in +/- i nu pairs; keep one of each
    mods.into_iter().step_by(2).collect()
}

impl SymplecticMap {
    pub fn new(matrix: DMatrix<f64>, shift: DVector<f64>) -> Result<Self> {
        let map = Self { matrix, shift };
        map.verify()?;
        Ok(map)
    }

    /// Identity map on `n_modes` modes.
    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
            shift: DVector::zeros(2 * n_modes),
        }
    }

    /// Pure displacement by `shift`.
    pub fn displacement(shift: DVector<f64>) -> Self {
        Self { matrix: DMatrix::identity(shift.len(), shift.len()), shift }
    }

    /// Phase-space rotation of one mode by `angle_deg`:
    /// `x -> x cos t + p sin t`, `p -> -x sin t + p cos t`.
    pub fn rotation(n_modes: usize, mode: usize, angle_deg: f64) -> Self {
        let t = angle_deg.to_radians();
        let mut matrix = DMatrix::identity(2 * n_modes, 2 * n_modes);
        let i = 2 * mode;
        matrix[(i, i)] = t.cos();
        matrix[(i, i + 1)] = t.sin();
        matrix[(i + 1, i)] = -t.sin();
        matrix[(i + 1, i + 1)] = t.cos();
        Self { matrix, shift: DVector::zeros(2 * n_modes) }
    }

    /// The readout pi-pulse of the verification sequence, swapping the
    /// atomic quadratures as `(x, p) -> (p, -x)`.
    pub fn pi_pulse(n_modes: usize, mode: usize) -> Self {
        Self::rotation(n_modes, mode, 90.0)
    }

    pub fn n_modes(&self) -> usize {
        self.shift.len() / 2
    }

    /// Check `S Omega S^T = Omega` within 1e-10.
    pub fn verify(&self) -> Result<()> {
        let omega = symplectic_form(self.n_modes());
        let dev = (&self.matrix * &omega * self.matrix.transpose() - &omega).abs().max();
        if dev > 1e-10 {
            return Err(Error::NotSymplectic(dev));
        }
        Ok(())
    }

    /// Composition: `self` applied after `first`.
    pub fn compose(&self, first: &SymplecticMap) -> SymplecticMap {
        SymplecticMap {
            matrix: &self.matrix * &first.matrix,
            shift: &self.matrix * &first.shift + &self.shift,
        }
    }

    /// Inverse map (symplectic inverse, no matrix inversion needed:
    /// S^{-1} = Omega^T S^T Omega).
    pub fn inverse(&self) -> SymplecticMap {
        let omega = symplectic_form(self.n_modes());
        let inv = omega.transpose() * self.matrix.transpose() * &omega;
        let shift = -(&inv * &self.shift);
        SymplecticMap { matrix: inv, shift }
    }
}

/// The `n_modes`-mode vacuum: zero mean, covariance I/2.
pub fn vacuum(n_modes: usize) -> GaussianState {
    assert!(n_modes >= 1, "vacuum needs at least one mode");
    GaussianState {
        mean: DVector::zeros(2 * n_modes),
        cov: DMatrix::identity(2 * n_modes, 2 * n_modes) * 0.5,
    }
}

/// Single-mode squeezed state with variance ratio `s` and squeezing phase
/// `phi` in degrees.
///
/// At `phi = 0` the x quadrature is squeezed: `cov = diag(1/(2s), s/2)`;
/// a general phase rotates that covariance by `phi`. The mean is set to
/// `displacement`.
pub fn squeezed_state(s: f64, phi_deg: f64, displacement: (f64, f64)) -> Result<GaussianState> {
    check_squeezing(s)?;
    let base = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0 / (2.0 * s), s / 2.0]));
    let rot = SymplecticMap::rotation(1, 0, phi_deg);
    let cov = &rot.matrix * base * rot.matrix.transpose();
    // rotation can leave ~1e-17 asymmetry; resymmetrise exactly
    let cov = (&cov + cov.transpose()) * 0.5;
    Ok(GaussianState {
        mean: DVector::from_column_slice(&[displacement.0, displacement.1]),
        cov,
    })
}

/// Two-mode squeezed vacuum with variance ratio `s` on the EPR combinations:
/// `Var(x_+ + x_-) = Var(p_+ - p_-) = 1/s` (Duan sum `2/s`), marginals
/// thermal with variance `(s + 1/s)/4` per quadrature.
pub fn two_mode_squeezed(s: f64) -> Result<GaussianState> {
    check_squeezing(s)?;
    let c = 0.5 * (s + 1.0 / s) / 2.0;
    let q = 0.5 * (s - 1.0 / s) / 2.0;
    let mut cov = DMatrix::identity(4, 4) * c;
    // x's anticorrelated, p's correlated
    cov[(0, 2)] = -q;
    cov[(2, 0)] = -q;
    cov[(1, 3)] = q;
    cov[(3, 1)] = q;
    Ok(GaussianState { mean: DVector::zeros(4), cov })
}

/// Pure loss (beamsplitter with vacuum) of transmission `eta` on one mode.
///
/// On the chosen mode `mean -> sqrt(eta) mean` and
/// `cov -> eta cov + (1 - eta) I/2`; cross-covariances with other modes
/// scale by `sqrt(eta)`.
pub fn apply_loss(state: &GaussianState, mode: usize, eta: f64) -> Result<GaussianState> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidTransmission(eta));
    }
    if mode >= state.n_modes() {
        return Err(Error::ModeOutOfRange { mode, n_modes: state.n_modes() });
    }
    let dim = 2 * state.n_modes();
    let i = 2 * mode;
    let root = eta.sqrt();
    let mut scale = DMatrix::identity(dim, dim);
    scale[(i, i)] = root;
    scale[(i + 1, i + 1)] = root;
    let mut cov = &scale * &state.cov * &scale;
    cov[(i, i)] += (1.0 - eta) * 0.5;
    cov[(i + 1, i + 1)] += (1.0 - eta) * 0.5;
    Ok(GaussianState { mean: &scale * &state.mean, cov })
}

/// Apply an affine symplectic map to a state.
pub fn apply_symplectic(state: &GaussianState, map: &SymplecticMap) -> Result<GaussianState> {
    if map.shift.len() != state.mean.len() {
        return Err(Error::DimensionMismatch {
            expected: state.mean.len(),
            got: map.shift.len(),
        });
    }
    map.verify()?;
    let cov = &map.matrix * &state.cov * map.matrix.transpose();
    Ok(GaussianState {
        mean: &map.matrix * &state.mean + &map.shift,
        cov: (&cov + cov.transpose()) * 0.5,
    })
}

/// Deterministic Gaussian affine channel `r -> A r (+ classical noise N)`,
/// for maps that are not symplectic (attenuation, measurement reduction).
/// The caller is responsible for `A` and `N` describing a physical channel.
pub(crate) fn apply_affine(
    state: &GaussianState,
    a: &DMatrix<f64>,
    noise: &DMatrix<f64>,
) -> GaussianState {
    let cov = a * &state.cov * a.transpose() + noise;
    GaussianState {
        mean: a * &state.mean,
        cov: (&cov + cov.transpose()) * 0.5,
    }
}

/// Infer the transmission that maps a pure `s`-squeezed state onto the
/// measured squeezed-quadrature variance, reporting the residual of the
/// antisqueezed equation as a consistency check.
pub fn infer_total_loss(
    measured_var_sq: f64,
    measured_var_antisq: f64,
    s: f64,
) -> Result<InferredLoss> {
    check_squeezing(s)?;
    let lo = 1.0 / (2.0 * s);
    let hi = s / 2.0;
    if !(lo..=0.5).contains(&measured_var_sq) {
        return Err(Error::VarianceOutOfRange { value: measured_var_sq, min: lo, max: 0.5 });
    }
    if !(0.5..=hi).contains(&measured_var_antisq) {
        return Err(Error::VarianceOutOfRange { value: measured_var_antisq, min: 0.5, max: hi });
    }
    // eta * lo + (1 - eta)/2 = var_sq
    let eta = (0.5 - measured_var_sq) / (0.5 - lo);
    let predicted_antisq = eta * hi + (1.0 - eta) * 0.5;
    Ok(InferredLoss { eta, antisqueezed_residual: (predicted_antisq - measured_var_antisq).abs() })
}

fn check_squeezing(s: f64) -> Result<()> {
    if s <= 0.0 || s.is_nan() {
        return Err(Error::NonPositiveSqueezing(s));
    }
    if s > MAX_SQUEEZING {
        return Err(Error::SqueezingTooLarge(s));
    }
    Ok(())
}
