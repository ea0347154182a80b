//! The quantum-memory channel.
//!
//! The atom-light interaction is the swap-type map
//!
//! ```text
//! x_A' = a x_A + kappa p_L        x_L' = a x_L + kappa p_A
//! p_A' = a p_A - (kappa/Z^2) x_L  p_L' = a p_L - (kappa/Z^2) x_A
//! ```
//!
//! with `a = sqrt(1 - kappa^2/Z^2)`. Storage measures `x_L'` by homodyne
//! detection and feeds the result back onto `p_A` with electronic gain `g`;
//! at `kappa = 1` and the optimal `g = sqrt(1 - 1/Z^2)` this realises
//!
//! ```text
//! x_A_fin = sqrt(1 - 1/Z^2) x_A + p_L,   p_A_fin = -x_L.
//! ```
//!
//! Because `x_L'` commutes with both final atomic operators, the feedback is
//! modelled as its exact affine reduction on the moments; no measurement
//! records are sampled.
//!
//! The noisy model adds the optical losses (memory gain
//! `G = sqrt(eta_loss eta_ent)`) and two classical noises `S_x`, `S_p` on
//! the stored quadratures, as inferred from the experiment.

use nalgebra::{DMatrix, DVector};

use crate::gaussian::{
    self, apply_loss, apply_symplectic, vacuum, GaussianState, LossBudget, SymplecticMap,
};
use crate::{Error, Result};

/// All protocol constants of the memory channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryParams {
    /// Z^2, set by the detuning; 6.4 in the experiment.
    pub z2: f64,
    /// Swap coupling, `0 < kappa^2 <= Z^2`; the protocol runs at kappa = 1.
    pub kappa: f64,
    /// Electronic feedback gain applied to the homodyne result. Distinct
    /// from the memory gain [`MemoryParams::memory_gain`].
    pub g: f64,
    /// Initial atomic variances (spin-squeezed state).
    pub var_xa_init: f64,
    pub var_pa_init: f64,
    /// Added-noise variances of the storage step.
    pub var_sx: f64,
    pub var_sp: f64,
    pub losses: LossBudget,
}

/// Added-noise variances inferred from measured stored-state variances.
///
/// Negative values are reported as-is with `model_mismatch` set; they signal
/// that the loss model overpredicts the measured noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AddedNoise {
    pub var_sx: f64,
    pub var_sp: f64,
    pub model_mismatch: bool,
}

/// Mode bases for the two-mode pictures of the protocol.
///
/// `Sideband` are the field modes at carrier +/- Larmor frequency,
/// `CosSin` the cosine/sine temporal modes, `Local` the per-cell atomic
/// modes. All transforms between them are fixed orthogonal symplectic maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeBasis {
    Sideband,
    CosSin,
    Local,
}

/// Added-noise variances (S_x, S_p) measured for the two stored phases.
pub const ADDED_NOISE_PHASE_0: (f64, f64) = (0.08, 0.29);
pub const ADDED_NOISE_PHASE_90: (f64, f64) = (0.13, 0.32);

/// Measured stored-state variances `(Var x_A_fin, Var p_A_fin)` of the
/// squeezed-vacuum storage runs, per phase.
pub const MEASURED_STORED_PHASE_0: (f64, f64) = (2.02, 0.52);
pub const MEASURED_STORED_PHASE_90: (f64, f64) = (0.72, 1.90);

impl MemoryParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        z2: f64,
        kappa: f64,
        g: f64,
        var_xa_init: f64,
        var_pa_init: f64,
        var_sx: f64,
        var_sp: f64,
        losses: LossBudget,
    ) -> Result<Self> {
        if z2 <= 0.0 {
            return Err(Error::InvalidParameter(format!("Z^2 must be positive, got {z2}")));
        }
        if kappa <= 0.0 || kappa * kappa > z2 {
            return Err(Error::CouplingTooStrong { kappa2: kappa * kappa, z2 });
        }
        for (name, v) in [
            ("var_xa_init", var_xa_init),
            ("var_pa_init", var_pa_init),
            ("var_sx", var_sx),
            ("var_sp", var_sp),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(Self { z2, kappa, g, var_xa_init, var_pa_init, var_sx, var_sp, losses })
    }

    /// The "paper-2010" preset: Z^2 = 6.4, kappa = 1, optimal g, the
    /// spin-squeezed initial state Var(x_A) = 0.43 / Var(p_A) = 1.07, the
    /// generic added noise S_x ~ 0.1 / S_p ~ 0.3 and the measured loss
    /// budget. Per-phase added noise is available through
    /// [`MemoryParams::paper_2010_phase`].
    pub fn paper_2010() -> Self {
        let z2 = 6.4;
        Self {
            z2,
            kappa: 1.0,
            g: (1.0 - 1.0 / z2).sqrt(),
            var_xa_init: 0.43,
            var_pa_init: 1.07,
            var_sx: 0.10,
            var_sp: 0.30,
            losses: LossBudget::paper_2010(),
        }
    }

    /// Ideal memory: no losses, no added noise, perfectly squeezed initial
    /// atomic state.
    pub fn perfect() -> Self {
        let z2 = 6.4;
        Self {
            z2,
            kappa: 1.0,
            g: (1.0 - 1.0 / z2).sqrt(),
            var_xa_init: 0.0,
            var_pa_init: 0.0,
            var_sx: 0.0,
            var_sp: 0.0,
            losses: LossBudget::perfect(),
        }
    }

    /// The paper preset with the added noise measured for the given
    /// squeezing phase (table values at 0 and 90 degrees, the generic pair
    /// otherwise).
    pub fn paper_2010_phase(phi_deg: f64) -> Self {
        let base = Self::paper_2010();
        let (var_sx, var_sp) = if phi_deg.abs() < 1e-9 {
            ADDED_NOISE_PHASE_0
        } else if (phi_deg - 90.0).abs() < 1e-9 {
            ADDED_NOISE_PHASE_90
        } else {
            (base.var_sx, base.var_sp)
        };
        Self { var_sx, var_sp, ..base }
    }

    /// Swap suppression factor `sqrt(1 - kappa^2/Z^2)` of the residual
    /// atomic noise; 0.92 at the paper-2010 parameters.
    pub fn swap_suppression(&self) -> f64 {
        (1.0 - self.kappa * self.kappa / self.z2).sqrt()
    }

    /// Memory gain `G = sqrt(eta_loss eta_ent)`.
    pub fn memory_gain(&self) -> f64 {
        self.losses.memory_gain()
    }

    /// Initial atomic state used by the storage maps.
    fn atomic_state(&self) -> GaussianState {
        gaussian::state_unchecked(
            DVector::zeros(2),
            DMatrix::from_diagonal(&DVector::from_column_slice(&[
                self.var_xa_init,
                self.var_pa_init,
            ])),
        )
    }
}

/// The atom-light swap interaction as a two-mode symplectic map on
/// `(x_L, p_L, x_A, p_A)`.
pub fn interaction_map(params: &MemoryParams) -> Result<SymplecticMap> {
    let kappa = params.kappa;
    if kappa * kappa > params.z2 {
        return Err(Error::CouplingTooStrong { kappa2: kappa * kappa, z2: params.z2 });
    }
    let a = params.swap_suppression();
    let k_z2 = kappa / params.z2;
    #[rustfmt::skip]
    let matrix = DMatrix::from_row_slice(4, 4, &[
        //  x_L   p_L   x_A   p_A
            a,    0.0,  0.0,  kappa, // x_L'
            0.0,  a,   -k_z2, 0.0,   // p_L'
            0.0,  kappa, a,   0.0,   // x_A'
           -k_z2, 0.0,  0.0,  a,     // p_A'
    ]);
    SymplecticMap::new(matrix, DVector::zeros(4))
}

/// Feedback gain that removes the initial `p_A` from the stored state.
///
/// At `kappa = 1` this is the analytic `g = sqrt(1 - 1/Z^2)`; for other
/// couplings the residual `p_A` coefficient is minimised numerically.
pub fn optimal_gain(params: &MemoryParams) -> Result<f64> {
    if (params.kappa - 1.0).abs() < 1e-12 {
        return Ok((1.0 - 1.0 / params.z2).sqrt());
    }
    // coefficient of p_A in p_A_fin = p_A' - g x_L' is (a - g kappa);
    // golden-section scan of |a - g kappa| over g in [0, 2]
    let map = interaction_map(params)?;
    let coeff = |g: f64| (map.matrix[(3, 3)] - g * map.matrix[(0, 3)]).abs();
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-13 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if coeff(m1) < coeff(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Exact affine reduction of "measure x_L', displace p_A by g times the
/// result, discard the light": returns the atomic marginal.
fn feedback_reduce(joint: &GaussianState, g: f64) -> GaussianState {
    // ordering (x_L, p_L, x_A, p_A); x_L' commutes with both x_A' and p_A'
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(2, 4, &[
        0.0, 0.0, 1.0, 0.0,
        -g,  0.0, 0.0, 1.0,
    ]);
    gaussian::apply_affine(joint, &a, &DMatrix::zeros(2, 2))
}

/// Lossless storage of a single light mode through the interaction and
/// homodyne-feedback reduction at the configured gain: returns the final
/// atomic state.
pub fn store_ideal(input_light: &GaussianState, params: &MemoryParams) -> Result<GaussianState> {
    if input_light.n_modes() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: input_light.n_modes() });
    }
    let joint = input_light.tensor(&params.atomic_state());
    let interacted = apply_symplectic(&joint, &interaction_map(params)?)?;
    Ok(feedback_reduce(&interacted, params.g))
}

/// Storage of the initial pure state through the full noise model: optical
/// losses (gain G), the ideal storage map, and the classical added noises
/// S_x, S_p on the stored quadratures.
pub fn store_noisy(
    input_pure_light: &GaussianState,
    params: &MemoryParams,
) -> Result<GaussianState> {
    let g_mem = params.memory_gain();
    if !(0.0..=1.0).contains(&g_mem) {
        return Err(Error::InvalidTransmission(g_mem * g_mem));
    }
    let attenuated = apply_loss(input_pure_light, 0, g_mem * g_mem)?;
    let stored = store_ideal(&attenuated, params)?;
    let mut cov = stored.cov().clone();
    cov[(0, 0)] += params.var_sx;
    cov[(1, 1)] += params.var_sp;
    Ok(gaussian::state_unchecked(stored.mean().clone(), cov))
}

/// Invert the noise model for the added-noise variances, given the measured
/// stored variances `(Var x_A_fin, Var p_A_fin)` and the input squeezing
/// phase. The pure-state variances are taken at `s = 4`.
pub fn infer_added_noise(
    stored_vars: (f64, f64),
    params: &MemoryParams,
    phi_deg: f64,
) -> Result<AddedNoise> {
    infer_added_noise_s(stored_vars, params, phi_deg, 4.0)
}

/// [`infer_added_noise`] with an explicit squeezing factor.
pub fn infer_added_noise_s(
    stored_vars: (f64, f64),
    params: &MemoryParams,
    phi_deg: f64,
    s: f64,
) -> Result<AddedNoise> {
    let (var_xa_fin, var_pa_fin) = stored_vars;
    if var_xa_fin < 0.0 || var_pa_fin < 0.0 {
        return Err(Error::InvalidParameter("stored variances must be >= 0".into()));
    }
    let pure = gaussian::squeezed_state(s, phi_deg, (0.0, 0.0))?;
    let g2 = params.memory_gain().powi(2);
    let a2 = params.swap_suppression().powi(2);
    let vacuum_leak = (1.0 - g2) * 0.5;
    // x_A_fin stores p_L, p_A_fin stores x_L
    let var_sx = var_xa_fin - a2 * params.var_xa_init - g2 * pure.var(1) - vacuum_leak;
    let var_sp = var_pa_fin - g2 * pure.var(0) - vacuum_leak;
    Ok(AddedNoise { var_sx, var_sp, model_mismatch: var_sx < 0.0 || var_sp < 0.0 })
}

/// Excess of measured stored variances over what losses alone predict:
/// `(Var x_A_fin - [G^2 Var p_L + (1-G^2)/2], Var p_A_fin - [G^2 Var x_L + (1-G^2)/2])`.
///
/// For the ideal memory the first component is the residual atomic noise
/// `(1 - 1/Z^2) Var(x_A)` and the second is zero.
pub fn added_noise_excess(
    stored_vars: (f64, f64),
    pure_light_vars: (f64, f64),
    memory_gain: f64,
) -> (f64, f64) {
    let g2 = memory_gain * memory_gain;
    let leak = (1.0 - g2) * 0.5;
    (
        stored_vars.0 - g2 * pure_light_vars.1 - leak,
        stored_vars.1 - g2 * pure_light_vars.0 - leak,
    )
}

/// Variance of the composite noise operator
/// `O_x = sqrt(1 - 1/Z^2) x_A + sqrt(1 - G^2) p_L_vac + S_x`.
pub fn var_ox(params: &MemoryParams) -> f64 {
    let g2 = params.memory_gain().powi(2);
    params.swap_suppression().powi(2) * params.var_xa_init + (1.0 - g2) * 0.5 + params.var_sx
}

/// Variance of `O_p = sqrt(1 - G^2) x_L_vac + S_p`.
pub fn var_op(params: &MemoryParams) -> f64 {
    let g2 = params.memory_gain().powi(2);
    (1.0 - g2) * 0.5 + params.var_sp
}

impl ModeBasis {
    /// Orthogonal symplectic matrix from the sideband to the cosine/sine
    /// quadratures: `x_c = (x_+ + x_-)/sqrt2`, `p_c = (p_+ + p_-)/sqrt2`,
    /// `x_s = (p_- - p_+)/sqrt2`, `p_s = (x_+ - x_-)/sqrt2`.
    fn sideband_to_cossin() -> DMatrix<f64> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
            r,   0.0,  r,   0.0, // x_c
            0.0, r,    0.0, r,   // p_c
            0.0, -r,   0.0, r,   // x_s
            r,   0.0, -r,   0.0, // p_s
        ]);
        m
    }

    /// Orthogonal symplectic matrix from the cosine/sine to the local-cell
    /// quadratures: `x_1 = (x_c + p_s)/sqrt2`, `p_1 = (p_c - x_s)/sqrt2`,
    /// `x_2 = (x_c - p_s)/sqrt2`, `p_2 = (p_c + x_s)/sqrt2`.
    fn cossin_to_local() -> DMatrix<f64> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
            r,   0.0,  0.0, r,   // x_1
            0.0, r,   -r,   0.0, // p_1
            r,   0.0,  0.0, -r,  // x_2
            0.0, r,    r,   0.0, // p_2
        ]);
        m
    }

    /// Transform matrix between any two bases (composed through cos/sin).
    pub fn transform(from: ModeBasis, to: ModeBasis) -> SymplecticMap {
        let to_cossin = match from {
            ModeBasis::Sideband => Self::sideband_to_cossin(),
            ModeBasis::CosSin => DMatrix::identity(4, 4),
            // orthogonal, so the inverse is the transpose
            ModeBasis::Local => Self::cossin_to_local().transpose(),
        };
        let from_cossin = match to {
            ModeBasis::Sideband => Self::sideband_to_cossin().transpose(),
            ModeBasis::CosSin => DMatrix::identity(4, 4),
            ModeBasis::Local => Self::cossin_to_local(),
        };
        SymplecticMap { matrix: from_cossin * to_cossin, shift: DVector::zeros(4) }
    }
}

/// Change the two-mode picture of a state.
pub fn basis_transform(
    state: &GaussianState,
    from: ModeBasis,
    to: ModeBasis,
) -> Result<GaussianState> {
    if state.n_modes() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: state.n_modes() });
    }
    apply_symplectic(state, &ModeBasis::transform(from, to))
}

/// Store a two-mode sideband-basis light state in the two memory cells and
/// return the atomic pair in the local basis.
///
/// The cosine and sine effective modes are stored independently, each with
/// its own noise operators `O_x`, `O_p`; the local picture mixes them so
/// the upper sideband ends up in cell 1 and the lower in cell 2.
pub fn storage_in_local_picture(
    input: &GaussianState,
    params: &MemoryParams,
) -> Result<GaussianState> {
    if input.n_modes() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: input.n_modes() });
    }
    let cossin = basis_transform(input, ModeBasis::Sideband, ModeBasis::CosSin)?;
    // per effective mode: x_A = G p_L + O_x, p_A = -G x_L + O_p
    let g = params.memory_gain();
    let j = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let mut a = DMatrix::zeros(4, 4);
    a.view_mut((0, 0), (2, 2)).copy_from(&(g * &j));
    a.view_mut((2, 2), (2, 2)).copy_from(&(g * &j));
    let noise = DMatrix::from_diagonal(&DVector::from_column_slice(&[
        var_ox(params),
        var_op(params),
        var_ox(params),
        var_op(params),
    ]));
    let atoms_cossin = gaussian::apply_affine(&cossin, &a, &noise);
    basis_transform(&atoms_cossin, ModeBasis::CosSin, ModeBasis::Local)
}

/// Simulate the two-pulse kappa calibration: a mean `injected_p_mean` on
/// `p_L` of the second pulse is stored in `x_A'`, rotated into `p_A` by the
/// readout pi-pulse, and read out by a third pulse. Returns the readout mean
/// of `x_L'`, equal to `kappa^2` times the injected mean.
pub fn simulate_kappa_readout(params: &MemoryParams, injected_p_mean: f64) -> Result<f64> {
    let map = interaction_map(params)?;
    // second pulse: coherent light with the injected mean
    let pulse2 = gaussian::state_unchecked(
        DVector::from_column_slice(&[0.0, injected_p_mean]),
        DMatrix::identity(2, 2) * 0.5,
    );
    let joint = apply_symplectic(&pulse2.tensor(&params.atomic_state()), &map)?;
    let atoms = gaussian::state_unchecked(
        DVector::from_column_slice(&[joint.mean()[2], joint.mean()[3]]),
        joint.cov().view((2, 2), (2, 2)).into_owned(),
    );
    // readout pulse orientation: the stored mean must appear with positive
    // sign, i.e. (x_A, p_A) -> (-p_A, x_A), the inverse of the pi-pulse
    let rotated = apply_symplectic(&atoms, &SymplecticMap::pi_pulse(1, 0).inverse())?;
    // third pulse reads x_L' = a x_L + kappa p_A
    let joint3 = apply_symplectic(&vacuum(1).tensor(&rotated), &map)?;
    Ok(joint3.mean()[0])
}

/// Recover `kappa^2` from the calibration relation
/// `<x_L'_3rd> = kappa^2 <p_L_2nd>`.
pub fn calibrate_kappa(readout_mean: f64, injected_mean: f64) -> Result<f64> {
    if injected_mean.abs() < 1e-9 {
        return Err(Error::DivisionGuard { what: "injected mean" });
    }
    Ok(readout_mean / injected_mean)
}
