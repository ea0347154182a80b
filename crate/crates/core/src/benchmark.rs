//! Classical benchmark estimation for the displaced-squeezed alphabet.
//!
//! A classical memory is a measure-and-prepare channel: measure the
//! (attenuated) input, discard it, re-prepare a state conditioned on the
//! outcome. Two estimators of the best such channel's average fidelity are
//! provided, both on the achievable side:
//!
//! - [`optimize_gaussian_strategy`]: Nelder-Mead over Gaussian strategies
//!   (noisy general-dyne measurement + Gaussian re-preparation), evaluated
//!   in closed form. Kind: `AchievableLowerBound`.
//! - [`seesaw_truncated`]: alternating eigenvector optimization of a
//!   discrete-outcome measure-and-prepare ensemble in a truncated Fock
//!   space. Kind: `SeesawEstimate`.
//!
//! Neither is the rigorous dual (upper-bound) certificate of the benchmark
//! literature; result kinds are labeled so no estimate can be mistaken for
//! a certified bound. [`monotone_envelope`] applies the proof that the true
//! benchmark is non-increasing in the alphabet width.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::fidelity::{Alphabet, PhaseSet};
use crate::fock;
use crate::gaussian::squeezed_state;
use crate::optim::NelderMead;
use crate::quad;
use crate::{Error, Result, SYMPLECTIC_EIG_TOL};

/// Parameters of a Gaussian measure-and-prepare channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalStrategy {
    /// Covariance added by the measurement; must itself be a valid state
    /// covariance (heterodyne bound).
    pub measurement_noise: Matrix2<f64>,
    /// Covariance of the re-prepared states; valid state covariance.
    pub reprep_cov: Matrix2<f64>,
    /// Scale from measured mean to re-prepared mean. The overall channel
    /// gain is `displacement_gain` times the input attenuation.
    pub displacement_gain: f64,
    bypass: bool,
}

/// What a benchmark number means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkKind {
    AchievableLowerBound,
    SeesawEstimate,
    MonotoneEnvelope,
}

impl BenchmarkKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BenchmarkKind::AchievableLowerBound => "achievable-lower-bound",
            BenchmarkKind::SeesawEstimate => "seesaw-estimate",
            BenchmarkKind::MonotoneEnvelope => "monotone-envelope",
        }
    }
}

/// A benchmark estimate with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkResult {
    pub value: f64,
    pub kind: BenchmarkKind,
    pub truncation_tail: f64,
    pub iterations: usize,
    pub seed: u64,
}

/// Whether the channel's displacement gain is pinned to the memory gain
/// (like-for-like with the quantum memory) or optimized over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainMode {
    Matched,
    Optimized,
}

impl ClassicalStrategy {
    pub fn new(
        measurement_noise: Matrix2<f64>,
        reprep_cov: Matrix2<f64>,
        displacement_gain: f64,
    ) -> Result<Self> {
        let strategy =
            Self { measurement_noise, reprep_cov, displacement_gain, bypass: false };
        strategy.validate()?;
        Ok(strategy)
    }

    /// Heterodyne measurement plus coherent-state re-preparation.
    pub fn heterodyne_coherent(displacement_gain: f64) -> Self {
        Self {
            measurement_noise: Matrix2::identity() * 0.5,
            reprep_cov: Matrix2::identity() * 0.5,
            displacement_gain,
            bypass: false,
        }
    }

    /// Test-only bypass: zero measurement noise and zero re-preparation
    /// covariance at unit gain. Not a physical measure-and-prepare channel;
    /// used to cross-check the integrals against the identity channel.
    #[doc(hidden)]
    pub fn noiseless_bypass() -> Self {
        Self {
            measurement_noise: Matrix2::zeros(),
            reprep_cov: Matrix2::zeros(),
            displacement_gain: 1.0,
            bypass: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bypass {
            return Ok(());
        }
        for m in [&self.measurement_noise, &self.reprep_cov] {
            if (m[(0, 1)] - m[(1, 0)]).abs() > 1e-12 {
                return Err(Error::AsymmetricCovariance((m[(0, 1)] - m[(1, 0)]).abs()));
            }
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            if m[(0, 0)] <= 0.0 || det <= 0.0 {
                return Err(Error::InvalidPovm(det));
            }
            // 2x2 symplectic eigenvalue is sqrt(det)
            if det.sqrt() < 0.5 - SYMPLECTIC_EIG_TOL {
                return Err(Error::InvalidPovm(det.sqrt()));
            }
        }
        Ok(())
    }
}

/// Average fidelity of the Gaussian strategy over the alphabet, with the
/// input attenuated to overall mean gain `gain_target` before measurement.
///
/// Per phase and displacement the fidelity is Gaussian throughout:
///
/// ```text
/// F(mu, theta) = exp(-1/2 d^T M^{-1} d) / sqrt(det M),
/// M = V(theta) + V_rp + k^2 (G^2 V(theta) + (1-G^2) I/2 + Sigma_m),
/// d = (1 - k G) mu.
/// ```
///
/// Displacement averages use composite Gauss-Legendre quadrature; a
/// continuous phase set is sampled uniformly with a doubling check at
/// tolerance 1e-4.
pub fn strategy_fidelity(
    strategy: &ClassicalStrategy,
    alphabet: &Alphabet,
    gain_target: f64,
) -> Result<f64> {
    strategy.validate()?;
    if !(0.0..=1.0).contains(&gain_target) {
        return Err(Error::InvalidTransmission(gain_target));
    }
    match &alphabet.phases {
        PhaseSet::Discrete(_) => {
            strategy_fidelity_at_phases(strategy, alphabet, gain_target, &alphabet.phase_list())
        }
        PhaseSet::Continuous { samples } => {
            let coarse = strategy_fidelity_at_phases(
                strategy,
                alphabet,
                gain_target,
                &uniform_phases(*samples),
            )?;
            let fine = strategy_fidelity_at_phases(
                strategy,
                alphabet,
                gain_target,
                &uniform_phases(2 * samples),
            )?;
            if (fine - coarse).abs() > 1e-4 {
                return Err(Error::QuadratureNotConverged((fine - coarse).abs()));
            }
            Ok(fine)
        }
    }
}

fn uniform_phases(samples: usize) -> Vec<f64> {
    (0..samples).map(|k| 180.0 * k as f64 / samples as f64).collect()
}

fn strategy_fidelity_at_phases(
    strategy: &ClassicalStrategy,
    alphabet: &Alphabet,
    gain_target: f64,
    phases: &[f64],
) -> Result<f64> {
    let k = strategy.displacement_gain;
    let g = gain_target;
    let mismatch = (1.0 - k * g).powi(2);
    let mut total = 0.0;
    for &phi in phases {
        let pure = squeezed_state(alphabet.s, phi, (0.0, 0.0))?;
        let v = pure.cov();
        let mut m = Matrix2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = v[(i, j)] * (1.0 + k * k * g * g)
                    + strategy.reprep_cov[(i, j)]
                    + k * k * strategy.measurement_noise[(i, j)];
            }
            m[(i, i)] += k * k * (1.0 - g * g) * 0.5;
        }
        total += quad::gaussian_square_average(&m, mismatch, alphabet.d_max, 16)
            .ok_or(Error::InvalidPovm(0.0))?;
    }
    Ok(total / phases.len() as f64)
}

/// Configuration of the Gaussian-strategy search.
#[derive(Debug, Clone)]
pub struct OptimizeConfig {
    pub gain_mode: GainMode,
    pub restarts: usize,
    pub max_evals_per_restart: usize,
    pub seed: u64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self { gain_mode: GainMode::Matched, restarts: 5, max_evals_per_restart: 2000, seed: 7 }
    }
}

/// Derivative-free maximization of [`strategy_fidelity`] over diagonal
/// Gaussian strategies, restarted from fixed seeded points.
///
/// Parameters are unconstrained logs: the measurement noise is
/// `diag(e^{q+u}, e^{q-u})/2` with `q = t0^2 >= 0` (so the heterodyne bound
/// holds by construction), the re-preparation covariance likewise, and in
/// [`GainMode::Optimized`] the displacement gain is a fifth parameter.
pub fn optimize_gaussian_strategy(
    alphabet: &Alphabet,
    gain_target: f64,
    config: &OptimizeConfig,
) -> Result<(ClassicalStrategy, BenchmarkResult)> {
    let n_params = match config.gain_mode {
        GainMode::Matched => 4,
        GainMode::Optimized => 5,
    };
    let decode = |t: &[f64]| -> ClassicalStrategy {
        let q = t[0] * t[0];
        let w = t[2] * t[2];
        ClassicalStrategy {
            measurement_noise: Matrix2::from_diagonal(&nalgebra::Vector2::new(
                0.5 * (q + t[1]).exp(),
                0.5 * (q - t[1]).exp(),
            )),
            reprep_cov: Matrix2::from_diagonal(&nalgebra::Vector2::new(
                0.5 * (w + t[3]).exp(),
                0.5 * (w - t[3]).exp(),
            )),
            displacement_gain: if t.len() > 4 { t[4] } else { 1.0 },
            bypass: false,
        }
    };

    // fixed restart points: the canonical heterodyne strategy plus seeded
    // perturbations (recorded seed, SplitMix64 stream)
    let mut starts = vec![vec![0.0; n_params]];
    if n_params > 4 {
        starts[0][4] = 1.0;
    }
    let mut rng_state = config.seed;
    for _ in 1..config.restarts {
        let mut start = vec![0.0; n_params];
        for (i, slot) in start.iter_mut().enumerate() {
            let r = splitmix64(&mut rng_state);
            *slot = (r as f64 / u64::MAX as f64 - 0.5) * if i == 4 { 0.4 } else { 1.6 };
        }
        if n_params > 4 {
            start[4] += 1.0;
        }
        starts.push(start);
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut total_evals = 0;
    for start in &starts {
        let nm = NelderMead {
            max_evals: config.max_evals_per_restart,
            ftol: 1e-9,
            initial_step: 0.35,
        };
        let outcome = nm.maximize(start, |t| {
            strategy_fidelity(&decode(t), alphabet, gain_target).unwrap_or(0.0)
        });
        total_evals += outcome.evals;
        if best.as_ref().is_none_or(|(v, _)| outcome.value > *v) {
            best = Some((outcome.value, outcome.x));
        }
    }
    let (value, params) = best.expect("at least one restart");
    let strategy = decode(&params);
    let result = BenchmarkResult {
        value,
        kind: BenchmarkKind::AchievableLowerBound,
        truncation_tail: 0.0,
        iterations: total_evals,
        seed: config.seed,
    };
    Ok((strategy, result))
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Running minimum from left to right: the benchmark is a non-increasing
/// function of the alphabet width, so a value computed at `d` remains valid
/// at any larger width.
pub fn monotone_envelope(values: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if values.windows(2).any(|w| w[0].0 > w[1].0) {
        return Err(Error::UnsortedInput);
    }
    let mut envelope = Vec::with_capacity(values.len());
    let mut running = f64::INFINITY;
    for &(d, f) in values {
        running = running.min(f);
        envelope.push((d, running));
    }
    Ok(envelope)
}

/// Configuration of the truncated-Fock seesaw.
#[derive(Debug, Clone)]
pub struct SeesawConfig {
    /// Gauss-Legendre nodes per displacement axis of the alphabet average.
    pub xi_nodes_per_axis: usize,
    /// Measurement-outcome nodes per axis (uniform midpoint grid).
    pub outcome_nodes_per_axis: usize,
    /// Half-width of the outcome grid beyond the attenuated alphabet, in
    /// units of the largest outcome standard deviation.
    pub outcome_margin_sigmas: f64,
    pub max_iterations: usize,
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self {
            xi_nodes_per_axis: 8,
            outcome_nodes_per_axis: 24,
            outcome_margin_sigmas: 4.0,
            max_iterations: 60,
            rel_tol: 1e-6,
            seed: 7,
        }
    }
}

/// Alternating eigenvector optimization of a measure-and-prepare channel in
/// a truncated Fock space.
///
/// The measurement is a displacement-covariant POVM
/// `M_j = (v_j / 2 pi nu) D(m_j) |m><m| D(m_j)^dag` on a quadrature grid
/// covering the outcome distribution of the attenuated alphabet (plus a
/// catch-all element completing the identity); the
/// re-prepared state per outcome is free. Given the re-preparations, the
/// optimal seed `|m>` is the top eigenvector of the alphabet-weighted
/// operator; given the measurement, each re-prepared state is the top
/// eigenvector of its conjugate operator. Both updates are monotone: the
/// re-preparation step exactly, the measurement step through an
/// accept-if-improved guard. The objective is asserted non-decreasing at
/// every iteration.
pub fn seesaw_truncated(
    alphabet: &Alphabet,
    cutoff: Option<usize>,
    gain_target: f64,
    config: &SeesawConfig,
) -> Result<BenchmarkResult> {
    let mut workspace = SeesawWorkspace::build(alphabet, cutoff, gain_target, config)?;
    workspace.run(config)
}

struct SeesawWorkspace {
    dim: usize,
    weights: Vec<f64>,
    pure_states: Vec<DVector<Complex64>>,
    rho_att: Vec<DMatrix<Complex64>>,
    rho_trace: Vec<f64>,
    rho0_factors: DMatrix<Complex64>,
    xi_of_node: Vec<usize>,
    phase_of_node: Vec<f64>,
    disp_att_adj: Vec<DMatrix<Complex64>>,
    disp_out: Vec<DMatrix<Complex64>>,
    v_out: Vec<f64>,
    max_tail: f64,
    // channel variables
    seed_state: DVector<Complex64>,
    sigmas: Vec<DVector<Complex64>>,
    sigma_inf: DVector<Complex64>,
}

impl SeesawWorkspace {
    fn build(
        alphabet: &Alphabet,
        cutoff: Option<usize>,
        gain_target: f64,
        config: &SeesawConfig,
    ) -> Result<Self> {
        let d = alphabet.d_max;
        let s = alphabet.s;
        let phases = alphabet.phase_list();
        if phases.is_empty() {
            return Err(Error::InvalidParameter("alphabet has no phases".into()));
        }

        // alphabet displacement grid
        let (xi, wxi): (Vec<(f64, f64)>, Vec<f64>) = if d == 0.0 {
            (vec![(0.0, 0.0)], vec![1.0])
        } else {
            let (xs, ws) = quad::gauss_legendre_on(-d, d, config.xi_nodes_per_axis, 1);
            let mut pts = Vec::new();
            let mut wts = Vec::new();
            for (i, &x) in xs.iter().enumerate() {
                for (j, &p) in xs.iter().enumerate() {
                    pts.push((x, p));
                    wts.push(ws[i] * ws[j]);
                }
            }
            (pts, wts)
        };
        let area = if d == 0.0 { 1.0 } else { 4.0 * d * d };

        let cutoff = match cutoff {
            Some(c) => c,
            None => {
                let corners: Vec<(f64, (f64, f64))> = [0.0, 45.0, 90.0, 135.0]
                    .iter()
                    .flat_map(|&phi| [(phi, (d, d)), (phi, (d, -d))])
                    .collect();
                fock::select_cutoff(s, &corners, 1e-4)?
            }
        };
        let dim = cutoff + 1;

        // alphabet nodes: pure states and attenuated density matrices
        let eta = gain_target * gain_target;
        let s0 = fock::displaced_squeezed_amplitudes(s, 0.0, (0.0, 0.0), cutoff)?;
        let s0 = DVector::from_column_slice(&s0);
        let rho0 = fock::apply_loss_fock(&(&s0 * s0.adjoint()), eta)?;
        let rho0_factors = hermitian_factors(&rho0, 1e-12);

        let mut weights = Vec::new();
        let mut pure_states = Vec::new();
        let mut xi_of_node = Vec::new();
        let mut phase_of_node = Vec::new();
        let mut max_tail = 0.0f64;
        for (xi_idx, &(x, p)) in xi.iter().enumerate() {
            for &phi in &phases {
                let amps = fock::displaced_squeezed_amplitudes(s, phi, (x, p), cutoff)?;
                let tail = 1.0 - amps.iter().map(|c| c.norm_sqr()).sum::<f64>();
                if tail > 1e-4 {
                    return Err(Error::CutoffTooSmall { tail, limit: 1e-4 });
                }
                max_tail = max_tail.max(tail);
                weights.push(wxi[xi_idx] / area / phases.len() as f64);
                pure_states.push(DVector::from_column_slice(&amps));
                xi_of_node.push(xi_idx);
                phase_of_node.push(phi.to_radians());
            }
        }

        // attenuated density matrices rho_i = D(G xi) R(phi) rho0 R^dag D^dag
        let disp_att: Vec<DMatrix<Complex64>> = xi
            .par_iter()
            .map(|&(x, p)| fock::displacement_for((gain_target * x, gain_target * p), dim))
            .collect();
        let rho_att: Vec<DMatrix<Complex64>> = (0..weights.len())
            .into_par_iter()
            .map(|i| {
                let phi = phase_of_node[i];
                let mut rotated = rho0.clone();
                for m in 0..dim {
                    for n in 0..dim {
                        let angle = -phi * (m as f64 - n as f64);
                        rotated[(m, n)] *= Complex64::from_polar(1.0, angle);
                    }
                }
                let dmat = &disp_att[xi_of_node[i]];
                dmat * rotated * dmat.adjoint()
            })
            .collect();
        let rho_trace: Vec<f64> =
            rho_att.iter().map(|r| (0..dim).map(|n| r[(n, n)].re).sum()).collect();

        let disp_att_adj: Vec<DMatrix<Complex64>> =
            disp_att.iter().map(|m| m.adjoint()).collect();

        // outcome grid: uniform midpoint cells wide enough to capture the
        // measurement outcomes of every attenuated alphabet state
        let sigma_out =
            (eta * s / 2.0 + (1.0 - eta) * 0.5 + 0.5).sqrt();
        let half_width = gain_target * d + config.outcome_margin_sigmas * sigma_out;
        let n_out_axis = config.outcome_nodes_per_axis.max(1);
        let step = 2.0 * half_width / n_out_axis as f64;
        let mut outcomes = Vec::with_capacity(n_out_axis * n_out_axis);
        for i in 0..n_out_axis {
            for j in 0..n_out_axis {
                outcomes.push((
                    -half_width + (i as f64 + 0.5) * step,
                    -half_width + (j as f64 + 0.5) * step,
                ));
            }
        }
        let disp_out: Vec<DMatrix<Complex64>> =
            outcomes.par_iter().map(|&(x, p)| fock::displacement_for((x, p), dim)).collect();
        let v_out: Vec<f64> = vec![step * step; outcomes.len()];

        let mut vacuum = DVector::zeros(dim);
        vacuum[0] = Complex64::new(1.0, 0.0);
        let n_out = disp_out.len();
        Ok(Self {
            dim,
            weights,
            pure_states,
            rho_att,
            rho_trace,
            rho0_factors,
            xi_of_node,
            phase_of_node,
            disp_att_adj,
            disp_out,
            v_out,
            max_tail,
            seed_state: vacuum.clone(),
            sigmas: vec![vacuum.clone(); n_out],
            sigma_inf: vacuum,
        })
    }

    /// Outcome weights g_ij = tr(M_j rho_i) for the current seed, plus the
    /// catch-all coverage c_i, with the POVM rescaled so it never exceeds
    /// the identity.
    fn measurement_weights(&self, seed: &DVector<Complex64>) -> (Vec<Vec<f64>>, Vec<f64>) {
        let dim = self.dim;
        let n_out = self.disp_out.len();
        let u: Vec<DVector<Complex64>> = self.disp_out.iter().map(|d| d * seed).collect();
        // completeness scale: lambda_max of S = sum_j v_j/2pi u_j u_j^dag
        let mut s_op = DMatrix::<Complex64>::zeros(dim, dim);
        for (uj, vj) in u.iter().zip(&self.v_out) {
            let scale = Complex64::new(vj / (2.0 * std::f64::consts::PI), 0.0);
            s_op += uj * uj.adjoint() * scale;
        }
        let nu = 1.0f64.max(top_eigenvalue(&s_op) + 1e-12);

        // y_{xi,j} = D(G xi)^dag u_j, then rotate per phase and contract
        // with the rank factors of rho0
        let y: Vec<Vec<DVector<Complex64>>> = self
            .disp_att_adj
            .par_iter()
            .map(|dadj| u.iter().map(|uj| dadj * uj).collect())
            .collect();
        let rank = self.rho0_factors.ncols();
        let g: Vec<Vec<f64>> = (0..self.weights.len())
            .into_par_iter()
            .map(|i| {
                let phi = self.phase_of_node[i];
                let ys = &y[self.xi_of_node[i]];
                (0..n_out)
                    .map(|j| {
                        // q = || Psi0^dag R(phi)^dag y ||^2
                        let mut q = 0.0;
                        for k in 0..rank {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for (n, y_n) in ys[j].iter().enumerate() {
                                let rot = Complex64::from_polar(1.0, phi * n as f64);
                                acc += self.rho0_factors[(n, k)].conj() * rot * y_n;
                            }
                            q += acc.norm_sqr();
                        }
                        self.v_out[j] * q / (2.0 * std::f64::consts::PI * nu)
                    })
                    .collect()
            })
            .collect();
        let coverage: Vec<f64> = (0..self.weights.len())
            .map(|i| (self.rho_trace[i] - g[i].iter().sum::<f64>()).max(0.0))
            .collect();
        (g, coverage)
    }

    fn fidelity_weights(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let f: Vec<Vec<f64>> = self
            .pure_states
            .par_iter()
            .map(|psi| self.sigmas.iter().map(|s| psi.dotc(s).norm_sqr()).collect())
            .collect();
        let f_inf: Vec<f64> =
            self.pure_states.iter().map(|psi| psi.dotc(&self.sigma_inf).norm_sqr()).collect();
        (f, f_inf)
    }

    fn objective(&self, g: &[Vec<f64>], coverage: &[f64], f: &[Vec<f64>], f_inf: &[f64]) -> f64 {
        (0..self.weights.len())
            .map(|i| {
                let outcome_sum: f64 =
                    g[i].iter().zip(&f[i]).map(|(gv, fv)| gv * fv).sum();
                self.weights[i] * (outcome_sum + coverage[i] * f_inf[i])
            })
            .sum()
    }

    /// One power-iteration ascent of every re-prepared state against its
    /// alphabet-weighted operator B_j = sum_i w_i g_ij |psi_i><psi_i|.
    /// The Rayleigh quotient is non-decreasing in power iterations, so this
    /// step never lowers the objective.
    fn update_sigmas(&mut self, g: &[Vec<f64>], coverage: &[f64]) {
        let n_out = self.disp_out.len();
        let states = &self.pure_states;
        let weights = &self.weights;
        let update = |start: &DVector<Complex64>, coeff: &dyn Fn(usize) -> f64| {
            let mut v = start.clone();
            for _ in 0..80 {
                let mut next: DVector<Complex64> = DVector::zeros(v.len());
                for (i, psi) in states.iter().enumerate() {
                    let c = weights[i] * coeff(i);
                    if c > 0.0 {
                        next += psi * (psi.dotc(&v) * Complex64::new(c, 0.0));
                    }
                }
                let norm = next.norm();
                if norm < 1e-300 {
                    return start.clone();
                }
                next /= Complex64::new(norm, 0.0);
                let delta = (&next - &v).norm();
                v = next;
                if delta < 1e-11 {
                    break;
                }
            }
            v
        };
        let new_sigmas: Vec<DVector<Complex64>> = (0..n_out)
            .into_par_iter()
            .map(|j| update(&self.sigmas[j], &|i| g[i][j]))
            .collect();
        self.sigmas = new_sigmas;
        self.sigma_inf = update(&self.sigma_inf, &|i| coverage[i]);
    }

    /// Propose a new measurement seed as the top eigenvector of
    /// K = sum_j v_j/2pi D_j^dag [ sum_i w_i (f_ij - f_inf_i) rho_i ] D_j.
    fn propose_seed(&self, f: &[Vec<f64>], f_inf: &[f64]) -> DVector<Complex64> {
        let dim = self.dim;
        // per-outcome terms in parallel, summed in fixed outcome order so
        // the result is bitwise independent of the thread schedule
        let terms: Vec<DMatrix<Complex64>> = (0..self.disp_out.len())
            .into_par_iter()
            .map(|j| {
                let mut c_j = DMatrix::<Complex64>::zeros(dim, dim);
                for i in 0..self.weights.len() {
                    let coeff = self.weights[i] * (f[i][j] - f_inf[i]);
                    if coeff.abs() > 1e-300 {
                        c_j += &self.rho_att[i] * Complex64::new(coeff, 0.0);
                    }
                }
                let dj = &self.disp_out[j];
                dj.adjoint()
                    * c_j
                    * dj
                    * Complex64::new(self.v_out[j] / (2.0 * std::f64::consts::PI), 0.0)
            })
            .collect();
        let k_op = terms
            .into_iter()
            .fold(DMatrix::<Complex64>::zeros(dim, dim), |acc, term| acc + term);
        let k_op = (&k_op + k_op.adjoint()) * Complex64::new(0.5, 0.0);
        top_eigenvector(&k_op)
    }

    fn run(&mut self, config: &SeesawConfig) -> Result<BenchmarkResult> {
        // initial seed: best of a few squeezed candidates after one
        // re-preparation pass
        let mut best_seed = self.seed_state.clone();
        let mut best_value = f64::NEG_INFINITY;
        for seed_s in [1.0, 2.0, 4.0, 0.5, 0.25] {
            let amps = fock::displaced_squeezed_amplitudes(seed_s, 0.0, (0.0, 0.0), self.dim - 1)?;
            let seed = DVector::from_column_slice(&amps);
            let seed = &seed / Complex64::new(seed.norm(), 0.0);
            let (g, coverage) = self.measurement_weights(&seed);
            self.update_sigmas(&g, &coverage);
            let (f, f_inf) = self.fidelity_weights();
            let value = self.objective(&g, &coverage, &f, &f_inf);
            if value > best_value {
                best_value = value;
                best_seed = seed.clone();
            }
        }
        self.seed_state = best_seed;

        let (mut g, mut coverage) = self.measurement_weights(&self.seed_state);
        let mut current = {
            self.update_sigmas(&g, &coverage);
            let (f, f_inf) = self.fidelity_weights();
            self.objective(&g, &coverage, &f, &f_inf)
        };
        let mut iterations = 0;
        for _ in 0..config.max_iterations {
            iterations += 1;
            let previous = current;

            // measurement update with accept-if-improved guard
            let (f, f_inf) = self.fidelity_weights();
            let candidate = self.propose_seed(&f, &f_inf);
            let (g_cand, cov_cand) = self.measurement_weights(&candidate);
            let cand_value = self.objective(&g_cand, &cov_cand, &f, &f_inf);
            if cand_value > current {
                self.seed_state = candidate;
                g = g_cand;
                coverage = cov_cand;
            }

            // re-preparation update (exactly monotone)
            self.update_sigmas(&g, &coverage);
            let (f, f_inf) = self.fidelity_weights();
            current = self.objective(&g, &coverage, &f, &f_inf);

            assert!(
                current >= previous - 1e-12,
                "seesaw objective decreased: {previous} -> {current}"
            );
            if (current - previous).abs() <= config.rel_tol * previous.abs().max(1e-12) {
                break;
            }
        }

        Ok(BenchmarkResult {
            value: current,
            kind: BenchmarkKind::SeesawEstimate,
            truncation_tail: self.max_tail,
            iterations,
            seed: config.seed,
        })
    }
}

/// Columns `E sqrt(L)` of a Hermitian PSD matrix, keeping eigenvalues
/// above `tol`.
fn hermitian_factors(m: &DMatrix<Complex64>, tol: f64) -> DMatrix<Complex64> {
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let kept: Vec<usize> =
        (0..eig.eigenvalues.len()).filter(|&k| eig.eigenvalues[k] > tol).collect();
    let mut factors = DMatrix::zeros(m.nrows(), kept.len());
    for (col, &k) in kept.iter().enumerate() {
        let scale = Complex64::new(eig.eigenvalues[k].sqrt(), 0.0);
        for n in 0..m.nrows() {
            factors[(n, col)] = eig.eigenvectors[(n, k)] * scale;
        }
    }
    factors
}

fn top_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    eig.eigenvalues.iter().fold(0.0f64, |acc, &v| acc.max(v))
}

fn top_eigenvector(m: &DMatrix<Complex64>) -> DVector<Complex64> {
    let eig = m.clone().symmetric_eigen();
    let mut best = 0;
    for k in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[k] > eig.eigenvalues[best] {
            best = k;
        }
    }
    eig.eigenvectors.column(best).into_owned()
}
