//! Stochastic verification of the analytic sensitivities.
//!
//! Two independent routes check the quadrature results of
//! [`crate::sensitivity`]:
//!
//! 1. **Linear-response Monte Carlo** — sample noise paths, evaluate the
//!    first-order perturbation solutions (explicit convolutions against the
//!    sampled `xi`), and average the second-order energy functional. This
//!    tests the correlation-function integrals.
//! 2. **Full nonlinear simulation** — integrate the Ermakov and Newton
//!    equations with the noisy trap frequency and position, subtract the
//!    noiseless energy, and fit the excess against `lambda`. The fitted
//!    exponent must be 2 and the fitted coefficient must match the Monte
//!    Carlo sensitivity; this tests the perturbation theory itself.
//!
//! Per-path work is embarrassingly parallel; path `i` always draws from
//! seed `seed ^ i` and reductions use pairwise summation, so results are
//! bit-identical regardless of thread count or scheduling.

use rayon::prelude::*;

use crate::lattice::{final_energy, DerivedParams, FinalState};
use crate::noise::{
    path_seed, sample_ou_path, CorrelationModel, NoiseChannel, NoiseRealization, NoiseSpec,
};
use crate::trajectory::Trajectory;
use crate::{constants::HBAR, Error, Result};

/// Fewest tolerable noise-grid points per trap period; below this the
/// trapezoidal convolutions cannot resolve the `2 omega0` kernels at all.
const MIN_POINTS_PER_PERIOD: f64 = 20.0;

/// Default noise-grid density for samplers that build their own grids.
const DEFAULT_POINTS_PER_PERIOD: f64 = 1000.0;

/// First-order (in the noise strength `lambda`) deviations of the auxiliary
/// variables at the final time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstOrderResponse {
    /// Width factor deviation `rho1(T)`, dimensionless.
    pub rho1: f64,
    /// `d rho1/dt (T)`, 1/s.
    pub rho1_dot: f64,
    /// Center-of-mass deviation `qc1(T)`, m.
    pub qc1: f64,
    /// `d qc1/dt (T)`, m/s.
    pub qc1_dot: f64,
}

/// Monte-Carlo sensitivity estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    /// Mean of the per-path second-order energy, J.
    pub mean: f64,
    /// Jackknife standard error of the mean, J.
    pub std_error: f64,
    /// Number of noise paths averaged.
    pub paths: usize,
    /// Base seed; path `i` used `seed ^ i`.
    pub seed: u64,
}

/// Result of the nonlinear `lambda^2`-scaling analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    /// Least-squares slope of `ln(excess energy)` vs `ln(lambda)`;
    /// perturbation theory predicts 2.
    pub exponent: f64,
    /// `exp(intercept)` of the same fit, J: the effective coefficient of
    /// `lambda^2`, directly comparable to a Monte-Carlo sensitivity.
    pub coefficient: f64,
    /// The `lambda` grid used.
    pub lambdas: Vec<f64>,
    /// Noise-averaged excess energy at each `lambda`, J.
    pub mean_excess: Vec<f64>,
    /// Simulated noiseless final energy subtracted from every run, J.
    pub baseline_energy: f64,
    /// Paths per `lambda` (common random numbers across the grid).
    pub paths: usize,
    /// Base seed; path `i` used `seed ^ i`.
    pub seed: u64,
}

/// Final-time response weights on a uniform grid: the response is the dot
/// product of the sampled `xi` with each weight vector (trapezoid rule and
/// all physical prefactors baked in).
struct ResponseKernels {
    rho1: Vec<f64>,
    rho1_dot: Vec<f64>,
    qc1: Vec<f64>,
    qc1_dot: Vec<f64>,
}

/// Builds the final-time convolution weights for `n_points` uniform grid
/// points spanning `[0, T]`.
///
/// The first-order equations are forced-oscillator problems solved by
/// Duhamel convolutions; per channel (with `B = qc'' - w0^2 qc`):
///
/// ```text
/// accordion: rho1(T) = -w0     int xi(s) sin[2 w0 (T-s)] ds
///            qc1(T)  = (1/w0)  int xi(s) B(s) sin[w0 (T-s)] ds
/// amplitude: rho1(T) = -(w0/2) int xi(s) sin[2 w0 (T-s)] ds
///            qc1(T)  = (1/w0)  int xi(s) qc''(s) sin[w0 (T-s)] ds
/// position:  rho1 = 0;  qc1(T) = (w0/k) int xi(s) sin[w0 (T-s)] ds
/// ```
///
/// and the time derivatives differentiate the kernels (the boundary terms
/// vanish since `sin 0 = 0`).
fn response_kernels(
    traj: &Trajectory,
    p: &DerivedParams,
    channel: NoiseChannel,
    n_points: usize,
) -> Result<ResponseKernels> {
    let t_total = traj.duration();
    let n_steps = n_points - 1;
    let dt = t_total / n_steps as f64;
    let w0 = p.trap_frequency;

    let mut rho1 = vec![0.0; n_points];
    let mut rho1_dot = vec![0.0; n_points];
    let mut qc1 = vec![0.0; n_points];
    let mut qc1_dot = vec![0.0; n_points];

    for i in 0..n_points {
        let t = t_total * i as f64 / n_steps as f64;
        let wt = if i == 0 || i == n_steps { 0.5 * dt } else { dt };
        let lag = t_total - t;
        let (sin1, cos1) = (w0 * lag).sin_cos();
        let (sin2, cos2) = (2.0 * w0 * lag).sin_cos();
        match channel {
            NoiseChannel::Accordion => {
                let b = traj.eval_qc(t, 2)? - w0 * w0 * traj.eval_qc(t, 0)?;
                rho1[i] = -w0 * sin2 * wt;
                rho1_dot[i] = -2.0 * w0 * w0 * cos2 * wt;
                qc1[i] = b * sin1 / w0 * wt;
                qc1_dot[i] = b * cos1 * wt;
            }
            NoiseChannel::Amplitude => {
                let acc = traj.eval_qc(t, 2)?;
                rho1[i] = -0.5 * w0 * sin2 * wt;
                rho1_dot[i] = -w0 * w0 * cos2 * wt;
                qc1[i] = acc * sin1 / w0 * wt;
                qc1_dot[i] = acc * cos1 * wt;
            }
            NoiseChannel::Position => {
                // rho is entirely insensitive to rigid trap displacement;
                // the zero weights make that exact, not just approximate.
                let k = p.wavenumber;
                qc1[i] = w0 / k * sin1 * wt;
                qc1_dot[i] = w0 * w0 / k * cos1 * wt;
            }
        }
    }
    Ok(ResponseKernels { rho1, rho1_dot, qc1, qc1_dot })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_same_span(traj: &Trajectory, real: &NoiseRealization) -> Result<()> {
    let t = traj.duration();
    if (real.duration - t).abs() > 1e-9 * t {
        return Err(Error::InvalidArgument(format!(
            "noise path spans {} s but the trajectory lasts {} s",
            real.duration, t
        )));
    }
    Ok(())
}

fn check_grid_density(p: &DerivedParams, duration: f64, n_steps: usize) -> Result<()> {
    let per_period = n_steps as f64 * p.period / duration;
    if per_period < MIN_POINTS_PER_PERIOD {
        return Err(Error::GridTooCoarse(format!(
            "{per_period:.1} noise-grid points per trap period; need at least \
             {MIN_POINTS_PER_PERIOD} to resolve the response kernels"
        )));
    }
    Ok(())
}

/// Evaluates the first-order perturbation solutions at the final time for
/// one sampled noise path, by trapezoidal quadrature of the Duhamel
/// convolutions on the path's own grid.
pub fn first_order_response(
    traj: &Trajectory,
    p: &DerivedParams,
    real: &NoiseRealization,
    channel: NoiseChannel,
) -> Result<FirstOrderResponse> {
    check_same_span(traj, real)?;
    check_grid_density(p, traj.duration(), real.n_steps())?;
    let kernels = response_kernels(traj, p, channel, real.values.len())?;
    Ok(FirstOrderResponse {
        rho1: dot(&kernels.rho1, &real.values),
        rho1_dot: dot(&kernels.rho1_dot, &real.values),
        qc1: dot(&kernels.qc1, &real.values),
        qc1_dot: dot(&kernels.qc1_dot, &real.values),
    })
}

/// Second-order energy functional of one first-order response:
///
/// ```text
/// g = hbar (2n+1) [ w0 rho1^2 + rho1_dot^2 / (4 w0) ]
///   + (m/2) [ w0^2 qc1^2 + qc1_dot^2 ]
/// ```
///
/// The noise average of `g` is the sensitivity `G`; the two bracketed
/// groups average to `G1` and `G2` respectively.
pub fn second_order_energy(resp: &FirstOrderResponse, p: &DerivedParams, mode: u32) -> f64 {
    let w0 = p.trap_frequency;
    let two_n_plus_1 = 2.0 * f64::from(mode) + 1.0;
    HBAR * two_n_plus_1 * (w0 * resp.rho1 * resp.rho1 + resp.rho1_dot * resp.rho1_dot / (4.0 * w0))
        + 0.5 * p.mass * (w0 * w0 * resp.qc1 * resp.qc1 + resp.qc1_dot * resp.qc1_dot)
}

/// Monte-Carlo estimate of the sensitivity `G` with the default noise-grid
/// density (1000 points per trap period).
pub fn estimate_sensitivity_mc(
    traj: &Trajectory,
    p: &DerivedParams,
    spec: &NoiseSpec,
    channel: NoiseChannel,
    mode: u32,
    paths: usize,
    seed: u64,
) -> Result<McEstimate> {
    estimate_sensitivity_mc_with_grid(
        traj,
        p,
        spec,
        channel,
        mode,
        paths,
        seed,
        DEFAULT_POINTS_PER_PERIOD,
    )
}

/// Monte-Carlo estimate of the sensitivity `G` from `paths`
/// Ornstein-Uhlenbeck realizations (white noise is verified through small
/// correlation times instead — a delta-correlated path has no meaningful
/// grid representation).
///
/// Path `i` draws from seed `seed ^ i`; the estimate is bit-reproducible
/// and independent of thread scheduling. The standard error is a jackknife
/// over paths.
#[allow(clippy::too_many_arguments)]
pub fn estimate_sensitivity_mc_with_grid(
    traj: &Trajectory,
    p: &DerivedParams,
    spec: &NoiseSpec,
    channel: NoiseChannel,
    mode: u32,
    paths: usize,
    seed: u64,
    points_per_period: f64,
) -> Result<McEstimate> {
    if spec.channel != channel {
        return Err(Error::InvalidArgument(format!(
            "noise spec is for the {} channel, expected {channel}",
            spec.channel
        )));
    }
    if !matches!(spec.model, CorrelationModel::OrnsteinUhlenbeck { .. }) {
        return Err(Error::InvalidArgument(
            "Monte-Carlo estimation needs an Ornstein-Uhlenbeck model; verify white noise \
             via a small correlation time"
                .into(),
        ));
    }
    if paths < 100 {
        return Err(Error::InvalidArgument(format!(
            "at least 100 paths are needed for a meaningful estimate, got {paths}"
        )));
    }
    let duration = traj.duration();
    let n_steps =
        ((points_per_period * duration / p.period).ceil() as usize).max(2);
    check_grid_density(p, duration, n_steps)?;
    let kernels = response_kernels(traj, p, channel, n_steps + 1)?;

    let g_values: Vec<f64> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = sample_ou_path(spec, duration, n_steps, path_seed(seed, i))?;
            let resp = FirstOrderResponse {
                rho1: dot(&kernels.rho1, &path.values),
                rho1_dot: dot(&kernels.rho1_dot, &path.values),
                qc1: dot(&kernels.qc1, &path.values),
                qc1_dot: dot(&kernels.qc1_dot, &path.values),
            };
            Ok(second_order_energy(&resp, p, mode))
        })
        .collect::<Result<Vec<f64>>>()?;

    let (mean, std_error) = jackknife_mean(&g_values);
    Ok(McEstimate { mean, std_error, paths, seed })
}

/// Mean and jackknife standard error, using pairwise summation throughout.
fn jackknife_mean(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let total = pairwise_sum(values);
    let mean = total / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    // Leave-one-out means and their spread.
    let loo: Vec<f64> = values.iter().map(|&v| (total - v) / (n - 1.0)).collect();
    let loo_mean = pairwise_sum(&loo) / n;
    let dev_sq: Vec<f64> = loo.iter().map(|&v| (v - loo_mean) * (v - loo_mean)).collect();
    let se = ((n - 1.0) / n * pairwise_sum(&dev_sq)).sqrt();
    (mean, se)
}

/// Order-stable summation: recursive halving down to small sequential runs.
fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Channel-dependent instantaneous trap parameters under noise of strength
/// `lambda`: squared frequency `Omega^2(t)` and center `Q(t)`.
#[inline]
fn noisy_trap(
    channel: NoiseChannel,
    w0: f64,
    k: f64,
    q0: f64,
    lambda_xi: f64,
) -> (f64, f64) {
    let w02 = w0 * w0;
    match channel {
        // K -> k (1 + lambda xi): frequency scales linearly with K, and the
        // full (not linearized) minimum displacement is q0 / (1 + lambda xi).
        NoiseChannel::Accordion => {
            let f = 1.0 + lambda_xi;
            (w02 * f * f, q0 / f)
        }
        // A -> a (1 + lambda xi): squared frequency scales with the depth.
        NoiseChannel::Amplitude => (w02 * (1.0 + lambda_xi), q0),
        // Rigid displacement of the trap by lambda xi / k.
        NoiseChannel::Position => (w02, q0 + lambda_xi / k),
    }
}

/// Full nonlinear transport simulation returning the final state.
///
/// Integrates the Ermakov and Newton system
///
/// ```text
/// rho'' = w0^2 / rho^3 - Omega^2(t) rho
/// qc''  = -Omega^2(t) [qc - Q(t)]
/// ```
///
/// with initial conditions `(rho, rho', qc, qc') = (1, 0, 0, 0)` (no noise
/// at the initial time) by fixed-step RK4, `substeps` per noise-grid
/// interval, holding `xi` piecewise-linear between grid points. The final
/// energy is evaluated with the noiseless Hamiltonian.
pub fn simulate_nonlinear_state(
    traj: &Trajectory,
    p: &DerivedParams,
    real: &NoiseRealization,
    channel: NoiseChannel,
    lambda: f64,
    substeps: usize,
) -> Result<FinalState> {
    check_same_span(traj, real)?;
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be finite, got {lambda}")));
    }
    if substeps == 0 {
        return Err(Error::InvalidArgument("need at least one RK4 substep".into()));
    }
    if channel == NoiseChannel::Accordion {
        // xi is piecewise-linear, so its extrema sit on grid points:
        // checking nodes suffices to rule out a vanishing denominator.
        if real.values.iter().any(|&v| 1.0 + lambda * v <= 0.0) {
            return Err(Error::Singular(
                "accordion factor 1 + lambda xi(t) reaches zero; the noisy lattice \
                 wavenumber collapses"
                    .into(),
            ));
        }
    }

    let t_total = traj.duration();
    let w0 = p.trap_frequency;
    let w02 = w0 * w0;
    let k = p.wavenumber;
    let a = traj.scaled_coefficients();
    let inv_t2 = 1.0 / (t_total * t_total);
    // Noiseless trap path q0(t) evaluated in scaled time.
    let q0_at = |s: f64| -> f64 {
        let qc = (((((a[5] * s + a[4]) * s + a[3]) * s + a[2]) * s + a[1]) * s) + a[0];
        let qdd = ((20.0 * a[5] * s + 12.0 * a[4]) * s + 6.0 * a[3]) * s + 2.0 * a[2];
        qc + qdd * inv_t2 / w02
    };

    let deriv = |s: f64, xi: f64, y: &[f64; 4]| -> [f64; 4] {
        let (omega2, q_eff) = noisy_trap(channel, w0, k, q0_at(s), lambda * xi);
        let rho = y[0];
        [
            y[1],
            w02 / (rho * rho * rho) - omega2 * rho,
            y[3],
            -omega2 * (y[2] - q_eff),
        ]
    };

    let n_steps = real.n_steps();
    let mut y = [1.0, 0.0, 0.0, 0.0];
    for i in 0..n_steps {
        let s0 = i as f64 / n_steps as f64;
        let s1 = (i + 1) as f64 / n_steps as f64;
        let h_s = (s1 - s0) / substeps as f64; // scaled-time step
        let h = h_s * t_total; // physical-time step
        let xi0 = real.values[i];
        let dxi = real.values[i + 1] - xi0;
        for j in 0..substeps {
            let sa = s0 + j as f64 * h_s;
            let frac0 = j as f64 / substeps as f64;
            let fracm = (j as f64 + 0.5) / substeps as f64;
            let frac1 = (j + 1) as f64 / substeps as f64;
            let xa = xi0 + dxi * frac0;
            let xm = xi0 + dxi * fracm;
            let xb = xi0 + dxi * frac1;

            let k1 = deriv(sa, xa, &y);
            let y2 = advance(&y, &k1, 0.5 * h);
            let k2 = deriv(sa + 0.5 * h_s, xm, &y2);
            let y3 = advance(&y, &k2, 0.5 * h);
            let k3 = deriv(sa + 0.5 * h_s, xm, &y3);
            let y4 = advance(&y, &k3, h);
            let k4 = deriv(sa + h_s, xb, &y4);
            for c in 0..4 {
                y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
            if !(y[0] > 1e-3) {
                return Err(Error::Singular(format!(
                    "width factor rho collapsed to {} during the noisy transport",
                    y[0]
                )));
            }
        }
    }
    Ok(FinalState { rho: y[0], rho_dot: y[1], qc: y[2], qc_dot: y[3], mode: 0 })
}

#[inline]
fn advance(y: &[f64; 4], k: &[f64; 4], h: f64) -> [f64; 4] {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]]
}

/// Full nonlinear transport simulation returning the final energy of mode
/// `mode` (see [`simulate_nonlinear_state`]). The RK4 step is capped at
/// one thousandth of the trap period.
pub fn simulate_nonlinear(
    traj: &Trajectory,
    p: &DerivedParams,
    real: &NoiseRealization,
    channel: NoiseChannel,
    lambda: f64,
    mode: u32,
) -> Result<f64> {
    let substeps = ((real.dt() / (p.period / 1000.0)).ceil() as usize).max(1);
    let mut fs = simulate_nonlinear_state(traj, p, real, channel, lambda, substeps)?;
    fs.mode = mode;
    final_energy(&fs, p, traj.distance())
}

/// Fits the excess final energy against `lambda` on a log-log scale.
///
/// The same `paths` realizations (seeds `seed ^ i`) drive every `lambda`
/// (common random numbers), so the fit noise comes only from genuinely
/// `lambda`-dependent terms. The subtracted baseline is the *simulated*
/// noiseless energy rather than the exact `hbar w0 (n + 1/2)`: both carry
/// the same integrator bias, which therefore cancels from the excess.
#[allow(clippy::too_many_arguments)]
pub fn lambda_scaling_check(
    traj: &Trajectory,
    p: &DerivedParams,
    spec: &NoiseSpec,
    channel: NoiseChannel,
    mode: u32,
    lambdas: &[f64],
    paths: usize,
    seed: u64,
) -> Result<ScalingFit> {
    if spec.channel != channel {
        return Err(Error::InvalidArgument(format!(
            "noise spec is for the {} channel, expected {channel}",
            spec.channel
        )));
    }
    if !matches!(spec.model, CorrelationModel::OrnsteinUhlenbeck { .. }) {
        return Err(Error::InvalidArgument(
            "the scaling check integrates sampled paths, so it needs an \
             Ornstein-Uhlenbeck model"
                .into(),
        ));
    }
    if lambdas.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two lambda values to fit a slope".into(),
        ));
    }
    if lambdas.iter().any(|&l| !(1e-4..=1e-2 + 1e-15).contains(&l)) {
        return Err(Error::InvalidArgument(
            "lambda grid must lie within [1e-4, 1e-2]: below, the excess drowns in \
             round-off; above, higher orders contaminate the fit"
                .into(),
        ));
    }
    if paths < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least two paths for a noise average, got {paths}"
        )));
    }

    let duration = traj.duration();
    let n_steps = ((DEFAULT_POINTS_PER_PERIOD * duration / p.period).ceil() as usize).max(2);
    let substeps = 1; // grid already at the RK4 step cap

    let quiet = NoiseRealization::from_values(duration, vec![0.0; n_steps + 1], 0)?;
    let mut baseline_state =
        simulate_nonlinear_state(traj, p, &quiet, channel, 0.0, substeps)?;
    baseline_state.mode = mode;
    let baseline_energy = final_energy(&baseline_state, p, traj.distance())?;

    // energies[l][i]: path i at lambdas[l].
    let per_path: Vec<Vec<f64>> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = sample_ou_path(spec, duration, n_steps, path_seed(seed, i))?;
            lambdas
                .iter()
                .map(|&l| {
                    let mut fs =
                        simulate_nonlinear_state(traj, p, &path, channel, l, substeps)?;
                    fs.mode = mode;
                    final_energy(&fs, p, traj.distance())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;

    let mut mean_excess = Vec::with_capacity(lambdas.len());
    for l in 0..lambdas.len() {
        let column: Vec<f64> = per_path.iter().map(|row| row[l]).collect();
        let mean = pairwise_sum(&column) / paths as f64;
        mean_excess.push(mean - baseline_energy);
    }
    if mean_excess.iter().any(|&e| e <= 1e-12 * baseline_energy) {
        return Err(Error::InsufficientSignal(format!(
            "excess energies {mean_excess:?} J are not resolvable above the noiseless \
             baseline {baseline_energy} J"
        )));
    }

    let xs: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = mean_excess.iter().map(|e| e.ln()).collect();
    let (slope, intercept) = linear_fit(&xs, &ys);
    Ok(ScalingFit {
        exponent: slope,
        coefficient: intercept.exp(),
        lambdas: lambdas.to_vec(),
        mean_excess,
        baseline_energy,
        paths,
        seed,
    })
}

/// Ordinary least squares `y = slope x + intercept`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::CS133_MASS;
    use crate::lattice::{derive_params, recoil_energy, LatticeConfig};

    fn cs_params() -> DerivedParams {
        let e_r = recoil_energy(CS133_MASS, 866e-9);
        derive_params(&LatticeConfig::new(CS133_MASS, 866e-9, 850.0 * e_r).unwrap()).unwrap()
    }

    fn uniform_path(duration: f64, n_steps: usize, value: f64) -> NoiseRealization {
        NoiseRealization::from_values(duration, vec![value; n_steps + 1], 0).unwrap()
    }

    #[test]
    fn zero_noise_gives_zero_response() {
        let p = cs_params();
        let traj = Trajectory::design_polynomial(2.0 * p.period, 433e-9).unwrap();
        let real = uniform_path(traj.duration(), 2000, 0.0);
        for channel in [NoiseChannel::Accordion, NoiseChannel::Amplitude, NoiseChannel::Position] {
            let r = first_order_response(&traj, &p, &real, channel).unwrap();
            assert_eq!((r.rho1, r.rho1_dot, r.qc1, r.qc1_dot), (0.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn position_width_response_is_identically_zero() {
        let p = cs_params();
        let traj = Trajectory::design_polynomial(1.3 * p.period, 433e-9).unwrap();
        let spec =
            NoiseSpec::ornstein_uhlenbeck(NoiseChannel::Position, 0.3 * p.period, p.period)
                .unwrap();
        for seed in 0..5 {
            let real = sample_ou_path(&spec, traj.duration(), 1500, seed).unwrap();
            let r = first_order_response(&traj, &p, &real, NoiseChannel::Position).unwrap();
            assert_eq!(r.rho1, 0.0);
            assert_eq!(r.rho1_dot, 0.0);
            assert!(r.qc1 != 0.0);
        }
    }

    #[test]
    fn constant_noise_width_response_matches_closed_form() {
        let p = cs_params();
        // Grid fine enough that the trapezoid error sits below 1e-5.
        for t_over in [0.37, 1.0, 2.25] {
            let traj = Trajectory::design_polynomial(t_over * p.period, 433e-9).unwrap();
            let n = (8000.0 * t_over).ceil() as usize;
            let real = uniform_path(traj.duration(), n, 1.0);
            let r = first_order_response(&traj, &p, &real, NoiseChannel::Accordion).unwrap();
            let phase = 2.0 * p.trap_frequency * traj.duration();
            let exact = -0.5 * (1.0 - phase.cos());
            assert!(
                (r.rho1 - exact).abs() < 1e-5,
                "T = {t_over} T0: rho1 = {} vs {exact}",
                r.rho1
            );
        }
    }

    #[test]
    fn grid_and_span_validation() {
        let p = cs_params();
        let traj = Trajectory::design_polynomial(p.period, 433e-9).unwrap();
        let coarse = uniform_path(traj.duration(), 10, 0.0);
        assert!(matches!(
            first_order_response(&traj, &p, &coarse, NoiseChannel::Accordion),
            Err(Error::GridTooCoarse(_))
        ));
        let wrong_span = uniform_path(2.0 * traj.duration(), 4000, 0.0);
        assert!(first_order_response(&traj, &p, &wrong_span, NoiseChannel::Accordion).is_err());
    }

    #[test]
    fn mc_estimate_argument_checks() {
        let p = cs_params();
        let traj = Trajectory::design_polynomial(p.period, 433e-9).unwrap();
        let ou = NoiseSpec::ornstein_uhlenbeck(NoiseChannel::Accordion, 1e-6, p.period).unwrap();
        assert!(estimate_sensitivity_mc(&traj, &p, &ou, NoiseChannel::Accordion, 0, 50, 1)
            .is_err());
        let white = NoiseSpec::white(NoiseChannel::Accordion, 1e-6).unwrap();
        assert!(estimate_sensitivity_mc(&traj, &p, &white, NoiseChannel::Accordion, 0, 200, 1)
            .is_err());
        assert!(estimate_sensitivity_mc(&traj, &p, &ou, NoiseChannel::Amplitude, 0, 200, 1)
            .is_err());
    }

    #[test]
    fn mc_estimate_zero_strength() {
        let p = cs_params();
        let traj = Trajectory::design_polynomial(p.period, 433e-9).unwrap();
        let spec = NoiseSpec::ornstein_uhlenbeck(NoiseChannel::Accordion, 0.0, p.period).unwrap();
        let est =
            estimate_sensitivity_mc(&traj, &p, &spec, NoiseChannel::Accordion, 0, 128, 7).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn mc_estimate_is_reproducible() {
        let p = cs_params();
        let traj = Trajectory::design_polynomial(0.8 * p.period, 433e-9).unwrap();
        let spec =
            NoiseSpec::ornstein_uhlenbeck(NoiseChannel::Amplitude, 0.2 * p.period, p.period)
                .unwrap();
        let a = estimate_sensitivity_mc_with_grid(
            &traj, &p, &spec, NoiseChannel::Amplitude, 0, 150, 99, 200.0,
        )
        .unwrap();
        let b = estimate_sensitivity_mc_with_grid(
            &traj, &p, &spec, NoiseChannel::Amplitude, 0, 150, 99, 200.0,
        )
        .unwrap();
        assert_eq!(a, b);
        assert!(a.std_error > 0.0);
    }

    #[test]
    fn position_mc_estimate_ignores_mode() {
        let p = cs_params();
        let traj = Trajectory::design_polynomial(1.4 * p.period, 433e-9).unwrap();
        let spec =
            NoiseSpec::ornstein_uhlenbeck(NoiseChannel::Position, 0.1 * p.period, p.period)
                .unwrap();
        let n0 = estimate_sensitivity_mc_with_grid(
            &traj, &p, &spec, NoiseChannel::Position, 0, 120, 5, 300.0,
        )
        .unwrap();
        let n4 = estimate_sensitivity_mc_with_grid(
            &traj, &p, &spec, NoiseChannel::Position, 4, 120, 5, 300.0,
        )
        .unwrap();
        assert_eq!(n0.mean, n4.mean);
    }

    #[test]
    fn noiseless_simulation_recovers_ground_energy() {
        let p = cs_params();
        for t_over in [0.5, 1.0, 3.0] {
            let traj = Trajectory::design_polynomial(t_over * p.period, 433e-9).unwrap();
            let n = (1000.0 * t_over).ceil() as usize;
            let real = uniform_path(traj.duration(), n, 0.0);
            let fs = simulate_nonlinear_state(&traj, &p, &real, NoiseChannel::Accordion, 0.0, 1)
                .unwrap();
            assert!((fs.rho - 1.0).abs() < 1e-8, "rho(T) = {}", fs.rho);
            assert!(fs.rho_dot.abs() < 1e-8 * p.trap_frequency);
            assert!((fs.qc - 433e-9).abs() < 1e-8 * 433e-9, "qc(T) = {}", fs.qc);
            assert!(fs.qc_dot.abs() < 1e-8 * 433e-9 * p.trap_frequency);
            for mode in [0u32, 2] {
                let e = simulate_nonlinear(&traj, &p, &real, NoiseChannel::Amplitude, 0.0, mode)
                    .unwrap();
                let e0 = HBAR * p.trap_frequency * (f64::from(mode) + 0.5);
                assert!((e - e0).abs() < 1e-8 * e0);
            }
        }
    }

    #[test]
    fn accordion_singularity_is_detected() {
        let p = cs_params();
        let traj = Trajectory::design_polynomial(p.period, 433e-9).unwrap();
        let real = uniform_path(traj.duration(), 1000, -2.0);
        assert!(matches!(
            simulate_nonlinear(&traj, &p, &real, NoiseChannel::Accordion, 0.5, 0),
            Err(Error::Singular(_))
        ));
        // Same drive on the amplitude channel has no denominator to lose.
        assert!(simulate_nonlinear(&traj, &p, &real, NoiseChannel::Amplitude, 0.5, 0).is_ok());
    }

    #[test]
    fn scaling_check_argument_validation() {
        let p = cs_params();
        let traj = Trajectory::design_polynomial(p.period, 433e-9).unwrap();
        let spec =
            NoiseSpec::ornstein_uhlenbeck(NoiseChannel::Accordion, 0.5 * p.period, p.period)
                .unwrap();
        // Out-of-range lambda grid.
        assert!(lambda_scaling_check(
            &traj,
            &p,
            &spec,
            NoiseChannel::Accordion,
            0,
            &[1e-5, 1e-3],
            16,
            1
        )
        .is_err());
        // Zero-strength noise yields no signal.
        let silent =
            NoiseSpec::ornstein_uhlenbeck(NoiseChannel::Accordion, 0.0, p.period).unwrap();
        assert!(matches!(
            lambda_scaling_check(
                &traj,
                &p,
                &silent,
                NoiseChannel::Accordion,
                0,
                &[1e-4, 1e-3, 1e-2],
                8,
                1
            ),
            Err(Error::InsufficientSignal(_))
        ));
    }

    #[test]
    fn pairwise_sum_matches_sequential() {
        let values: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let seq: f64 = values.iter().sum();
        assert!((pairwise_sum(&values) - seq).abs() < 1e-10);
    }

    #[test]
    fn linear_fit_recovers_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let (slope, intercept) = linear_fit(&xs, &ys);
        assert!((slope - 2.5).abs() < 1e-12);
        assert!((intercept + 1.0).abs() < 1e-12);
    }
}
