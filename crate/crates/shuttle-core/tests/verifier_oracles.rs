//! Oracles for the stochastic verifier itself: the first-order responses
//! are checked against direct integration of their defining differential
//! equations, the nonlinear simulator against step refinement and
//! perturbation theory, and the Monte-Carlo estimator against the
//! quadrature sensitivities.

mod common;

use common::cs_params;
use shuttle_core::constants::HBAR;
use shuttle_core::noise::{sample_ou_path, NoiseChannel, NoiseRealization, NoiseSpec};
use shuttle_core::sensitivity::{
    sensitivity_accordion, sensitivity_amplitude, sensitivity_position,
};
use shuttle_core::trajectory::{forcing_kernel, Trajectory};
use shuttle_core::verify::{
    estimate_sensitivity_mc_with_grid, first_order_response, lambda_scaling_check,
    second_order_energy, simulate_nonlinear, simulate_nonlinear_state, FirstOrderResponse,
};
use shuttle_core::lattice::DerivedParams;

/// Integrates the first-order perturbation equations directly:
///
/// ```text
/// rho1'' = -4 w0^2 rho1 + f_rho xi(t)
/// qc1''  = -w0^2 qc1 + F_q(t) xi(t)
/// ```
///
/// with RK4 on the noise grid (one step per interval, piecewise-linear
/// `xi`), channel by channel. This shares nothing with the convolution
/// route except the sampled path.
fn integrate_first_order_ode(
    traj: &Trajectory,
    p: &DerivedParams,
    real: &NoiseRealization,
    channel: NoiseChannel,
) -> FirstOrderResponse {
    let w0 = p.trap_frequency;
    let w02 = w0 * w0;
    let t_total = traj.duration();
    let n = real.n_steps();
    let f_rho = match channel {
        NoiseChannel::Accordion => -2.0 * w02,
        NoiseChannel::Amplitude => -w02,
        NoiseChannel::Position => 0.0,
    };
    let f_q = |t: f64| -> f64 {
        match channel {
            NoiseChannel::Accordion => forcing_kernel(traj, p, t).unwrap(),
            NoiseChannel::Amplitude => traj.eval_qc(t, 2).unwrap(),
            NoiseChannel::Position => w02 / p.wavenumber,
        }
    };
    // State [rho1, rho1', qc1, qc1'].
    let mut y = [0.0f64; 4];
    let rhs = |t: f64, xi: f64, y: &[f64; 4]| -> [f64; 4] {
        [
            y[1],
            -4.0 * w02 * y[0] + f_rho * xi,
            y[3],
            -w02 * y[2] + f_q(t) * xi,
        ]
    };
    for i in 0..n {
        let t0 = t_total * i as f64 / n as f64;
        let t1 = t_total * (i + 1) as f64 / n as f64;
        let h = t1 - t0;
        let xi0 = real.values[i];
        let xim = 0.5 * (real.values[i] + real.values[i + 1]);
        let xi1 = real.values[i + 1];
        let k1 = rhs(t0, xi0, &y);
        let y2 = std::array::from_fn(|c| y[c] + 0.5 * h * k1[c]);
        let k2 = rhs(t0 + 0.5 * h, xim, &y2);
        let y3 = std::array::from_fn(|c| y[c] + 0.5 * h * k2[c]);
        let k3 = rhs(t0 + 0.5 * h, xim, &y3);
        let y4 = std::array::from_fn(|c| y[c] + h * k3[c]);
        let k4 = rhs(t1, xi1, &y4);
        for c in 0..4 {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
    }
    FirstOrderResponse { rho1: y[0], rho1_dot: y[1], qc1: y[2], qc1_dot: y[3] }
}

#[test]
fn convolution_response_matches_ode_integration() {
    let p = cs_params();
    let traj = Trajectory::design_polynomial(1.3 * p.period, 433e-9).unwrap();
    let w0 = p.trap_frequency;
    let n_steps = (8000.0 * 1.3_f64).ceil() as usize;
    for (channel, seed) in [
        (NoiseChannel::Accordion, 11u64),
        (NoiseChannel::Amplitude, 12),
        (NoiseChannel::Position, 13),
    ] {
        let spec = NoiseSpec::ornstein_uhlenbeck(channel, p.period, 0.4 * p.period).unwrap();
        let real = sample_ou_path(&spec, traj.duration(), n_steps, seed).unwrap();
        let conv = first_order_response(&traj, &p, &real, channel).unwrap();
        let ode = integrate_first_order_ode(&traj, &p, &real, channel);
        // Natural scales pairing value and velocity components.
        let s_rho = ode.rho1.abs() + ode.rho1_dot.abs() / (2.0 * w0) + 1e-12;
        let s_q = ode.qc1.abs() + ode.qc1_dot.abs() / w0 + 1e-20;
        assert!(
            (conv.rho1 - ode.rho1).abs() < 1e-6 * s_rho,
            "{channel} rho1: {} vs {}",
            conv.rho1,
            ode.rho1
        );
        assert!(
            (conv.rho1_dot - ode.rho1_dot).abs() < 1e-6 * 2.0 * w0 * s_rho,
            "{channel} rho1_dot: {} vs {}",
            conv.rho1_dot,
            ode.rho1_dot
        );
        assert!(
            (conv.qc1 - ode.qc1).abs() < 1e-6 * s_q,
            "{channel} qc1: {} vs {}",
            conv.qc1,
            ode.qc1
        );
        assert!(
            (conv.qc1_dot - ode.qc1_dot).abs() < 1e-6 * w0 * s_q,
            "{channel} qc1_dot: {} vs {}",
            conv.qc1_dot,
            ode.qc1_dot
        );
    }
}

#[test]
fn nonlinear_simulation_converges_under_step_refinement() {
    let p = cs_params();
    let traj = Trajectory::design_polynomial(0.8 * p.period, 433e-9).unwrap();
    let spec =
        NoiseSpec::ornstein_uhlenbeck(NoiseChannel::Amplitude, p.period, 0.3 * p.period).unwrap();
    let real = sample_ou_path(&spec, traj.duration(), 800, 21).unwrap();
    let e0 = HBAR * p.trap_frequency * 0.5;
    let coarse = simulate_nonlinear_state(&traj, &p, &real, NoiseChannel::Amplitude, 1e-3, 1)
        .unwrap();
    let fine = simulate_nonlinear_state(&traj, &p, &real, NoiseChannel::Amplitude, 1e-3, 8)
        .unwrap();
    // The 1000-steps-per-period cap already puts the RK4 error far below
    // any tolerance used elsewhere; 8x refinement must not move it.
    assert!((coarse.rho - fine.rho).abs() < 1e-10);
    assert!((coarse.qc - fine.qc).abs() < 1e-10 * traj.distance());
    let mut cs = coarse;
    cs.mode = 0;
    let mut fs = fine;
    fs.mode = 0;
    let ec = shuttle_core::lattice::final_energy(&cs, &p, traj.distance()).unwrap();
    let ef = shuttle_core::lattice::final_energy(&fs, &p, traj.distance()).unwrap();
    assert!((ec - ef).abs() < 1e-8 * e0);
}

#[test]
fn nonlinear_excess_matches_second_order_prediction() {
    // Per-path check of perturbation theory itself: the simulated energy
    // excess at small lambda equals lambda^2 times the second-order
    // functional of the first-order response, channel by channel.
    let p = cs_params();
    let traj = Trajectory::design_polynomial(0.9 * p.period, 433e-9).unwrap();
    let n_steps = 900; // exactly the 1000-per-period cap
    let quiet = NoiseRealization::from_values(traj.duration(), vec![0.0; n_steps + 1], 0).unwrap();
    let lambda = 2e-3;
    for (channel, seed) in [
        (NoiseChannel::Accordion, 31u64),
        (NoiseChannel::Amplitude, 32),
        (NoiseChannel::Position, 33),
    ] {
        let spec = NoiseSpec::ornstein_uhlenbeck(channel, p.period, 0.4 * p.period).unwrap();
        let baseline = simulate_nonlinear(&traj, &p, &quiet, channel, 0.0, 0).unwrap();
        for path_index in 0..3u64 {
            let real =
                sample_ou_path(&spec, traj.duration(), n_steps, seed + path_index).unwrap();
            let simulated = simulate_nonlinear(&traj, &p, &real, channel, lambda, 0).unwrap();
            let excess = simulated - baseline;
            let resp = first_order_response(&traj, &p, &real, channel).unwrap();
            let predicted = lambda * lambda * second_order_energy(&resp, &p, 0);
            assert!(
                (excess - predicted).abs() < 2e-2 * predicted,
                "{channel} path {path_index}: excess {excess} vs predicted {predicted}"
            );
        }
    }
}

#[test]
fn mc_estimate_agrees_with_quadrature() {
    let p = cs_params();
    let traj = Trajectory::design_polynomial(1.1 * p.period, 433e-9).unwrap();
    let paths = 800;
    for (channel, seed) in [
        (NoiseChannel::Accordion, 101u64),
        (NoiseChannel::Amplitude, 102),
        (NoiseChannel::Position, 103),
    ] {
        let spec = NoiseSpec::ornstein_uhlenbeck(channel, p.period, 0.3 * p.period).unwrap();
        let expected = match channel {
            NoiseChannel::Accordion => sensitivity_accordion(&p, &traj, &spec, 0),
            NoiseChannel::Amplitude => sensitivity_amplitude(&p, &traj, &spec, 0),
            NoiseChannel::Position => sensitivity_position(&p, &traj, &spec, 0),
        }
        .unwrap()
        .total();
        let est = estimate_sensitivity_mc_with_grid(
            &traj, &p, &spec, channel, 0, paths, seed, 1000.0,
        )
        .unwrap();
        assert!(
            (est.mean - expected).abs() < 4.0 * est.std_error,
            "{channel}: MC {} +- {} vs quadrature {expected}",
            est.mean,
            est.std_error
        );
        assert!(est.std_error < 0.1 * est.mean);
    }
}

#[test]
fn mc_standard_error_shrinks_as_root_n() {
    let p = cs_params();
    let traj = Trajectory::design_polynomial(0.8 * p.period, 433e-9).unwrap();
    let spec =
        NoiseSpec::ornstein_uhlenbeck(NoiseChannel::Accordion, p.period, 0.3 * p.period).unwrap();
    let small = estimate_sensitivity_mc_with_grid(
        &traj, &p, &spec, NoiseChannel::Accordion, 0, 400, 55, 400.0,
    )
    .unwrap();
    let large = estimate_sensitivity_mc_with_grid(
        &traj, &p, &spec, NoiseChannel::Accordion, 0, 1600, 55, 400.0,
    )
    .unwrap();
    let ratio = small.std_error / large.std_error;
    assert!(
        (1.6..=2.5).contains(&ratio),
        "SE ratio for 4x paths: {ratio} (expected near 2)"
    );
}

#[test]
fn scaling_fit_recovers_quadratic_exponent() {
    let p = cs_params();
    let traj = Trajectory::design_polynomial(0.8 * p.period, 433e-9).unwrap();
    let spec =
        NoiseSpec::ornstein_uhlenbeck(NoiseChannel::Amplitude, p.period, 0.4 * p.period).unwrap();
    let fit = lambda_scaling_check(
        &traj,
        &p,
        &spec,
        NoiseChannel::Amplitude,
        0,
        &[1e-3, 3e-3, 1e-2],
        160,
        71,
    )
    .unwrap();
    assert!(
        (fit.exponent - 2.0).abs() < 0.12,
        "fitted exponent {} strays from 2",
        fit.exponent
    );
    assert!(fit.coefficient > 0.0);
    // Common random numbers make the whole fit reproducible bit for bit.
    let again = lambda_scaling_check(
        &traj,
        &p,
        &spec,
        NoiseChannel::Amplitude,
        0,
        &[1e-3, 3e-3, 1e-2],
        160,
        71,
    )
    .unwrap();
    assert_eq!(fit, again);
}
